#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "qopf/errors.hpp"
#include "qopf/grid.hpp"
#include "qopf/harness.hpp"

namespace qopf {

namespace {

using nlohmann::json;
using Eigen::MatrixXd;
using Eigen::VectorXd;

}  // namespace

std::vector<double> generator_setpoints(const NetworkCase& c, const CVector& v) {
  if (v.size() < static_cast<Eigen::Index>(c.size())) throw ValidationError("voltage vector shorter than the grid");
  const SparseCMatrix y = build_admittance(c);
  const CVector grid = v.head(c.size());
  const CVector current = y * grid;
  std::vector<double> p, mag;
  for (int bus : c.generator_buses()) {
    // v^H M_p v = Re(conj(v_n) (Y v)_n)
    p.push_back((std::conj(grid[bus]) * current[bus]).real() + c.buses[bus].p_demand);
    mag.push_back(std::abs(grid[bus]));
  }
  p.insert(p.end(), mag.begin(), mag.end());
  return p;
}

std::vector<double> market_multipliers(const QcqpProblem& p, const RVector& lambda) {
  auto at = [&](int m) { return m < lambda.size() ? lambda[m] : 0.0; };
  std::vector<double> out;
  for (int m = 0; m < p.size(); ++m) {
    const ConstraintLabel& l = p.constraints[m].label;
    if (l.kind == ConstraintKind::line_current) {
      out.push_back(at(m));
    } else if ((l.kind == ConstraintKind::balance_p || l.kind == ConstraintKind::balance_q) && !l.lower) {
      const bool paired = m + 1 < p.size() && p.constraints[m + 1].label.kind == l.kind &&
                          p.constraints[m + 1].label.node == l.node && p.constraints[m + 1].label.lower;
      if (!paired) throw ValidationError("balance row " + std::to_string(m) + " has no lower half");
      out.push_back(at(m) - at(m + 1));
    }
  }
  return out;
}

int market_size(const QcqpProblem& p) {
  int n = 0;
  for (const auto& c : p.constraints) {
    const ConstraintLabel& l = c.label;
    if (l.kind == ConstraintKind::line_current ||
        ((l.kind == ConstraintKind::balance_p || l.kind == ConstraintKind::balance_q) && !l.lower))
      ++n;
  }
  return n;
}

// ---------------------------------------------------------------------------
// oracle

namespace {

/// v^H M v as x^T R x over x = [Re v; Im v] with Im v_ref removed.
MatrixXd real_embedding(const SparseCMatrix& m, int n, int ref) {
  const CMatrix dense = CMatrix(m);
  MatrixXd full(2 * n, 2 * n);
  full.topLeftCorner(n, n) = dense.real();
  full.topRightCorner(n, n) = -dense.imag();
  full.bottomLeftCorner(n, n) = dense.imag();
  full.bottomRightCorner(n, n) = dense.real();
  const int drop = n + ref;
  MatrixXd out(2 * n - 1, 2 * n - 1);
  for (int i = 0, oi = 0; i < 2 * n; ++i) {
    if (i == drop) continue;
    for (int j = 0, oj = 0; j < 2 * n; ++j) {
      if (j == drop) continue;
      out(oi, oj++) = full(i, j);
    }
    ++oi;
  }
  return 0.5 * (out + out.transpose());
}

struct RealQcqp {
  MatrixXd a0;
  std::vector<MatrixXd> a;
  VectorXd b;

  VectorXd g(const VectorXd& x) const {
    VectorXd out(a.size());
    for (std::size_t m = 0; m < a.size(); ++m) out[m] = x.dot(a[m] * x) - b[m];
    return out;
  }
};

struct AlmResult {
  VectorXd x, lambda;
  double cost = 0.0;
  double violation = 0.0;
};

double merit(const RealQcqp& q, const VectorXd& x, const VectorXd& lambda, double rho) {
  double phi = x.dot(q.a0 * x);
  const VectorXd g = q.g(x);
  for (Eigen::Index m = 0; m < g.size(); ++m) {
    const double s = std::max(0.0, lambda[m] + rho * g[m]);
    phi += (s * s - lambda[m] * lambda[m]) / (2.0 * rho);
  }
  return phi;
}

void newton_inner(const RealQcqp& q, VectorXd& x, const VectorXd& lambda, double rho) {
  const int d = static_cast<int>(x.size());
  for (int it = 0; it < 200; ++it) {
    const VectorXd g = q.g(x);
    VectorXd grad = 2.0 * q.a0 * x;
    MatrixXd h = 2.0 * q.a0;
    for (std::size_t m = 0; m < q.a.size(); ++m) {
      const double s = lambda[m] + rho * g[m];
      if (s <= 0.0) continue;
      const VectorXd dg = 2.0 * q.a[m] * x;
      grad += s * dg;
      h += s * 2.0 * q.a[m] + rho * dg * dg.transpose();
    }
    if (grad.norm() < 1e-12) return;
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(h);
    VectorXd ev = eig.eigenvalues().cwiseAbs();
    const double floor = 1e-10 * (1.0 + ev.maxCoeff());
    for (int k = 0; k < d; ++k) ev[k] = std::max(ev[k], floor);
    const VectorXd dir = -eig.eigenvectors() * (eig.eigenvectors().transpose() * grad).cwiseQuotient(ev);
    const double phi0 = merit(q, x, lambda, rho);
    const double slope = grad.dot(dir);
    double t = 1.0;
    VectorXd next = x + dir;
    while (merit(q, next, lambda, rho) > phi0 + 1e-4 * t * slope && t > 1e-12) {
      t *= 0.5;
      next = x + t * dir;
    }
    if ((next - x).norm() < 1e-15) return;
    x = next;
  }
}

AlmResult augmented_lagrangian(const RealQcqp& q, VectorXd x) {
  VectorXd lambda = VectorXd::Zero(q.a.size());
  double rho = 10.0;
  double prev = std::numeric_limits<double>::infinity();
  for (int outer = 0; outer < 200; ++outer) {
    newton_inner(q, x, lambda, rho);
    const VectorXd g = q.g(x);
    const VectorXd next = (lambda + rho * g).cwiseMax(0.0);
    const double viol = g.cwiseMax(0.0).maxCoeff();
    const double shift = (next - lambda).cwiseAbs().maxCoeff();
    lambda = next;
    if (viol < 1e-11 && shift < 1e-9) break;
    if (viol > 0.25 * prev) rho = std::min(rho * 10.0, 1e9);
    prev = viol;
  }
  AlmResult r;
  r.x = x;
  r.lambda = lambda;
  r.cost = x.dot(q.a0 * x);
  r.violation = q.g(x).cwiseMax(0.0).maxCoeff();
  return r;
}

}  // namespace

InstanceReference brute_force_reference(const NetworkCase& c, const OracleOptions& o) {
  const int n = static_cast<int>(c.size());
  if (n > 4) throw ValidationError("brute-force oracle handles at most 4 buses, got " + std::to_string(n));
  const QcqpProblem p = assemble_qcqp(c);
  const int ref = c.reference_bus;

  RealQcqp q;
  q.a0 = real_embedding(p.m0, n, ref);
  q.b.resize(p.size());
  for (int m = 0; m < p.size(); ++m) {
    q.a.push_back(real_embedding(p.constraints[m].matrix, n, ref));
    q.b[m] = p.constraints[m].bound;
  }

  std::vector<int> others;
  for (int k = 0; k < n; ++k)
    if (k != ref) others.push_back(k);
  const int gp = std::max(1, o.grid_points);
  long combos = 1;
  for (std::size_t i = 0; i < others.size(); ++i) combos *= gp * gp;

  auto lin = [gp](double lo, double hi, int i) { return gp == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * i / (gp - 1); };

  AlmResult best;
  bool found = false;
  for (long k = 0; k < combos; ++k) {
    CVector v = CVector::Zero(n);
    v[ref] = 1.0;
    long code = k;
    for (int bus : others) {
      const int mi = static_cast<int>(code % gp);
      code /= gp;
      const int ai = static_cast<int>(code % gp);
      code /= gp;
      const double mag = lin(c.buses[bus].v_min, c.buses[bus].v_max, mi);
      const double ang = lin(-std::numbers::pi / 4, std::numbers::pi / 4, ai);
      v[bus] = std::polar(mag, ang);
    }
    VectorXd x(2 * n - 1);
    for (int i = 0; i < n; ++i) x[i] = v[i].real();
    for (int i = 0, j = n; i < n; ++i)
      if (i != ref) x[j++] = v[i].imag();
    AlmResult r = augmented_lagrangian(q, x);
    if (r.violation > o.feasibility_tol) continue;
    if (!found || r.cost < best.cost - 1e-12) {
      best = r;
      found = true;
    }
  }
  if (!found) throw ValidationError("oracle found no feasible point for " + c.name);

  InstanceReference out;
  out.name = c.name;
  out.cost = best.cost + p.objective_offset;
  CVector v(n);
  for (int i = 0, j = n; i < n; ++i) v[i] = cplx(best.x[i], i == ref ? 0.0 : best.x[j++]);
  out.v.assign(v.data(), v.data() + n);
  out.x = generator_setpoints(c, v);
  out.lambda_all.assign(best.lambda.data(), best.lambda.data() + best.lambda.size());
  out.lambda = market_multipliers(p, best.lambda);
  return out;
}

// ---------------------------------------------------------------------------
// JSON

ReferenceSolution reference_from_json(const std::string& text) {
  ReferenceSolution r;
  try {
    const json j = json::parse(text);
    for (const auto& e : j.at("instances")) {
      InstanceReference ir;
      ir.name = e.value("name", std::string());
      ir.cost = e.at("cost").get<double>();
      ir.x = e.at("x").get<std::vector<double>>();
      ir.lambda = e.at("lambda").get<std::vector<double>>();
      if (e.contains("lambda_all")) ir.lambda_all = e.at("lambda_all").get<std::vector<double>>();
      if (e.contains("v"))
        for (const auto& z : e.at("v")) ir.v.emplace_back(z.at(0).get<double>(), z.at(1).get<double>());
      r.instances.push_back(std::move(ir));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("reference JSON: ") + e.what(), 0);
  }
  return r;
}

std::string reference_to_json(const ReferenceSolution& r) {
  json arr = json::array();
  for (const auto& ir : r.instances) {
    json e = {{"name", ir.name}, {"cost", ir.cost}, {"x", ir.x}, {"lambda", ir.lambda}};
    if (!ir.lambda_all.empty()) e["lambda_all"] = ir.lambda_all;
    if (!ir.v.empty()) {
      json v = json::array();
      for (const auto& z : ir.v) v.push_back({z.real(), z.imag()});
      e["v"] = std::move(v);
    }
    arr.push_back(std::move(e));
  }
  return json{{"instances", arr}}.dump(2);
}

ReferenceSolution load_reference(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read reference " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return reference_from_json(ss.str());
}

}  // namespace qopf
