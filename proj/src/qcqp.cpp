#include "qopf/qcqp.hpp"

#include <cmath>

#include <json.hpp>

#include "qopf/errors.hpp"
#include "qopf/grid.hpp"

namespace qopf {

namespace {

const std::pair<ConstraintKind, const char*> kKindNames[] = {
    {ConstraintKind::balance_p, "power-balance-p"}, {ConstraintKind::balance_q, "power-balance-q"},
    {ConstraintKind::gen_p, "gen-limit-p"},         {ConstraintKind::gen_q, "gen-limit-q"},
    {ConstraintKind::voltage, "voltage"},           {ConstraintKind::reference, "reference"},
    {ConstraintKind::line_current, "line-current"}, {ConstraintKind::padding, "padding"},
};

double nonzero_or_one(double x) { return std::abs(x) >= 1e-3 ? std::abs(x) : 1.0; }

SparseCMatrix negated(const SparseCMatrix& m) { return SparseCMatrix(-m); }

}  // namespace

std::string to_string(ConstraintKind kind) {
  for (const auto& [k, name] : kKindNames)
    if (k == kind) return name;
  return "unknown";
}

ConstraintKind constraint_kind_from_string(const std::string& s) {
  for (const auto& [k, name] : kKindNames)
    if (s == name) return k;
  throw ValidationError("unknown constraint kind '" + s + "'");
}

int QcqpProblem::real_constraints() const {
  int count = 0;
  for (const auto& c : constraints)
    if (c.label.kind != ConstraintKind::padding) ++count;
  return count;
}

QcqpProblem assemble_qcqp(const NetworkCase& c) {
  validate(c);
  const int n = static_cast<int>(c.size());
  const SparseCMatrix y = build_admittance(c);
  std::vector<InjectionMatrices> inj;
  inj.reserve(n);
  for (int k = 0; k < n; ++k) inj.push_back(injection_matrices(y, k));
  const AuxiliaryMatrices aux = auxiliary_matrices(c);

  QcqpProblem out;
  out.name = c.name;
  out.n = n;
  out.dim = n;
  out.node_index.resize(n);
  for (int k = 0; k < n; ++k) out.node_index[k] = k;

  out.m0 = SparseCMatrix(n, n);
  for (const auto& g : c.generators) {
    out.m0 += g.cost * inj[g.bus].p;
    out.objective_offset += g.cost * c.buses[g.bus].p_demand;
  }
  out.m0.prune(cplx(0.0, 0.0));

  auto push = [&](const SparseCMatrix& m, double bound, ConstraintKind kind, int node, bool lower, double scale,
                  int other = -1) {
    out.constraints.push_back({m, bound, ConstraintLabel{kind, node, other, lower, scale}});
  };
  auto two_sided = [&](const SparseCMatrix& m, double lo, double hi, ConstraintKind kind, int node, double scale) {
    push(m, hi, kind, node, false, scale);
    push(negated(m), -lo, kind, node, true, scale);
  };

  for (const auto& b : c.buses) {
    if (b.kind != BusKind::load) continue;
    two_sided(inj[b.id].p, -b.p_demand, -b.p_demand, ConstraintKind::balance_p, b.id, nonzero_or_one(b.p_demand));
    two_sided(inj[b.id].q, -b.q_demand, -b.q_demand, ConstraintKind::balance_q, b.id, nonzero_or_one(b.q_demand));
  }
  for (const auto& b : c.buses) {
    if (b.kind != BusKind::generator) continue;
    const GeneratorRecord& g = *c.generator_at(b.id);
    two_sided(inj[b.id].p, g.p_min - b.p_demand, g.p_max - b.p_demand, ConstraintKind::gen_p, b.id,
              nonzero_or_one(std::max(std::abs(g.p_max), std::abs(g.p_min))));
    two_sided(inj[b.id].q, g.q_min - b.q_demand, g.q_max - b.q_demand, ConstraintKind::gen_q, b.id,
              nonzero_or_one(std::max(std::abs(g.q_max), std::abs(g.q_min))));
  }
  for (const auto& b : c.buses) {
    const double lo = b.v_min * b.v_min, hi = b.v_max * b.v_max;
    two_sided(aux.voltage[b.id], lo, hi, ConstraintKind::voltage, b.id, hi - lo > 0.0 ? hi - lo : 1.0);
  }
  two_sided(aux.reference, 1.0, 1.0, ConstraintKind::reference, c.reference_bus, 1.0);
  for (std::size_t e = 0; e < c.branches.size(); ++e) {
    const auto& br = c.branches[e];
    push(aux.line[e], br.i_max, ConstraintKind::line_current, br.from, false, br.i_max, br.to);
  }
  return out;
}

QcqpProblem pad_to_qubits(const QcqpProblem& p) {
  const int dim = static_cast<int>(next_pow2(p.dim));
  const int rows = static_cast<int>(next_pow2(p.constraints.size()));
  QcqpProblem out = p;
  if (dim != p.dim) {
    auto grow = [dim](const SparseCMatrix& m) {
      SparseCMatrix g = m;
      g.conservativeResize(dim, dim);
      return g;
    };
    out.dim = dim;
    out.m0 = grow(p.m0);
    for (auto& c : out.constraints) c.matrix = grow(c.matrix);
  }
  while (static_cast<int>(out.constraints.size()) < rows)
    out.constraints.push_back({SparseCMatrix(dim, dim), 0.0, ConstraintLabel{}});
  return out;
}

double classical_lagrangian(const QcqpProblem& p, const CVector& v, const RVector& lambda) {
  double value = quadratic_form(p.m0, v);
  const Eigen::Index rows = std::min<Eigen::Index>(lambda.size(), p.size());
  for (Eigen::Index m = 0; m < rows; ++m) {
    if (lambda[m] == 0.0) continue;
    value += lambda[m] * (quadratic_form(p.constraints[m].matrix, v) - p.constraints[m].bound);
  }
  return value;
}

double objective_cost(const QcqpProblem& p, const CVector& v) { return quadratic_form(p.m0, v) + p.objective_offset; }

void check_problem(const QcqpProblem& p, double tol) {
  auto check = [&](const SparseCMatrix& m, const std::string& what) {
    if (m.rows() != p.dim || m.cols() != p.dim) throw ValidationError(what + " has the wrong dimension");
    if (hermitian_residual(m) > tol) throw ValidationError(what + " is not Hermitian");
  };
  check(p.m0, "cost matrix");
  for (int m = 0; m < p.size(); ++m) {
    check(p.constraints[m].matrix, "constraint " + std::to_string(m));
    if (!std::isfinite(p.constraints[m].bound)) throw ValidationError("constraint " + std::to_string(m) + " bound");
  }
  if (static_cast<int>(p.node_index.size()) != p.n) throw ValidationError("node index has the wrong length");
}

// ---------------------------------------------------------------------------

namespace {

using nlohmann::json;

json matrix_json(const SparseCMatrix& m) {
  json out = json::array();
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseCMatrix::InnerIterator it(m, k); it; ++it)
      out.push_back({it.row(), it.col(), it.value().real(), it.value().imag()});
  return out;
}

SparseCMatrix matrix_from_json(const json& j, int dim) {
  std::vector<Triplet> t;
  for (const auto& e : j) {
    const int r = e.at(0).get<int>(), c = e.at(1).get<int>();
    if (r < 0 || r >= dim || c < 0 || c >= dim) throw ValidationError("matrix entry out of range");
    t.emplace_back(r, c, cplx(e.at(2).get<double>(), e.at(3).get<double>()));
  }
  SparseCMatrix m(dim, dim);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

}  // namespace

std::string problem_to_json(const QcqpProblem& p) {
  json j;
  j["name"] = p.name;
  j["n"] = p.n;
  j["dim"] = p.dim;
  j["objective_offset"] = p.objective_offset;
  j["node_index"] = p.node_index;
  j["m0"] = matrix_json(p.m0);
  json rows = json::array();
  for (const auto& c : p.constraints) {
    rows.push_back({{"kind", to_string(c.label.kind)},
                    {"node", c.label.node},
                    {"other", c.label.other},
                    {"lower", c.label.lower},
                    {"scale", c.label.scale},
                    {"bound", c.bound},
                    {"matrix", matrix_json(c.matrix)}});
  }
  j["constraints"] = std::move(rows);
  return j.dump();
}

QcqpProblem problem_from_json(const std::string& text) {
  QcqpProblem p;
  try {
    const json j = json::parse(text);
    p.name = j.at("name").get<std::string>();
    p.n = j.at("n").get<int>();
    p.dim = j.at("dim").get<int>();
    p.objective_offset = j.at("objective_offset").get<double>();
    p.node_index = j.at("node_index").get<std::vector<int>>();
    p.m0 = matrix_from_json(j.at("m0"), p.dim);
    for (const auto& r : j.at("constraints")) {
      Constraint c;
      c.bound = r.at("bound").get<double>();
      c.label.kind = constraint_kind_from_string(r.at("kind").get<std::string>());
      c.label.node = r.at("node").get<int>();
      c.label.other = r.at("other").get<int>();
      c.label.lower = r.at("lower").get<bool>();
      c.label.scale = r.at("scale").get<double>();
      c.matrix = matrix_from_json(r.at("matrix"), p.dim);
      p.constraints.push_back(std::move(c));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("problem JSON: ") + e.what(), 0);
  }
  check_problem(p, 1e-9);
  return p;
}

}  // namespace qopf
