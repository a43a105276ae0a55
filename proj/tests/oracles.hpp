#pragma once

// Independent reference computations used by the unit tests and the acceptance run.
// Nothing here calls into the library's numerics; only its plain data types are shared.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "qopf/case.hpp"
#include "qopf/linalg.hpp"
#include "qopf/qcqp.hpp"
#include "qopf/statevector.hpp"
#include "qopf/xbm.hpp"

#ifndef QOPF_DATA_DIR
#define QOPF_DATA_DIR "data"
#endif

namespace oracle {

using qopf::cplx;
using qopf::CMatrix;
using qopf::CVector;
using qopf::RVector;
using qopf::SparseCMatrix;

inline std::string data_path(const std::string& file) { return std::string(QOPF_DATA_DIR) + "/" + file; }

inline CMatrix random_hermitian(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  CMatrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = cplx(g(rng), g(rng));
  return 0.5 * (a + a.adjoint());
}

inline CVector random_vector(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  CVector v(n);
  for (int i = 0; i < n; ++i) v[i] = cplx(g(rng), g(rng));
  return v;
}

inline CVector random_state(int n, std::mt19937_64& rng) {
  CVector v = random_vector(n, rng);
  return v / v.norm();
}

inline SparseCMatrix sparse(const CMatrix& m) {
  SparseCMatrix s = m.sparseView(0.0, 0.0);
  s.makeCompressed();
  return s;
}

inline CMatrix dense(const SparseCMatrix& m) { return CMatrix(m); }

/// sum_ij conj(psi_i) M_ij psi_j by plain loops.
inline cplx double_loop(const CVector& psi, const CMatrix& m) {
  cplx s = 0.0;
  for (int i = 0; i < psi.size(); ++i)
    for (int j = 0; j < psi.size(); ++j) s += std::conj(psi[i]) * m(i, j) * psi[j];
  return s;
}

/// Real power injection at node n from the rectangular power-flow sums.
inline double scalar_p(const CMatrix& y, const CVector& v, int n) {
  double s = 0.0;
  const double vrn = v[n].real(), vin = v[n].imag();
  for (int m = 0; m < y.rows(); ++m) {
    const double g = y(n, m).real(), b = y(n, m).imag();
    const double vr = v[m].real(), vi = v[m].imag();
    s += vrn * (vr * g - vi * b) + vin * (vi * g + vr * b);
  }
  return s;
}

inline double scalar_q(const CMatrix& y, const CVector& v, int n) {
  double s = 0.0;
  const double vrn = v[n].real(), vin = v[n].imag();
  for (int m = 0; m < y.rows(); ++m) {
    const double g = y(n, m).real(), b = y(n, m).imag();
    const double vr = v[m].real(), vi = v[m].imag();
    s += vin * (vr * g - vi * b) - vrn * (vi * g + vr * b);
  }
  return s;
}

/// Admittance assembled by hand from the branch list.
inline CMatrix hand_admittance(const qopf::NetworkCase& c) {
  const int n = static_cast<int>(c.size());
  CMatrix y = CMatrix::Zero(n, n);
  for (const auto& br : c.branches) {
    const cplx e(br.g_series, br.b_series);
    y(br.from, br.from) += e;
    y(br.to, br.to) += e;
    y(br.from, br.to) -= e;
    y(br.to, br.from) -= e;
  }
  return y;
}

// ---------------------------------------------------------------------------
// gates as full matrices, qubit 0 = least significant bit

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline CMatrix on_qubit(const CMatrix& g, int target, int n_qubits) {
  CMatrix out = CMatrix::Identity(1, 1);
  for (int q = n_qubits - 1; q >= 0; --q) out = kron(out, q == target ? g : CMatrix(CMatrix::Identity(2, 2)));
  return out;
}

inline CMatrix cx_matrix(int control, int target, int n_qubits) {
  const int d = 1 << n_qubits;
  CMatrix out = CMatrix::Zero(d, d);
  for (int i = 0; i < d; ++i) out((i >> control) & 1 ? i ^ (1 << target) : i, i) = 1.0;
  return out;
}

inline CMatrix rx(double t) {
  CMatrix m(2, 2);
  m << std::cos(t / 2), cplx(0, -std::sin(t / 2)), cplx(0, -std::sin(t / 2)), std::cos(t / 2);
  return m;
}
inline CMatrix ry(double t) {
  CMatrix m(2, 2);
  m << std::cos(t / 2), -std::sin(t / 2), std::sin(t / 2), std::cos(t / 2);
  return m;
}
inline CMatrix rz(double t) {
  CMatrix m(2, 2);
  m << std::polar(1.0, -t / 2), 0.0, 0.0, std::polar(1.0, t / 2);
  return m;
}

// ---------------------------------------------------------------------------
// graphs

using Edges = std::vector<std::pair<int, int>>;

inline int labeled_bandwidth(const Edges& e, const std::vector<int>& label) {
  int bw = 0;
  for (auto [a, b] : e) bw = std::max(bw, std::abs(label[a] - label[b]));
  return bw;
}

/// Minimum bandwidth over all n! labelings.
inline int exhaustive_bandwidth(int n, const Edges& e) {
  std::vector<int> label(n);
  std::iota(label.begin(), label.end(), 0);
  int best = n;
  do best = std::min(best, labeled_bandwidth(e, label));
  while (std::next_permutation(label.begin(), label.end()));
  return best;
}

/// Random connected graph: a random spanning tree plus extra edges.
inline Edges random_connected_graph(int n, int extra, std::mt19937_64& rng) {
  Edges e;
  for (int v = 1; v < n; ++v) e.emplace_back(std::uniform_int_distribution<int>(0, v - 1)(rng), v);
  for (int k = 0; k < extra; ++k) {
    const int a = std::uniform_int_distribution<int>(0, n - 1)(rng);
    const int b = std::uniform_int_distribution<int>(0, n - 1)(rng);
    if (a != b) e.emplace_back(a, b);
  }
  return e;
}

// ---------------------------------------------------------------------------
// small synthetic problems

/// dim x dim Hermitian matrices and rows constraints with random bounds; no padding needed.
inline qopf::QcqpProblem random_problem(int dim, int rows, std::mt19937_64& rng) {
  qopf::QcqpProblem p;
  p.name = "random";
  p.n = dim;
  p.dim = dim;
  p.m0 = sparse(random_hermitian(dim, rng));
  std::normal_distribution<double> g;
  for (int m = 0; m < rows; ++m) {
    qopf::Constraint c;
    c.matrix = sparse(random_hermitian(dim, rng));
    c.bound = g(rng);
    c.label.kind = qopf::ConstraintKind::gen_p;
    c.label.node = m % dim;
    p.constraints.push_back(std::move(c));
  }
  p.node_index.resize(dim);
  std::iota(p.node_index.begin(), p.node_index.end(), 0);
  return p;
}

/// v^H M0 v + sum_m lambda_m (v^H M_m v - b_m), computed densely.
inline double lagrangian(const qopf::QcqpProblem& p, const CVector& v, const RVector& lambda) {
  double value = double_loop(v, dense(p.m0)).real();
  for (int m = 0; m < p.size(); ++m)
    value += lambda[m] * (double_loop(v, dense(p.constraints[m].matrix)).real() - p.constraints[m].bound);
  return value;
}

// ---------------------------------------------------------------------------
// dense gates and color parts

inline CMatrix gate_matrix(const qopf::GateOp& g, int nq) {
  CMatrix h(2, 2), s(2, 2), x(2, 2);
  h << 1, 1, 1, -1;
  h /= std::sqrt(2.0);
  s << 1, 0, 0, cplx(0, 1);
  x << 0, 1, 1, 0;
  switch (g.kind) {
    case qopf::GateKind::H: return oracle::on_qubit(h, g.target, nq);
    case qopf::GateKind::S: return oracle::on_qubit(s, g.target, nq);
    case qopf::GateKind::X: return oracle::on_qubit(x, g.target, nq);
    case qopf::GateKind::CX: return oracle::cx_matrix(g.control, g.target, nq);
    case qopf::GateKind::Rx: return oracle::on_qubit(oracle::rx(g.angle), g.target, nq);
    case qopf::GateKind::Ry: return oracle::on_qubit(oracle::ry(g.angle), g.target, nq);
    case qopf::GateKind::Rz: return oracle::on_qubit(oracle::rz(g.angle), g.target, nq);
  }
  return {};
}

inline CMatrix circuit_matrix(const std::vector<qopf::GateOp>& gates, int nq) {
  CMatrix u = CMatrix::Identity(1 << nq, 1 << nq);
  for (const auto& g : gates) u = gate_matrix(g, nq) * u;
  return u;
}

/// Real piece Re(M) or imaginary piece i Im(M) restricted to color c.
inline CMatrix color_part(const CMatrix& m, int c, qopf::PiecePart part) {
  CMatrix out = CMatrix::Zero(m.rows(), m.cols());
  for (int i = 0; i < m.rows(); ++i) {
    const int j = i ^ c;
    out(i, j) = part == qopf::PiecePart::real ? cplx(m(i, j).real(), 0.0) : cplx(0.0, m(i, j).imag());
  }
  return out;
}

inline double off_diagonal_mass(const CMatrix& m) {
  double s = 0.0;
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j)
      if (i != j) s = std::max(s, std::abs(m(i, j)));
  return s;
}

}  // namespace oracle
