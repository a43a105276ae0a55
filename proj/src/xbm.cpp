#include "qopf/xbm.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <string>

namespace qopf {

int msb(int c) {
  if (c < 1) throw std::invalid_argument("msb of a non-positive color");
  int k = 0;
  while ((c >> (k + 1)) != 0) ++k;
  return k;
}

double ColorDecomposition::sum_sq_norms() const {
  double s = 0.0;
  for (const auto& p : pieces) s += p.norm * p.norm;
  return s;
}

int ColorDecomposition::color_count() const {
  std::set<int> colors;
  for (const auto& p : pieces) colors.insert(p.color);
  return static_cast<int>(colors.size());
}

RotationCircuit rotation_circuit(int color, int n_qubits, PiecePart part) {
  if (color < 1 || color >= (1 << n_qubits))
    throw std::invalid_argument("color " + std::to_string(color) + " needs no rotation or is out of range");
  RotationCircuit rc;
  rc.color = color;
  rc.part = part;
  const int k = msb(color);
  if (part == PiecePart::imaginary) rc.gates.push_back({GateKind::S, k, -1, 0.0});
  for (int t = 0; t < n_qubits; ++t)
    if (t != k && ((color >> t) & 1)) rc.gates.push_back({GateKind::CX, t, k, 0.0});
  rc.gates.push_back({GateKind::H, k, -1, 0.0});
  return rc;
}

namespace {

/// Writes the +-value pair of entry (row, row^c) into `diag` when row has bit k clear.
void place(RVector& diag, int row, int color, double value) {
  if (color == 0) {
    diag[row] = value;
    return;
  }
  const int bit = 1 << msb(color);
  if (row & bit) return;
  diag[row] = value;
  diag[row ^ bit] = -value;
}

void check_square_pow2(Eigen::Index rows, Eigen::Index cols) {
  if (rows != cols || !is_pow2(static_cast<std::size_t>(rows)))
    throw std::invalid_argument("XBM needs a square power-of-two matrix");
}

}  // namespace

RVector eigen_diagonal(const SparseCMatrix& source, int color, PiecePart part) {
  check_square_pow2(source.rows(), source.cols());
  if (color == 0 && part == PiecePart::imaginary) throw std::invalid_argument("color 0 has no imaginary piece");
  RVector diag = RVector::Zero(source.rows());
  for (int r = 0; r < source.outerSize(); ++r)
    for (SparseCMatrix::InnerIterator it(source, r); it; ++it) {
      if (it.value() == cplx(0.0, 0.0)) continue;
      const int row = static_cast<int>(it.row()), col = static_cast<int>(it.col());
      if ((row ^ col) != color) throw std::invalid_argument("entry outside color " + std::to_string(color));
      place(diag, row, color, part == PiecePart::real ? it.value().real() : it.value().imag());
    }
  return diag;
}

ColorDecomposition decompose(const SparseCMatrix& m) {
  check_square_pow2(m.rows(), m.cols());
  if (hermitian_residual(m) > 1e-10) throw std::invalid_argument("XBM source is not Hermitian");
  const int dim = static_cast<int>(m.rows());
  ColorDecomposition out;
  out.n_qubits = log2_exact(static_cast<std::size_t>(dim));

  std::map<int, RVector> diags;  // keyed like ColorPiece::key
  for (int r = 0; r < m.outerSize(); ++r)
    for (SparseCMatrix::InnerIterator it(m, r); it; ++it) {
      const int row = static_cast<int>(it.row()), col = static_cast<int>(it.col());
      const int color = row ^ col;
      const cplx v = it.value();
      if (v.real() != 0.0) {
        auto [d, fresh] = diags.try_emplace(2 * color, RVector::Zero(dim));
        place(d->second, row, color, v.real());
      }
      if (color != 0 && v.imag() != 0.0) {
        auto [d, fresh] = diags.try_emplace(2 * color + 1, RVector::Zero(dim));
        place(d->second, row, color, v.imag());
      }
    }

  for (auto& [key, diag] : diags) {
    const double norm = diag.cwiseAbs().maxCoeff();
    if (norm == 0.0) continue;
    ColorPiece p;
    p.color = key / 2;
    p.part = (key & 1) ? PiecePart::imaginary : PiecePart::real;
    p.k = p.color == 0 ? -1 : msb(p.color);
    p.diagonal = std::move(diag);
    p.norm = norm;
    if (p.color != 0) p.circuit = rotation_circuit(p.color, out.n_qubits, p.part);
    out.pieces.push_back(std::move(p));
  }
  return out;
}

ColorDecomposition decompose(const CMatrix& m) {
  SparseCMatrix s = m.sparseView();
  return decompose(s);
}

CMatrix piece_matrix(const ColorPiece& piece) {
  const int dim = static_cast<int>(piece.diagonal.size());
  const int n = log2_exact(static_cast<std::size_t>(dim));
  // V maps the state into the measurement basis; the piece is V^H diag V.
  CMatrix v(dim, dim);
  for (int j = 0; j < dim; ++j) {
    QuantumState s;
    s.n_qubits = n;
    s.amplitudes = CVector::Zero(dim);
    s.amplitudes[j] = 1.0;
    apply_circuit(s, piece.circuit.gates);
    v.col(j) = s.amplitudes;
  }
  return v.adjoint() * piece.diagonal.cast<cplx>().asDiagonal() * v;
}

CMatrix ColorDecomposition::reconstruct() const {
  const int dim = 1 << n_qubits;
  CMatrix out = CMatrix::Zero(dim, dim);
  for (const auto& p : pieces) out += piece_matrix(p);
  return out;
}

RVector rotated_probabilities(const QuantumState& s, const ColorPiece& piece) {
  if (piece.circuit.gates.empty()) return s.amplitudes.cwiseAbs2();
  QuantumState r = s;
  apply_circuit(r, piece.circuit.gates);
  return r.amplitudes.cwiseAbs2();
}

std::vector<std::int64_t> allocate_shots(const ColorDecomposition& d, std::int64_t shots_per_piece,
                                         ShotAllocation mode) {
  if (shots_per_piece < 1) throw std::invalid_argument("shots per piece must be positive");
  const std::size_t n = d.pieces.size();
  std::vector<std::int64_t> out(n, shots_per_piece);
  if (mode == ShotAllocation::equal || n == 0) return out;
  double total_norm = 0.0;
  for (const auto& p : d.pieces) total_norm += p.norm;
  const double budget = static_cast<double>(shots_per_piece) * static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = std::max<std::int64_t>(1, std::llround(budget * d.pieces[i].norm / total_norm));
  return out;
}

XbmEstimate estimate_expectation(const QuantumState& s, const ColorDecomposition& d, std::int64_t shots_per_piece,
                                 std::uint64_t seed, ShotAllocation mode) {
  if (s.n_qubits != d.n_qubits) throw std::invalid_argument("state and decomposition sizes differ");
  const auto shots = allocate_shots(d, shots_per_piece, mode);
  XbmEstimate out;
  for (std::size_t i = 0; i < d.pieces.size(); ++i) {
    const ColorPiece& p = d.pieces[i];
    const auto counts = sample_counts(rotated_probabilities(s, p), shots[i], derive_seed(seed, i));
    double acc = 0.0;
    for (std::size_t j = 0; j < counts.size(); ++j)
      if (counts[j]) acc += static_cast<double>(counts[j]) * p.diagonal[static_cast<Eigen::Index>(j)];
    const double mean = acc / static_cast<double>(shots[i]);
    out.per_piece.push_back(mean);
    out.estimate += mean;
  }
  return out;
}

VarianceReport estimator_variance(const ColorDecomposition& d, const QuantumState& s, std::int64_t shots_per_piece,
                                  ShotAllocation mode) {
  const auto shots = allocate_shots(d, shots_per_piece, mode);
  VarianceReport out;
  for (std::size_t i = 0; i < d.pieces.size(); ++i) {
    const ColorPiece& p = d.pieces[i];
    const RVector prob = rotated_probabilities(s, p);
    const double m1 = prob.dot(p.diagonal);
    const double m2 = prob.dot(p.diagonal.cwiseAbs2());
    const double s_i = static_cast<double>(shots[i]);
    out.variance += std::max(0.0, m2 - m1 * m1) / s_i;
    out.bound += p.norm * p.norm / s_i;
  }
  return out;
}

}  // namespace qopf
