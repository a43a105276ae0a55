#pragma once

#include <cstdint>
#include <vector>

#include "qopf/linalg.hpp"
#include "qopf/statevector.hpp"

namespace qopf {

enum class PiecePart { real, imaginary };

struct RotationCircuit {
  int color = 0;
  PiecePart part = PiecePart::real;
  std::vector<GateOp> gates;  ///< applied to the state before a computational-basis measurement
};

/// Real piece Re(M^c) or imaginary piece i Im(M^c) of one color.
struct ColorPiece {
  int color = 0;
  PiecePart part = PiecePart::real;
  int k = -1;  ///< most significant set bit of color, -1 for color 0
  RVector diagonal;
  double norm = 0.0;  ///< spectral norm of the piece
  RotationCircuit circuit;

  /// (color, part) packed into one sortable key.
  int key() const { return 2 * color + (part == PiecePart::imaginary ? 1 : 0); }
};

struct ColorDecomposition {
  int n_qubits = 0;
  std::vector<ColorPiece> pieces;  ///< ordered by key

  double sum_sq_norms() const;
  /// Distinct colors among the pieces.
  int color_count() const;
  /// Dense sum of all pieces; equals the source matrix.
  CMatrix reconstruct() const;
};

/// Most significant set bit of c >= 1.
int msb(int c);

/// Throws std::invalid_argument when c is 0 or out of range.
RotationCircuit rotation_circuit(int color, int n_qubits, PiecePart part);

/// Eigenvalues of the rotated piece in computational order. `source` must be
/// supported on color c only; only Re (real) or Im (imaginary) of its entries is read.
RVector eigen_diagonal(const SparseCMatrix& source, int color, PiecePart part);

/// Throws std::invalid_argument unless m is square with power-of-two size and Hermitian to 1e-10.
ColorDecomposition decompose(const SparseCMatrix& m);
ColorDecomposition decompose(const CMatrix& m);

/// Dense matrix of a single piece, rebuilt from its diagonal and circuit.
CMatrix piece_matrix(const ColorPiece& piece);

/// Outcome distribution of the state after the piece's rotation.
RVector rotated_probabilities(const QuantumState& s, const ColorPiece& piece);

enum class ShotAllocation { equal, norm_weighted };

/// Shots per piece. Equal gives `shots_per_piece` each; norm-weighted spreads the
/// same total in proportion to piece norms with at least one shot per piece.
std::vector<std::int64_t> allocate_shots(const ColorDecomposition& d, std::int64_t shots_per_piece,
                                         ShotAllocation mode = ShotAllocation::equal);

struct XbmEstimate {
  double estimate = 0.0;
  std::vector<double> per_piece;
};

/// Sum over pieces of the sample mean of the piece diagonal on the rotated state.
XbmEstimate estimate_expectation(const QuantumState& s, const ColorDecomposition& d, std::int64_t shots_per_piece,
                                 std::uint64_t seed, ShotAllocation mode = ShotAllocation::equal);

struct VarianceReport {
  double variance = 0.0;
  double bound = 0.0;  ///< sum over pieces of ||piece||^2 / shots
};

VarianceReport estimator_variance(const ColorDecomposition& d, const QuantumState& s, std::int64_t shots_per_piece,
                                  ShotAllocation mode = ShotAllocation::equal);

}  // namespace qopf
