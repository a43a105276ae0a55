#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qopf/linalg.hpp"

namespace qopf {

enum class GateKind { Rx, Ry, Rz, H, S, X, CX };
std::string to_string(GateKind kind);

struct GateOp {
  GateKind kind = GateKind::H;
  int target = 0;
  int control = -1;    ///< CX only
  double angle = 0.0;  ///< rotations only, exp(-i angle sigma / 2)
};

/// Qubit q is bit q of the basis index (qubit 0 = least significant).
struct QuantumState {
  int n_qubits = 0;
  CVector amplitudes;

  static QuantumState zero(int n_qubits);
  std::size_t dim() const { return static_cast<std::size_t>(amplitudes.size()); }
};

void apply_gate_inplace(QuantumState& s, const GateOp& g);
QuantumState apply_gate(QuantumState s, const GateOp& g);
void apply_circuit(QuantumState& s, const std::vector<GateOp>& gates);

enum class Entangler { linear, ring };

/// One slot of a layer: a rotation applied to every qubit, or an entangling CX pass.
enum class LayerStep { Rx, Ry, Rz, CX };

struct AnsatzSpec {
  int n_qubits = 1;
  int table_row = 2;
  int n_layers = 1;
  Entangler entangler = Entangler::linear;
  std::vector<LayerStep> layer;

  /// Architectures 1..8: Rx-CX, Ry-CX, Rz-CX, Rx-CX-Ry-CX, Rx-CX-Rz-CX,
  /// Ry-CX-Rz-CX, Rx-CX-Ry-CX-Rz-CX, Rx-Ry-Rz-CX.
  static AnsatzSpec from_table(int row, int n_layers, int n_qubits, Entangler entangler = Entangler::linear);

  int rotations_per_layer() const;
  int param_count() const { return rotations_per_layer() * n_layers * n_qubits; }
  std::string describe() const;
};

/// Gate list of U(params); parameter order is layer, then rotation slot, then qubit.
std::vector<GateOp> ansatz_circuit(const AnsatzSpec& spec, const RVector& params);
QuantumState prepare(const AnsatzSpec& spec, const RVector& params);

/// psi^H M psi. Throws std::invalid_argument on dimension mismatch or Hermitian residual > 1e-10.
double exact_expectation(const QuantumState& s, const SparseCMatrix& m);
double exact_expectation(const QuantumState& s, const CMatrix& m);

/// Multinomial outcome counts over the computational basis.
std::vector<std::int64_t> sample_basis(const QuantumState& s, std::int64_t shots, std::uint64_t seed);
std::vector<std::int64_t> sample_counts(const RVector& probabilities, std::int64_t shots, std::uint64_t seed);

/// Copies of params with entry `index` moved by +pi/2 and -pi/2.
std::pair<RVector, RVector> shift_points(const RVector& params, int index);

}  // namespace qopf
