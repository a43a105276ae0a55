#include "qopf/statevector.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace qopf {

std::string to_string(GateKind kind) {
  switch (kind) {
    case GateKind::Rx: return "Rx";
    case GateKind::Ry: return "Ry";
    case GateKind::Rz: return "Rz";
    case GateKind::H: return "H";
    case GateKind::S: return "S";
    case GateKind::X: return "X";
    case GateKind::CX: return "CX";
  }
  return "?";
}

QuantumState QuantumState::zero(int n_qubits) {
  if (n_qubits < 0 || n_qubits > 30) throw std::invalid_argument("unsupported qubit count");
  QuantumState s;
  s.n_qubits = n_qubits;
  s.amplitudes = CVector::Zero(Eigen::Index{1} << n_qubits);
  s.amplitudes[0] = 1.0;
  return s;
}

namespace {

/// Apply [[a, b], [c, d]] to qubit `q`.
void apply_1q(CVector& amps, int q, cplx a, cplx b, cplx c, cplx d) {
  const Eigen::Index dim = amps.size();
  const Eigen::Index bit = Eigen::Index{1} << q;
  for (Eigen::Index i = 0; i < dim; ++i) {
    if (i & bit) continue;
    const cplx x0 = amps[i], x1 = amps[i | bit];
    amps[i] = a * x0 + b * x1;
    amps[i | bit] = c * x0 + d * x1;
  }
}

}  // namespace

void apply_gate_inplace(QuantumState& s, const GateOp& g) {
  if (g.target < 0 || g.target >= s.n_qubits) throw std::out_of_range("gate target out of range");
  CVector& a = s.amplitudes;
  const double c = std::cos(g.angle / 2), sn = std::sin(g.angle / 2);
  const cplx i1(0.0, 1.0);
  switch (g.kind) {
    case GateKind::Rx: apply_1q(a, g.target, c, -i1 * sn, -i1 * sn, c); break;
    case GateKind::Ry: apply_1q(a, g.target, c, -sn, sn, c); break;
    case GateKind::Rz: apply_1q(a, g.target, cplx(c, -sn), 0.0, 0.0, cplx(c, sn)); break;
    case GateKind::H: {
      const double r = std::numbers::sqrt2 / 2;
      apply_1q(a, g.target, r, r, r, -r);
      break;
    }
    case GateKind::S: apply_1q(a, g.target, 1.0, 0.0, 0.0, i1); break;
    case GateKind::X: apply_1q(a, g.target, 0.0, 1.0, 1.0, 0.0); break;
    case GateKind::CX: {
      if (g.control < 0 || g.control >= s.n_qubits) throw std::out_of_range("gate control out of range");
      if (g.control == g.target) throw std::invalid_argument("CX control equals target");
      const Eigen::Index cb = Eigen::Index{1} << g.control, tb = Eigen::Index{1} << g.target;
      for (Eigen::Index i = 0; i < a.size(); ++i)
        if ((i & cb) && !(i & tb)) std::swap(a[i], a[i | tb]);
      break;
    }
  }
}

QuantumState apply_gate(QuantumState s, const GateOp& g) {
  apply_gate_inplace(s, g);
  return s;
}

void apply_circuit(QuantumState& s, const std::vector<GateOp>& gates) {
  for (const auto& g : gates) apply_gate_inplace(s, g);
}

AnsatzSpec AnsatzSpec::from_table(int row, int n_layers, int n_qubits, Entangler entangler) {
  using S = LayerStep;
  static const std::vector<std::vector<S>> table = {
      {S::Rx, S::CX},
      {S::Ry, S::CX},
      {S::Rz, S::CX},
      {S::Rx, S::CX, S::Ry, S::CX},
      {S::Rx, S::CX, S::Rz, S::CX},
      {S::Ry, S::CX, S::Rz, S::CX},
      {S::Rx, S::CX, S::Ry, S::CX, S::Rz, S::CX},
      {S::Rx, S::Ry, S::Rz, S::CX},
  };
  if (row < 1 || row > 8) throw std::invalid_argument("ansatz table row must be 1..8");
  if (n_layers < 0) throw std::invalid_argument("layer count must be nonnegative");
  if (n_qubits < 1) throw std::invalid_argument("ansatz needs at least one qubit");
  AnsatzSpec spec;
  spec.n_qubits = n_qubits;
  spec.table_row = row;
  spec.n_layers = n_layers;
  spec.entangler = entangler;
  spec.layer = table[row - 1];
  return spec;
}

int AnsatzSpec::rotations_per_layer() const {
  int r = 0;
  for (auto s : layer)
    if (s != LayerStep::CX) ++r;
  return r;
}

std::string AnsatzSpec::describe() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < layer.size(); ++i) {
    if (i) os << '-';
    switch (layer[i]) {
      case LayerStep::Rx: os << "Rx"; break;
      case LayerStep::Ry: os << "Ry"; break;
      case LayerStep::Rz: os << "Rz"; break;
      case LayerStep::CX: os << "CX"; break;
    }
  }
  os << " x" << n_layers << " on " << n_qubits << "q";
  return os.str();
}

std::vector<GateOp> ansatz_circuit(const AnsatzSpec& spec, const RVector& params) {
  if (params.size() != spec.param_count())
    throw std::invalid_argument("expected " + std::to_string(spec.param_count()) + " parameters, got " +
                                std::to_string(params.size()));
  std::vector<GateOp> gates;
  Eigen::Index k = 0;
  const int n = spec.n_qubits;
  for (int l = 0; l < spec.n_layers; ++l) {
    for (auto step : spec.layer) {
      if (step == LayerStep::CX) {
        for (int q = 0; q + 1 < n; ++q) gates.push_back({GateKind::CX, q + 1, q, 0.0});
        if (spec.entangler == Entangler::ring && n > 2) gates.push_back({GateKind::CX, 0, n - 1, 0.0});
        continue;
      }
      const GateKind kind = step == LayerStep::Rx ? GateKind::Rx : step == LayerStep::Ry ? GateKind::Ry : GateKind::Rz;
      for (int q = 0; q < n; ++q) gates.push_back({kind, q, -1, params[k++]});
    }
  }
  return gates;
}

QuantumState prepare(const AnsatzSpec& spec, const RVector& params) {
  QuantumState s = QuantumState::zero(spec.n_qubits);
  apply_circuit(s, ansatz_circuit(spec, params));
  return s;
}

double exact_expectation(const QuantumState& s, const SparseCMatrix& m) {
  if (m.rows() != s.amplitudes.size() || m.cols() != s.amplitudes.size())
    throw std::invalid_argument("observable dimension does not match state");
  if (hermitian_residual(m) > 1e-10) throw std::invalid_argument("observable is not Hermitian");
  return quadratic_form(m, s.amplitudes);
}

double exact_expectation(const QuantumState& s, const CMatrix& m) {
  if (m.rows() != s.amplitudes.size() || m.cols() != s.amplitudes.size())
    throw std::invalid_argument("observable dimension does not match state");
  if (hermitian_residual(m) > 1e-10) throw std::invalid_argument("observable is not Hermitian");
  return s.amplitudes.dot(m * s.amplitudes).real();
}

std::vector<std::int64_t> sample_counts(const RVector& probabilities, std::int64_t shots, std::uint64_t seed) {
  if (shots < 0) throw std::invalid_argument("negative shot count");
  std::mt19937_64 rng(seed);
  std::vector<std::int64_t> counts(probabilities.size(), 0);
  double rest = probabilities.sum();
  std::int64_t left = shots;
  for (Eigen::Index i = 0; i < probabilities.size() && left > 0; ++i) {
    const double p = probabilities[i];
    if (p <= 0.0) {
      rest -= p;
      continue;
    }
    const double cond = rest > 0.0 ? std::min(1.0, p / rest) : 1.0;
    std::int64_t k = left;
    if (cond < 1.0) k = std::binomial_distribution<std::int64_t>(left, cond)(rng);
    counts[i] = k;
    left -= k;
    rest -= p;
  }
  if (left > 0) {
    // round-off left the tail empty; hand the remainder to the last supported outcome
    for (Eigen::Index i = probabilities.size() - 1; i >= 0; --i)
      if (probabilities[i] > 0.0) {
        counts[i] += left;
        break;
      }
  }
  return counts;
}

std::vector<std::int64_t> sample_basis(const QuantumState& s, std::int64_t shots, std::uint64_t seed) {
  return sample_counts(s.amplitudes.cwiseAbs2(), shots, seed);
}

std::pair<RVector, RVector> shift_points(const RVector& params, int index) {
  if (index < 0 || index >= params.size()) throw std::out_of_range("shift index out of range");
  RVector plus = params, minus = params;
  plus[index] += std::numbers::pi / 2;
  minus[index] -= std::numbers::pi / 2;
  return {plus, minus};
}

}  // namespace qopf
