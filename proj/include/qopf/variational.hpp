#pragma once

#include <cstdint>
#include <vector>

#include "qopf/linalg.hpp"
#include "qopf/qcqp.hpp"
#include "qopf/statevector.hpp"
#include "qopf/xbm.hpp"

namespace qopf {

struct PrimalPoint {
  RVector theta;
  double alpha = 1.0;
};

struct DualPoint {
  RVector phi;
  double beta = 0.0;
};

struct SamplingConfig {
  std::int64_t shots = 1000;        ///< S: samples per rotated circuit per estimate
  int primal_shots_per_dual = 1;    ///< primal outcomes drawn for each dual outcome in F
  bool joint = false;               ///< share one dual draw across all pieces of F
  ShotAllocation allocation = ShotAllocation::equal;
};

struct EvalMode {
  bool sampled = false;
  SamplingConfig sampling;
  std::uint64_t seed = 0;

  static EvalMode exact() { return {}; }
  static EvalMode sampled_with(const SamplingConfig& cfg, std::uint64_t seed) { return {true, cfg, seed}; }
};

/// Deterministic supply of derived seeds.
class SeedStream {
 public:
  explicit SeedStream(std::uint64_t base) : base_(base) {}
  std::uint64_t next() { return derive_seed(base_, counter_++); }

 private:
  std::uint64_t base_;
  std::uint64_t counter_ = 0;
};

/// Everything the doubly variational Lagrangian needs, built once per problem.
class LagrangianContext {
 public:
  /// `problem` must already be padded: dim = 2^primal.n_qubits, size() = 2^dual.n_qubits.
  LagrangianContext(QcqpProblem problem, AnsatzSpec primal, AnsatzSpec dual);
  // piece pointers refer into this object's own decompositions
  LagrangianContext(const LagrangianContext&) = delete;
  LagrangianContext& operator=(const LagrangianContext&) = delete;
  LagrangianContext(LagrangianContext&&) = default;
  LagrangianContext& operator=(LagrangianContext&&) = default;

  const QcqpProblem& problem() const { return problem_; }
  const AnsatzSpec& primal_spec() const { return primal_; }
  const AnsatzSpec& dual_spec() const { return dual_; }
  const ColorDecomposition& m0_pieces() const { return m0_; }
  const std::vector<ColorDecomposition>& constraint_pieces() const { return mm_; }
  const RVector& bounds() const { return b_; }
  int dim() const { return problem_.dim; }
  int rows() const { return problem_.size(); }

  /// Distinct colors over M0 and every constraint matrix.
  int color_count() const { return colors_; }
  /// Distinct (color, part) pieces over all constraint matrices; one rotated circuit each for F.
  const std::vector<int>& union_keys() const { return keys_; }
  /// Distinct pieces over M0 and the constraints, the per-point rotated-circuit count.
  int rotated_circuits() const { return rotated_circuits_; }

  struct KeyEntry {
    int row;
    const ColorPiece* piece;
  };
  /// Constraint rows carrying piece `keys()[i]`.
  const std::vector<KeyEntry>& rows_with_key(std::size_t i) const { return by_key_[i]; }
  const ColorPiece& key_piece(std::size_t i) const { return *key_piece_[i]; }

  /// sum_m w_m M_m.
  SparseCMatrix weighted_constraints(const RVector& w) const;
  /// v^H M_m v for every row.
  RVector constraint_values(const CVector& v) const;

 private:
  QcqpProblem problem_;
  AnsatzSpec primal_, dual_;
  ColorDecomposition m0_;
  std::vector<ColorDecomposition> mm_;
  RVector b_;
  int colors_ = 0;
  int rotated_circuits_ = 0;
  std::vector<int> keys_;
  std::vector<std::vector<KeyEntry>> by_key_;
  std::vector<const ColorPiece*> key_piece_;
};

CVector primal_vector(const LagrangianContext& ctx, const PrimalPoint& p);
RVector dual_vector(const LagrangianContext& ctx, const DualPoint& d);

struct Terms {
  double f0 = 0.0;
  double f = 0.0;
  double g = 0.0;
};

Terms eval_terms_exact(const LagrangianContext& ctx, const PrimalPoint& p, const DualPoint& d);
Terms eval_terms_exact(const LagrangianContext& ctx, const QuantumState& psi, const RVector& pmf);

/// F through the block observable sum_m e_m e_m^T (x) M_m on the composite
/// state xi (x) psi (composite index m*N + n). Dense; meant for tiny problems.
double kronecker_F(const LagrangianContext& ctx, const QuantumState& psi, const QuantumState& xi);

struct SampleCounter {
  std::int64_t shots = 0;
  std::int64_t primal_circuits = 0;
  std::int64_t dual_circuits = 0;
};

double eval_F0_sampled(const LagrangianContext& ctx, const QuantumState& psi, const SamplingConfig& cfg,
                       SeedStream& seeds, SampleCounter* counter = nullptr);
/// Two-step estimator: draw m from the dual PMF, then measure the rotated primal state.
double eval_F_sampled(const LagrangianContext& ctx, const QuantumState& psi, const RVector& pmf,
                      const SamplingConfig& cfg, SeedStream& seeds, SampleCounter* counter = nullptr);
double eval_G_sampled(const LagrangianContext& ctx, const RVector& pmf, const SamplingConfig& cfg, SeedStream& seeds,
                      SampleCounter* counter = nullptr);

/// alpha^2 F0 + alpha^2 beta^2 F - beta^2 G.
double lagrangian(const LagrangianContext& ctx, const PrimalPoint& p, const DualPoint& d,
                  const EvalMode& mode = EvalMode::exact());

struct Gradient {
  RVector theta;
  double alpha = 0.0;
  RVector phi;
  double beta = 0.0;
  double lagrangian = 0.0;  ///< value at the evaluation point, same mode
  /// Accounting: (pieces)(2P+1) rotated primal and 2Q+1 dual circuits.
  std::int64_t primal_circuits = 0;
  std::int64_t dual_circuits = 0;
  std::int64_t shots = 0;
};

/// Parameter-shift gradients for theta and phi; closed-form alpha and beta derivatives.
Gradient grad(const LagrangianContext& ctx, const PrimalPoint& p, const DualPoint& d,
              const EvalMode& mode = EvalMode::exact());

/// [dL/dtheta; dL/dalpha; -dL/dphi; -dL/dbeta].
RVector stack_operator(const Gradient& g);

}  // namespace qopf
