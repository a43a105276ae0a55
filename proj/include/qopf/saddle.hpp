#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qopf/qcqp.hpp"
#include "qopf/variational.hpp"

namespace qopf {

/// z = (theta, alpha, phi, beta) and the iteration counter t.
struct SaddlePointState {
  RVector theta;
  double alpha = 0.0;
  RVector phi;
  double beta = 0.0;
  long iteration = 0;

  RVector stacked() const;
  static SaddlePointState from_stacked(const RVector& z, int P, int Q, long iteration);
  PrimalPoint primal() const { return {theta, alpha}; }
  DualPoint dual() const { return {phi, beta}; }
};

/// mu_t = base * decay^t.
struct BlockSchedule {
  double base = 1e-3;
  double decay = 1.0;
  double at(long t) const;
};

enum class ScheduleKind { constant, exponential, lipschitz };

struct StepSchedule {
  ScheduleKind kind = ScheduleKind::exponential;
  BlockSchedule theta{0.015, 0.99985};
  BlockSchedule alpha{1e-5, 0.999};
  BlockSchedule phi{0.01, 0.99985};
  BlockSchedule beta{1e-5, 0.999};
  double lipschitz = 0.0;  ///< lipschitz: every block uses 1/(2 sqrt(2) L)

  struct Steps {
    double theta, alpha, phi, beta;
  };
  Steps at(long t) const;

  static StepSchedule defaults() { return {}; }
  static StepSchedule constant(double theta, double alpha, double phi, double beta);
  static StepSchedule from_lipschitz(double lipschitz);
};

struct StopRule {
  double theta_tol = 1e-6;
  double phi_tol = 1e-6;
  long max_iters = 10000;
  double grad_tol = 0.0;  ///< stop once ||g(z^t)|| <= grad_tol; 0 disables
  double divergence_ceiling = 1e9;
};

enum class Method { pd, eg };
enum class EgVariant { double_lead, symmetric };

std::string to_string(Method m);

/// One evaluation of the signed operator g at a stacked point.
struct FieldEval {
  RVector g;
  double lagrangian = 0.0;
  std::int64_t shots = 0;
};

/// `call` numbers successive evaluations so sampled fields can derive fresh seeds.
using Field = std::function<FieldEval(const RVector& z, std::uint64_t call)>;

/// Per-entry steps and the entries clipped at zero.
struct StepVector {
  RVector mu;
  std::vector<Eigen::Index> projected;
};

StepVector step_vector(int P, int Q, const StepSchedule::Steps& s);

/// z' = proj(z - mu g(z)).
RVector pd_update(const Field& field, const RVector& z, const StepVector& steps, std::uint64_t call);
/// zbar = proj(z - 2 mu g(z)) (double_lead) or proj(z - mu g(z)) (symmetric); z' = proj(z - mu g(zbar)).
RVector eg_update(const Field& field, const RVector& z, const StepVector& steps, EgVariant variant,
                  std::uint64_t call);

/// Signed operator of the doubly variational Lagrangian as a Field.
Field variational_field(const LagrangianContext& ctx, const EvalMode& mode);

/// [dL/dtheta; dL/dalpha; -dL/dphi; -dL/dbeta] at z.
RVector g_operator(const LagrangianContext& ctx, const SaddlePointState& z, const EvalMode& mode);

SaddlePointState pd_step(const LagrangianContext& ctx, const SaddlePointState& z, const StepSchedule& schedule,
                         const EvalMode& mode);
SaddlePointState eg_step(const LagrangianContext& ctx, const SaddlePointState& z, const StepSchedule& schedule,
                         const EvalMode& mode, EgVariant variant = EgVariant::double_lead);

struct TrajectoryRow {
  long iteration = 0;
  double lagrangian = 0.0;
  double g_theta = 0.0, g_alpha = 0.0, g_phi = 0.0, g_beta = 0.0;
  double alpha = 0.0, beta = 0.0;
  std::int64_t shots = 0;
};

struct RunOptions {
  Method method = Method::eg;
  EgVariant variant = EgVariant::double_lead;
  StepSchedule schedule;
  StopRule stop;
  EvalMode mode;
  bool record_trajectory = true;
};

struct RunResult {
  SaddlePointState final_state;
  std::vector<TrajectoryRow> trajectory;
  long iterations = 0;
  bool converged = false;
  std::string stop_reason;
  std::int64_t shots = 0;
  double final_lagrangian = 0.0;
  double final_grad_norm = 0.0;
};

/// Iterate until the stop rule fires. Throws DivergenceError when |L| leaves the ceiling.
RunResult run_saddle(const Field& field, const SaddlePointState& init, int P, int Q, const RunOptions& options);
RunResult run(const LagrangianContext& ctx, const SaddlePointState& init, const RunOptions& options);

/// theta, phi ~ U[0, 2 pi); alpha, beta as given.
SaddlePointState random_initial_state(const LagrangianContext& ctx, double alpha, double beta, std::uint64_t seed);

// ---------------------------------------------------------------------------
// classical baselines on the raw QCQP

struct ClassicalState {
  CVector v;
  RVector lambda;
  long iteration = 0;
};

struct ClassicalSchedule {
  BlockSchedule v{1e-3, 0.9999};
  BlockSchedule lambda{1e-3, 0.9999};
};

/// 2 (M0 + sum_m lambda_m M_m) v.
CVector classical_grad_v(const QcqpProblem& p, const CVector& v, const RVector& lambda);
/// v^H M_m v - b_m per row.
RVector classical_grad_lambda(const QcqpProblem& p, const CVector& v);

/// v' = v - mu_v grad_v(v, lambda); lambda' = [lambda + mu_l grad_lambda(v')]_+.
ClassicalState classical_pd_step(const QcqpProblem& p, const ClassicalState& s, double mu_v, double mu_lambda);
/// Two-stage update on the stacked (v, lambda) with the signed operator [grad_v; -grad_lambda].
ClassicalState classical_eg_step(const QcqpProblem& p, const ClassicalState& s, double mu_v, double mu_lambda,
                                 EgVariant variant = EgVariant::double_lead);

struct ClassicalRunOptions {
  Method method = Method::pd;
  EgVariant variant = EgVariant::double_lead;
  ClassicalSchedule schedule;
  long max_iters = 10000;
  double tol = 1e-6;  ///< stop when ||dv|| and ||dlambda|| both fall below
  double divergence_ceiling = 1e9;
  bool record_trajectory = true;
};

struct ClassicalRunResult {
  ClassicalState final_state;
  std::vector<double> lagrangian;
  long iterations = 0;
  bool converged = false;
};

ClassicalRunResult classical_run(const QcqpProblem& p, const ClassicalState& init, const ClassicalRunOptions& o);

/// Flat profile v = 1 on grid nodes (0 on padding) and lambda = |N(0,1)| * scale.
ClassicalState classical_initial_state(const QcqpProblem& p, double lambda_scale, std::uint64_t seed);

}  // namespace qopf
