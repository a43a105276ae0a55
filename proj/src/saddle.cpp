#include "qopf/saddle.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "qopf/errors.hpp"

namespace qopf {

RVector SaddlePointState::stacked() const {
  const Eigen::Index P = theta.size(), Q = phi.size();
  RVector z(P + Q + 2);
  z.head(P) = theta;
  z[P] = alpha;
  z.segment(P + 1, Q) = phi;
  z[P + Q + 1] = beta;
  return z;
}

SaddlePointState SaddlePointState::from_stacked(const RVector& z, int P, int Q, long iteration) {
  if (z.size() != P + Q + 2) throw std::invalid_argument("stacked vector has the wrong length");
  SaddlePointState s;
  s.theta = z.head(P);
  s.alpha = z[P];
  s.phi = z.segment(P + 1, Q);
  s.beta = z[P + Q + 1];
  s.iteration = iteration;
  return s;
}

double BlockSchedule::at(long t) const { return base * std::pow(decay, static_cast<double>(t)); }

StepSchedule::Steps StepSchedule::at(long t) const {
  switch (kind) {
    case ScheduleKind::lipschitz: {
      if (!(lipschitz > 0.0)) throw std::invalid_argument("step rule 1/(2 sqrt(2) L) needs a positive Lipschitz constant");
      const double mu = 1.0 / (2.0 * std::numbers::sqrt2 * lipschitz);
      return {mu, mu, mu, mu};
    }
    case ScheduleKind::constant: return {theta.base, alpha.base, phi.base, beta.base};
    case ScheduleKind::exponential: break;
  }
  return {theta.at(t), alpha.at(t), phi.at(t), beta.at(t)};
}

StepSchedule StepSchedule::constant(double theta, double alpha, double phi, double beta) {
  StepSchedule s;
  s.kind = ScheduleKind::constant;
  s.theta = {theta, 1.0};
  s.alpha = {alpha, 1.0};
  s.phi = {phi, 1.0};
  s.beta = {beta, 1.0};
  return s;
}

StepSchedule StepSchedule::from_lipschitz(double lipschitz) {
  StepSchedule s;
  s.kind = ScheduleKind::lipschitz;
  s.lipschitz = lipschitz;
  return s;
}

std::string to_string(Method m) { return m == Method::pd ? "pd" : "eg"; }

StepVector step_vector(int P, int Q, const StepSchedule::Steps& s) {
  StepVector out;
  out.mu.resize(P + Q + 2);
  out.mu.head(P).setConstant(s.theta);
  out.mu[P] = s.alpha;
  out.mu.segment(P + 1, Q).setConstant(s.phi);
  out.mu[P + Q + 1] = s.beta;
  out.projected = {P, P + Q + 1};
  return out;
}

namespace {

RVector project(RVector z, const StepVector& steps) {
  for (auto i : steps.projected) z[i] = std::max(0.0, z[i]);
  return z;
}

RVector descend(const RVector& z, const RVector& g, const StepVector& steps, double scale = 1.0) {
  return project(z - scale * steps.mu.cwiseProduct(g), steps);
}

}  // namespace

RVector pd_update(const Field& field, const RVector& z, const StepVector& steps, std::uint64_t call) {
  return descend(z, field(z, call).g, steps);
}

RVector eg_update(const Field& field, const RVector& z, const StepVector& steps, EgVariant variant,
                  std::uint64_t call) {
  const double lead = variant == EgVariant::double_lead ? 2.0 : 1.0;
  const RVector zbar = descend(z, field(z, call).g, steps, lead);
  return descend(z, field(zbar, call + 1).g, steps);
}

Field variational_field(const LagrangianContext& ctx, const EvalMode& mode) {
  const int P = ctx.primal_spec().param_count(), Q = ctx.dual_spec().param_count();
  return [&ctx, mode, P, Q](const RVector& z, std::uint64_t call) {
    const SaddlePointState s = SaddlePointState::from_stacked(z, P, Q, 0);
    EvalMode m = mode;
    m.seed = derive_seed(mode.seed, call);
    const Gradient g = grad(ctx, s.primal(), s.dual(), m);
    return FieldEval{stack_operator(g), g.lagrangian, g.shots};
  };
}

RVector g_operator(const LagrangianContext& ctx, const SaddlePointState& z, const EvalMode& mode) {
  return stack_operator(grad(ctx, z.primal(), z.dual(), mode));
}

SaddlePointState pd_step(const LagrangianContext& ctx, const SaddlePointState& z, const StepSchedule& schedule,
                         const EvalMode& mode) {
  const int P = ctx.primal_spec().param_count(), Q = ctx.dual_spec().param_count();
  const StepVector steps = step_vector(P, Q, schedule.at(z.iteration));
  const RVector next = pd_update(variational_field(ctx, mode), z.stacked(), steps, 2 * z.iteration);
  return SaddlePointState::from_stacked(next, P, Q, z.iteration + 1);
}

SaddlePointState eg_step(const LagrangianContext& ctx, const SaddlePointState& z, const StepSchedule& schedule,
                         const EvalMode& mode, EgVariant variant) {
  const int P = ctx.primal_spec().param_count(), Q = ctx.dual_spec().param_count();
  const StepVector steps = step_vector(P, Q, schedule.at(z.iteration));
  const RVector next = eg_update(variational_field(ctx, mode), z.stacked(), steps, variant, 2 * z.iteration);
  return SaddlePointState::from_stacked(next, P, Q, z.iteration + 1);
}

RunResult run_saddle(const Field& field, const SaddlePointState& init, int P, int Q, const RunOptions& options) {
  const StopRule& stop = options.stop;
  RunResult out;
  RVector z = init.stacked();
  long t = init.iteration;
  std::uint64_t call = 2 * static_cast<std::uint64_t>(t);
  auto check = [&](double value, long iteration) {
    if (!std::isfinite(value) || std::abs(value) > stop.divergence_ceiling)
      throw DivergenceError("Lagrangian left the divergence ceiling at iteration " + std::to_string(iteration),
                            iteration);
  };
  auto block_norms = [&](const RVector& g, TrajectoryRow& row) {
    row.g_theta = g.head(P).norm();
    row.g_alpha = std::abs(g[P]);
    row.g_phi = g.segment(P + 1, Q).norm();
    row.g_beta = std::abs(g[P + Q + 1]);
  };

  out.stop_reason = "max-iters";
  for (long k = 0; k < stop.max_iters; ++k) {
    const StepVector steps = step_vector(P, Q, options.schedule.at(t));
    const FieldEval e = field(z, call++);
    out.shots += e.shots;
    check(e.lagrangian, t);
    if (options.record_trajectory) {
      TrajectoryRow row;
      row.iteration = t;
      row.lagrangian = e.lagrangian;
      block_norms(e.g, row);
      row.alpha = z[P];
      row.beta = z[P + Q + 1];
      row.shots = out.shots;
      out.trajectory.push_back(row);
    }
    if (stop.grad_tol > 0.0 && e.g.norm() <= stop.grad_tol) {
      out.converged = true;
      out.stop_reason = "gradient";
      break;
    }
    RVector next;
    if (options.method == Method::pd) {
      next = descend(z, e.g, steps);
    } else {
      const double lead = options.variant == EgVariant::double_lead ? 2.0 : 1.0;
      const RVector zbar = descend(z, e.g, steps, lead);
      const FieldEval e2 = field(zbar, call++);
      out.shots += e2.shots;
      next = descend(z, e2.g, steps);
    }
    const double d_theta = (next.head(P) - z.head(P)).norm();
    const double d_phi = (next.segment(P + 1, Q) - z.segment(P + 1, Q)).norm();
    z = std::move(next);
    ++t;
    ++out.iterations;
    if (d_theta <= stop.theta_tol && d_phi <= stop.phi_tol) {
      out.converged = true;
      out.stop_reason = "step";
      break;
    }
  }
  const FieldEval last = field(z, call++);
  out.final_lagrangian = last.lagrangian;
  out.final_grad_norm = last.g.norm();
  out.final_state = SaddlePointState::from_stacked(z, P, Q, t);
  return out;
}

RunResult run(const LagrangianContext& ctx, const SaddlePointState& init, const RunOptions& options) {
  return run_saddle(variational_field(ctx, options.mode), init, ctx.primal_spec().param_count(),
                    ctx.dual_spec().param_count(), options);
}

SaddlePointState random_initial_state(const LagrangianContext& ctx, double alpha, double beta, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 2 * std::numbers::pi);
  SaddlePointState s;
  s.theta.resize(ctx.primal_spec().param_count());
  for (auto& x : s.theta) x = angle(rng);
  s.phi.resize(ctx.dual_spec().param_count());
  for (auto& x : s.phi) x = angle(rng);
  s.alpha = alpha;
  s.beta = beta;
  return s;
}

// ---------------------------------------------------------------------------

CVector classical_grad_v(const QcqpProblem& p, const CVector& v, const RVector& lambda) {
  CVector g = p.m0 * v;
  for (int m = 0; m < p.size(); ++m)
    if (lambda[m] != 0.0 && p.constraints[m].matrix.nonZeros()) g += lambda[m] * (p.constraints[m].matrix * v);
  return 2.0 * g;
}

RVector classical_grad_lambda(const QcqpProblem& p, const CVector& v) {
  RVector g(p.size());
  for (int m = 0; m < p.size(); ++m) {
    const auto& c = p.constraints[m];
    g[m] = (c.matrix.nonZeros() ? quadratic_form(c.matrix, v) : 0.0) - c.bound;
  }
  return g;
}

ClassicalState classical_pd_step(const QcqpProblem& p, const ClassicalState& s, double mu_v, double mu_lambda) {
  ClassicalState out;
  out.v = s.v - mu_v * classical_grad_v(p, s.v, s.lambda);
  out.lambda = (s.lambda + mu_lambda * classical_grad_lambda(p, out.v)).cwiseMax(0.0);
  out.iteration = s.iteration + 1;
  return out;
}

ClassicalState classical_eg_step(const QcqpProblem& p, const ClassicalState& s, double mu_v, double mu_lambda,
                                 EgVariant variant) {
  const double lead = variant == EgVariant::double_lead ? 2.0 : 1.0;
  const CVector vbar = s.v - lead * mu_v * classical_grad_v(p, s.v, s.lambda);
  const RVector lbar = (s.lambda + lead * mu_lambda * classical_grad_lambda(p, s.v)).cwiseMax(0.0);
  ClassicalState out;
  out.v = s.v - mu_v * classical_grad_v(p, vbar, lbar);
  out.lambda = (s.lambda + mu_lambda * classical_grad_lambda(p, vbar)).cwiseMax(0.0);
  out.iteration = s.iteration + 1;
  return out;
}

ClassicalRunResult classical_run(const QcqpProblem& p, const ClassicalState& init, const ClassicalRunOptions& o) {
  ClassicalRunResult out;
  ClassicalState s = init;
  for (long k = 0; k < o.max_iters; ++k) {
    const double value = classical_lagrangian(p, s.v, s.lambda);
    if (!std::isfinite(value) || std::abs(value) > o.divergence_ceiling)
      throw DivergenceError("classical Lagrangian left the divergence ceiling at iteration " +
                                std::to_string(s.iteration),
                            s.iteration);
    if (o.record_trajectory) out.lagrangian.push_back(value);
    const double mv = o.schedule.v.at(s.iteration), ml = o.schedule.lambda.at(s.iteration);
    ClassicalState next =
        o.method == Method::pd ? classical_pd_step(p, s, mv, ml) : classical_eg_step(p, s, mv, ml, o.variant);
    const double dv = (next.v - s.v).norm(), dl = (next.lambda - s.lambda).norm();
    s = std::move(next);
    ++out.iterations;
    if (dv <= o.tol && dl <= o.tol) {
      out.converged = true;
      break;
    }
  }
  out.final_state = std::move(s);
  return out;
}

ClassicalState classical_initial_state(const QcqpProblem& p, double lambda_scale, std::uint64_t seed) {
  ClassicalState s;
  s.v = CVector::Zero(p.dim);
  for (int k = 0; k < p.n; ++k) s.v[p.node_index[k]] = 1.0;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  s.lambda.resize(p.size());
  for (int m = 0; m < p.size(); ++m)
    s.lambda[m] = p.constraints[m].label.kind == ConstraintKind::padding ? 0.0 : std::abs(normal(rng)) * lambda_scale;
  return s;
}

}  // namespace qopf
