#include "qopf/bounds.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

namespace qopf {

double lipschitz_L(const BoundInputs& in) {
  const double a = in.alpha_bar, b = in.beta_bar;
  const double coupled = (in.P * a * a * b * b + in.Q * a * a * b * b + 2 * a * b * b + 2 * a * a * b) * in.max_norm_Mm;
  const double primal = (in.P * a * a + 2 * a) * in.norm_M0;
  const double dual = (in.Q * b * b + 2 * b) * in.max_abs_b;
  return coupled + std::max(primal, dual);
}

double sigma_sq(const BoundInputs& in) {
  const double a2 = in.alpha_bar * in.alpha_bar, b2 = in.beta_bar * in.beta_bar;
  const double a4 = a2 * a2, b4 = b2 * b2;
  return (in.Q * b4 + 8 * b2) / 2 * in.max_abs_b * in.max_abs_b + (8 * a2 + in.P * a4) / 2 * in.piece_norms_M0 +
         (8 * a2 * b4 + 8 * a4 * b2 + (in.P + in.Q) * a4 * b4) / 2 * in.piece_max_norms;
}

namespace {

double admissible_gap(double L, double rho) {
  if (rho < 0.0) throw std::invalid_argument("rho must be nonnegative");
  const double gap = 1.0 - 4.0 * std::numbers::sqrt2 * L * rho;
  if (!(gap > 0.0)) throw std::invalid_argument("rho must lie below 1/(4 sqrt(2) L)");
  return gap;
}

std::int64_t ceil_to_int(double x) {
  // guard against 32.000000000000004 style round-off on exact inputs
  const double r = std::round(x);
  if (std::abs(x - r) <= 1e-9 * std::max(1.0, std::abs(x))) return static_cast<std::int64_t>(r);
  return static_cast<std::int64_t>(std::ceil(x));
}

}  // namespace

std::int64_t iterations_T(double L, double dist0, double epsilon, double rho) {
  const double gap = admissible_gap(L, rho);
  return ceil_to_int(32.0 * L * L * dist0 * dist0 / (epsilon * epsilon * gap));
}

std::int64_t samples_S(double sigma2, double L, double epsilon, double rho) {
  const double gap = admissible_gap(L, rho);
  return ceil_to_int(8.0 * sigma2 * (8.0 + std::numbers::sqrt2 * L * rho) / (epsilon * epsilon * gap));
}

std::int64_t circuits_per_iteration(int P, int Q, int C) {
  return static_cast<std::int64_t>(2 * P + 1) * (2 * C - 1) + 2 * Q + 1;
}

Budget budget(const BoundInputs& in) {
  Budget out;
  out.L = lipschitz_L(in);
  out.sigma2 = sigma_sq(in);
  out.T = iterations_T(out.L, in.dist0, in.epsilon, in.rho);
  out.S = samples_S(out.sigma2, out.L, in.epsilon, in.rho);
  out.circuits_per_iter = circuits_per_iteration(in.P, in.Q, in.C);
  out.total = static_cast<double>(out.circuits_per_iter) * static_cast<double>(out.T) * 2.0 *
              static_cast<double>(out.S);
  const double gap = admissible_gap(out.L, in.rho);
  const double e2 = in.epsilon * in.epsilon;
  out.total_4224 = static_cast<double>(out.circuits_per_iter) *
                   std::ceil(4224.0 * out.L * out.L * out.sigma2 * in.dist0 * in.dist0 / (e2 * e2 * gap * gap));
  return out;
}

BoundInputs measure_inputs(const LagrangianContext& ctx) {
  BoundInputs in;
  in.P = ctx.primal_spec().param_count();
  in.Q = ctx.dual_spec().param_count();
  in.norm_M0 = spectral_norm(ctx.problem().m0);
  std::map<int, double> worst_piece;
  for (int m = 0; m < ctx.rows(); ++m) {
    const auto& c = ctx.problem().constraints[m];
    if (c.matrix.nonZeros()) in.max_norm_Mm = std::max(in.max_norm_Mm, spectral_norm(c.matrix));
    in.max_abs_b = std::max(in.max_abs_b, std::abs(c.bound));
    for (const auto& p : ctx.constraint_pieces()[m].pieces) {
      double& w = worst_piece[p.key()];
      w = std::max(w, p.norm);
    }
  }
  in.piece_norms_M0 = ctx.m0_pieces().sum_sq_norms();
  for (const auto& [key, n] : worst_piece) in.piece_max_norms += n * n;
  in.C = ctx.color_count();
  return in;
}

}  // namespace qopf
