#pragma once

#include <cstdint>

#include "qopf/variational.hpp"

namespace qopf {

struct BoundInputs {
  int P = 0;
  int Q = 0;
  double alpha_bar = 0.0;
  double beta_bar = 0.0;
  double norm_M0 = 0.0;
  double max_norm_Mm = 0.0;
  double max_abs_b = 0.0;
  double piece_norms_M0 = 0.0;   ///< sum over pieces of ||M0^c||^2
  double piece_max_norms = 0.0;  ///< sum over pieces of max_m ||M_m^c||^2
  int C = 0;
  double rho = 0.0;
  double epsilon = 1.0;
  double dist0 = 1.0;
};

double lipschitz_L(const BoundInputs& in);
double sigma_sq(const BoundInputs& in);

/// ceil(32 L^2 d^2 / (eps^2 (1 - 4 sqrt(2) L rho))). Throws std::invalid_argument when rho is inadmissible.
std::int64_t iterations_T(double L, double dist0, double epsilon, double rho);
/// ceil(8 sigma^2 (8 + sqrt(2) L rho) / (eps^2 (1 - 4 sqrt(2) L rho))).
std::int64_t samples_S(double sigma2, double L, double epsilon, double rho);
/// (2P + 1)(2C - 1) + 2Q + 1.
std::int64_t circuits_per_iteration(int P, int Q, int C);

struct Budget {
  double L = 0.0;
  double sigma2 = 0.0;
  std::int64_t T = 0;
  std::int64_t S = 0;
  std::int64_t circuits_per_iter = 0;
  double total = 0.0;        ///< circuits * T * 2S: two operator samples per EG iteration
  double total_4224 = 0.0;   ///< closed form with (8 + sqrt(2) L rho) replaced by 8.25
};

Budget budget(const BoundInputs& in);

/// Norms and piece statistics of a prepared problem; alpha_bar, beta_bar, rho, epsilon
/// and dist0 are left for the caller.
BoundInputs measure_inputs(const LagrangianContext& ctx);

}  // namespace qopf
