#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qopf/bounds.hpp"
#include "qopf/case.hpp"
#include "qopf/permutation.hpp"
#include "qopf/qcqp.hpp"
#include "qopf/saddle.hpp"
#include "qopf/variational.hpp"

namespace qopf {

enum class Model { qcqp_pd, qcqp_eg, variational_pd, variational_eg };

/// "QCQP-PD", "QCQP-EG", "QCQPtheta-PD", "QCQPtheta-EG".
std::string to_string(Model m);
Model model_from_string(const std::string& s);

struct AnsatzChoice {
  int row = 2;
  int layers = 1;
  Entangler entangler = Entangler::linear;
};

enum class InitKind {
  random,   ///< angles ~ U[0, 2 pi)
  uniform,  ///< first-layer rotations at pi/2, everything else 0
};

struct BoundsConfig {
  std::optional<double> alpha_bar;  ///< default 1.1 sqrt(N)
  std::optional<double> beta_bar;   ///< default 2 sqrt(sum lambda) of the reference, else beta0
  double rho = 0.0;
  double epsilon = 1.0;
  double dist0 = 1.0;
};

struct ExperimentConfig {
  std::string case_path;
  int instances = 15;
  double load_low = 0.90;
  double load_high = 1.05;
  double q_ratio = 0.33;
  bool zero_generator_load = true;

  AnsatzChoice primal{6, 10};
  AnsatzChoice dual{2, 35};
  std::vector<Model> models{Model::variational_eg};
  EgVariant eg_variant = EgVariant::double_lead;

  bool sampled = false;
  SamplingConfig sampling;

  StepSchedule schedule;
  StopRule stop;
  ClassicalSchedule classical_schedule;
  long classical_max_iters = 10000;
  double classical_tol = 1e-6;

  InitKind init = InitKind::random;
  std::optional<double> alpha0;        ///< default sqrt(N)
  std::optional<double> beta0;         ///< default 2 |load buses|
  std::optional<double> lambda0_scale; ///< default 2 |load buses|

  std::uint64_t seed = 1;
  int rcm_runs = 200;
  std::string reference_path;  ///< empty: built-in oracle when N <= 4, else no reference
  std::string output_dir = "run";
  bool record_trajectory = true;

  BoundsConfig bounds;
  int fit_iters = 500;
  int fit_restarts = 3;

  /// Throws ValidationError on a broken invariant.
  void check() const;
};

/// Missing keys keep their defaults; `case` is resolved against `base_dir` when relative.
ExperimentConfig config_from_json(const std::string& text, const std::string& base_dir = "");
std::string config_to_json(const ExperimentConfig& c);
ExperimentConfig load_config(const std::string& path);

// ---------------------------------------------------------------------------
// instances

/// q_d = ratio p_d at load buses; optionally zero the demand at generator buses.
NetworkCase simplify_case(const NetworkCase& c, double q_ratio, bool zero_generator_load);

/// Every load bus gets its own U[low, high] factor on (p_d, q_d). q_d = q_ratio p_d is
/// enforced first; generator buses are left alone.
std::vector<NetworkCase> generate_instances(const NetworkCase& base, int count, double low, double high,
                                            std::uint64_t seed, double q_ratio = 0.33);

// ---------------------------------------------------------------------------
// reference solutions

struct InstanceReference {
  std::string name;
  double cost = 0.0;              ///< optimal generation cost P*
  std::vector<double> x;          ///< [p_g; |v_g|] over generator buses in bus order
  std::vector<double> lambda;     ///< market multipliers, see market_multipliers
  std::vector<double> lambda_all; ///< every unpadded row; optional
  std::vector<cplx> v;            ///< grid-order voltages; optional
};

struct ReferenceSolution {
  std::vector<InstanceReference> instances;
};

ReferenceSolution reference_from_json(const std::string& text);
std::string reference_to_json(const ReferenceSolution& r);
ReferenceSolution load_reference(const std::string& path);

/// x = [p_g; |v_g|] of a grid-order voltage vector.
std::vector<double> generator_setpoints(const NetworkCase& c, const CVector& v);

/// One entry per market row group, in row order: the net multiplier lambda_up - lambda_low of
/// every power-balance equality (p then q per load bus), then lambda of every line row.
/// Only the net of a split equality is determined at a saddle point.
std::vector<double> market_multipliers(const QcqpProblem& p, const RVector& lambda);
int market_size(const QcqpProblem& p);

struct OracleOptions {
  int grid_points = 3;  ///< per magnitude and per angle of every non-reference bus
  double feasibility_tol = 1e-8;
};

/// Global solve of a tiny case by multistart augmented Lagrangian with Newton inner steps
/// in real coordinates (reference angle fixed at 0). Throws ValidationError when N > 4 or
/// no start ends feasible.
InstanceReference brute_force_reference(const NetworkCase& c, const OracleOptions& o = {});

// ---------------------------------------------------------------------------
// pipeline

struct PermutationStats {
  int n = 0;
  int edges = 0;
  int bw_before = 0;
  int bw_after = 0;
  int colors_before = 0;  ///< measurement-matrix colors, natural order
  int colors_after = 0;
  int padded_colors_before = 0;  ///< colors of the padded admittance pattern (the solver's C)
  int padded_colors_after = 0;
};

/// Assembled, padded and RCM-permuted problem.
struct PreparedProblem {
  NetworkCase grid;
  QcqpProblem problem;  ///< padded and permuted
  NodePermutation perm; ///< over the padded dimension
  PermutationStats stats;
};

/// Admittance pattern of the case, padded to the primal dimension.
SparsityPattern admittance_pattern(const NetworkCase& c, int dim);

PreparedProblem prepare_problem(const NetworkCase& c, int rcm_runs, std::uint64_t seed);

/// Solver-ready context for the configured ansatz pair.
LagrangianContext make_context(const ExperimentConfig& cfg, const QcqpProblem& prepared);

/// Initial (theta, alpha, phi, beta) per the config; `grid` supplies the alpha and beta defaults.
SaddlePointState initial_state(const ExperimentConfig& cfg, const LagrangianContext& ctx, const NetworkCase& grid,
                               std::uint64_t seed);

/// measure_inputs plus the configured box and accuracy parameters. Without a configured
/// beta_bar, 2 sqrt(sum lambda*) of `reference` is used when given, else the initial beta.
BoundInputs experiment_bound_inputs(const ExperimentConfig& cfg, const LagrangianContext& ctx,
                                    const NetworkCase& grid, const InstanceReference* reference = nullptr);

struct FitResult {
  AnsatzChoice ansatz;
  bool primal = true;
  std::vector<double> costs;  ///< per instance
  double mean_cost = 0.0;
};

/// 1 - Re<psi(theta)|w>/||w|| with w in the solver's (padded, permuted) coordinates.
double alignment_cost(const AnsatzSpec& spec, const RVector& theta, const CVector& w);
/// ||q(phi) - r||^2 against a target PMF.
double pmf_cost(const AnsatzSpec& spec, const RVector& phi, const RVector& r);

/// Gradient descent with backtracking, gradients from the +-pi shift rule on amplitudes
/// (primal) or the +-pi/2 rule on probabilities (dual). Best of `restarts` random starts.
double fit_primal(const AnsatzSpec& spec, const CVector& w, int iters, int restarts, std::uint64_t seed,
                  RVector* best = nullptr);
double fit_dual(const AnsatzSpec& spec, const RVector& r, int iters, int restarts, std::uint64_t seed,
                RVector* best = nullptr);

/// Mean fit cost of each candidate over the references; sorted best first.
std::vector<FitResult> fit_ansatz(const ExperimentConfig& cfg, const std::vector<AnsatzChoice>& primal_candidates,
                                  const std::vector<AnsatzChoice>& dual_candidates, const ReferenceSolution& ref);

// ---------------------------------------------------------------------------
// metrics and reports

struct Found {
  CVector v;            ///< grid order, unpadded
  RVector lambda;       ///< every row of the padded problem
  double lagrangian = 0.0;  ///< offset included
};

struct Metrics {
  double x_err = 0.0;
  double lambda_err = 0.0;
  int viol_count = 0;
  double viol_max = 0.0;   ///< percent
  double viol_mean = 0.0;  ///< percent, averaged over every checked row
  double balance_residual = 0.0;
  double lagrangian_err = 0.0;
  int checked_rows = 0;
};

/// Violations are evaluated on every unpadded row except power balance, normalized by the
/// row scale; below 1e-6 counts as satisfied.
Metrics compute_metrics(const NetworkCase& c, const QcqpProblem& unpermuted, const Found& found,
                        const InstanceReference& ref);

/// Sorted copy of the market multipliers with entries below 1e-6 in magnitude set to zero.
std::vector<double> dual_plot_series(const std::vector<double>& lambda);

struct InstanceRun {
  std::string instance;
  int instance_index = 0;
  Model model = Model::variational_eg;
  bool ok = true;
  std::string failure;
  Metrics metrics;
  bool has_reference = false;
  long iterations = 0;
  bool converged = false;
  std::string stop_reason;
  std::int64_t shots = 0;
  double wall_seconds = 0.0;
  double final_lagrangian = 0.0;
  double final_grad_norm = 0.0;
  std::vector<double> x;
  std::vector<double> lambda;  ///< market multipliers
  std::vector<TrajectoryRow> trajectory;
};

struct RunReport {
  std::string case_name;
  PermutationStats permutation;
  std::vector<double> reference_costs;                 ///< per instance, empty without reference
  std::vector<std::vector<double>> reference_lambdas;  ///< market multipliers per instance
  std::vector<InstanceRun> runs;
};

struct TableRow {
  std::string model;
  double x_err, lambda_err, viol_count, viol_max, viol_mean;
};

/// Per model, in first-seen order: mean x and lambda errors, mean violation count,
/// worst violation, mean violation.
std::vector<TableRow> summarize(const RunReport& r);

RunReport run_experiment(const ExperimentConfig& cfg);

std::string table_csv(const RunReport& r);
std::string report_to_json(const RunReport& r);
RunReport report_from_json(const std::string& text);

/// table.csv, report.json, lagrangian.csv, duals.csv under `dir`. Throws IoError.
void emit_report(const RunReport& r, const std::string& dir);

}  // namespace qopf
