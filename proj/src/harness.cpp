#include "qopf/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "qopf/errors.hpp"

namespace qopf {

NetworkCase simplify_case(const NetworkCase& c, double q_ratio, bool zero_generator_load) {
  NetworkCase out = c;
  for (auto& b : out.buses) {
    if (b.kind == BusKind::load) {
      b.q_demand = q_ratio * b.p_demand;
    } else if (zero_generator_load) {
      b.p_demand = 0.0;
      b.q_demand = 0.0;
    }
  }
  return out;
}

std::vector<NetworkCase> generate_instances(const NetworkCase& base, int count, double low, double high,
                                            std::uint64_t seed, double q_ratio) {
  NetworkCase ratio = base;
  for (auto& b : ratio.buses)
    if (b.kind == BusKind::load) b.q_demand = q_ratio * b.p_demand;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> factor(low, high);
  std::vector<NetworkCase> out;
  out.reserve(count);
  for (int k = 0; k < count; ++k) {
    NetworkCase inst = ratio;
    inst.name = base.name + "#" + std::to_string(k + 1);
    for (auto& b : inst.buses) {
      if (b.kind != BusKind::load) continue;
      const double f = low == high ? low : factor(rng);
      b.p_demand *= f;
      b.q_demand *= f;
    }
    out.push_back(std::move(inst));
  }
  return out;
}

// ---------------------------------------------------------------------------

SparsityPattern admittance_pattern(const NetworkCase& c, int dim) {
  SparsityPattern p(dim);
  for (std::size_t k = 0; k < c.size(); ++k) p.add(static_cast<int>(k), static_cast<int>(k));
  for (const auto& br : c.branches) p.add(br.from, br.to);
  p.finalize();
  return p;
}

PreparedProblem prepare_problem(const NetworkCase& c, int rcm_runs, std::uint64_t seed) {
  PreparedProblem out;
  out.grid = c;
  const QcqpProblem padded = pad_to_qubits(assemble_qcqp(c));
  const int n = static_cast<int>(c.size());
  const NodePermutation grid_perm = best_rcm(admittance_pattern(c, n), rcm_runs, seed);
  out.perm = extend_permutation(grid_perm, padded.dim);
  const SparsityPattern before = admittance_pattern(c, padded.dim);
  const SparsityPattern after = permute_pattern(before, out.perm);
  out.stats.n = n;
  out.stats.edges = static_cast<int>(c.branches.size());
  out.stats.bw_before = bandwidth(before);
  out.stats.bw_after = bandwidth(after);
  out.stats.padded_colors_before = static_cast<int>(color_set(before).size());
  out.stats.padded_colors_after = static_cast<int>(color_set(after).size());
  out.problem = permute_problem(padded, out.perm);
  out.stats.colors_before = static_cast<int>(measurement_color_set(padded).size());
  out.stats.colors_after = static_cast<int>(measurement_color_set(out.problem).size());
  return out;
}

LagrangianContext make_context(const ExperimentConfig& cfg, const QcqpProblem& prepared) {
  const int nq = log2_exact(prepared.dim);
  const int mq = log2_exact(prepared.size());
  return LagrangianContext(prepared, AnsatzSpec::from_table(cfg.primal.row, cfg.primal.layers, nq, cfg.primal.entangler),
                           AnsatzSpec::from_table(cfg.dual.row, cfg.dual.layers, mq, cfg.dual.entangler));
}

namespace {

double default_alpha(const ExperimentConfig& cfg, const NetworkCase& grid) {
  return cfg.alpha0.value_or(std::sqrt(static_cast<double>(grid.size())));
}

double default_beta(const ExperimentConfig& cfg, const NetworkCase& grid) {
  return cfg.beta0.value_or(2.0 * static_cast<double>(grid.load_buses().size()));
}

RVector uniform_angles(const AnsatzSpec& spec) {
  RVector a = RVector::Zero(spec.param_count());
  if (spec.n_layers == 0) return a;
  if (spec.layer.front() != LayerStep::Ry && spec.layer.front() != LayerStep::Rx)
    throw ValidationError("uniform init needs an ansatz that opens with Rx or Ry");
  a.head(spec.n_qubits).setConstant(std::numbers::pi / 2);
  return a;
}

}  // namespace

SaddlePointState initial_state(const ExperimentConfig& cfg, const LagrangianContext& ctx, const NetworkCase& grid,
                               std::uint64_t seed) {
  SaddlePointState s = random_initial_state(ctx, default_alpha(cfg, grid), default_beta(cfg, grid), seed);
  if (cfg.init == InitKind::uniform) {
    s.theta = uniform_angles(ctx.primal_spec());
    s.phi = uniform_angles(ctx.dual_spec());
  }
  return s;
}

BoundInputs experiment_bound_inputs(const ExperimentConfig& cfg, const LagrangianContext& ctx,
                                    const NetworkCase& grid, const InstanceReference* reference) {
  BoundInputs in = measure_inputs(ctx);
  in.alpha_bar = cfg.bounds.alpha_bar.value_or(1.1 * std::sqrt(static_cast<double>(grid.size())));
  if (cfg.bounds.beta_bar) {
    in.beta_bar = *cfg.bounds.beta_bar;
  } else if (reference && !reference->lambda_all.empty()) {
    double sum = 0.0;
    for (double l : reference->lambda_all) sum += l;
    in.beta_bar = 2.0 * std::sqrt(sum);
  } else {
    in.beta_bar = default_beta(cfg, grid);
  }
  in.rho = cfg.bounds.rho;
  in.epsilon = cfg.bounds.epsilon;
  in.dist0 = cfg.bounds.dist0;
  return in;
}

// ---------------------------------------------------------------------------
// ansatz fitting

double alignment_cost(const AnsatzSpec& spec, const RVector& theta, const CVector& w) {
  const QuantumState psi = prepare(spec, theta);
  if (psi.amplitudes.size() != w.size()) throw std::invalid_argument("target has the wrong dimension");
  return 1.0 - psi.amplitudes.dot(w).real() / w.norm();
}

double pmf_cost(const AnsatzSpec& spec, const RVector& phi, const RVector& r) {
  const QuantumState xi = prepare(spec, phi);
  if (xi.amplitudes.size() != r.size()) throw std::invalid_argument("target has the wrong dimension");
  return (xi.amplitudes.cwiseAbs2() - r).squaredNorm();
}

namespace {

using CostFn = std::function<double(const RVector&)>;
using GradFn = std::function<RVector(const RVector&)>;

double descend(const CostFn& cost, const GradFn& grad, RVector& x, int iters) {
  double f = cost(x);
  double t = 1.0;
  for (int it = 0; it < iters; ++it) {
    const RVector g = grad(x);
    const double gg = g.squaredNorm();
    if (gg < 1e-24) break;
    t = std::min(2.0 * t, 10.0);
    RVector next = x - t * g;
    double fn = cost(next);
    while (fn > f - 1e-4 * t * gg && t > 1e-12) {
      t *= 0.5;
      next = x - t * g;
      fn = cost(next);
    }
    if (t <= 1e-12) break;
    x = std::move(next);
    f = fn;
  }
  return f;
}

double multistart(const CostFn& cost, const GradFn& grad, int n, int iters, int restarts, std::uint64_t seed,
                  RVector* best) {
  double best_cost = INFINITY;
  for (int r = 0; r < std::max(1, restarts); ++r) {
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
    std::uniform_real_distribution<double> angle(0.0, 2 * std::numbers::pi);
    RVector x(n);
    for (auto& a : x) a = angle(rng);
    const double f = descend(cost, grad, x, iters);
    if (f < best_cost) {
      best_cost = f;
      if (best) *best = x;
    }
  }
  return best_cost;
}

}  // namespace

double fit_primal(const AnsatzSpec& spec, const CVector& w, int iters, int restarts, std::uint64_t seed,
                  RVector* best) {
  const double wn = w.norm();
  if (!(wn > 0.0)) throw ValidationError("fit target is zero");
  CostFn cost = [&](const RVector& t) { return alignment_cost(spec, t, w); };
  GradFn grad = [&](const RVector& t) {
    RVector g(t.size());
    for (Eigen::Index k = 0; k < t.size(); ++k) {
      RVector plus = t, minus = t;
      plus[k] += std::numbers::pi;
      minus[k] -= std::numbers::pi;
      const CVector d = 0.25 * (prepare(spec, plus).amplitudes - prepare(spec, minus).amplitudes);
      g[k] = -d.dot(w).real() / wn;
    }
    return g;
  };
  return multistart(cost, grad, spec.param_count(), iters, restarts, seed, best);
}

double fit_dual(const AnsatzSpec& spec, const RVector& r, int iters, int restarts, std::uint64_t seed,
                RVector* best) {
  CostFn cost = [&](const RVector& p) { return pmf_cost(spec, p, r); };
  GradFn grad = [&](const RVector& p) {
    const RVector q = prepare(spec, p).amplitudes.cwiseAbs2();
    RVector g(p.size());
    for (Eigen::Index k = 0; k < p.size(); ++k) {
      const auto [plus, minus] = shift_points(p, static_cast<int>(k));
      const RVector dq = 0.5 * (prepare(spec, plus).amplitudes.cwiseAbs2() - prepare(spec, minus).amplitudes.cwiseAbs2());
      g[k] = 2.0 * (q - r).dot(dq);
    }
    return g;
  };
  return multistart(cost, grad, spec.param_count(), iters, restarts, seed, best);
}

namespace {

CVector solver_voltage(const PreparedProblem& prep, const InstanceReference& ref) {
  if (ref.v.size() != prep.grid.size()) throw ValidationError("reference " + ref.name + " has no voltage vector");
  CVector v = CVector::Zero(prep.problem.dim);
  for (std::size_t k = 0; k < ref.v.size(); ++k) v[k] = ref.v[k];
  return permute_vector(v, prep.perm);
}

RVector solver_pmf(const PreparedProblem& prep, const InstanceReference& ref) {
  RVector lam = RVector::Zero(prep.problem.size());
  if (!ref.lambda_all.empty()) {
    for (std::size_t m = 0; m < ref.lambda_all.size() && static_cast<int>(m) < lam.size(); ++m) lam[m] = ref.lambda_all[m];
  } else {
    // nets only: a positive net goes to the upper half, a negative one to the lower half
    if (market_size(prep.problem) != static_cast<int>(ref.lambda.size()))
      throw ValidationError("reference " + ref.name + " multiplier count mismatch");
    std::size_t i = 0;
    for (int m = 0; m < prep.problem.size(); ++m) {
      const ConstraintLabel& l = prep.problem.constraints[m].label;
      if (l.kind == ConstraintKind::line_current) {
        lam[m] = ref.lambda[i++];
      } else if ((l.kind == ConstraintKind::balance_p || l.kind == ConstraintKind::balance_q) && !l.lower) {
        const double net = ref.lambda[i++];
        lam[net >= 0.0 ? m : m + 1] = std::abs(net);
      }
    }
  }
  const double sum = lam.sum();
  if (!(sum > 0.0)) throw ValidationError("reference " + ref.name + " has no positive multiplier");
  return lam / sum;
}

}  // namespace

std::vector<FitResult> fit_ansatz(const ExperimentConfig& cfg, const std::vector<AnsatzChoice>& primal_candidates,
                                  const std::vector<AnsatzChoice>& dual_candidates, const ReferenceSolution& ref) {
  if (ref.instances.empty()) throw ValidationError("ansatz fitting needs reference solutions");
  const NetworkCase base = simplify_case(load_case(cfg.case_path), cfg.q_ratio, cfg.zero_generator_load);
  const auto instances = generate_instances(base, static_cast<int>(ref.instances.size()), cfg.load_low, cfg.load_high,
                                            derive_seed(cfg.seed, 1), cfg.q_ratio);
  std::vector<PreparedProblem> preps;
  for (const auto& inst : instances) preps.push_back(prepare_problem(inst, cfg.rcm_runs, cfg.seed));

  auto run_group = [&](const std::vector<AnsatzChoice>& cands, bool primal) {
    std::vector<FitResult> out;
    for (const auto& a : cands) {
      FitResult fr;
      fr.ansatz = a;
      fr.primal = primal;
      for (std::size_t k = 0; k < preps.size(); ++k) {
        const auto& prep = preps[k];
        const std::uint64_t s = derive_seed(cfg.seed, 5000 + k);
        double cost;
        if (primal) {
          const AnsatzSpec spec = AnsatzSpec::from_table(a.row, a.layers, log2_exact(prep.problem.dim), a.entangler);
          cost = fit_primal(spec, solver_voltage(prep, ref.instances[k]), cfg.fit_iters, cfg.fit_restarts, s);
        } else {
          const AnsatzSpec spec = AnsatzSpec::from_table(a.row, a.layers, log2_exact(prep.problem.size()), a.entangler);
          cost = fit_dual(spec, solver_pmf(prep, ref.instances[k]), cfg.fit_iters, cfg.fit_restarts, s);
        }
        fr.costs.push_back(cost);
      }
      double sum = 0.0;
      for (double c : fr.costs) sum += c;
      fr.mean_cost = sum / static_cast<double>(fr.costs.size());
      out.push_back(std::move(fr));
    }
    std::stable_sort(out.begin(), out.end(), [](const FitResult& a, const FitResult& b) { return a.mean_cost < b.mean_cost; });
    return out;
  };
  std::vector<FitResult> all = run_group(primal_candidates, true);
  for (auto& r : run_group(dual_candidates, false)) all.push_back(std::move(r));
  return all;
}

// ---------------------------------------------------------------------------
// metrics

namespace {

double relative_error(const std::vector<double>& a, const std::vector<double>& b, const char* what) {
  if (a.size() != b.size())
    throw ValidationError(std::string(what) + " dimension mismatch: " + std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()));
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

}  // namespace

Metrics compute_metrics(const NetworkCase& c, const QcqpProblem& problem, const Found& found,
                        const InstanceReference& ref) {
  for (int k = 0; k < problem.n; ++k)
    if (problem.node_index[k] != k) throw ValidationError("metrics expect the unpermuted problem");
  if (found.v.size() != static_cast<Eigen::Index>(c.size())) throw ValidationError("found voltage has the wrong size");
  Metrics out;
  out.x_err = relative_error(generator_setpoints(c, found.v), ref.x, "setpoint");

  out.lambda_err = relative_error(market_multipliers(problem, found.lambda), ref.lambda, "multiplier");

  CVector v = CVector::Zero(problem.dim);
  v.head(c.size()) = found.v;
  double total = 0.0;
  for (const auto& row : problem.constraints) {
    const auto kind = row.label.kind;
    if (kind == ConstraintKind::padding) continue;
    const double excess = std::max(0.0, quadratic_form(row.matrix, v) - row.bound) / row.label.scale;
    if (kind == ConstraintKind::balance_p || kind == ConstraintKind::balance_q) {
      out.balance_residual = std::max(out.balance_residual, excess);
      continue;
    }
    ++out.checked_rows;
    if (excess <= 1e-6) continue;
    ++out.viol_count;
    out.viol_max = std::max(out.viol_max, 100.0 * excess);
    total += 100.0 * excess;
  }
  out.viol_mean = out.checked_rows ? total / out.checked_rows : 0.0;
  out.lagrangian_err = std::abs(found.lagrangian - ref.cost) / std::abs(ref.cost);
  return out;
}

std::vector<double> dual_plot_series(const std::vector<double>& lambda) {
  std::vector<double> out = lambda;
  for (double& l : out)
    if (std::abs(l) < 1e-6) l = 0.0;
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// pipeline

namespace {

InstanceRun solve_variational(const ExperimentConfig& cfg, const PreparedProblem& prep, Model model,
                              std::uint64_t init_seed, std::uint64_t mode_seed, const InstanceReference* ref,
                              Found& found) {
  InstanceRun run;
  LagrangianContext ctx = make_context(cfg, prep.problem);
  RunOptions o;
  o.method = model == Model::variational_pd ? Method::pd : Method::eg;
  o.variant = cfg.eg_variant;
  o.schedule = cfg.schedule;
  if (o.schedule.kind == ScheduleKind::lipschitz && !(o.schedule.lipschitz > 0.0))
    o.schedule.lipschitz = lipschitz_L(experiment_bound_inputs(cfg, ctx, prep.grid, ref));
  o.stop = cfg.stop;
  o.mode = cfg.sampled ? EvalMode::sampled_with(cfg.sampling, mode_seed) : EvalMode::exact();
  o.record_trajectory = cfg.record_trajectory;
  const SaddlePointState init = initial_state(cfg, ctx, prep.grid, init_seed);
  const RunResult r = qopf::run(ctx, init, o);
  run.iterations = r.iterations;
  run.converged = r.converged;
  run.stop_reason = r.stop_reason;
  run.shots = r.shots;
  run.final_grad_norm = r.final_grad_norm;
  run.final_lagrangian = r.final_lagrangian + prep.problem.objective_offset;
  run.trajectory = r.trajectory;
  for (auto& t : run.trajectory) t.lagrangian += prep.problem.objective_offset;
  const CVector w = primal_vector(ctx, r.final_state.primal());
  found.v = unpermute_vector(w, prep.perm).head(prep.grid.size());
  found.lambda = dual_vector(ctx, r.final_state.dual());
  found.lagrangian = run.final_lagrangian;
  return run;
}

InstanceRun solve_classical(const ExperimentConfig& cfg, const PreparedProblem& prep, Model model,
                            std::uint64_t init_seed, Found& found) {
  InstanceRun run;
  const double scale = cfg.lambda0_scale.value_or(2.0 * static_cast<double>(prep.grid.load_buses().size()));
  const ClassicalState init = classical_initial_state(prep.problem, scale, init_seed);
  ClassicalRunOptions o;
  o.method = model == Model::qcqp_pd ? Method::pd : Method::eg;
  o.variant = cfg.eg_variant;
  o.schedule = cfg.classical_schedule;
  o.max_iters = cfg.classical_max_iters;
  o.tol = cfg.classical_tol;
  o.divergence_ceiling = cfg.stop.divergence_ceiling;
  o.record_trajectory = cfg.record_trajectory;
  const ClassicalRunResult r = classical_run(prep.problem, init, o);
  const double offset = prep.problem.objective_offset;
  run.iterations = r.iterations;
  run.converged = r.converged;
  run.stop_reason = r.converged ? "step" : "max-iters";
  for (std::size_t t = 0; t < r.lagrangian.size(); ++t) {
    TrajectoryRow row;
    row.iteration = static_cast<long>(t);
    row.lagrangian = r.lagrangian[t] + offset;
    run.trajectory.push_back(row);
  }
  run.final_lagrangian =
      classical_lagrangian(prep.problem, r.final_state.v, r.final_state.lambda) + offset;
  found.v = unpermute_vector(r.final_state.v, prep.perm).head(prep.grid.size());
  found.lambda = r.final_state.lambda;
  found.lagrangian = run.final_lagrangian;
  return run;
}

}  // namespace

RunReport run_experiment(const ExperimentConfig& cfg) {
  cfg.check();
  const NetworkCase base = simplify_case(load_case(cfg.case_path), cfg.q_ratio, cfg.zero_generator_load);
  const auto instances =
      generate_instances(base, cfg.instances, cfg.load_low, cfg.load_high, derive_seed(cfg.seed, 1), cfg.q_ratio);

  ReferenceSolution ref;
  bool have_ref = false;
  if (!cfg.reference_path.empty()) {
    ref = load_reference(cfg.reference_path);
    if (ref.instances.size() != instances.size())
      throw ValidationError("reference has " + std::to_string(ref.instances.size()) + " instances, config asks for " +
                            std::to_string(instances.size()));
    have_ref = true;
  } else if (base.size() <= 4) {
    for (const auto& inst : instances) ref.instances.push_back(brute_force_reference(inst));
    have_ref = true;
  }

  RunReport report;
  report.case_name = base.name;
  for (std::size_t k = 0; k < instances.size(); ++k) {
    const PreparedProblem prep = prepare_problem(instances[k], cfg.rcm_runs, cfg.seed);
    if (k == 0) report.permutation = prep.stats;
    const QcqpProblem plain = assemble_qcqp(instances[k]);
    const InstanceReference* r = have_ref ? &ref.instances[k] : nullptr;
    if (r) {
      if (r->x.size() != 2 * instances[k].generator_buses().size())
        throw ValidationError("reference setpoints do not match the generator set of " + instances[k].name);
      if (static_cast<int>(r->lambda.size()) != market_size(plain))
        throw ValidationError("reference multipliers do not match the constraint rows of " + instances[k].name);
      report.reference_costs.push_back(r->cost);
      report.reference_lambdas.push_back(r->lambda);
    }
    const std::uint64_t init_seed = derive_seed(cfg.seed, 1000 + k);
    for (std::size_t mi = 0; mi < cfg.models.size(); ++mi) {
      const Model model = cfg.models[mi];
      const std::uint64_t mode_seed = derive_seed(cfg.seed, 100000 + 16 * k + static_cast<std::uint64_t>(model));
      const auto t0 = std::chrono::steady_clock::now();
      InstanceRun run;
      Found found;
      try {
        if (model == Model::variational_pd || model == Model::variational_eg)
          run = solve_variational(cfg, prep, model, init_seed, mode_seed, r, found);
        else
          run = solve_classical(cfg, prep, model, init_seed, found);
      } catch (const DivergenceError& e) {
        run.ok = false;
        run.failure = std::string(e.what()) + " at iteration " + std::to_string(e.iteration());
        run.iterations = e.iteration();
      }
      run.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      run.instance = instances[k].name;
      run.instance_index = static_cast<int>(k);
      run.model = model;
      if (run.ok) {
        run.x = generator_setpoints(instances[k], found.v);
        run.lambda = market_multipliers(plain, found.lambda);
        if (r) {
          run.metrics = compute_metrics(instances[k], plain, found, *r);
          run.has_reference = true;
        }
      }
      report.runs.push_back(std::move(run));
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// reports

std::vector<TableRow> summarize(const RunReport& r) {
  std::vector<TableRow> out;
  std::map<std::string, std::size_t> index;
  std::vector<int> counts;
  for (const auto& run : r.runs) {
    if (!run.ok || !run.has_reference) continue;
    const std::string name = to_string(run.model);
    auto it = index.find(name);
    if (it == index.end()) {
      it = index.emplace(name, out.size()).first;
      out.push_back({name, 0, 0, 0, 0, 0});
      counts.push_back(0);
    }
    TableRow& row = out[it->second];
    ++counts[it->second];
    row.x_err += 100.0 * run.metrics.x_err;
    row.lambda_err += 100.0 * run.metrics.lambda_err;
    row.viol_count += run.metrics.viol_count;
    row.viol_max = std::max(row.viol_max, run.metrics.viol_max);
    row.viol_mean += run.metrics.viol_mean;
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double n = counts[i];
    out[i].x_err /= n;
    out[i].lambda_err /= n;
    out[i].viol_count /= n;
    out[i].viol_mean /= n;
  }
  return out;
}

std::string table_csv(const RunReport& r) {
  std::ostringstream os;
  os << "model,x_err,lambda_err,viol_count,viol_max,viol_mean\n";
  os.precision(6);
  for (const auto& row : summarize(r))
    os << row.model << ',' << row.x_err << ',' << row.lambda_err << ',' << row.viol_count << ',' << row.viol_max
       << ',' << row.viol_mean << '\n';
  return os.str();
}

namespace {

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p);
  if (!out) throw IoError("cannot write " + p.string());
  out << text;
  if (!out) throw IoError("write failed for " + p.string());
}

}  // namespace

void emit_report(const RunReport& r, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir + ": " + ec.message());
  const std::filesystem::path d(dir);
  write_file(d / "table.csv", table_csv(r));
  write_file(d / "report.json", report_to_json(r));

  std::ostringstream lag;
  lag.precision(10);
  lag << "model,instance,iteration,lagrangian,relative_error\n";
  for (const auto& run : r.runs) {
    const bool has_cost = run.instance_index < static_cast<int>(r.reference_costs.size());
    const double cost = has_cost ? r.reference_costs[run.instance_index] : 0.0;
    for (const auto& t : run.trajectory) {
      lag << to_string(run.model) << ',' << run.instance << ',' << t.iteration << ',' << t.lagrangian << ',';
      if (has_cost) lag << std::abs(t.lagrangian - cost) / std::abs(cost);
      lag << '\n';
    }
  }
  write_file(d / "lagrangian.csv", lag.str());

  std::ostringstream duals;
  duals.precision(10);
  duals << "series,index,value\n";
  std::vector<double> all_ref;
  for (const auto& l : r.reference_lambdas) all_ref.insert(all_ref.end(), l.begin(), l.end());
  const auto ref_series = dual_plot_series(all_ref);
  for (std::size_t i = 0; i < ref_series.size(); ++i) duals << "reference," << i << ',' << ref_series[i] << '\n';
  std::map<std::string, std::vector<double>> by_model;
  for (const auto& run : r.runs)
    if (run.ok) by_model[to_string(run.model)].insert(by_model[to_string(run.model)].end(), run.lambda.begin(), run.lambda.end());
  for (const auto& [name, lam] : by_model) {
    const auto s = dual_plot_series(lam);
    for (std::size_t i = 0; i < s.size(); ++i) duals << name << ',' << i << ',' << s[i] << '\n';
  }
  write_file(d / "duals.csv", duals.str());

  const auto& p = r.permutation;
  std::ostringstream perm;
  perm << "case,N,L_e,bw_before,bw_after,colors_before,colors_after\n"
       << r.case_name << ',' << p.n << ',' << p.edges << ',' << p.bw_before << ',' << p.bw_after << ','
       << p.colors_before << ',' << p.colors_after << '\n';
  write_file(d / "permutation.csv", perm.str());
}

}  // namespace qopf
