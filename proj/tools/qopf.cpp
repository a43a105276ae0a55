// qopf: command-line front end.
// Exit codes: 0 success, 1 validation or parse error, 2 divergence, 3 I/O.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "qopf/bounds.hpp"
#include "qopf/case.hpp"
#include "qopf/errors.hpp"
#include "qopf/harness.hpp"
#include "qopf/xbm.hpp"

using namespace qopf;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out || !(out << text)) throw IoError("cannot write " + path);
}

std::vector<AnsatzChoice> parse_candidates(const std::vector<std::string>& specs) {
  // "row:layers"
  std::vector<AnsatzChoice> out;
  for (const auto& s : specs) {
    const auto colon = s.find(':');
    if (colon == std::string::npos) throw ValidationError("ansatz candidate '" + s + "' is not row:layers");
    AnsatzChoice a;
    a.row = std::stoi(s.substr(0, colon));
    a.layers = std::stoi(s.substr(colon + 1));
    out.push_back(a);
  }
  return out;
}

std::string stats_row(const std::string& name, const PermutationStats& p) {
  std::ostringstream os;
  os << name << ',' << p.n << ',' << p.edges << ',' << p.bw_before << ',' << p.bw_after << ',' << p.colors_before
     << ',' << p.colors_after << '\n';
  return os.str();
}

NetworkCase load_prepared_case(const std::string& path, bool simplify, double q_ratio) {
  NetworkCase c = load_case(path);
  return simplify ? simplify_case(c, q_ratio, true) : c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variational optimal power flow toolkit"};
  app.require_subcommand(1);

  // prepare
  auto* prep = app.add_subcommand("prepare", "Parse, permute and assemble a case; write the problem as JSON");
  std::string prep_case, prep_out;
  int prep_runs = 200;
  std::uint64_t prep_seed = 1;
  bool prep_simplify = false;
  prep->add_option("case", prep_case, "case file")->required();
  prep->add_option("-o,--out", prep_out, "output JSON (default stdout)");
  prep->add_option("--rcm-runs", prep_runs, "random RCM starts");
  prep->add_option("--seed", prep_seed, "RCM seed");
  prep->add_flag("--simplify", prep_simplify, "q_d = 0.33 p_d at loads, zero demand at generators");

  // permute
  auto* perm = app.add_subcommand("permute", "Bandwidth and color statistics before and after RCM (CSV)");
  std::vector<std::string> perm_cases;
  int perm_runs = 200;
  std::uint64_t perm_seed = 1;
  perm->add_option("cases", perm_cases, "case files")->required();
  perm->add_option("--rcm-runs", perm_runs, "random RCM starts");
  perm->add_option("--seed", perm_seed, "RCM seed");

  // solve
  auto* solve = app.add_subcommand("solve", "Run the configured experiment and write a report directory");
  std::string solve_cfg, solve_dir;
  solve->add_option("config", solve_cfg, "experiment config (JSON)")->required();
  solve->add_option("-o,--out-dir", solve_dir, "report directory (default: config output_dir)");

  // bounds
  auto* bnd = app.add_subcommand("bounds", "Lipschitz constant, variance and sample budget for a config");
  std::string bnd_cfg;
  bnd->add_option("config", bnd_cfg, "experiment config (JSON)")->required();

  // xbm-stats
  auto* xs = app.add_subcommand("xbm-stats", "Color decomposition statistics of a prepared case");
  std::string xs_case;
  int xs_runs = 200;
  bool xs_natural = false;
  xs->add_option("case", xs_case, "case file")->required();
  xs->add_option("--rcm-runs", xs_runs, "random RCM starts");
  xs->add_flag("--natural", xs_natural, "skip the RCM permutation");

  // fit
  auto* fit = app.add_subcommand("fit", "Rank ansatz candidates by their fit to reference solutions");
  std::string fit_cfg, fit_ref;
  std::vector<std::string> fit_primal, fit_dual;
  fit->add_option("config", fit_cfg, "experiment config (JSON)")->required();
  fit->add_option("--reference", fit_ref, "reference JSON (default: config reference, or the oracle)");
  fit->add_option("--primal", fit_primal, "primal candidates row:layers");
  fit->add_option("--dual", fit_dual, "dual candidates row:layers");

  // report
  auto* rep = app.add_subcommand("report", "Re-emit a finished run");
  std::string rep_dir, rep_format = "csv";
  rep->add_option("run_dir", rep_dir, "report directory")->required();
  rep->add_option("--format", rep_format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  // import
  auto* imp = app.add_subcommand("import", "Convert a MATPOWER case file to the native format");
  std::string imp_in, imp_out;
  bool imp_drop = false;
  imp->add_option("matpower", imp_in, "MATPOWER .m file")->required();
  imp->add_option("-o,--out", imp_out, "output case file (default stdout)");
  imp->add_flag("--drop-quadratic-cost", imp_drop, "keep only the linear cost term");

  // oracle
  auto* orc = app.add_subcommand("oracle", "Brute-force reference solutions for the instances of a tiny config");
  std::string orc_cfg, orc_out;
  orc->add_option("config", orc_cfg, "experiment config (JSON)")->required();
  orc->add_option("-o,--out", orc_out, "output JSON (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*prep) {
      const PreparedProblem p = prepare_problem(load_prepared_case(prep_case, prep_simplify, 0.33), prep_runs, prep_seed);
      nlohmann::json j = nlohmann::json::parse(problem_to_json(p.problem));
      j["permutation"] = p.perm.forward;
      spit(prep_out, j.dump() + "\n");
      std::cerr << "N=" << p.stats.n << " M=" << p.problem.real_constraints() << " padded " << p.problem.dim << "x"
                << p.problem.size() << " bandwidth " << p.stats.bw_before << "->" << p.stats.bw_after << " colors "
                << p.stats.colors_before << "->" << p.stats.colors_after << " padded colors "
                << p.stats.padded_colors_before << "->" << p.stats.padded_colors_after << "\n";
    } else if (*perm) {
      std::cout << "case,N,L_e,bw_before,bw_after,colors_before,colors_after\n";
      for (const auto& path : perm_cases) {
        const NetworkCase c = load_case(path);
        std::cout << stats_row(c.name, prepare_problem(c, perm_runs, perm_seed).stats);
      }
    } else if (*solve) {
      const ExperimentConfig cfg = load_config(solve_cfg);
      const RunReport r = run_experiment(cfg);
      const std::string dir = solve_dir.empty() ? cfg.output_dir : solve_dir;
      emit_report(r, dir);
      std::cout << table_csv(r);
      int failures = 0;
      for (const auto& run : r.runs)
        if (!run.ok) {
          ++failures;
          std::cerr << run.instance << " " << to_string(run.model) << ": " << run.failure << "\n";
        }
      if (failures) return 2;
    } else if (*bnd) {
      const ExperimentConfig cfg = load_config(bnd_cfg);
      const NetworkCase c = simplify_case(load_case(cfg.case_path), cfg.q_ratio, cfg.zero_generator_load);
      const PreparedProblem p = prepare_problem(c, cfg.rcm_runs, cfg.seed);
      const LagrangianContext ctx = make_context(cfg, p.problem);
      std::optional<InstanceReference> ref;
      if (!cfg.reference_path.empty()) {
        const auto all = load_reference(cfg.reference_path);
        if (!all.instances.empty()) ref = all.instances.front();
      }
      const BoundInputs in = experiment_bound_inputs(cfg, ctx, c, ref ? &*ref : nullptr);
      const Budget b = budget(in);
      std::printf("P %d\nQ %d\nC %d\nalpha_bar %.6g\nbeta_bar %.6g\n", in.P, in.Q, in.C, in.alpha_bar, in.beta_bar);
      std::printf("norm_M0 %.6g\nmax_norm_Mm %.6g\nmax_abs_b %.6g\n", in.norm_M0, in.max_norm_Mm, in.max_abs_b);
      std::printf("L %.6g\nsigma2 %.6g\nT %lld\nS %lld\ncircuits_per_iter %lld\ntotal %.6g\ntotal_4224 %.6g\n", b.L,
                  b.sigma2, static_cast<long long>(b.T), static_cast<long long>(b.S),
                  static_cast<long long>(b.circuits_per_iter), b.total, b.total_4224);
    } else if (*xs) {
      const NetworkCase c = load_case(xs_case);
      const PreparedProblem p = prepare_problem(c, xs_runs, 1);
      const QcqpProblem q = xs_natural ? pad_to_qubits(assemble_qcqp(c)) : p.problem;
      const ColorDecomposition d0 = decompose(q.m0);
      std::size_t max_pieces = 0, total_pieces = 0;
      std::set<int> keys, colors;
      for (const auto& piece : d0.pieces) {
        keys.insert(piece.key());
        colors.insert(piece.color);
      }
      for (const auto& row : q.constraints) {
        const ColorDecomposition d = decompose(row.matrix);
        max_pieces = std::max(max_pieces, d.pieces.size());
        total_pieces += d.pieces.size();
        for (const auto& piece : d.pieces) {
          keys.insert(piece.key());
          colors.insert(piece.color);
        }
      }
      std::printf("dim %d\nrows %d\ncost_pieces %zu\ncost_sum_sq_norms %.6g\n", q.dim, q.size(), d0.pieces.size(),
                  d0.sum_sq_norms());
      std::printf("constraint_pieces_total %zu\nconstraint_pieces_max %zu\ncolors %zu\ndistinct_pieces %zu\n",
                  total_pieces, max_pieces, colors.size(), keys.size());
    } else if (*fit) {
      const ExperimentConfig cfg = load_config(fit_cfg);
      ReferenceSolution ref;
      const std::string path = fit_ref.empty() ? cfg.reference_path : fit_ref;
      if (!path.empty()) {
        ref = load_reference(path);
      } else {
        const NetworkCase base = simplify_case(load_case(cfg.case_path), cfg.q_ratio, cfg.zero_generator_load);
        for (const auto& inst :
             generate_instances(base, cfg.instances, cfg.load_low, cfg.load_high, derive_seed(cfg.seed, 1), cfg.q_ratio))
          ref.instances.push_back(brute_force_reference(inst));
      }
      auto primal = parse_candidates(fit_primal);
      auto dual = parse_candidates(fit_dual);
      if (primal.empty() && dual.empty()) {
        primal = {cfg.primal};
        dual = {cfg.dual};
      }
      std::cout << "kind,row,layers,mean_cost\n";
      for (const auto& r : fit_ansatz(cfg, primal, dual, ref))
        std::printf("%s,%d,%d,%.6e\n", r.primal ? "primal" : "dual", r.ansatz.row, r.ansatz.layers, r.mean_cost);
    } else if (*rep) {
      const RunReport r = report_from_json(slurp((std::filesystem::path(rep_dir) / "report.json").string()));
      std::cout << (rep_format == "csv" ? table_csv(r) : report_to_json(r) + "\n");
    } else if (*imp) {
      std::vector<std::string> warnings;
      MatpowerImportOptions o;
      o.drop_quadratic_cost = imp_drop;
      const NetworkCase c =
          import_matpower(slurp(imp_in), o, &warnings, std::filesystem::path(imp_in).stem().string());
      for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
      spit(imp_out, write_case(c));
    } else if (*orc) {
      const ExperimentConfig cfg = load_config(orc_cfg);
      const NetworkCase base = simplify_case(load_case(cfg.case_path), cfg.q_ratio, cfg.zero_generator_load);
      ReferenceSolution ref;
      for (const auto& inst :
           generate_instances(base, cfg.instances, cfg.load_low, cfg.load_high, derive_seed(cfg.seed, 1), cfg.q_ratio))
        ref.instances.push_back(brute_force_reference(inst));
      spit(orc_out, reference_to_json(ref) + "\n");
    }
  } catch (const DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "io: " << e.what() << "\n";
    return 3;
  } catch (const ParseError& e) {
    std::cerr << "parse: " << e.what() << "\n";
    return 1;
  } catch (const ValidationError& e) {
    std::cerr << "invalid: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
