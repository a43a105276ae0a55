#include <json.hpp>

#include "qopf/errors.hpp"
#include "qopf/harness.hpp"

namespace qopf {

namespace {

using nlohmann::json;

json metrics_json(const Metrics& m) {
  return {{"x_err", m.x_err},
          {"lambda_err", m.lambda_err},
          {"viol_count", m.viol_count},
          {"viol_max", m.viol_max},
          {"viol_mean", m.viol_mean},
          {"balance_residual", m.balance_residual},
          {"lagrangian_err", m.lagrangian_err},
          {"checked_rows", m.checked_rows}};
}

Metrics metrics_from(const json& j) {
  Metrics m;
  m.x_err = j.at("x_err").get<double>();
  m.lambda_err = j.at("lambda_err").get<double>();
  m.viol_count = j.at("viol_count").get<int>();
  m.viol_max = j.at("viol_max").get<double>();
  m.viol_mean = j.at("viol_mean").get<double>();
  m.balance_residual = j.at("balance_residual").get<double>();
  m.lagrangian_err = j.at("lagrangian_err").get<double>();
  m.checked_rows = j.at("checked_rows").get<int>();
  return m;
}

// columns: iteration, lagrangian, g_theta, g_alpha, g_phi, g_beta, alpha, beta, shots
json trajectory_json(const std::vector<TrajectoryRow>& rows) {
  json out = json::array();
  for (const auto& t : rows)
    out.push_back({t.iteration, t.lagrangian, t.g_theta, t.g_alpha, t.g_phi, t.g_beta, t.alpha, t.beta, t.shots});
  return out;
}

std::vector<TrajectoryRow> trajectory_from(const json& j) {
  std::vector<TrajectoryRow> out;
  for (const auto& e : j) {
    TrajectoryRow t;
    t.iteration = e.at(0).get<long>();
    t.lagrangian = e.at(1).get<double>();
    t.g_theta = e.at(2).get<double>();
    t.g_alpha = e.at(3).get<double>();
    t.g_phi = e.at(4).get<double>();
    t.g_beta = e.at(5).get<double>();
    t.alpha = e.at(6).get<double>();
    t.beta = e.at(7).get<double>();
    t.shots = e.at(8).get<std::int64_t>();
    out.push_back(t);
  }
  return out;
}

}  // namespace

std::string report_to_json(const RunReport& r) {
  json j;
  j["case"] = r.case_name;
  const auto& p = r.permutation;
  j["permutation"] = {{"n", p.n},
                      {"edges", p.edges},
                      {"bw_before", p.bw_before},
                      {"bw_after", p.bw_after},
                      {"colors_before", p.colors_before},
                      {"colors_after", p.colors_after},
                      {"padded_colors_before", p.padded_colors_before},
                      {"padded_colors_after", p.padded_colors_after}};
  j["reference_costs"] = r.reference_costs;
  j["reference_lambdas"] = r.reference_lambdas;
  json runs = json::array();
  for (const auto& run : r.runs) {
    json e = {{"instance", run.instance},
              {"instance_index", run.instance_index},
              {"model", to_string(run.model)},
              {"ok", run.ok},
              {"failure", run.failure},
              {"has_reference", run.has_reference},
              {"iterations", run.iterations},
              {"converged", run.converged},
              {"stop_reason", run.stop_reason},
              {"shots", run.shots},
              {"wall_seconds", run.wall_seconds},
              {"final_lagrangian", run.final_lagrangian},
              {"final_grad_norm", run.final_grad_norm},
              {"x", run.x},
              {"lambda", run.lambda},
              {"trajectory", trajectory_json(run.trajectory)}};
    if (run.has_reference) e["metrics"] = metrics_json(run.metrics);
    runs.push_back(std::move(e));
  }
  j["runs"] = std::move(runs);
  return j.dump(1);
}

RunReport report_from_json(const std::string& text) {
  RunReport r;
  try {
    const json j = json::parse(text);
    r.case_name = j.at("case").get<std::string>();
    const json& p = j.at("permutation");
    r.permutation.n = p.at("n").get<int>();
    r.permutation.edges = p.at("edges").get<int>();
    r.permutation.bw_before = p.at("bw_before").get<int>();
    r.permutation.bw_after = p.at("bw_after").get<int>();
    r.permutation.colors_before = p.at("colors_before").get<int>();
    r.permutation.colors_after = p.at("colors_after").get<int>();
    r.permutation.padded_colors_before = p.at("padded_colors_before").get<int>();
    r.permutation.padded_colors_after = p.at("padded_colors_after").get<int>();
    r.reference_costs = j.at("reference_costs").get<std::vector<double>>();
    r.reference_lambdas = j.at("reference_lambdas").get<std::vector<std::vector<double>>>();
    for (const auto& e : j.at("runs")) {
      InstanceRun run;
      run.instance = e.at("instance").get<std::string>();
      run.instance_index = e.at("instance_index").get<int>();
      run.model = model_from_string(e.at("model").get<std::string>());
      run.ok = e.at("ok").get<bool>();
      run.failure = e.at("failure").get<std::string>();
      run.has_reference = e.at("has_reference").get<bool>();
      run.iterations = e.at("iterations").get<long>();
      run.converged = e.at("converged").get<bool>();
      run.stop_reason = e.at("stop_reason").get<std::string>();
      run.shots = e.at("shots").get<std::int64_t>();
      run.wall_seconds = e.at("wall_seconds").get<double>();
      run.final_lagrangian = e.at("final_lagrangian").get<double>();
      run.final_grad_norm = e.at("final_grad_norm").get<double>();
      run.x = e.at("x").get<std::vector<double>>();
      run.lambda = e.at("lambda").get<std::vector<double>>();
      run.trajectory = trajectory_from(e.at("trajectory"));
      if (run.has_reference) run.metrics = metrics_from(e.at("metrics"));
      r.runs.push_back(std::move(run));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("report JSON: ") + e.what(), 0);
  }
  return r;
}

}  // namespace qopf
