#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "qopf/errors.hpp"
#include "qopf/harness.hpp"

namespace qopf {

namespace {

using nlohmann::json;

const std::pair<Model, const char*> kModelNames[] = {
    {Model::qcqp_pd, "QCQP-PD"},
    {Model::qcqp_eg, "QCQP-EG"},
    {Model::variational_pd, "QCQPtheta-PD"},
    {Model::variational_eg, "QCQPtheta-EG"},
};

json schedule_json(const BlockSchedule& b) { return {{"base", b.base}, {"decay", b.decay}}; }

void read_block(const json& j, const char* key, BlockSchedule& b) {
  if (!j.contains(key)) return;
  const json& e = j.at(key);
  if (e.is_array()) {
    b.base = e.at(0).get<double>();
    b.decay = e.at(1).get<double>();
  } else {
    b.base = e.value("base", b.base);
    b.decay = e.value("decay", b.decay);
  }
}

json ansatz_json(const AnsatzChoice& a) {
  return {{"row", a.row}, {"layers", a.layers}, {"entangler", a.entangler == Entangler::ring ? "ring" : "linear"}};
}

AnsatzChoice read_ansatz(const json& j, AnsatzChoice a) {
  a.row = j.value("row", a.row);
  a.layers = j.value("layers", a.layers);
  const std::string e = j.value("entangler", std::string(a.entangler == Entangler::ring ? "ring" : "linear"));
  if (e == "ring")
    a.entangler = Entangler::ring;
  else if (e == "linear")
    a.entangler = Entangler::linear;
  else
    throw ValidationError("unknown entangler '" + e + "'");
  return a;
}

template <class T>
void read_optional(const json& j, const char* key, std::optional<T>& out) {
  if (!j.contains(key)) return;
  if (j.at(key).is_null())
    out.reset();
  else
    out = j.at(key).get<T>();
}

template <class T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace

std::string to_string(Model m) {
  for (const auto& [k, name] : kModelNames)
    if (k == m) return name;
  return "unknown";
}

Model model_from_string(const std::string& s) {
  for (const auto& [k, name] : kModelNames)
    if (s == name) return k;
  throw ValidationError("unknown model '" + s + "'");
}

void ExperimentConfig::check() const {
  if (case_path.empty()) throw ValidationError("config: case path missing");
  if (instances < 1) throw ValidationError("config: instance count must be positive");
  if (!(load_low > 0.0 && load_high < 2.0 && load_low <= load_high))
    throw ValidationError("config: load scaling range must lie inside (0, 2)");
  if (sampled && (sampling.shots < 1 || sampling.primal_shots_per_dual < 1))
    throw ValidationError("config: shot counts must be at least 1 in sampled mode");
  if (primal.layers < 0 || dual.layers < 0) throw ValidationError("config: layer count must be nonnegative");
  if (primal.row < 1 || primal.row > 8 || dual.row < 1 || dual.row > 8)
    throw ValidationError("config: ansatz row must be 1..8");
  if (models.empty()) throw ValidationError("config: no model selected");
  if (rcm_runs < 1) throw ValidationError("config: rcm_runs must be positive");
  if (stop.max_iters < 0 || classical_max_iters < 0) throw ValidationError("config: negative iteration cap");
}

ExperimentConfig config_from_json(const std::string& text, const std::string& base_dir) {
  ExperimentConfig c;
  try {
    const json j = json::parse(text);
    c.case_path = j.value("case", c.case_path);
    if (!c.case_path.empty() && !base_dir.empty() && std::filesystem::path(c.case_path).is_relative())
      c.case_path = (std::filesystem::path(base_dir) / c.case_path).string();
    c.instances = j.value("instances", c.instances);
    if (j.contains("load_range")) {
      c.load_low = j.at("load_range").at(0).get<double>();
      c.load_high = j.at("load_range").at(1).get<double>();
    }
    c.q_ratio = j.value("q_ratio", c.q_ratio);
    c.zero_generator_load = j.value("zero_generator_load", c.zero_generator_load);
    if (j.contains("primal_ansatz")) c.primal = read_ansatz(j.at("primal_ansatz"), c.primal);
    if (j.contains("dual_ansatz")) c.dual = read_ansatz(j.at("dual_ansatz"), c.dual);
    if (j.contains("models")) {
      c.models.clear();
      for (const auto& m : j.at("models")) c.models.push_back(model_from_string(m.get<std::string>()));
    }
    if (j.contains("eg_variant")) {
      const std::string v = j.at("eg_variant").get<std::string>();
      if (v == "double_lead")
        c.eg_variant = EgVariant::double_lead;
      else if (v == "symmetric")
        c.eg_variant = EgVariant::symmetric;
      else
        throw ValidationError("unknown eg_variant '" + v + "'");
    }
    if (j.contains("mode")) {
      const std::string m = j.at("mode").get<std::string>();
      if (m != "exact" && m != "sampled") throw ValidationError("mode must be exact or sampled");
      c.sampled = m == "sampled";
    }
    c.sampling.shots = j.value("shots", c.sampling.shots);
    c.sampling.primal_shots_per_dual = j.value("primal_shots_per_dual", c.sampling.primal_shots_per_dual);
    c.sampling.joint = j.value("joint_sampling", c.sampling.joint);
    if (j.contains("allocation")) {
      const std::string a = j.at("allocation").get<std::string>();
      if (a == "equal")
        c.sampling.allocation = ShotAllocation::equal;
      else if (a == "norm")
        c.sampling.allocation = ShotAllocation::norm_weighted;
      else
        throw ValidationError("allocation must be equal or norm");
    }
    if (j.contains("schedule")) {
      const json& s = j.at("schedule");
      const std::string kind = s.value("kind", std::string("exponential"));
      if (kind == "exponential")
        c.schedule.kind = ScheduleKind::exponential;
      else if (kind == "constant")
        c.schedule.kind = ScheduleKind::constant;
      else if (kind == "lipschitz")
        c.schedule.kind = ScheduleKind::lipschitz;
      else
        throw ValidationError("unknown schedule kind '" + kind + "'");
      read_block(s, "theta", c.schedule.theta);
      read_block(s, "alpha", c.schedule.alpha);
      read_block(s, "phi", c.schedule.phi);
      read_block(s, "beta", c.schedule.beta);
      c.schedule.lipschitz = s.value("lipschitz", c.schedule.lipschitz);
    }
    if (j.contains("stop")) {
      const json& s = j.at("stop");
      c.stop.theta_tol = s.value("theta_tol", c.stop.theta_tol);
      c.stop.phi_tol = s.value("phi_tol", c.stop.phi_tol);
      c.stop.max_iters = s.value("max_iters", c.stop.max_iters);
      c.stop.grad_tol = s.value("grad_tol", c.stop.grad_tol);
      c.stop.divergence_ceiling = s.value("divergence_ceiling", c.stop.divergence_ceiling);
    }
    if (j.contains("classical")) {
      const json& s = j.at("classical");
      read_block(s, "v", c.classical_schedule.v);
      read_block(s, "lambda", c.classical_schedule.lambda);
      c.classical_max_iters = s.value("max_iters", c.classical_max_iters);
      c.classical_tol = s.value("tol", c.classical_tol);
    }
    if (j.contains("init")) {
      const std::string k = j.at("init").get<std::string>();
      if (k == "random")
        c.init = InitKind::random;
      else if (k == "uniform")
        c.init = InitKind::uniform;
      else
        throw ValidationError("init must be random or uniform");
    }
    read_optional(j, "alpha0", c.alpha0);
    read_optional(j, "beta0", c.beta0);
    read_optional(j, "lambda0_scale", c.lambda0_scale);
    c.seed = j.value("seed", c.seed);
    c.rcm_runs = j.value("rcm_runs", c.rcm_runs);
    c.reference_path = j.value("reference", c.reference_path);
    if (!c.reference_path.empty() && !base_dir.empty() && std::filesystem::path(c.reference_path).is_relative())
      c.reference_path = (std::filesystem::path(base_dir) / c.reference_path).string();
    c.output_dir = j.value("output_dir", c.output_dir);
    c.record_trajectory = j.value("record_trajectory", c.record_trajectory);
    if (j.contains("bounds")) {
      const json& b = j.at("bounds");
      read_optional(b, "alpha_bar", c.bounds.alpha_bar);
      read_optional(b, "beta_bar", c.bounds.beta_bar);
      c.bounds.rho = b.value("rho", c.bounds.rho);
      c.bounds.epsilon = b.value("epsilon", c.bounds.epsilon);
      c.bounds.dist0 = b.value("dist0", c.bounds.dist0);
    }
    if (j.contains("fit")) {
      c.fit_iters = j.at("fit").value("iters", c.fit_iters);
      c.fit_restarts = j.at("fit").value("restarts", c.fit_restarts);
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("config: ") + e.what(), 0);
  }
  c.check();
  return c;
}

std::string config_to_json(const ExperimentConfig& c) {
  json j;
  j["case"] = c.case_path;
  j["instances"] = c.instances;
  j["load_range"] = {c.load_low, c.load_high};
  j["q_ratio"] = c.q_ratio;
  j["zero_generator_load"] = c.zero_generator_load;
  j["primal_ansatz"] = ansatz_json(c.primal);
  j["dual_ansatz"] = ansatz_json(c.dual);
  j["models"] = json::array();
  for (auto m : c.models) j["models"].push_back(to_string(m));
  j["eg_variant"] = c.eg_variant == EgVariant::double_lead ? "double_lead" : "symmetric";
  j["mode"] = c.sampled ? "sampled" : "exact";
  j["shots"] = c.sampling.shots;
  j["primal_shots_per_dual"] = c.sampling.primal_shots_per_dual;
  j["joint_sampling"] = c.sampling.joint;
  j["allocation"] = c.sampling.allocation == ShotAllocation::equal ? "equal" : "norm";
  const char* kind = c.schedule.kind == ScheduleKind::exponential ? "exponential"
                     : c.schedule.kind == ScheduleKind::constant  ? "constant"
                                                                  : "lipschitz";
  j["schedule"] = {{"kind", kind},
                   {"theta", schedule_json(c.schedule.theta)},
                   {"alpha", schedule_json(c.schedule.alpha)},
                   {"phi", schedule_json(c.schedule.phi)},
                   {"beta", schedule_json(c.schedule.beta)},
                   {"lipschitz", c.schedule.lipschitz}};
  j["stop"] = {{"theta_tol", c.stop.theta_tol},
               {"phi_tol", c.stop.phi_tol},
               {"max_iters", c.stop.max_iters},
               {"grad_tol", c.stop.grad_tol},
               {"divergence_ceiling", c.stop.divergence_ceiling}};
  j["classical"] = {{"v", schedule_json(c.classical_schedule.v)},
                    {"lambda", schedule_json(c.classical_schedule.lambda)},
                    {"max_iters", c.classical_max_iters},
                    {"tol", c.classical_tol}};
  j["init"] = c.init == InitKind::random ? "random" : "uniform";
  j["alpha0"] = optional_json(c.alpha0);
  j["beta0"] = optional_json(c.beta0);
  j["lambda0_scale"] = optional_json(c.lambda0_scale);
  j["seed"] = c.seed;
  j["rcm_runs"] = c.rcm_runs;
  j["reference"] = c.reference_path;
  j["output_dir"] = c.output_dir;
  j["record_trajectory"] = c.record_trajectory;
  j["bounds"] = {{"alpha_bar", optional_json(c.bounds.alpha_bar)},
                 {"beta_bar", optional_json(c.bounds.beta_bar)},
                 {"rho", c.bounds.rho},
                 {"epsilon", c.bounds.epsilon},
                 {"dist0", c.bounds.dist0}};
  j["fit"] = {{"iters", c.fit_iters}, {"restarts", c.fit_restarts}};
  return j.dump(2);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str(), std::filesystem::path(path).parent_path().string());
}

}  // namespace qopf
