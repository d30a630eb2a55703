#include "guide/config.hpp"

#include <fstream>
#include <functional>
#include <sstream>

namespace guide::config {

using nlohmann::json;

namespace {

struct Param {
  std::string name;
  std::function<json(const sim::SimConfig&)> get;
  std::function<void(sim::SimConfig&, const json&)> set;
};

double as_double(const json& v, std::string_view name) {
  if (!v.is_number()) throw Error("parameter " + std::string(name) + ": expected a number");
  return v.get<double>();
}

std::size_t as_count(const json& v, std::string_view name) {
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw Error("parameter " + std::string(name) + ": expected a nonnegative integer");
  return v.get<std::size_t>();
}

int as_int(const json& v, std::string_view name) {
  if (!v.is_number_integer()) throw Error("parameter " + std::string(name) + ": expected an integer");
  return v.get<int>();
}

bool as_bool(const json& v, std::string_view name) {
  if (!v.is_boolean()) throw Error("parameter " + std::string(name) + ": expected true or false");
  return v.get<bool>();
}

template <class F>
Param real(std::string name, F field) {
  return {name, [field](const sim::SimConfig& c) { return json(*field(c)); },
          [field, name](sim::SimConfig& c, const json& v) { *field(c) = as_double(v, name); }};
}

template <class F>
Param count(std::string name, F field) {
  return {name, [field](const sim::SimConfig& c) { return json(*field(c)); },
          [field, name](sim::SimConfig& c, const json& v) { *field(c) = as_count(v, name); }};
}

template <class F>
Param integer(std::string name, F field) {
  return {name, [field](const sim::SimConfig& c) { return json(*field(c)); },
          [field, name](sim::SimConfig& c, const json& v) { *field(c) = as_int(v, name); }};
}

template <class F>
Param flag(std::string name, F field) {
  return {name, [field](const sim::SimConfig& c) { return json(*field(c)); },
          [field, name](sim::SimConfig& c, const json& v) { *field(c) = as_bool(v, name); }};
}

using C = sim::SimConfig;

const std::vector<Param>& registry() {
  static const std::vector<Param> params = [] {
    std::vector<Param> p;
    // planner
    p.push_back(real("c", [](auto& c) { return &c.planner.c; }));
    p.push_back(real("theta_s", [](auto& c) { return &c.planner.theta_s; }));
    p.push_back(real("delta_theta", [](auto& c) { return &c.planner.delta_theta; }));
    p.push_back(count("l_target", [](auto& c) { return &c.planner.l_target; }));
    p.push_back(count("l_real", [](auto& c) { return &c.planner.l_real; }));
    p.push_back(real("C_0", [](auto& c) { return &c.planner.affordance_cost; }));
    p.push_back(real("w_d", [](auto& c) { return &c.planner.w_d; }));
    p.push_back(real("k_d", [](auto& c) { return &c.planner.k_d; }));
    p.push_back(real("w_t", [](auto& c) { return &c.planner.w_t; }));
    p.push_back(real("w_aff", [](auto& c) { return &c.planner.w_aff; }));
    p.push_back(real("t_per_step", [](auto& c) { return &c.planner.t_per_step; }));
    p.push_back(real("lead_radius", [](auto& c) { return &c.planner.lead_radius; }));
    p.push_back(real("point_radius", [](auto& c) { return &c.planner.point_radius; }));
    p.push_back(integer("extra_depth", [](auto& c) { return &c.planner.extra_depth; }));
    p.push_back(integer("max_depth", [](auto& c) { return &c.planner.max_depth; }));
    p.push_back(count("iterations", [](auto& c) { return &c.planner.iterations; }));
    p.push_back(real("wall_ms", [](auto& c) { return &c.planner.wall_ms; }));
    // prediction (planner's model)
    p.push_back(real("d_social", [](auto& c) { return &c.prediction.social.d_social; }));
    p.push_back(real("theta_m", [](auto& c) { return &c.prediction.theta_m; }));
    p.push_back(real("lambda", [](auto& c) { return &c.prediction.social.lambda; }));
    p.push_back(count("l", [](auto& c) { return &c.prediction.history_length; }));
    p.push_back(real("beta_g", [](auto& c) { return &c.prediction.beta_g; }));
    p.push_back(real("beta_a", [](auto& c) { return &c.prediction.beta_a; }));
    p.push_back(real("w", [](auto& c) { return &c.mdp.w; }));
    p.push_back(real("gamma", [](auto& c) { return &c.mdp.gamma; }));
    p.push_back(real("k_n", [](auto& c) { return &c.prediction.social.k_n; }));
    p.push_back(real("impact_radius", [](auto& c) { return &c.prediction.impact_radius; }));
    p.push_back(count("K", [](auto& c) { return &c.prediction.samples; }));
    p.push_back(real("xi_lead", [](auto& c) { return &c.behaviors.lead.legibility_gain; }));
    p.push_back(real("xi_point", [](auto& c) { return &c.behaviors.point.legibility_gain; }));
    p.push_back(real("lead_speed", [](auto& c) { return &c.behaviors.lead.move_speed; }));
    p.push_back(real("point_speed", [](auto& c) { return &c.behaviors.point.move_speed; }));
    p.push_back({"advantage_baseline",
                 [](const C& c) {
                   return json(c.prediction.baseline == prediction::AdvantageBaseline::CurrentState ? "current"
                                                                                                   : "successor");
                 },
                 [](C& c, const json& v) {
                   const std::string s = v.is_string() ? v.get<std::string>() : "";
                   if (s == "current") c.prediction.baseline = prediction::AdvantageBaseline::CurrentState;
                   else if (s == "successor") c.prediction.baseline = prediction::AdvantageBaseline::Successor;
                   else throw Error("parameter advantage_baseline: expected \"current\" or \"successor\"");
                 }});
    p.push_back(flag("planner_guide_goal_only", [](auto& c) { return &c.prediction.guide_goal_only; }));
    // mdp
    p.push_back(real("alpha", [](auto& c) { return &c.mdp.alpha; }));
    p.push_back(real("C_0_occupation", [](auto& c) { return &c.mdp.occupation_cost; }));
    p.push_back(real("effort_cost", [](auto& c) { return &c.mdp.effort_cost; }));
    p.push_back(real("idle_effort", [](auto& c) { return &c.mdp.idle_effort; }));
    p.push_back(real("epsilon", [](auto& c) { return &c.mdp.epsilon; }));
    p.push_back(integer("max_sweeps", [](auto& c) { return &c.mdp.max_sweeps; }));
    // simulated visitor
    p.push_back(flag("agent_guide_goal_only", [](auto& c) { return &c.agent.guide_goal_only; }));
    p.push_back(count("agent_K", [](auto& c) { return &c.agent.samples; }));
    return p;
  }();
  return params;
}

const Param& find(std::string_view name) {
  for (const Param& p : registry())
    if (p.name == name) return p;
  throw Error("unknown parameter '" + std::string(name) + "'");
}

void sync_agent(sim::SimConfig& cfg) {
  // The visitor shares the human-model constants; only its goal belief and K are separate.
  const bool ggo = cfg.agent.guide_goal_only;
  const std::size_t k = cfg.agent.samples;
  cfg.agent = cfg.prediction;
  cfg.agent.guide_goal_only = ggo;
  cfg.agent.samples = k;
}

}  // namespace

const std::vector<std::string>& parameter_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const Param& p : registry()) out.push_back(p.name);
    return out;
  }();
  return names;
}

json get_parameter(const sim::SimConfig& cfg, std::string_view name) { return find(name).get(cfg); }

void set_parameter(sim::SimConfig& cfg, std::string_view name, const json& value) {
  find(name).set(cfg, value);
  sync_agent(cfg);
}

void apply_override(sim::SimConfig& cfg, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) throw Error("override must look like name=value");
  const std::string_view name = assignment.substr(0, eq);
  const std::string text(assignment.substr(eq + 1));
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  set_parameter(cfg, name, value);
}

std::vector<std::filesystem::path> RunConfig::scene_paths() const {
  std::vector<std::filesystem::path> out;
  for (const std::string& s : scenes) {
    std::filesystem::path p(s);
    out.push_back(p.is_absolute() || base_dir.empty() ? p : base_dir / p);
  }
  return out;
}

void RunConfig::validate() const {
  if (scenes.empty()) throw Error("config: at least one scene required");
  if (methods.empty()) throw Error("config: at least one method required");
  if (trials == 0) throw Error("config: trials must be at least 1");
  sim.validate();
}

RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir) {
  json doc = json::parse(text.begin(), text.end(), nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw Error("config parse error: expected a JSON object");
  RunConfig cfg;
  cfg.base_dir = base_dir;
  try {
    for (const auto& [key, value] : doc.items()) {
      if (key == "schema") {
        if (value != 1) throw Error("config schema: unsupported version");
      } else if (key == "scenes") {
        cfg.scenes = value.get<std::vector<std::string>>();
      } else if (key == "methods") {
        cfg.methods.clear();
        for (const auto& m : value) cfg.methods.push_back(sim::method_from_string(m.get<std::string>()));
      } else if (key == "trials") {
        cfg.trials = value.get<std::size_t>();
      } else if (key == "seed_base") {
        cfg.seed_base = value.get<std::uint64_t>();
      } else if (key == "output_dir") {
        cfg.output_dir = value.get<std::string>();
      } else if (key == "params") {
        if (!value.is_object()) throw Error("config params: expected an object");
        for (const auto& [name, v] : value.items()) set_parameter(cfg.sim, name, v);
      } else {
        throw Error("config: unknown field '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw Error(std::string("config type error: ") + e.what());
  }
  if (!doc.contains("schema")) throw Error("missing field schema");
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str(), path.parent_path());
}

json to_json(const RunConfig& cfg) {
  json methods = json::array();
  for (sim::Method m : cfg.methods) methods.push_back(std::string(sim::to_string(m)));
  json params = json::object();
  for (const Param& p : registry()) params[p.name] = p.get(cfg.sim);
  return json{{"schema", 1},          {"scenes", cfg.scenes},       {"methods", methods},
              {"trials", cfg.trials}, {"seed_base", cfg.seed_base}, {"output_dir", cfg.output_dir},
              {"params", params}};
}

}  // namespace guide::config
