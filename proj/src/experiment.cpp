#include "guide/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <exception>
#include <istream>
#include <map>
#include <ostream>

namespace guide::experiment {

using nlohmann::json;

std::uint64_t trial_seed(std::uint64_t seed_base, std::size_t scene_index, std::size_t trial) {
  return seed_base + 1000003ull * scene_index + trial;
}

std::string format_number(double v) {
  if (v == 0.0) return "0";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

struct Job {
  std::size_t scene;
  sim::Method method;
  std::size_t trial;
};

TrialResult run_job(const sim::Environment& env, const Job& job, std::uint64_t seed, sim::TrialLog* log_out) {
  sim::ModelDrivenAgent agent;
  sim::TrialLog log = job.method == sim::Method::Planner ? sim::run_trial(env, sim::Method::Planner, agent, seed)
                                                         : sim::lead_only_baseline(env, seed);
  TrialResult r;
  r.scene = env.scene().name;
  r.method = job.method;
  r.trial = job.trial;
  r.seed = seed;
  r.outcome = log.outcome;
  r.steps = log.steps.size() - 1;
  r.metrics = sim::compute_metrics(log);
  if (log_out) *log_out = std::move(log);
  return r;
}

}  // namespace

ExperimentResult run_experiment(std::span<const sim::Environment* const> scenes, const ExperimentSpec& spec,
                                mdp::Execution execution) {
  if (scenes.empty()) throw Error("run_experiment: no scenes");
  if (spec.methods.empty()) throw Error("run_experiment: no methods");
  if (spec.trials == 0) throw Error("run_experiment: trials must be at least 1");

  std::vector<Job> jobs;
  for (std::size_t s = 0; s < scenes.size(); ++s)
    for (sim::Method m : spec.methods)
      for (std::size_t t = 0; t < spec.trials; ++t) jobs.push_back({s, m, t});

  ExperimentResult result;
  result.trials.resize(jobs.size());
  if (spec.keep_logs) result.logs.resize(jobs.size());

  auto one = [&](std::size_t i) {
    const Job& job = jobs[i];
    result.trials[i] = run_job(*scenes[job.scene], job, trial_seed(spec.seed_base, job.scene, job.trial),
                               spec.keep_logs ? &result.logs[i] : nullptr);
  };

  const auto n = static_cast<long long>(jobs.size());
  if (execution == mdp::Execution::Serial) {
    for (long long i = 0; i < n; ++i) one(static_cast<std::size_t>(i));
  } else {
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
    for (long long i = 0; i < n; ++i) {
      try {
        one(static_cast<std::size_t>(i));
      } catch (...) {
#pragma omp critical(experiment_failure)
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
  }
  result.aggregates = aggregate(result.trials);
  return result;
}

std::vector<Aggregate> aggregate(std::span<const TrialResult> trials) {
  std::vector<Aggregate> out;
  for (const TrialResult& r : trials) {
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const Aggregate& a) { return a.scene == r.scene && a.method == r.method; });
    if (it == out.end()) {
      out.push_back(Aggregate{r.scene, r.method});
      it = out.end() - 1;
    }
    ++it->trials;
    it->success_rate += r.metrics.success ? 1.0 : 0.0;
    it->ambiguity_ratio += r.metrics.ambiguity_ratio;
    it->discomfort_ratio_p += r.metrics.discomfort_ratio_p;
    it->discomfort_ratio_i += r.metrics.discomfort_ratio_i;
    it->intimate_free += r.metrics.discomfort_ratio_i == 0.0 ? 1.0 : 0.0;
  }
  for (Aggregate& a : out) {
    const double n = static_cast<double>(a.trials);
    a.success_rate /= n;
    a.ambiguity_ratio /= n;
    a.discomfort_ratio_p /= n;
    a.discomfort_ratio_i /= n;
    a.intimate_free /= n;
  }
  return out;
}

void write_results_table(std::ostream& out, const ExperimentResult& result) {
  out << "row\tscene\tmethod\ttrial\tseed\toutcome\tsteps\tsuccess\tambiguity_ratio\tdiscomfort_ratio_p"
         "\tdiscomfort_ratio_i\n";
  for (const TrialResult& r : result.trials) {
    out << "trial\t" << r.scene << '\t' << sim::to_string(r.method) << '\t' << r.trial << '\t' << r.seed << '\t'
        << sim::to_string(r.outcome) << '\t' << r.steps << '\t' << (r.metrics.success ? 1 : 0) << '\t'
        << format_number(r.metrics.ambiguity_ratio) << '\t' << format_number(r.metrics.discomfort_ratio_p) << '\t'
        << format_number(r.metrics.discomfort_ratio_i) << '\n';
  }
  for (const Aggregate& a : result.aggregates) {
    out << "mean\t" << a.scene << '\t' << sim::to_string(a.method) << '\t' << a.trials << "\t-\t-\t-\t"
        << format_number(a.success_rate) << '\t' << format_number(a.ambiguity_ratio) << '\t'
        << format_number(a.discomfort_ratio_p) << '\t' << format_number(a.discomfort_ratio_i) << '\n';
  }
}

json summary(const ExperimentResult& result) {
  json success = json::object(), ambiguity = json::object(), discomfort = json::object();
  json rows = json::array();
  for (const Aggregate& a : result.aggregates) {
    const std::string m(sim::to_string(a.method));
    success[a.scene][m] = a.success_rate;
    ambiguity[a.scene][m] = a.ambiguity_ratio;
    discomfort[a.scene][m] = {{"d_p", a.discomfort_ratio_p}, {"d_i", a.discomfort_ratio_i}};
    rows.push_back({{"scene", a.scene},
                    {"method", m},
                    {"trials", a.trials},
                    {"success_rate", a.success_rate},
                    {"ambiguity_ratio", a.ambiguity_ratio},
                    {"discomfort_ratio_p", a.discomfort_ratio_p},
                    {"discomfort_ratio_i", a.discomfort_ratio_i},
                    {"intimate_free_fraction", a.intimate_free}});
  }
  return json{{"v", 1},
              {"success_rate", success},
              {"ambiguity_ratio", ambiguity},
              {"discomfort_ratio", discomfort},
              {"aggregates", rows},
              {"thresholds", {{"d_p", sim::kPersonalDistance}, {"d_i", sim::kIntimateDistance}}}};
}

void write_log(std::ostream& out, const sim::TrialLog& log) {
  out << json{{"v", 1},
              {"type", "header"},
              {"scene", log.scene},
              {"method", log.method},
              {"agent", log.agent},
              {"seed", log.seed},
              {"t_per_step", log.t_per_step}}
             .dump()
      << '\n';
  for (const sim::StepRecord& r : log.steps) {
    out << json{{"type", "step"},
                {"t", r.time},
                {"human", {r.human.x(), r.human.y()}},
                {"robot", {r.robot.x(), r.robot.y()}},
                {"behavior", prediction::to_string(r.behavior)},
                {"distance", r.distance},
                {"in_affordance", r.in_affordance}}
               .dump()
        << '\n';
  }
  out << json{{"type", "end"}, {"outcome", sim::to_string(log.outcome)}}.dump() << '\n';
}

sim::TrialLog read_log(std::istream& in) {
  sim::TrialLog log;
  bool header = false, end = false;
  std::string line;
  std::size_t lineno = 0;
  auto point = [](const json& j) { return Vec2(j.at(0).get<double>(), j.at(1).get<double>()); };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const json rec = json::parse(line, nullptr, false);
    if (rec.is_discarded() || !rec.is_object() || !rec.contains("type"))
      throw Error("log line " + std::to_string(lineno) + ": malformed record");
    try {
      const std::string type = rec.at("type").get<std::string>();
      if (type == "header") {
        if (rec.value("v", 0) != 1) throw Error("log: unsupported version");
        log.scene = rec.at("scene").get<std::string>();
        log.method = rec.at("method").get<std::string>();
        log.agent = rec.value("agent", std::string("model"));
        log.seed = rec.at("seed").get<std::uint64_t>();
        log.t_per_step = rec.at("t_per_step").get<double>();
        header = true;
      } else if (type == "step") {
        sim::StepRecord r;
        r.time = rec.at("t").get<double>();
        r.human = point(rec.at("human"));
        r.robot = point(rec.at("robot"));
        r.behavior = prediction::behavior_from_string(rec.at("behavior").get<std::string>());
        r.distance = rec.at("distance").get<double>();
        r.in_affordance = rec.at("in_affordance").get<bool>();
        log.steps.push_back(r);
      } else if (type == "end") {
        log.outcome = sim::outcome_from_string(rec.at("outcome").get<std::string>());
        end = true;
      } else {
        throw Error("unknown record type '" + type + "'");
      }
    } catch (const json::exception& e) {
      throw Error("log line " + std::to_string(lineno) + ": " + e.what());
    } catch (const Error& e) {
      throw Error("log line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (!header) throw Error("log: missing header record");
  if (!end) throw Error("log: missing end record");
  return log;
}

}  // namespace guide::experiment
