#include <atomic>
#include <chrono>
#include <csignal>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "guide/config.hpp"
#include "guide/experiment.hpp"
#include "guide/server.hpp"

namespace fs = std::filesystem;
using namespace guide;

namespace {

std::atomic<bool> g_interrupted{false};

void on_signal(int) { g_interrupted = true; }

sim::SimConfig base_config(const std::string& config_path, const std::vector<std::string>& overrides) {
  sim::SimConfig cfg = config_path.empty() ? sim::SimConfig{} : config::load_run_config(config_path).sim;
  for (const std::string& o : overrides) config::apply_override(cfg, o);
  cfg.validate();
  return cfg;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

int cmd_run(const std::string& config_path, const std::vector<std::string>& overrides, std::size_t trials,
            const std::string& output, bool serial) {
  config::RunConfig cfg = config::load_run_config(config_path);
  for (const std::string& o : overrides) config::apply_override(cfg.sim, o);
  if (trials > 0) cfg.trials = trials;
  if (!output.empty()) cfg.output_dir = output;
  cfg.validate();

  const auto exec = serial ? mdp::Execution::Serial : mdp::Execution::Parallel;
  std::vector<std::unique_ptr<sim::Environment>> envs;
  std::vector<const sim::Environment*> ptrs;
  for (const fs::path& p : cfg.scene_paths()) {
    envs.push_back(std::make_unique<sim::Environment>(load_scene_file(p), cfg.sim, exec));
    ptrs.push_back(envs.back().get());
  }
  experiment::ExperimentSpec spec;
  spec.methods = cfg.methods;
  spec.trials = cfg.trials;
  spec.seed_base = cfg.seed_base;
  spec.keep_logs = true;
  const experiment::ExperimentResult result = experiment::run_experiment(ptrs, spec, exec);

  const fs::path out_dir(cfg.output_dir);
  fs::create_directories(out_dir / "logs");
  std::ostringstream table;
  experiment::write_results_table(table, result);
  write_file(out_dir / "results.tsv", table.str());
  write_file(out_dir / "summary.json", experiment::summary(result).dump(2) + "\n");
  write_file(out_dir / "config.json", config::to_json(cfg).dump(2) + "\n");
  for (std::size_t i = 0; i < result.trials.size(); ++i) {
    const auto& r = result.trials[i];
    std::ostringstream log;
    experiment::write_log(log, result.logs[i]);
    write_file(out_dir / "logs" / (r.scene + "_" + std::string(sim::to_string(r.method)) + "_" +
                                   std::to_string(r.trial) + ".jsonl"),
               log.str());
  }

  std::cout << std::left << std::setw(12) << "scene" << std::setw(11) << "method" << std::setw(8) << "trials"
            << std::setw(9) << "success" << std::setw(11) << "ambiguity" << std::setw(13) << "discomfort_p"
            << "discomfort_i\n";
  std::cout << std::fixed << std::setprecision(4);
  for (const auto& a : result.aggregates)
    std::cout << std::setw(12) << a.scene << std::setw(11) << sim::to_string(a.method) << std::setw(8) << a.trials
              << std::setw(9) << a.success_rate << std::setw(11) << a.ambiguity_ratio << std::setw(13)
              << a.discomfort_ratio_p << a.discomfort_ratio_i << '\n';
  return 0;
}

int cmd_solve(const std::string& scene_path, std::size_t goal, const std::string& config_path,
              const std::vector<std::string>& overrides) {
  const sim::SimConfig cfg = base_config(config_path, overrides);
  const Scene scene = load_scene_file(scene_path);
  if (goal >= scene.goals.size()) throw Error("goal index out of range");
  const Cell g = scene.goals[goal];
  const mdp::ActionSet actions = mdp::ActionSet::king_moves();
  bool others = false, reaches = false;
  for (int y = 0; y < scene.map.height() && !reaches; ++y)
    for (int x = 0; x < scene.map.width() && !reaches; ++x) {
      const Cell c{x, y};
      if (c == g || scene.map.occupied(c)) continue;
      others = true;
      reaches = mdp::min_steps(c, g, scene.map, actions).has_value();
    }
  if (others && !reaches) throw Error("enclosed goal: no free cell can reach it");
  const mdp::ValueField field = mdp::solve(g, scene.map, actions, cfg.mdp);
  mdp::write_matrix(std::cout, field);
  return 0;
}

int cmd_serve(const std::string& scene_path, const std::string& config_path, const std::vector<std::string>& overrides,
              server::ServerOptions options) {
  const sim::SimConfig cfg = base_config(config_path, overrides);
  sim::Environment env(load_scene_file(scene_path), cfg);
  server::Server srv(env, options);
  srv.start();
  std::cout << "listening on " << options.address << ":" << srv.port() << std::endl;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  while (!g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  srv.stop();
  return 0;
}

int cmd_metrics(const std::string& log_path, double d_p, double d_i) {
  std::ifstream in(log_path);
  if (!in) throw Error("cannot open log " + log_path);
  const sim::TrialLog log = experiment::read_log(in);
  const sim::Metrics m = sim::compute_metrics(log, d_p, d_i);
  const nlohmann::json out{{"scene", log.scene},
                           {"method", log.method},
                           {"seed", log.seed},
                           {"outcome", sim::to_string(log.outcome)},
                           {"success", m.success},
                           {"ambiguity_ratio", m.ambiguity_ratio},
                           {"discomfort_ratio_p", m.discomfort_ratio_p},
                           {"discomfort_ratio_i", m.discomfort_ratio_i}};
  std::cout << out.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Guide-behavior planning for robot tour guides"};
  app.require_subcommand(1);

  std::string config_path, output, scene_path, log_path;
  std::vector<std::string> overrides;
  std::size_t trials = 0, goal = 0;
  bool serial = false;
  double d_p = sim::kPersonalDistance, d_i = sim::kIntimateDistance;
  server::ServerOptions serve_opts;
  std::string method = "planner";

  auto* run = app.add_subcommand("run", "Run seeded trials and write results");
  run->add_option("config", config_path, "Run configuration")->required()->check(CLI::ExistingFile);
  run->add_option("--set", overrides, "Parameter override name=value");
  run->add_option("--trials", trials, "Trials per scene and method");
  run->add_option("--output", output, "Output directory");
  run->add_flag("--serial", serial, "Single-threaded reference path");

  auto* solve = app.add_subcommand("solve", "Print a goal's value field");
  solve->add_option("scene", scene_path, "Scene file")->required()->check(CLI::ExistingFile);
  solve->add_option("--goal", goal, "Goal index");
  solve->add_option("--config", config_path, "Take parameters from a run configuration");
  solve->add_option("--set", overrides, "Parameter override name=value");

  auto* serve = app.add_subcommand("serve", "Serve interactive sessions over WebSocket");
  serve->add_option("scene", scene_path, "Scene file")->required()->check(CLI::ExistingFile);
  serve->add_option("--port", serve_opts.port, "Port (0 picks one)");
  serve->add_option("--address", serve_opts.address, "Bind address");
  serve->add_option("--tick-hz", serve_opts.tick_hz, "Step cadence");
  serve->add_option("--log-dir", serve_opts.log_dir, "Where finished trial logs are written");
  serve->add_option("--method", method, "planner or lead_only");
  serve->add_option("--human-speed", serve_opts.session.human_speed, "Visitor speed in m/s");
  serve->add_option("--config", config_path, "Take parameters from a run configuration");
  serve->add_option("--set", overrides, "Parameter override name=value");

  auto* metrics = app.add_subcommand("metrics", "Recompute metrics from a stored trial log");
  metrics->add_option("log", log_path, "Trial log")->required()->check(CLI::ExistingFile);
  metrics->add_option("--d-p", d_p, "Personal distance threshold (m)");
  metrics->add_option("--d-i", d_i, "Intimate distance threshold (m)");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(config_path, overrides, trials, output, serial);
    if (*solve) return cmd_solve(scene_path, goal, config_path, overrides);
    if (*serve) {
      serve_opts.session.method = sim::method_from_string(method);
      return cmd_serve(scene_path, config_path, overrides, serve_opts);
    }
    if (*metrics) return cmd_metrics(log_path, d_p, d_i);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
