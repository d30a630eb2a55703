#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "guide/sim.hpp"

namespace guide::experiment {

/// Seed for one trial. Independent of method so compared methods see the same visitor seeds.
std::uint64_t trial_seed(std::uint64_t seed_base, std::size_t scene_index, std::size_t trial);

struct TrialResult {
  std::string scene;
  sim::Method method = sim::Method::Planner;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  sim::Outcome outcome = sim::Outcome::Timeout;
  std::size_t steps = 0;
  sim::Metrics metrics;
};

struct Aggregate {
  std::string scene;
  sim::Method method = sim::Method::Planner;
  std::size_t trials = 0;
  double success_rate = 0.0;
  double ambiguity_ratio = 0.0;
  double discomfort_ratio_p = 0.0;
  double discomfort_ratio_i = 0.0;
  double intimate_free = 0.0;  // fraction of trials with discomfort_ratio_i == 0
};

struct ExperimentResult {
  std::vector<TrialResult> trials;  // scene-major, then method, then trial
  std::vector<sim::TrialLog> logs;  // parallel to trials when kept
  std::vector<Aggregate> aggregates;
};

struct ExperimentSpec {
  std::vector<sim::Method> methods{sim::Method::Planner, sim::Method::LeadOnly};
  std::size_t trials = 50;
  std::uint64_t seed_base = 1;
  bool keep_logs = false;
};

/// Runs every (scene, method, trial) with a model-driven visitor. Parallel mode spreads trials
/// across OpenMP threads; the output does not depend on the mode.
ExperimentResult run_experiment(std::span<const sim::Environment* const> scenes, const ExperimentSpec& spec,
                                mdp::Execution execution = mdp::Execution::Parallel);

std::vector<Aggregate> aggregate(std::span<const TrialResult> trials);

/// Tab-separated: one row per trial, then one aggregate row per scene and method.
void write_results_table(std::ostream& out, const ExperimentResult& result);
/// Success, ambiguity and discomfort tables keyed scene -> method.
nlohmann::json summary(const ExperimentResult& result);

/// Per-trial log: a header record, one record per step, an end record.
void write_log(std::ostream& out, const sim::TrialLog& log);
sim::TrialLog read_log(std::istream& in);

/// Shortest round-trip decimal form.
std::string format_number(double v);

}  // namespace guide::experiment
