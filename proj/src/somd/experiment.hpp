#pragma once

// Declarative experiment runner: one config selects a value on each strategy
// axis (labeling, imbalance handling, classifier layout) and runs
// align -> rebalance -> (split) -> train -> predict -> (merge) -> score.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "somd/align.hpp"
#include "somd/duallabel.hpp"
#include "somd/eval.hpp"
#include "somd/rebalance.hpp"
#include "somd/tagger.hpp"

namespace somd {

inline constexpr const char* kToolkitVersion = "0.1.0";

enum class Imbalance { None, Weighted, Adaptive };
enum class ClassifierLayout { Single, Dual };

struct ExperimentConfig {
  std::string name;
  AlignStrategy labeling = AlignStrategy::Selective;
  Imbalance imbalance = Imbalance::None;
  WeightScalingConfig weighting;
  SamplingConfig sampling;
  ClassifierLayout classifier = ClassifierLayout::Single;
  MergePolicy policy = MergePolicy::Strict;
  std::uint64_t seed = 0;
  std::filesystem::path train;
  std::filesystem::path test;
  std::optional<std::filesystem::path> catalog;
  // Scores this prediction file instead of training.
  std::optional<std::filesystem::path> pred;
  TrainConfig training;

  void validate() const;
  // Row label; `name` when set, otherwise derived from the axes.
  std::string method_name() const;
  // Resolved "key = value" rendering; parses back to an equal config.
  std::string canonical() const;
  std::uint64_t hash() const;
};

/// Parses a config file. Keys before the first section and in [defaults]
/// apply to every [experiment] section; relative paths resolve against
/// `base_dir`. A file without [experiment] sections describes one
/// experiment.
std::vector<ExperimentConfig> parse_experiment_configs(std::string_view text,
                                                       const std::filesystem::path& base_dir);

struct ExperimentOutcome {
  EvalReport report;
  std::string report_json;  // report plus provenance block
};

/// Runs one experiment and writes config.ini, model file(s),
/// predictions.conll, report.json and log.txt into `out_dir`.
ExperimentOutcome run_experiment(const ExperimentConfig& config,
                                 const std::filesystem::path& out_dir);

struct GridRow {
  std::string method;
  std::filesystem::path out_dir;
  std::optional<Counts> micro;
  std::string error;  // empty on success
};

/// Runs every config in its own numbered subdirectory; a failing row is
/// recorded and the rest still run. Writes summary.tsv and summary.json.
std::vector<GridRow> run_grid(const std::vector<ExperimentConfig>& configs,
                              const std::filesystem::path& out_dir);

std::string grid_summary_tsv(const std::vector<GridRow>& rows);
std::string grid_summary_json(const std::vector<GridRow>& rows);

}  // namespace somd
