#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sdelap/stochastic.hpp"
#include "sdelap/surrogate.hpp"

namespace sdelap {

enum class GridMode { equispaced, uniform_random };

std::string to_string(GridMode mode);
GridMode grid_mode_from_string(const std::string& name);

struct Range {
  double low = 0.0;
  double high = 0.0;
  friend bool operator==(const Range&, const Range&) = default;
};

struct ExperimentConfig {
  std::size_t n_trajectories = 200;
  std::size_t n_samples = 200;
  double t_max = 1.0;
  Range x0_range{0.1, 1.0};
  Range mu_range{4.0, 8.0};
  Range sigma_range{0.1, 1.0};
  int epochs = 100;
  std::vector<std::uint64_t> seeds{0, 1, 2};
  double test_fraction = 0.2;
  double split_time = 0.5;
  GridMode grid_mode = GridMode::equispaced;
  // Surrogate hyperparameters. epochs, split_time and seed are overwritten
  // from the fields above when a run starts.
  TrainConfig train{};

  void validate() const;  // throws ConfigError

  // TrainConfig for one seed of this experiment.
  TrainConfig train_config(std::uint64_t seed) const;

  // Flat "key = value" lines, one per field, in a fixed order.
  std::string to_text() const;
  // FNV-1a of to_text(), as 16 hex digits.
  std::string hash() const;
};

// Parses flat "key = value" text ('#' starts a comment). Unknown keys and
// malformed values raise ConfigError. Keys not present keep `base` values.
ExperimentConfig parse_config(const std::string& text, ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {});
// Applies one key/value pair; used by the parser and by CLI overrides.
void set_config_value(ExperimentConfig& config, const std::string& key, const std::string& value);

struct DatasetRecord {
  GbmParams params;
  Trajectory trajectory;
  friend bool operator==(const DatasetRecord&, const DatasetRecord&) = default;
};

struct Dataset {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<DatasetRecord> records;

  std::vector<Trajectory> trajectories() const;
};

// Record i draws parameters, times and its path from SeededRng(seed, 0).substream(i).
Dataset generate_dataset(const ExperimentConfig& config, std::uint64_t seed);

// Seeded shuffle, then the first round(n * test_fraction) records (at least
// one, at most n - 1) become the test set.
std::pair<Dataset, Dataset> split_dataset(const Dataset& ds, double test_fraction,
                                          std::uint64_t seed);

// JSON Lines: a header object then one object per record.
std::string serialize_dataset(const Dataset& ds);
Dataset deserialize_dataset(const std::string& text);
void save_dataset(const Dataset& ds, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

enum class Method { surrogate, exp_fit, constant_last };

std::string to_string(Method method);
Method method_from_string(const std::string& name);
std::vector<Method> all_methods();

// Pooled normalized-unit RMSE over every post-split point of every
// trajectory. Each trajectory is divided by the largest |value| on its prefix.
double baseline_rmse(Method method, const std::vector<Trajectory>& test, double split_time);

// Trains (surrogate only) on `train` and scores the forecast on `test`.
double evaluate_method(Method method, const Dataset& train, const Dataset& test,
                       const ExperimentConfig& config, std::uint64_t seed);

struct ReportRow {
  std::string method;
  double mean_rmse = 0.0;
  double std_rmse = 0.0;
  std::vector<double> per_seed;     // in the order of EvalReport::seeds
  std::optional<std::string> error;  // set when the method failed on some seed
};

struct EvalReport {
  std::vector<std::uint64_t> seeds;
  std::vector<ReportRow> rows;
  std::string config_text;
};

// Mean and sample standard deviation (n - 1). Values are summed in sorted
// order so the result does not depend on the order of the seeds.
std::pair<double, double> mean_and_std(std::vector<double> values);

EvalReport run_experiment(const ExperimentConfig& config);

// Writes `path` (CSV: method,mean_rmse,std_rmse with 6 decimals) and
// `path` + ".seeds.json" (per-seed values and the config). Rows whose mean or
// std do not recompute from per_seed are rejected with ConfigError before
// anything is written.
void emit_report(const EvalReport& report, const std::filesystem::path& path);
std::string report_csv(const EvalReport& report);
std::string report_sidecar(const EvalReport& report);
void validate_report(const EvalReport& report);

}  // namespace sdelap
