#include "sdelap/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "sdelap/error.hpp"

namespace sdelap {

namespace {

constexpr std::uint64_t kDatasetStream = 0xD5;
constexpr std::uint64_t kSplitStream = 0x5B;
constexpr const char* kDatasetFormat = "sdelap-dataset";
constexpr int kDatasetVersion = 1;

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw ConfigError("bad number for '" + key + "': '" + text + "'");
  }
  return v;
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  std::uint64_t v = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw ConfigError("bad integer for '" + key + "': '" + text + "'");
  }
  return v;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) parts.push_back(trim(item));
  return parts;
}

Range parse_range(const std::string& key, const std::string& text) {
  const auto parts = split_list(text);
  if (parts.size() != 2) throw ConfigError("'" + key + "' expects 'low,high'");
  return {parse_double(key, parts[0]), parse_double(key, parts[1])};
}

void check_range(const char* name, const Range& r) {
  if (!std::isfinite(r.low) || !std::isfinite(r.high) || r.low > r.high) {
    throw ConfigError(std::string(name) + " must satisfy low <= high");
  }
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<std::size_t> shuffled(std::size_t n, SeededRng rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) {
    std::swap(idx[i - 1], idx[static_cast<std::size_t>(rng.next_u64() % i)]);
  }
  return idx;
}

TimeGrid observation_grid(const ExperimentConfig& config, SeededRng& rng) {
  if (config.grid_mode == GridMode::equispaced) {
    return TimeGrid::equispaced(config.n_samples, config.t_max);
  }
  const double low = config.t_max / static_cast<double>(config.n_samples);
  std::vector<double> times(config.n_samples);
  for (;;) {
    for (auto& t : times) t = rng.uniform(low, config.t_max);
    std::sort(times.begin(), times.end());
    if (std::adjacent_find(times.begin(), times.end()) == times.end()) break;
  }
  return TimeGrid(std::move(times));
}

double prefix_scale(const Trajectory& traj, double split_time) {
  double peak = 0.0;
  const auto t = traj.times();
  const auto x = traj.values();
  for (std::size_t i = 0; i < t.size() && t[i] <= split_time; ++i) {
    peak = std::max(peak, std::abs(x[i]));
  }
  return std::max(peak, 1e-12);
}

}  // namespace

std::string to_string(GridMode mode) {
  return mode == GridMode::equispaced ? "equispaced" : "uniform-random";
}

GridMode grid_mode_from_string(const std::string& name) {
  if (name == "equispaced") return GridMode::equispaced;
  if (name == "uniform-random") return GridMode::uniform_random;
  throw ConfigError("unknown grid_mode '" + name + "' (expected equispaced or uniform-random)");
}

void ExperimentConfig::validate() const {
  if (n_trajectories < 2) throw ConfigError("n_trajectories must be >= 2");
  if (n_samples < 2) throw ConfigError("n_samples must be >= 2");
  if (!(t_max > 0.0) || !std::isfinite(t_max)) throw ConfigError("t_max must be > 0");
  check_range("x0_range", x0_range);
  check_range("mu_range", mu_range);
  check_range("sigma_range", sigma_range);
  if (!(x0_range.low > 0.0)) throw ConfigError("x0_range must be > 0");
  if (sigma_range.low < 0.0) throw ConfigError("sigma_range must be >= 0");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (seeds.empty()) throw ConfigError("seeds must be nonempty");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ConfigError("test_fraction must lie in (0, 1)");
  }
  if (!(split_time > 0.0 && split_time < t_max)) {
    throw ConfigError("split_time must lie in (0, t_max)");
  }
  train_config(seeds.front()).validate();
  if (!(t_max < train.horizon)) throw ConfigError("t_max must be below the ILT horizon");
}

TrainConfig ExperimentConfig::train_config(std::uint64_t seed) const {
  TrainConfig tc = train;
  tc.epochs = epochs;
  tc.split_time = split_time;
  tc.seed = seed;
  return tc;
}

std::string ExperimentConfig::to_text() const {
  std::ostringstream out;
  auto range = [](const Range& r) { return format_double(r.low) + "," + format_double(r.high); };
  out << "n_trajectories = " << n_trajectories << "\n";
  out << "n_samples = " << n_samples << "\n";
  out << "t_max = " << format_double(t_max) << "\n";
  out << "x0_range = " << range(x0_range) << "\n";
  out << "mu_range = " << range(mu_range) << "\n";
  out << "sigma_range = " << range(sigma_range) << "\n";
  out << "epochs = " << epochs << "\n";
  out << "seeds = ";
  for (std::size_t i = 0; i < seeds.size(); ++i) out << (i ? "," : "") << seeds[i];
  out << "\n";
  out << "test_fraction = " << format_double(test_fraction) << "\n";
  out << "split_time = " << format_double(split_time) << "\n";
  out << "grid_mode = " << to_string(grid_mode) << "\n";
  out << "learning_rate = " << format_double(train.learning_rate) << "\n";
  out << "batch_size = " << train.batch_size << "\n";
  out << "latent_dim = " << train.latent_dim << "\n";
  out << "hidden_width = " << train.hidden_width << "\n";
  out << "query_count = " << train.query_count << "\n";
  out << "input_grid_size = " << train.input_grid_size << "\n";
  out << "sigma0 = " << format_double(train.sigma0) << "\n";
  out << "horizon = " << format_double(train.horizon) << "\n";
  out << "head_scale_time = " << format_double(train.head_scale_time) << "\n";
  out << "optimizer = " << to_string(train.optimizer) << "\n";
  return out.str();
}

std::string ExperimentConfig::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a(to_text())));
  return buf;
}

void set_config_value(ExperimentConfig& c, const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  if (key == "n_trajectories") c.n_trajectories = parse_unsigned(key, v);
  else if (key == "n_samples") c.n_samples = parse_unsigned(key, v);
  else if (key == "t_max") c.t_max = parse_double(key, v);
  else if (key == "x0_range") c.x0_range = parse_range(key, v);
  else if (key == "mu_range") c.mu_range = parse_range(key, v);
  else if (key == "sigma_range") c.sigma_range = parse_range(key, v);
  else if (key == "epochs") c.epochs = static_cast<int>(parse_unsigned(key, v));
  else if (key == "seeds") {
    c.seeds.clear();
    for (const auto& part : split_list(v)) c.seeds.push_back(parse_unsigned(key, part));
  }
  else if (key == "test_fraction") c.test_fraction = parse_double(key, v);
  else if (key == "split_time") c.split_time = parse_double(key, v);
  else if (key == "grid_mode") c.grid_mode = grid_mode_from_string(v);
  else if (key == "learning_rate") c.train.learning_rate = parse_double(key, v);
  else if (key == "batch_size") c.train.batch_size = parse_unsigned(key, v);
  else if (key == "latent_dim") c.train.latent_dim = parse_unsigned(key, v);
  else if (key == "hidden_width") c.train.hidden_width = parse_unsigned(key, v);
  else if (key == "query_count") c.train.query_count = parse_unsigned(key, v);
  else if (key == "input_grid_size") c.train.input_grid_size = parse_unsigned(key, v);
  else if (key == "sigma0") c.train.sigma0 = parse_double(key, v);
  else if (key == "horizon") c.train.horizon = parse_double(key, v);
  else if (key == "head_scale_time") c.train.head_scale_time = parse_double(key, v);
  else if (key == "optimizer") c.train.optimizer = optimizer_from_string(v);
  else throw ConfigError("unknown config key '" + key + "'");
}

ExperimentConfig parse_config(const std::string& text, ExperimentConfig base) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    set_config_value(base, trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return base;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), std::move(base));
}

std::vector<Trajectory> Dataset::trajectories() const {
  std::vector<Trajectory> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.trajectory);
  return out;
}

Dataset generate_dataset(const ExperimentConfig& config, std::uint64_t seed) {
  config.validate();
  Dataset ds;
  ds.config_hash = config.hash();
  ds.seed = seed;
  ds.records.resize(config.n_trajectories);
  const SeededRng root(seed, kDatasetStream);
  const auto count = static_cast<std::int64_t>(config.n_trajectories);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < count; ++i) {
    SeededRng rng = root.substream(static_cast<std::uint64_t>(i));
    GbmParams p;
    p.x0 = rng.uniform(config.x0_range.low, config.x0_range.high);
    p.mu = rng.uniform(config.mu_range.low, config.mu_range.high);
    p.sigma = rng.uniform(config.sigma_range.low, config.sigma_range.high);
    const TimeGrid grid = observation_grid(config, rng);
    ds.records[static_cast<std::size_t>(i)] = {p, sample_gbm_exact(p, grid, rng)};
  }
  return ds;
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& ds, double test_fraction,
                                          std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ConfigError("test_fraction must lie in (0, 1)");
  }
  const std::size_t n = ds.records.size();
  if (n < 2) throw InsufficientDataError("splitting needs at least 2 records");
  auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(n) * test_fraction));
  n_test = std::clamp<std::size_t>(n_test, 1, n - 1);

  const auto order = shuffled(n, SeededRng(seed, kSplitStream));
  Dataset train{ds.config_hash, ds.seed, {}};
  Dataset test{ds.config_hash, ds.seed, {}};
  for (std::size_t i = 0; i < n; ++i) {
    (i < n_test ? test : train).records.push_back(ds.records[order[i]]);
  }
  return {std::move(train), std::move(test)};
}

std::string serialize_dataset(const Dataset& ds) {
  std::string out;
  nlohmann::ordered_json header;
  header["format"] = kDatasetFormat;
  header["version"] = kDatasetVersion;
  header["config_hash"] = ds.config_hash;
  header["seed"] = ds.seed;
  header["n_records"] = ds.records.size();
  out += header.dump() + "\n";
  for (const auto& r : ds.records) {
    nlohmann::ordered_json j;
    j["x0"] = r.params.x0;
    j["mu"] = r.params.mu;
    j["sigma"] = r.params.sigma;
    const auto t = r.trajectory.times();
    const auto x = r.trajectory.values();
    j["times"] = std::vector<double>(t.begin(), t.end());
    j["values"] = std::vector<double>(x.begin(), x.end());
    out += j.dump() + "\n";
  }
  return out;
}

Dataset deserialize_dataset(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  Dataset ds;
  try {
    if (!std::getline(in, line)) throw IoError("dataset file is empty");
    const auto header = nlohmann::json::parse(line);
    if (header.at("format").get<std::string>() != kDatasetFormat) {
      throw IoError("not a dataset file");
    }
    if (header.at("version").get<int>() != kDatasetVersion) {
      throw IoError("unsupported dataset version");
    }
    ds.config_hash = header.at("config_hash").get<std::string>();
    ds.seed = header.at("seed").get<std::uint64_t>();
    while (std::getline(in, line)) {
      if (trim(line).empty()) continue;
      const auto j = nlohmann::json::parse(line);
      GbmParams p{j.at("x0").get<double>(), j.at("mu").get<double>(),
                  j.at("sigma").get<double>()};
      ds.records.push_back({p, Trajectory(TimeGrid(j.at("times").get<std::vector<double>>()),
                                          j.at("values").get<std::vector<double>>())});
    }
    if (ds.records.size() != header.at("n_records").get<std::size_t>()) {
      throw IoError("dataset record count does not match header");
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed dataset: ") + e.what());
  }
  return ds;
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << serialize_dataset(ds);
  if (!out) throw IoError("failed writing " + path.string());
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_dataset(buf.str());
}

std::string to_string(Method method) {
  switch (method) {
    case Method::surrogate: return "surrogate";
    case Method::exp_fit: return "exp-fit";
    case Method::constant_last: return "constant-last";
  }
  return "?";
}

Method method_from_string(const std::string& name) {
  for (auto m : all_methods()) {
    if (to_string(m) == name) return m;
  }
  throw ConfigError("unknown method '" + name + "' (expected surrogate, exp-fit or constant-last)");
}

std::vector<Method> all_methods() {
  return {Method::surrogate, Method::exp_fit, Method::constant_last};
}

double baseline_rmse(Method method, const std::vector<Trajectory>& test, double split_time) {
  if (method == Method::surrogate) throw ConfigError("baseline_rmse: surrogate is not a baseline");
  if (test.empty()) throw InsufficientDataError("test set is empty");
  double ss = 0.0;
  std::size_t count = 0;
  for (const auto& traj : test) {
    const double scale = prefix_scale(traj, split_time);
    const auto ex = make_forecast_example(traj, split_time);
    if (method == Method::exp_fit) {
      const auto fit = baseline_exponential_fit(traj, split_time);
      for (std::size_t j = 0; j < ex.query_times.size(); ++j) {
        const double d = (fit(ex.query_times[j]) - ex.targets[j]) / scale;
        ss += d * d;
      }
    } else {
      const double last = baseline_constant_last(traj, split_time);
      for (double target : ex.targets) {
        const double d = (last - target) / scale;
        ss += d * d;
      }
    }
    count += ex.targets.size();
  }
  return std::sqrt(ss / static_cast<double>(count));
}

double evaluate_method(Method method, const Dataset& train, const Dataset& test,
                       const ExperimentConfig& config, std::uint64_t seed) {
  const auto test_traj = test.trajectories();
  if (method != Method::surrogate) return baseline_rmse(method, test_traj, config.split_time);
  const auto train_traj = train.trajectories();
  const auto result = sdelap::train(train_traj, config.train_config(seed));
  return evaluate_surrogate(result.model, test_traj, config.split_time);
}

std::pair<double, double> mean_and_std(std::vector<double> values) {
  if (values.size() < 2) throw ConfigError("standard deviation needs at least 2 values");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

EvalReport run_experiment(const ExperimentConfig& config) {
  config.validate();
  if (config.seeds.size() < 2) throw ConfigError("an experiment needs at least 2 seeds");
  EvalReport report;
  report.seeds = config.seeds;
  report.config_text = config.to_text();
  const auto methods = all_methods();
  for (auto m : methods) report.rows.push_back({to_string(m), 0.0, 0.0, {}, std::nullopt});

  for (const auto seed : config.seeds) {
    const auto ds = generate_dataset(config, seed);
    const auto [train, test] = split_dataset(ds, config.test_fraction, seed);
    for (std::size_t r = 0; r < methods.size(); ++r) {
      auto& row = report.rows[r];
      try {
        row.per_seed.push_back(evaluate_method(methods[r], train, test, config, seed));
      } catch (const Error& e) {
        row.per_seed.push_back(std::nan(""));
        const std::string msg = "seed " + std::to_string(seed) + ": " + e.what();
        row.error = row.error ? *row.error + "; " + msg : msg;
      }
    }
  }
  for (auto& row : report.rows) {
    if (row.error) {
      row.mean_rmse = row.std_rmse = std::nan("");
    } else {
      std::tie(row.mean_rmse, row.std_rmse) = mean_and_std(row.per_seed);
    }
  }
  return report;
}

void validate_report(const EvalReport& report) {
  if (report.seeds.size() < 2) throw ConfigError("report needs at least 2 seeds");
  for (const auto& row : report.rows) {
    if (row.per_seed.size() != report.seeds.size()) {
      throw ConfigError("row '" + row.method + "' has the wrong number of per-seed values");
    }
    if (row.error) continue;
    const auto [mean, sd] = mean_and_std(row.per_seed);
    if (mean != row.mean_rmse || sd != row.std_rmse) {
      throw ConfigError("row '" + row.method + "' mean/std disagree with its per-seed values");
    }
  }
}

std::string report_csv(const EvalReport& report) {
  std::string out = "method,mean_rmse,std_rmse\n";
  char buf[128];
  for (const auto& row : report.rows) {
    if (row.error) {
      out += row.method + ",nan,nan\n";
      continue;
    }
    std::snprintf(buf, sizeof(buf), "%s,%.6f,%.6f\n", row.method.c_str(), row.mean_rmse,
                  row.std_rmse);
    out += buf;
  }
  return out;
}

std::string report_sidecar(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["seeds"] = report.seeds;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& row : report.rows) {
    nlohmann::ordered_json r;
    r["method"] = row.method;
    r["per_seed_rmse"] = row.per_seed;
    r["mean_rmse"] = row.mean_rmse;
    r["std_rmse"] = row.std_rmse;
    r["error"] = row.error ? nlohmann::ordered_json(*row.error) : nlohmann::ordered_json(nullptr);
    rows.push_back(std::move(r));
  }
  j["methods"] = std::move(rows);
  j["config"] = report.config_text;
  return j.dump(2) + "\n";
}

void emit_report(const EvalReport& report, const std::filesystem::path& path) {
  validate_report(report);
  const std::string csv = report_csv(report);
  const std::string sidecar = report_sidecar(report);
  auto write = [](const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw IoError("cannot open " + p.string() + " for writing");
    out << text;
    if (!out) throw IoError("failed writing " + p.string());
  };
  write(path, csv);
  write(std::filesystem::path(path.string() + ".seeds.json"), sidecar);
}

}  // namespace sdelap
