// sdelap: dataset generation, verification suites, surrogate training and
// the multi-seed forecasting experiment.
//
// Exit codes: 0 success, 1 verification failure, 2 usage/config error,
// 3 runtime/training error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "sdelap/error.hpp"
#include "sdelap/experiment.hpp"
#include "sdelap/surrogate.hpp"
#include "sdelap/verify.hpp"

namespace {

using namespace sdelap;

constexpr int kOk = 0;
constexpr int kVerifyFailed = 1;
constexpr int kUsage = 2;
constexpr int kRuntime = 3;

const char* const kConfigKeys[] = {
    "n_trajectories", "n_samples",     "t_max",        "x0_range",        "mu_range",
    "sigma_range",    "epochs",        "seeds",        "test_fraction",   "split_time",
    "grid_mode",      "learning_rate", "batch_size",   "latent_dim",      "hidden_width",
    "query_count",    "input_grid_size", "sigma0",     "horizon",         "head_scale_time",
    "optimizer"};

std::string flag_name(std::string key) {
  for (auto& c : key) {
    if (c == '_') c = '-';
  }
  return "--" + key;
}

// Config file plus per-key overrides, resolved after parsing.
struct ConfigSource {
  std::string path;
  std::map<std::string, std::string> overrides;

  void attach(CLI::App* app, bool with_file = true) {
    if (with_file) app->add_option("--config", path, "flat key = value config file");
    for (const char* key : kConfigKeys) {
      app->add_option(flag_name(key), overrides[key], std::string("override ") + key);
    }
  }

  ExperimentConfig resolve() const {
    ExperimentConfig config = path.empty() ? ExperimentConfig{} : load_config(path);
    for (const auto& [key, value] : overrides) {
      if (!value.empty()) set_config_value(config, key, value);
    }
    config.validate();
    return config;
  }
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text;
}

int run_simulate(const ConfigSource& src, std::uint64_t seed, const std::string& out) {
  const auto config = src.resolve();
  const auto ds = generate_dataset(config, seed);
  save_dataset(ds, out);
  std::printf("wrote %zu trajectories x %zu samples to %s (config %s, seed %llu)\n",
              ds.records.size(), config.n_samples, out.c_str(), ds.config_hash.c_str(),
              static_cast<unsigned long long>(seed));
  return kOk;
}

int run_verify(const std::string& suite_name, const VerifyOptions& options,
               const std::string& report_path) {
  const auto suite = verify_suite_from_string(suite_name);
  const auto report = verify(suite, options);
  for (const auto& c : report.cases) {
    if (c.upper_bound) {
      std::printf("%s  %-60s measured=%.6g bound=%.6g\n", c.pass ? "PASS" : "FAIL",
                  c.name.c_str(), c.measured, c.expected);
    } else {
      std::printf("%s  %-60s measured=%.6g expected=%.6g tol=%.3g\n", c.pass ? "PASS" : "FAIL",
                  c.name.c_str(), c.measured, c.expected, c.tolerance);
    }
  }
  if (!report_path.empty()) write_text(report_path, report.to_json());
  std::printf("%s: %s\n", report.suite.c_str(), report.passed() ? "pass" : "FAIL");
  return report.passed() ? kOk : kVerifyFailed;
}

int run_train(const ConfigSource& src, const std::string& data, int epochs, std::uint64_t seed,
              const std::string& model_out) {
  auto config = src.resolve();
  if (epochs > 0) config.epochs = epochs;
  const auto ds = load_dataset(data);
  const auto result = train(ds.trajectories(), config.train_config(seed));
  save_model(result.model, model_out);
  const auto& loss = result.report.epoch_loss;
  for (std::size_t e = 0; e < loss.size(); ++e) {
    std::printf("epoch %3zu  loss %.6f\n", e + 1, loss[e]);
  }
  std::printf("saved model to %s\n", model_out.c_str());
  return kOk;
}

int run_evaluate(const ConfigSource& src, const std::string& model_path, const std::string& data,
                 const std::string& method_name) {
  const auto config = src.resolve();
  const auto method = method_from_string(method_name);
  const auto test = load_dataset(data).trajectories();
  double rmse;
  if (method == Method::surrogate) {
    if (model_path.empty()) throw ConfigError("--model is required for method surrogate");
    rmse = evaluate_surrogate(load_model(model_path), test, config.split_time);
  } else {
    rmse = baseline_rmse(method, test, config.split_time);
  }
  std::printf("%s,%.6f\n", method_name.c_str(), rmse);
  return kOk;
}

int run_experiment_cmd(const ConfigSource& src, const std::string& out) {
  const auto config = src.resolve();
  const auto report = run_experiment(config);
  emit_report(report, out);
  std::fputs(report_csv(report).c_str(), stdout);
  for (const auto& row : report.rows) {
    if (row.error) std::fprintf(stderr, "%s failed: %s\n", row.method.c_str(), row.error->c_str());
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GBM simulation, Laplace-transform verification and Laplace-domain forecasting"};
  app.require_subcommand(1);

  ConfigSource sim_src;
  std::uint64_t sim_seed = 0;
  std::string sim_out;
  auto* simulate = app.add_subcommand("simulate", "generate a GBM dataset (JSON Lines)");
  sim_src.attach(simulate);
  simulate->add_option("--seed", sim_seed, "dataset seed");
  simulate->add_option("--out", sim_out, "output .jsonl path")->required();

  std::string suite;
  std::size_t n_paths = 0;
  VerifyOptions vopt;
  std::string verify_report;
  auto* verify_cmd = app.add_subcommand("verify", "run a verification suite");
  verify_cmd->add_option("suite", suite, "mgf | moments | laplace-mean | variance-bound | ilt-selftest")
      ->required();
  verify_cmd->add_option("--n-paths", n_paths, "Monte Carlo paths (suite default if omitted)");
  verify_cmd->add_option("--tolerance-scale", vopt.tolerance_scale, "multiply tolerances");
  verify_cmd->add_option("--seed", vopt.seed, "verification seed");
  verify_cmd->add_option("--report", verify_report, "write a JSON report here");

  ConfigSource train_src;
  std::string train_data, model_out;
  int train_epochs = 0;
  std::uint64_t train_seed = 0;
  auto* train_cmd = app.add_subcommand("train", "train the Laplace surrogate on a dataset");
  train_src.attach(train_cmd);
  train_cmd->add_option("--data", train_data, "dataset .jsonl")->required();
  train_cmd->remove_option(train_cmd->get_option("--epochs"));
  train_cmd->add_option("--epochs", train_epochs, "training epochs");
  train_cmd->add_option("--seed", train_seed, "initialization and shuffle seed");
  train_cmd->add_option("--model-out", model_out, "output model path")->required();

  ConfigSource eval_src;
  std::string eval_model, eval_data, eval_method = "surrogate";
  auto* evaluate = app.add_subcommand("evaluate", "normalized forecast RMSE on a dataset");
  eval_src.attach(evaluate);
  evaluate->add_option("--model", eval_model, "trained model (surrogate only)");
  evaluate->add_option("--data", eval_data, "dataset .jsonl")->required();
  evaluate->add_option("--method", eval_method, "surrogate | exp-fit | constant-last");

  ConfigSource exp_src;
  std::string exp_out;
  auto* experiment = app.add_subcommand("experiment", "multi-seed train/evaluate report");
  exp_src.attach(experiment);
  experiment->add_option("--out", exp_out, "report CSV path (sidecar: <out>.seeds.json)")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (simulate->parsed()) return run_simulate(sim_src, sim_seed, sim_out);
    if (verify_cmd->parsed()) {
      if (n_paths > 0) vopt.n_paths = n_paths;
      return run_verify(suite, vopt, verify_report);
    }
    if (train_cmd->parsed()) {
      return run_train(train_src, train_data, train_epochs, train_seed, model_out);
    }
    if (evaluate->parsed()) return run_evaluate(eval_src, eval_model, eval_data, eval_method);
    if (experiment->parsed()) return run_experiment_cmd(exp_src, exp_out);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kUsage;
  } catch (const ParameterError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kRuntime;
  }
  return kUsage;
}
