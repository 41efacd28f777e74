#pragma once

#include <complex>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sdelap/ilt.hpp"
#include "sdelap/rng.hpp"
#include "sdelap/stochastic.hpp"

namespace sdelap {

enum class Optimizer { sgd, adam };

std::string to_string(Optimizer opt);
Optimizer optimizer_from_string(const std::string& name);

struct TrainConfig {
  int epochs = 100;
  double learning_rate = 1e-3;
  std::size_t batch_size = 32;
  std::size_t latent_dim = 16;
  std::size_t hidden_width = 64;
  std::size_t query_count = 32;      // K, the number of Laplace query points
  std::size_t input_grid_size = 32;  // M, resampled prefix length
  double split_time = 0.5;
  double sigma0 = 10.0;
  double horizon = 2.0;
  // Head outputs are multiplied by exp(-sigma0 * head_scale_time) before being
  // read as F(s_k). Keeps the decoded values O(1) when the e^{sigma0 t}
  // envelope of the inversion is large.
  double head_scale_time = 0.75;
  Optimizer optimizer = Optimizer::adam;
  std::uint64_t seed = 0;

  void validate() const;  // throws ConfigError
};

struct Architecture {
  std::size_t input_grid_size = 32;
  std::size_t hidden_width = 64;
  std::size_t latent_dim = 16;
  IltConfig ilt{};
  double head_scale_time = 0.75;

  static Architecture from(const TrainConfig& config);
  void validate() const;
  friend bool operator==(const Architecture&, const Architecture&) = default;
};

/// Encoder MLP -> latent -> head MLP -> F at the ILT query points.
///
/// All weights live in one flat vector in the order
///   W1 (H x 2M), b1 (H), W2 (P x H), b2 (P),      encoder, tanh after layer 1
///   W3 (H x P),  b3 (H), W4 (2K x H), b4 (2K),    head, tanh after layer 3
/// with row-major matrices. Head output m < K is re F(s_m), m >= K is
/// im F(s_{m-K}); im F(s_0) is ignored and reported as zero.
class SurrogateModel {
 public:
  struct Offsets {
    std::size_t w1, b1, w2, b2, w3, b3, w4, b4, total;
    friend bool operator==(const Offsets&, const Offsets&) = default;
  };

  SurrogateModel() = default;
  explicit SurrogateModel(Architecture arch);  // all-zero weights
  SurrogateModel(Architecture arch, std::vector<double> weights);

  // Uniform in +-1/sqrt(fan_in) for every weight and bias of a layer.
  static SurrogateModel initialize(const Architecture& arch, SeededRng& rng);

  const Architecture& architecture() const noexcept { return arch_; }
  const Offsets& offsets() const noexcept { return offsets_; }
  std::size_t weight_count() const noexcept { return weights_.size(); }
  std::span<const double> weights() const noexcept { return weights_; }
  std::span<double> weights() noexcept { return weights_; }

  std::size_t feature_size() const noexcept { return 2 * arch_.input_grid_size; }
  std::size_t query_count() const noexcept { return arch_.ilt.n_terms; }
  double head_scale() const;

  // Packed [re..., im...] head output (already multiplied by head_scale) for
  // one feature vector. Entry K (im of s_0) is always zero.
  std::vector<double> laplace_packed(std::span<const double> features) const;
  std::vector<std::complex<double>> laplace_values(std::span<const double> features) const;

  friend bool operator==(const SurrogateModel&, const SurrogateModel&) = default;

 private:
  Architecture arch_{};
  Offsets offsets_{};
  std::vector<double> weights_;
};

struct NormalizedPrefix {
  std::vector<double> features;  // M resampled values / scale, then M grid times
  double scale = 1.0;
};

// Resamples the observations with t <= split_time onto k*split_time/M,
// k = 1..M (linear interpolation, constant outside the observed range) and
// divides by the largest |value| on the prefix (floored at 1e-12).
NormalizedPrefix normalize_prefix(const Trajectory& traj, double split_time,
                                  std::size_t input_grid_size);

// Forecast in original units at query_times (all inside (0, horizon)).
std::vector<double> predict(const SurrogateModel& model, const Trajectory& traj,
                            double split_time, std::span<const double> query_times);

double loss_rmse(std::span<const double> pred, std::span<const double> target);

/// One supervised forecasting example in original units.
struct ForecastExample {
  Trajectory trajectory;
  double split_time = 0.5;
  std::vector<double> query_times;
  std::vector<double> targets;
};

// Query times and targets are the observations with t > split_time.
ForecastExample make_forecast_example(const Trajectory& traj, double split_time);

/// ForecastExample with features, decode rows and normalized targets cached.
struct PreparedExample {
  std::vector<double> features;
  double scale = 1.0;
  DecodeMatrix decode;
  std::vector<double> targets;  // divided by scale
};

PreparedExample prepare(const SurrogateModel& model, const ForecastExample& example);

/// Gradient of the mean over the batch of each example's mean squared error
/// (normalized units). Same layout as SurrogateModel::weights().
struct Gradient {
  std::vector<double> values;
  double loss = 0.0;
};

Gradient grad(const SurrogateModel& model, std::span<const ForecastExample> batch);

namespace detail {
// Forward and backward pass for one example. Adds d(mse)/dw * weight into
// grad and returns the example's mean squared error.
double accumulate_example_gradient(const SurrogateModel& model, const PreparedExample& example,
                                   double weight, std::span<double> grad);
}  // namespace detail

struct TrainReport {
  std::vector<double> epoch_loss;
  std::optional<double> test_rmse;
};

struct TrainResult {
  SurrogateModel model;
  TrainReport report;
};

// Minibatch training on the forecast split of every trajectory. Initial
// weights and the per-epoch shuffles are drawn from fixed streams of
// config.seed. Throws TrainingDivergedError on a non-finite loss.
TrainResult train(std::span<const Trajectory> dataset, const TrainConfig& config);

// Normalized-unit RMSE pooled over every post-split point of every trajectory.
double evaluate_surrogate(const SurrogateModel& model, std::span<const Trajectory> test,
                          double split_time);

struct ExponentialFit {
  double x0_hat = 0.0;
  double mu_hat = 0.0;
  double operator()(double t) const;
};

// Least squares of log(value) on time over the prefix t <= split_time.
ExponentialFit baseline_exponential_fit(const Trajectory& traj, double split_time);

// Last observed value with t <= split_time.
double baseline_constant_last(const Trajectory& traj, double split_time);

void save_model(const SurrogateModel& model, const std::filesystem::path& path);
SurrogateModel load_model(const std::filesystem::path& path);
std::string serialize_model(const SurrogateModel& model);
SurrogateModel deserialize_model(const std::string& text);

}  // namespace sdelap
