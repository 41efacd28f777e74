#include "sdelap/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "sdelap/error.hpp"
#include "sdelap/kernels.hpp"

namespace sdelap {

std::string to_string(Optimizer opt) { return opt == Optimizer::adam ? "adam" : "sgd"; }

Optimizer optimizer_from_string(const std::string& name) {
  if (name == "adam") return Optimizer::adam;
  if (name == "sgd") return Optimizer::sgd;
  throw ConfigError("unknown optimizer '" + name + "' (expected adam or sgd)");
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning_rate must be > 0");
  }
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(split_time > 0.0) || !(split_time < horizon)) {
    throw ConfigError("split_time must lie in (0, horizon)");
  }
  if (!std::isfinite(head_scale_time)) throw ConfigError("head_scale_time must be finite");
  Architecture::from(*this).validate();
}

Architecture Architecture::from(const TrainConfig& config) {
  Architecture arch;
  arch.input_grid_size = config.input_grid_size;
  arch.hidden_width = config.hidden_width;
  arch.latent_dim = config.latent_dim;
  arch.ilt = IltConfig{config.sigma0, config.query_count, config.horizon};
  arch.head_scale_time = config.head_scale_time;
  return arch;
}

void Architecture::validate() const {
  if (input_grid_size < 1 || hidden_width < 1 || latent_dim < 1) {
    throw ConfigError("layer sizes must be >= 1");
  }
  ilt.validate();
}

namespace {

SurrogateModel::Offsets layout(const Architecture& a) {
  const std::size_t in = 2 * a.input_grid_size;
  const std::size_t h = a.hidden_width;
  const std::size_t p = a.latent_dim;
  const std::size_t out = 2 * a.ilt.n_terms;
  SurrogateModel::Offsets o{};
  o.w1 = 0;
  o.b1 = o.w1 + h * in;
  o.w2 = o.b1 + h;
  o.b2 = o.w2 + p * h;
  o.w3 = o.b2 + p;
  o.b3 = o.w3 + h * p;
  o.w4 = o.b3 + h;
  o.b4 = o.w4 + out * h;
  o.total = o.b4 + out;
  return o;
}

// y = W x + b for a row-major (rows x cols) W.
void affine(const double* w, const double* b, std::span<const double> x, std::span<double> y) {
  const std::size_t cols = x.size();
  for (std::size_t r = 0; r < y.size(); ++r) {
    const double* row = w + r * cols;
    double acc = b[r];
    for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
    y[r] = acc;
  }
}

struct Activations {
  std::vector<double> h1, z, h3, out;
};

Activations forward(const SurrogateModel& model, std::span<const double> features) {
  const auto& a = model.architecture();
  const auto& o = model.offsets();
  const auto w = model.weights();
  if (features.size() != model.feature_size()) throw ShapeError("feature size mismatch");
  Activations act;
  act.h1.resize(a.hidden_width);
  act.z.resize(a.latent_dim);
  act.h3.resize(a.hidden_width);
  act.out.resize(2 * a.ilt.n_terms);
  affine(w.data() + o.w1, w.data() + o.b1, features, act.h1);
  for (auto& v : act.h1) v = std::tanh(v);
  affine(w.data() + o.w2, w.data() + o.b2, act.h1, act.z);
  affine(w.data() + o.w3, w.data() + o.b3, act.z, act.h3);
  for (auto& v : act.h3) v = std::tanh(v);
  affine(w.data() + o.w4, w.data() + o.b4, act.h3, act.out);
  return act;
}

// Scales the raw head output into packed Laplace values, zeroing im F(s_0).
std::vector<double> pack(const SurrogateModel& model, std::vector<double> raw) {
  const double alpha = model.head_scale();
  for (auto& v : raw) v *= alpha;
  raw[model.query_count()] = 0.0;
  return raw;
}

bool prefix_contains(double t, double split_time) { return t <= split_time; }

}  // namespace

SurrogateModel::SurrogateModel(Architecture arch) : arch_(arch), offsets_(layout(arch)) {
  arch_.validate();
  weights_.assign(offsets_.total, 0.0);
}

SurrogateModel::SurrogateModel(Architecture arch, std::vector<double> weights)
    : arch_(arch), offsets_(layout(arch)), weights_(std::move(weights)) {
  arch_.validate();
  if (weights_.size() != offsets_.total) {
    throw ShapeError("model expects " + std::to_string(offsets_.total) + " weights, got " +
                     std::to_string(weights_.size()));
  }
  if (!std::all_of(weights_.begin(), weights_.end(), [](double v) { return std::isfinite(v); })) {
    throw DomainError("model weights must be finite");
  }
}

SurrogateModel SurrogateModel::initialize(const Architecture& arch, SeededRng& rng) {
  SurrogateModel model(arch);
  const auto& o = model.offsets_;
  const std::size_t in = 2 * arch.input_grid_size;
  const std::size_t h = arch.hidden_width;
  const std::size_t p = arch.latent_dim;
  auto fill = [&](std::size_t begin, std::size_t end, std::size_t fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (std::size_t i = begin; i < end; ++i) model.weights_[i] = rng.uniform(-bound, bound);
  };
  fill(o.w1, o.w2, in);
  fill(o.w2, o.w3, h);
  fill(o.w3, o.w4, p);
  fill(o.w4, o.total, h);
  return model;
}

double SurrogateModel::head_scale() const {
  return std::exp(-arch_.ilt.sigma0 * arch_.head_scale_time);
}

std::vector<double> SurrogateModel::laplace_packed(std::span<const double> features) const {
  return pack(*this, forward(*this, features).out);
}

std::vector<std::complex<double>> SurrogateModel::laplace_values(
    std::span<const double> features) const {
  const auto packed = laplace_packed(features);
  const std::size_t k = query_count();
  std::vector<std::complex<double>> values(k);
  for (std::size_t i = 0; i < k; ++i) values[i] = {packed[i], packed[k + i]};
  return values;
}

NormalizedPrefix normalize_prefix(const Trajectory& traj, double split_time,
                                  std::size_t input_grid_size) {
  if (input_grid_size < 1) throw ParameterError("input_grid_size must be >= 1");
  const auto t = traj.times();
  const auto x = traj.values();
  std::size_t n = 0;
  while (n < t.size() && prefix_contains(t[n], split_time)) ++n;
  if (n < 2) {
    throw InsufficientDataError("prefix up to t = " + std::to_string(split_time) +
                                " has fewer than 2 observations");
  }

  NormalizedPrefix out;
  double peak = 0.0;
  for (std::size_t i = 0; i < n; ++i) peak = std::max(peak, std::abs(x[i]));
  out.scale = std::max(peak, 1e-12);

  const std::size_t m = input_grid_size;
  out.features.resize(2 * m);
  std::size_t seg = 0;
  for (std::size_t j = 0; j < m; ++j) {
    const double g = static_cast<double>(j + 1) * split_time / static_cast<double>(m);
    double v;
    if (g <= t[0]) {
      v = x[0];
    } else if (g >= t[n - 1]) {
      v = x[n - 1];
    } else {
      while (t[seg + 1] < g) ++seg;
      const double w = (g - t[seg]) / (t[seg + 1] - t[seg]);
      v = x[seg] + (x[seg + 1] - x[seg]) * w;
    }
    out.features[j] = v / out.scale;
    out.features[m + j] = g;
  }
  return out;
}

std::vector<double> predict(const SurrogateModel& model, const Trajectory& traj,
                            double split_time, std::span<const double> query_times) {
  const auto prefix = normalize_prefix(traj, split_time, model.architecture().input_grid_size);
  const auto packed = model.laplace_packed(prefix.features);
  const DecodeMatrix decode(query_times, model.architecture().ilt);
  std::vector<double> out(query_times.size());
  decode.apply(packed, out);
  for (auto& v : out) v *= prefix.scale;
  return out;
}

double loss_rmse(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size() || pred.empty()) {
    throw ShapeError("loss_rmse needs equal nonzero lengths (" + std::to_string(pred.size()) +
                     " vs " + std::to_string(target.size()) + ")");
  }
  double ss = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(pred.size()));
}

ForecastExample make_forecast_example(const Trajectory& traj, double split_time) {
  ForecastExample ex{traj, split_time, {}, {}};
  const auto t = traj.times();
  const auto x = traj.values();
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!prefix_contains(t[i], split_time)) {
      ex.query_times.push_back(t[i]);
      ex.targets.push_back(x[i]);
    }
  }
  if (ex.query_times.empty()) {
    throw InsufficientDataError("no observations after split time " + std::to_string(split_time));
  }
  return ex;
}

PreparedExample prepare(const SurrogateModel& model, const ForecastExample& example) {
  if (example.query_times.size() != example.targets.size() || example.targets.empty()) {
    throw ShapeError("forecast example needs matching nonempty query times and targets");
  }
  auto prefix = normalize_prefix(example.trajectory, example.split_time,
                                 model.architecture().input_grid_size);
  PreparedExample out{std::move(prefix.features), prefix.scale,
                      DecodeMatrix(example.query_times, model.architecture().ilt),
                      example.targets};
  for (auto& v : out.targets) v /= out.scale;
  return out;
}

namespace detail {

double accumulate_example_gradient(const SurrogateModel& model, const PreparedExample& example,
                                   double weight, std::span<double> grad) {
  const auto& a = model.architecture();
  const auto& o = model.offsets();
  const auto w = model.weights();
  const std::size_t in = model.feature_size();
  const std::size_t h = a.hidden_width;
  const std::size_t p = a.latent_dim;
  const std::size_t k = a.ilt.n_terms;
  const std::size_t out = 2 * k;
  const double alpha = model.head_scale();

  const Activations act = forward(model, example.features);
  const auto packed = pack(model, act.out);

  const std::size_t n = example.targets.size();
  std::vector<double> pred(n);
  example.decode.apply(packed, pred);
  double mse = 0.0;
  std::vector<double> d_pred(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double r = pred[j] - example.targets[j];
    mse += r * r;
    d_pred[j] = 2.0 * r / static_cast<double>(n) * weight;
  }
  mse /= static_cast<double>(n);

  std::vector<double> d_out(out, 0.0);
  example.decode.apply_transpose_add(d_pred, d_out);
  for (auto& v : d_out) v *= alpha;
  d_out[k] = 0.0;

  // head output layer
  std::vector<double> d_h3(h, 0.0);
  for (std::size_t m = 0; m < out; ++m) {
    const double g = d_out[m];
    grad[o.b4 + m] += g;
    const double* wrow = w.data() + o.w4 + m * h;
    double* grow = grad.data() + o.w4 + m * h;
    for (std::size_t i = 0; i < h; ++i) {
      grow[i] += g * act.h3[i];
      d_h3[i] += wrow[i] * g;
    }
  }
  for (std::size_t i = 0; i < h; ++i) d_h3[i] *= 1.0 - act.h3[i] * act.h3[i];

  // head hidden layer
  std::vector<double> d_z(p, 0.0);
  for (std::size_t i = 0; i < h; ++i) {
    const double g = d_h3[i];
    grad[o.b3 + i] += g;
    const double* wrow = w.data() + o.w3 + i * p;
    double* grow = grad.data() + o.w3 + i * p;
    for (std::size_t c = 0; c < p; ++c) {
      grow[c] += g * act.z[c];
      d_z[c] += wrow[c] * g;
    }
  }

  // encoder output layer
  std::vector<double> d_h1(h, 0.0);
  for (std::size_t c = 0; c < p; ++c) {
    const double g = d_z[c];
    grad[o.b2 + c] += g;
    const double* wrow = w.data() + o.w2 + c * h;
    double* grow = grad.data() + o.w2 + c * h;
    for (std::size_t i = 0; i < h; ++i) {
      grow[i] += g * act.h1[i];
      d_h1[i] += wrow[i] * g;
    }
  }
  for (std::size_t i = 0; i < h; ++i) d_h1[i] *= 1.0 - act.h1[i] * act.h1[i];

  // encoder hidden layer
  for (std::size_t i = 0; i < h; ++i) {
    const double g = d_h1[i];
    grad[o.b1 + i] += g;
    double* grow = grad.data() + o.w1 + i * in;
    for (std::size_t c = 0; c < in; ++c) grow[c] += g * example.features[c];
  }
  return mse;
}

}  // namespace detail

Gradient grad(const SurrogateModel& model, std::span<const ForecastExample> batch) {
  if (batch.empty()) throw ShapeError("gradient batch must be nonempty");
  std::vector<PreparedExample> prepared;
  prepared.reserve(batch.size());
  for (const auto& ex : batch) prepared.push_back(prepare(model, ex));
  Gradient g;
  g.values.assign(model.weight_count(), 0.0);
  g.loss = kernels::parallel::batch_gradient(model, prepared, g.values);
  return g;
}

namespace {

constexpr std::uint64_t kInitStream = 0x1417;
constexpr std::uint64_t kShuffleStream = 0x5F00;

class OptimizerState {
 public:
  OptimizerState(const TrainConfig& config, std::size_t n)
      : kind_(config.optimizer), lr_(config.learning_rate) {
    if (kind_ == Optimizer::adam) {
      m_.assign(n, 0.0);
      v_.assign(n, 0.0);
    }
  }

  void step(std::span<double> weights, std::span<const double> grad) {
    if (kind_ == Optimizer::sgd) {
      for (std::size_t i = 0; i < weights.size(); ++i) weights[i] -= lr_ * grad[i];
      return;
    }
    constexpr double beta1 = 0.9;
    constexpr double beta2 = 0.999;
    constexpr double eps = 1e-8;
    ++t_;
    const double c1 = 1.0 - std::pow(beta1, t_);
    const double c2 = 1.0 - std::pow(beta2, t_);
    for (std::size_t i = 0; i < weights.size(); ++i) {
      m_[i] = beta1 * m_[i] + (1.0 - beta1) * grad[i];
      v_[i] = beta2 * v_[i] + (1.0 - beta2) * grad[i] * grad[i];
      weights[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps);
    }
  }

 private:
  Optimizer kind_;
  double lr_;
  int t_ = 0;
  std::vector<double> m_, v_;
};

std::vector<std::size_t> shuffled_indices(std::size_t n, SeededRng rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.next_u64() % i);
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

}  // namespace

TrainResult train(std::span<const Trajectory> dataset, const TrainConfig& config) {
  config.validate();
  if (dataset.empty()) throw InsufficientDataError("training dataset is empty");

  const Architecture arch = Architecture::from(config);
  SeededRng init_rng(config.seed, kInitStream);
  TrainResult result{SurrogateModel::initialize(arch, init_rng), {}};
  SurrogateModel& model = result.model;

  std::vector<PreparedExample> examples;
  examples.reserve(dataset.size());
  for (const auto& traj : dataset) {
    examples.push_back(prepare(model, make_forecast_example(traj, config.split_time)));
  }

  OptimizerState optimizer(config, model.weight_count());
  std::vector<double> gradient(model.weight_count());
  std::vector<PreparedExample> batch;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const auto order = shuffled_indices(examples.size(), SeededRng(config.seed, kShuffleStream + static_cast<std::uint64_t>(epoch)));
    double epoch_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(examples[order[i]]);
      const double loss = kernels::parallel::batch_gradient(model, batch, gradient);
      if (!std::isfinite(loss)) {
        throw TrainingDivergedError("training diverged at epoch " + std::to_string(epoch + 1),
                                    epoch + 1);
      }
      epoch_sum += loss * static_cast<double>(end - start);
      optimizer.step(model.weights(), gradient);
    }
    const auto w = model.weights();
    if (!std::all_of(w.begin(), w.end(), [](double v) { return std::isfinite(v); })) {
      throw TrainingDivergedError("weights became non-finite at epoch " +
                                      std::to_string(epoch + 1),
                                  epoch + 1);
    }
    result.report.epoch_loss.push_back(epoch_sum / static_cast<double>(examples.size()));
  }
  return result;
}

double evaluate_surrogate(const SurrogateModel& model, std::span<const Trajectory> test,
                          double split_time) {
  if (test.empty()) throw InsufficientDataError("test set is empty");
  double ss = 0.0;
  std::size_t count = 0;
  for (const auto& traj : test) {
    const auto ex = make_forecast_example(traj, split_time);
    const auto prep = prepare(model, ex);
    const auto packed = model.laplace_packed(prep.features);
    std::vector<double> pred(prep.targets.size());
    prep.decode.apply(packed, pred);
    for (std::size_t j = 0; j < pred.size(); ++j) {
      const double d = pred[j] - prep.targets[j];
      ss += d * d;
    }
    count += pred.size();
  }
  return std::sqrt(ss / static_cast<double>(count));
}

double ExponentialFit::operator()(double t) const { return x0_hat * std::exp(mu_hat * t); }

ExponentialFit baseline_exponential_fit(const Trajectory& traj, double split_time) {
  const auto t = traj.times();
  const auto x = traj.values();
  std::size_t n = 0;
  while (n < t.size() && prefix_contains(t[n], split_time)) ++n;
  if (n < 2) throw InsufficientDataError("exponential fit needs at least 2 prefix points");

  double mean_t = 0.0;
  double mean_y = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0)) {
      throw DomainError("exponential fit needs positive values (t = " + std::to_string(t[i]) +
                        ")");
    }
    mean_t += t[i];
    mean_y += std::log(x[i]);
  }
  mean_t /= static_cast<double>(n);
  mean_y /= static_cast<double>(n);
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dt = t[i] - mean_t;
    sxy += dt * (std::log(x[i]) - mean_y);
    sxx += dt * dt;
  }
  const double slope = sxy / sxx;
  return {std::exp(mean_y - slope * mean_t), slope};
}

double baseline_constant_last(const Trajectory& traj, double split_time) {
  const auto t = traj.times();
  if (t.empty() || !prefix_contains(t[0], split_time)) {
    throw InsufficientDataError("constant-last baseline needs a nonempty prefix");
  }
  std::size_t last = 0;
  while (last + 1 < t.size() && prefix_contains(t[last + 1], split_time)) ++last;
  return traj.values()[last];
}

}  // namespace sdelap
