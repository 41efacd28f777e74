#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <filesystem>
#include <vector>

#include "sdelap/error.hpp"
#include "sdelap/surrogate.hpp"

using namespace sdelap;

namespace {

Trajectory exp_trajectory(double x0, double mu, const TimeGrid& grid) {
  std::vector<double> v(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) v[i] = x0 * std::exp(mu * grid[i]);
  return Trajectory(grid, v);
}

Architecture small_arch() {
  Architecture a;
  a.input_grid_size = 4;
  a.hidden_width = 5;
  a.latent_dim = 3;
  a.ilt = IltConfig{3.0, 8, 2.0};
  a.head_scale_time = 0.4;
  return a;
}

std::vector<ForecastExample> random_batch(SeededRng& rng, std::size_t n) {
  std::vector<ForecastExample> batch;
  const auto grid = TimeGrid::equispaced(24, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const GbmParams p{rng.uniform(0.1, 1.0), rng.uniform(0.0, 3.0), rng.uniform(0.1, 0.8)};
    batch.push_back(make_forecast_example(sample_gbm_exact(p, grid, rng), 0.5));
  }
  return batch;
}

// Batch loss through the public prediction path, independent of the backward pass.
double batch_loss(const SurrogateModel& model, const std::vector<ForecastExample>& batch) {
  double total = 0.0;
  for (const auto& ex : batch) {
    const double scale =
        normalize_prefix(ex.trajectory, ex.split_time, model.architecture().input_grid_size).scale;
    const auto pred = predict(model, ex.trajectory, ex.split_time, ex.query_times);
    double ss = 0.0;
    for (std::size_t j = 0; j < pred.size(); ++j) {
      const double d = (pred[j] - ex.targets[j]) / scale;
      ss += d * d;
    }
    total += ss / static_cast<double>(pred.size());
  }
  return total / static_cast<double>(batch.size());
}

std::vector<double> finite_difference(SurrogateModel model, const std::vector<ForecastExample>& batch,
                                      double step) {
  std::vector<double> g(model.weight_count());
  auto w = model.weights();
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double saved = w[i];
    w[i] = saved + step;
    const double up = batch_loss(model, batch);
    w[i] = saved - step;
    const double down = batch_loss(model, batch);
    w[i] = saved;
    g[i] = (up - down) / (2.0 * step);
  }
  return g;
}

bool gradients_agree(double analytic, double numeric) {
  const double diff = std::abs(analytic - numeric);
  return diff <= 1e-8 || diff <= 1e-4 * std::max(std::abs(analytic), std::abs(numeric));
}

}  // namespace

TEST(NormalizePrefix, ConstantTrajectory) {
  const auto grid = TimeGrid::equispaced(40, 1.0);
  const Trajectory traj(grid, std::vector<double>(40, 5.0));
  const auto prefix = normalize_prefix(traj, 0.5, 8);
  EXPECT_EQ(prefix.scale, 5.0);
  ASSERT_EQ(prefix.features.size(), 16u);
  for (std::size_t j = 0; j < 8; ++j) EXPECT_EQ(prefix.features[j], 1.0);
  EXPECT_DOUBLE_EQ(prefix.features[15], 0.5);
}

TEST(NormalizePrefix, GrowingTrajectoryPeaksAtSplit) {
  const auto traj = exp_trajectory(0.3, 4.0, TimeGrid::equispaced(1000, 1.0));
  const auto prefix = normalize_prefix(traj, 0.5, 16);
  const auto values = std::span<const double>(prefix.features).first(16);
  EXPECT_EQ(*std::max_element(values.begin(), values.end()), 1.0);
  EXPECT_EQ(values.back(), 1.0);
  EXPECT_TRUE(std::is_sorted(values.begin(), values.end()));
}

TEST(NormalizePrefix, InterpolatesLinearly) {
  const Trajectory traj(TimeGrid({0.1, 0.3, 0.9}), {1.0, 3.0, 100.0});
  const auto prefix = normalize_prefix(traj, 0.4, 4);
  // grid 0.1, 0.2, 0.3, 0.4 -> 1, 2, 3, 3 (held after the last prefix point)
  EXPECT_DOUBLE_EQ(prefix.features[0], 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(prefix.features[1], 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(prefix.features[2], 1.0);
  EXPECT_DOUBLE_EQ(prefix.features[3], 1.0);
}

TEST(NormalizePrefix, TooFewPoints) {
  const Trajectory late(TimeGrid({0.6, 0.8}), {1.0, 2.0});
  EXPECT_THROW(normalize_prefix(late, 0.5, 8), InsufficientDataError);
  const Trajectory one(TimeGrid({0.2, 0.8}), {1.0, 2.0});
  EXPECT_THROW(normalize_prefix(one, 0.5, 8), InsufficientDataError);
}

TEST(Predict, ZeroModelPredictsZero) {
  const SurrogateModel model(small_arch());
  const auto traj = exp_trajectory(0.5, 2.0, TimeGrid::equispaced(20, 1.0));
  const std::vector<double> times{0.6, 0.8, 1.0};
  for (double v : predict(model, traj, 0.5, times)) EXPECT_EQ(v, 0.0);
}

TEST(Predict, HandSetHeadRecoversExponential) {
  const double x0 = 0.7, mu = 4.0;
  Architecture arch;
  arch.input_grid_size = 8;
  arch.hidden_width = 4;
  arch.latent_dim = 2;
  arch.ilt = IltConfig{mu + 2.0, 1024, 2.0};
  arch.head_scale_time = 0.75;
  SurrogateModel model(arch);

  const auto grid = TimeGrid::equispaced(100, 1.0);
  const auto traj = exp_trajectory(x0, mu, grid);
  const double scale = normalize_prefix(traj, 0.5, 8).scale;
  const auto qp = query_points(arch.ilt);
  auto w = model.weights();
  const std::size_t k = arch.ilt.n_terms;
  for (std::size_t i = 0; i < k; ++i) {
    const auto f = x0 / (qp[i] - mu) / scale / model.head_scale();
    w[model.offsets().b4 + i] = f.real();
    w[model.offsets().b4 + k + i] = f.imag();
  }
  const auto ex = make_forecast_example(traj, 0.5);
  const auto pred = predict(model, traj, 0.5, ex.query_times);
  for (std::size_t j = 0; j < pred.size(); ++j) {
    EXPECT_NEAR(pred[j] / ex.targets[j], 1.0, 1e-2) << "t = " << ex.query_times[j];
  }
  EXPECT_EQ(pred, predict(model, traj, 0.5, ex.query_times));
}

TEST(Predict, LinearInHeadOutput) {
  SeededRng rng(3, 0);
  auto base = SurrogateModel::initialize(small_arch(), rng);
  const auto& o = base.offsets();
  // zero the last head layer so its bias is the head output
  for (std::size_t i = o.w4; i < o.b4; ++i) base.weights()[i] = 0.0;
  auto with_bias = [&](const std::vector<double>& b) {
    SurrogateModel m = base;
    std::copy(b.begin(), b.end(), m.weights().begin() + static_cast<std::ptrdiff_t>(o.b4));
    return m;
  };
  const std::size_t out = o.total - o.b4;
  std::vector<double> u(out), v(out), uv(out);
  for (std::size_t i = 0; i < out; ++i) {
    u[i] = rng.normal();
    v[i] = rng.normal();
    uv[i] = 2.0 * u[i] - 0.5 * v[i];
  }
  const auto traj = exp_trajectory(0.4, 1.5, TimeGrid::equispaced(30, 1.0));
  const std::vector<double> times{0.55, 0.7, 0.95};
  const auto pu = predict(with_bias(u), traj, 0.5, times);
  const auto pv = predict(with_bias(v), traj, 0.5, times);
  const auto puv = predict(with_bias(uv), traj, 0.5, times);
  for (std::size_t j = 0; j < times.size(); ++j) {
    EXPECT_NEAR(puv[j], 2.0 * pu[j] - 0.5 * pv[j], 1e-10 * (std::abs(pu[j]) + std::abs(pv[j])));
  }
}

TEST(Predict, ScaleEquivariance) {
  SeededRng rng(4, 0);
  const auto model = SurrogateModel::initialize(small_arch(), rng);
  const auto grid = TimeGrid::equispaced(30, 1.0);
  const auto traj = sample_gbm_exact({0.5, 2.0, 0.4}, grid, rng);
  const std::vector<double> times{0.6, 0.9};
  const auto base = predict(model, traj, 0.5, times);
  for (double c : {4.0, 0.125, 3.0, 17.3}) {
    std::vector<double> scaled(traj.values().begin(), traj.values().end());
    for (auto& v : scaled) v *= c;
    const auto pred = predict(model, Trajectory(grid, scaled), 0.5, times);
    for (std::size_t j = 0; j < times.size(); ++j) {
      if (c == 4.0 || c == 0.125) {
        EXPECT_EQ(pred[j], c * base[j]);  // power-of-two scaling is exact
      } else {
        EXPECT_NEAR(pred[j], c * base[j], 1e-12 * std::abs(c * base[j]));
      }
    }
  }
}

TEST(LossRmse, Examples) {
  const std::vector<double> a{1.0, 2.0, 3.0};
  EXPECT_EQ(loss_rmse(a, a), 0.0);
  EXPECT_EQ(loss_rmse(std::vector<double>{1.0, 1.0}, std::vector<double>{0.0, 0.0}), 1.0);
  EXPECT_THROW(loss_rmse(a, std::vector<double>{1.0}), ShapeError);
  EXPECT_THROW(loss_rmse(std::vector<double>{}, std::vector<double>{}), ShapeError);
}

TEST(LossRmse, JointPermutationInvariant) {
  const std::vector<double> p{0.5, -1.0, 2.0, 7.0}, t{0.0, 1.0, 2.5, 3.0};
  const std::vector<double> pp{7.0, 2.0, 0.5, -1.0}, tp{3.0, 2.5, 0.0, 1.0};
  EXPECT_DOUBLE_EQ(loss_rmse(p, t), loss_rmse(pp, tp));
}

TEST(Gradient, MatchesFiniteDifferences) {
  SeededRng rng(2024, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const auto model = SurrogateModel::initialize(small_arch(), rng);
    const auto batch = random_batch(rng, 1 + trial % 4);
    const auto g = grad(model, batch);
    const auto fd = finite_difference(model, batch, 1e-5);
    EXPECT_NEAR(g.loss, batch_loss(model, batch), 1e-12 * (1.0 + g.loss));
    for (std::size_t i = 0; i < fd.size(); ++i) {
      ASSERT_TRUE(gradients_agree(g.values[i], fd[i]))
          << "trial " << trial << " weight " << i << ": analytic " << g.values[i]
          << " numeric " << fd[i];
    }
  }
}

TEST(Gradient, ZeroModelZeroTargets) {
  const SurrogateModel model(small_arch());
  const auto grid = TimeGrid::equispaced(24, 1.0);
  ForecastExample ex = make_forecast_example(exp_trajectory(1.0, 1.0, grid), 0.5);
  std::fill(ex.targets.begin(), ex.targets.end(), 0.0);
  const std::vector<ForecastExample> batch{ex};
  const auto g = grad(model, batch);
  const auto fd = finite_difference(model, batch, 1e-5);
  EXPECT_EQ(g.loss, 0.0);
  for (std::size_t i = 0; i < fd.size(); ++i) {
    EXPECT_EQ(g.values[i], 0.0);
    EXPECT_NEAR(fd[i], 0.0, 1e-8);
  }
}

TEST(Gradient, DuplicatedEntryIsMean) {
  SeededRng rng(5, 0);
  const auto model = SurrogateModel::initialize(small_arch(), rng);
  const auto one = random_batch(rng, 1);
  const std::vector<ForecastExample> two{one[0], one[0]};
  const auto g1 = grad(model, one);
  const auto g2 = grad(model, two);
  EXPECT_DOUBLE_EQ(g1.loss, g2.loss);
  for (std::size_t i = 0; i < g1.values.size(); ++i) {
    EXPECT_NEAR(g1.values[i], g2.values[i], 1e-15 * (1.0 + std::abs(g1.values[i])));
  }
}

TEST(Gradient, EmptyBatch) {
  const SurrogateModel model(small_arch());
  EXPECT_THROW(grad(model, std::vector<ForecastExample>{}), ShapeError);
}

namespace {

std::vector<Trajectory> gbm_dataset(std::size_t n, std::size_t samples, double sigma_lo,
                                    double sigma_hi, std::uint64_t seed) {
  SeededRng rng(seed, 0);
  const auto grid = TimeGrid::equispaced(samples, 1.0);
  std::vector<Trajectory> out;
  for (std::size_t i = 0; i < n; ++i) {
    const GbmParams p{rng.uniform(0.1, 1.0), rng.uniform(4.0, 8.0), rng.uniform(sigma_lo, sigma_hi)};
    out.push_back(sample_gbm_exact(p, grid, rng));
  }
  return out;
}

}  // namespace

TEST(Train, RejectsZeroEpochs) {
  TrainConfig cfg;
  cfg.epochs = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  EXPECT_THROW(train(gbm_dataset(4, 50, 0.1, 0.2, 1), cfg), ConfigError);
}

TEST(Train, LossDecreases) {
  const auto data = gbm_dataset(50, 100, 0.08, 0.12, 7);
  TrainConfig cfg;
  cfg.epochs = 30;
  const auto result = train(data, cfg);
  const auto& loss = result.report.epoch_loss;
  ASSERT_EQ(loss.size(), 30u);
  for (double l : loss) {
    EXPECT_TRUE(std::isfinite(l));
    EXPECT_GE(l, 0.0);
  }
  const double first = (loss[0] + loss[1] + loss[2] + loss[3] + loss[4]) / 5.0;
  const double last = (loss[25] + loss[26] + loss[27] + loss[28] + loss[29]) / 5.0;
  EXPECT_LT(last, first);
}

TEST(Train, SameSeedSameWeights) {
  const auto data = gbm_dataset(20, 60, 0.1, 0.5, 8);
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.seed = 11;
  const auto a = train(data, cfg);
  const auto b = train(data, cfg);
  EXPECT_EQ(a.model, b.model);
  EXPECT_EQ(a.report.epoch_loss, b.report.epoch_loss);
  cfg.seed = 12;
  EXPECT_NE(train(data, cfg).model, a.model);
}

TEST(Train, DivergenceIsReported) {
  const auto data = gbm_dataset(20, 60, 0.1, 0.5, 9);
  TrainConfig cfg;
  cfg.epochs = 50;
  cfg.optimizer = Optimizer::sgd;
  cfg.head_scale_time = 0.0;
  try {
    (void)train(data, cfg);
    FAIL() << "expected divergence";
  } catch (const TrainingDivergedError& e) {
    EXPECT_GE(e.epoch(), 1);
    EXPECT_NE(std::string(e.what()).find("epoch"), std::string::npos);
  }
}

TEST(ExponentialFit, NoiselessRecovery) {
  const auto traj = exp_trajectory(1.0, 4.0, TimeGrid::equispaced(200, 1.0));
  const auto fit = baseline_exponential_fit(traj, 0.5);
  EXPECT_NEAR(fit.mu_hat, 4.0, 1e-9);
  EXPECT_NEAR(fit.x0_hat, 1.0, 1e-9);
}

TEST(ExponentialFit, NoisyDriftMedian) {
  const auto grid = TimeGrid::equispaced(200, 1.0);
  std::vector<double> mu_hat;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    SeededRng rng(seed, 0);
    mu_hat.push_back(baseline_exponential_fit(sample_gbm_exact({0.5, 6.0, 0.1}, grid, rng), 0.5).mu_hat);
  }
  std::nth_element(mu_hat.begin(), mu_hat.begin() + 50, mu_hat.end());
  EXPECT_NEAR(mu_hat[50], 6.0, 0.5);
}

TEST(ExponentialFit, RejectsNonPositive) {
  const Trajectory traj(TimeGrid({0.1, 0.2, 0.3}), {1.0, 0.0, 2.0});
  EXPECT_THROW(baseline_exponential_fit(traj, 0.5), DomainError);
}

TEST(ConstantLast, Examples) {
  const Trajectory flat(TimeGrid({0.1, 0.4, 0.7}), {2.0, 2.0, 2.0});
  EXPECT_EQ(baseline_constant_last(flat, 0.5), 2.0);
  const auto growing = exp_trajectory(1.0, 3.0, TimeGrid::equispaced(20, 1.0));
  const double last = baseline_constant_last(growing, 0.5);
  EXPECT_EQ(last, growing.values()[9]);
  EXPECT_LT(last, growing.values().back());
  const Trajectory single(TimeGrid({0.3, 0.8}), {4.5, 9.0});
  EXPECT_EQ(baseline_constant_last(single, 0.5), 4.5);
  EXPECT_THROW(baseline_constant_last(Trajectory(TimeGrid({0.6}), {1.0}), 0.5),
               InsufficientDataError);
}

TEST(Baselines, ExponentialFitDominatesOnLowVolatility) {
  const auto data = gbm_dataset(200, 200, 0.1, 0.2, 10);
  int wins = 0;
  for (const auto& traj : data) {
    const auto ex = make_forecast_example(traj, 0.5);
    const auto fit = baseline_exponential_fit(traj, 0.5);
    const double last = baseline_constant_last(traj, 0.5);
    std::vector<double> pf, pc;
    for (double t : ex.query_times) {
      pf.push_back(fit(t));
      pc.push_back(last);
    }
    wins += loss_rmse(pf, ex.targets) < loss_rmse(pc, ex.targets);
  }
  EXPECT_GE(wins, 190);
}

TEST(ModelIo, RoundTripIsBitIdentical) {
  SeededRng rng(6, 0);
  const auto model = SurrogateModel::initialize(small_arch(), rng);
  const auto path = std::filesystem::temp_directory_path() / "sdelap_model_roundtrip.json";
  save_model(model, path);
  const auto loaded = load_model(path);
  EXPECT_EQ(loaded, model);
  const auto traj = exp_trajectory(0.3, 2.0, TimeGrid::equispaced(40, 1.0));
  const std::vector<double> times{0.6, 0.8, 1.0};
  EXPECT_EQ(predict(loaded, traj, 0.5, times), predict(model, traj, 0.5, times));
  std::filesystem::remove(path);
}

TEST(ModelIo, RejectsMalformed) {
  EXPECT_THROW(deserialize_model("not json"), IoError);
  EXPECT_THROW(deserialize_model(R"({"format":"other","version":1})"), IoError);
  SeededRng rng(7, 0);
  auto text = serialize_model(SurrogateModel::initialize(small_arch(), rng));
  text.replace(text.find("\"version\":1"), 11, "\"version\":9");
  EXPECT_THROW(deserialize_model(text), IoError);
}
