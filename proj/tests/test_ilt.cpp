#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "sdelap/error.hpp"
#include "sdelap/ilt.hpp"
#include "sdelap/rng.hpp"
#include "sdelap/stochastic.hpp"

using namespace sdelap;
using C = std::complex<double>;

namespace {

template <class F>
std::vector<C> sample_transform(const IltConfig& cfg, F f) {
  const auto qp = query_points(cfg);
  std::vector<C> v(qp.size());
  for (std::size_t k = 0; k < qp.size(); ++k) v[k] = f(qp[k]);
  return v;
}

double round_trip_error(double a, double sigma0, std::size_t terms) {
  const IltConfig cfg{sigma0, terms, 2.0};
  const auto values = sample_transform(cfg, [a](C s) { return 1.0 / (s - a); });
  const auto times = TimeGrid::linspace(0.05, 0.95, 181);
  const auto rec = ilt_grid(values, times.times(), cfg);
  double worst = 0.0;
  for (std::size_t j = 0; j < times.size(); ++j) {
    const double exact = std::exp(a * times[j]);
    worst = std::max(worst, std::abs(rec[j] - exact) / exact);
  }
  return worst;
}

}  // namespace

TEST(QueryPoints, Construction) {
  const auto qp = query_points({1.0, 8, 1.0});
  ASSERT_EQ(qp.size(), 8u);
  EXPECT_EQ(qp[0], C(1.0, 0.0));
  EXPECT_EQ(qp[1], C(1.0, std::numbers::pi));
  for (std::size_t k = 1; k < qp.size(); ++k) {
    EXPECT_EQ(qp[k].real(), 1.0);
    EXPECT_GT(qp[k].imag(), qp[k - 1].imag());
  }
}

TEST(QueryPoints, PrefixStable) {
  const auto small = query_points({3.0, 64, 2.0});
  const auto big = query_points({3.0, 128, 2.0});
  for (std::size_t k = 0; k < small.size(); ++k) EXPECT_EQ(small[k], big[k]);
}

TEST(QueryPoints, InvalidConfig) {
  EXPECT_THROW(query_points({1.0, 2, 1.0}), ConfigError);
  EXPECT_THROW(query_points({1.0, 16, 0.0}), ConfigError);
  EXPECT_THROW(query_points({NAN, 16, 1.0}), ConfigError);
}

TEST(IltFourier, UnitStep) {
  const IltConfig cfg{2.0, 512, 2.0};
  const auto values = sample_transform(cfg, [](C s) { return 1.0 / s; });
  const double x = ilt_fourier(values, 0.5, cfg);
  // Reference value of the same 512-term series evaluated independently in
  // numpy. Its truncation error at t = 0.5 is 1.7e-3.
  EXPECT_NEAR(x, 0.9982935312600519, 1e-12);
  EXPECT_NEAR(x, 1.0, 2e-3);

  const IltConfig fine{2.0, 1024, 2.0};
  EXPECT_NEAR(ilt_fourier(sample_transform(fine, [](C s) { return 1.0 / s; }), 0.5, fine), 1.0,
              1e-3);
}

TEST(IltFourier, ShiftedPole) {
  const IltConfig cfg{6.0, 1024, 2.0};
  const auto values = sample_transform(cfg, [](C s) { return 1.0 / (s - 4.0); });
  EXPECT_NEAR(ilt_fourier(values, 0.5, cfg) / std::exp(2.0), 1.0, 1e-2);
}

TEST(IltFourier, Ramp) {
  const IltConfig cfg{2.0, 1024, 2.0};
  const auto values = sample_transform(cfg, [](C s) { return 1.0 / (s * s); });
  EXPECT_NEAR(ilt_fourier(values, 0.7, cfg) / 0.7, 1.0, 1e-2);
}

TEST(IltFourier, Errors) {
  const IltConfig cfg{2.0, 16, 2.0};
  const std::vector<C> values(16, C(1.0));
  EXPECT_THROW(ilt_fourier(values, 0.0, cfg), DomainError);
  EXPECT_THROW(ilt_fourier(values, 2.0, cfg), DomainError);
  EXPECT_THROW(ilt_fourier(values, -0.1, cfg), DomainError);
  EXPECT_THROW(ilt_fourier(std::vector<C>(15), 0.5, cfg), ShapeError);
}

TEST(IltGrid, ZeroAndAdditivity) {
  const IltConfig cfg{3.0, 64, 2.0};
  const std::vector<double> times{0.1, 0.5, 1.2, 1.9};
  for (double v : ilt_grid(std::vector<C>(64), times, cfg)) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(ilt_grid(std::vector<C>(64), std::vector<double>{0.5, 2.5}, cfg), DomainError);
}

TEST(IltGrid, LinearityProperty) {
  SeededRng rng(8, 0);
  const IltConfig cfg{4.0, 128, 2.0};
  const std::vector<double> times{0.05, 0.3, 0.77, 1.0, 1.5};
  for (int c = 0; c < 20; ++c) {
    std::vector<C> u(128), v(128), w(128);
    const double a = rng.uniform(-2.0, 2.0), b = rng.uniform(-2.0, 2.0);
    for (std::size_t k = 0; k < 128; ++k) {
      u[k] = {rng.normal(), rng.normal()};
      v[k] = {rng.normal(), rng.normal()};
      w[k] = a * u[k] + b * v[k];
    }
    const auto xu = ilt_grid(u, times, cfg);
    const auto xv = ilt_grid(v, times, cfg);
    const auto xw = ilt_grid(w, times, cfg);
    for (std::size_t j = 0; j < times.size(); ++j) {
      const double expected = a * xu[j] + b * xv[j];
      EXPECT_NEAR(xw[j], expected, 1e-12 * (std::abs(xu[j]) + std::abs(xv[j]) + 1.0));
    }
  }
}

TEST(IltGrid, ExponentialOnObservationTimes) {
  const IltConfig cfg{6.0, 1024, 2.0};
  const auto values = sample_transform(cfg, [](C s) { return 1.0 / (s - 4.0); });
  const auto times = TimeGrid::equispaced(200, 1.0);
  const auto rec = ilt_grid(values, times.times(), cfg);
  for (std::size_t j = 0; j < times.size(); ++j) {
    EXPECT_NEAR(rec[j] / std::exp(4.0 * times[j]), 1.0, 2e-2) << "t = " << times[j];
  }
}

TEST(IltRoundTrip, SimplePoles) {
  for (double a : {-1.0, 0.0, 4.0}) {
    for (double offset : {2.0, 3.0}) {
      const double e1024 = round_trip_error(a, a + offset, 1024);
      const double e2048 = round_trip_error(a, a + offset, 2048);
      EXPECT_LE(e1024, 1e-2) << "a = " << a << " sigma0 = " << a + offset;
      EXPECT_LE(e2048, e1024) << "a = " << a << " sigma0 = " << a + offset;
    }
  }
}

TEST(DecodeMatrix, MatchesDirectInversion) {
  SeededRng rng(9, 0);
  const IltConfig cfg{10.0, 32, 2.0};
  std::vector<C> values(32);
  std::vector<double> packed(64);
  for (std::size_t k = 0; k < 32; ++k) {
    values[k] = {rng.normal(), k == 0 ? 0.0 : rng.normal()};
    packed[k] = values[k].real();
    packed[32 + k] = values[k].imag();
  }
  const std::vector<double> times{0.5, 0.75, 1.0};
  const DecodeMatrix decode(times, cfg);
  std::vector<double> out(times.size());
  decode.apply(packed, out);
  const auto direct = ilt_grid(values, times, cfg);
  for (std::size_t j = 0; j < times.size(); ++j) {
    EXPECT_NEAR(out[j], direct[j], 1e-10 * (1.0 + std::abs(direct[j])));
  }
  // im F(s_0) has no effect on the decoded value
  for (std::size_t j = 0; j < times.size(); ++j) EXPECT_EQ(decode.row(j)[32], 0.0);
}
