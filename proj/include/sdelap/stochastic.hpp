#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sdelap/rng.hpp"

namespace sdelap {

/// Parameters of dX = mu X dt + sigma X dB started at X_0 = x0.
struct GbmParams {
  double x0 = 1.0;
  double mu = 0.0;
  double sigma = 0.0;

  // Throws ParameterError unless x0 > 0, sigma >= 0 and all fields are finite.
  void validate() const;
  friend bool operator==(const GbmParams&, const GbmParams&) = default;
};

/// Strictly increasing, non-negative observation times.
class TimeGrid {
 public:
  TimeGrid() = default;
  // Throws GridOrderError if times are not strictly increasing, DomainError
  // for negative or non-finite entries, InsufficientDataError if empty.
  explicit TimeGrid(std::vector<double> times);

  // n points k*t_max/n for k = 1..n.
  static TimeGrid equispaced(std::size_t n, double t_max);
  // n points spanning [t_first, t_last] inclusive.
  static TimeGrid linspace(double t_first, double t_last, std::size_t n);

  std::span<const double> times() const noexcept { return times_; }
  std::size_t size() const noexcept { return times_.size(); }
  double operator[](std::size_t i) const { return times_[i]; }
  double front() const { return times_.front(); }
  double back() const { return times_.back(); }

  // Smallest gap between consecutive times, counting [0, t_1] when t_1 > 0.
  double min_gap() const;

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

 private:
  std::vector<double> times_;
};

/// Scalar path observed on a TimeGrid.
class Trajectory {
 public:
  Trajectory() = default;
  // Throws ShapeError on length mismatch, DomainError on non-finite values.
  Trajectory(TimeGrid grid, std::vector<double> values);

  const TimeGrid& grid() const noexcept { return grid_; }
  std::span<const double> times() const noexcept { return grid_.times(); }
  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }

  friend bool operator==(const Trajectory&, const Trajectory&) = default;

 private:
  TimeGrid grid_;
  std::vector<double> values_;
};

std::vector<double> sample_standard_normals(SeededRng& rng, std::size_t n);

// k-th entry is B(t_k) - B(t_{k-1}) with t_0 = 0.
std::vector<double> sample_brownian_increments(const TimeGrid& grid, SeededRng& rng);

// Exact solution X_t = x0 exp((mu - sigma^2/2) t + sigma B_t) along one path.
Trajectory sample_gbm_exact(const GbmParams& params, const TimeGrid& grid, SeededRng& rng);

// Euler-Maruyama on an internal grid of spacing <= step that contains every
// observation time. Requires 0 < step <= grid.min_gap().
Trajectory sample_gbm_euler(const GbmParams& params, const TimeGrid& grid, double step,
                            SeededRng& rng);

double gbm_mean(const GbmParams& params, double t);
double gbm_variance(const GbmParams& params, double t);

// E[exp(lambda Z)] for Z ~ N(0, 1).
double mgf_standard_normal(double lambda);

}  // namespace sdelap
