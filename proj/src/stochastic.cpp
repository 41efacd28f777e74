#include "sdelap/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sdelap/error.hpp"

namespace sdelap {

void GbmParams::validate() const {
  if (!std::isfinite(x0) || !std::isfinite(mu) || !std::isfinite(sigma)) {
    throw ParameterError("GBM parameters must be finite");
  }
  if (x0 <= 0.0) throw ParameterError("GBM x0 must be > 0, got " + std::to_string(x0));
  if (sigma < 0.0) throw ParameterError("GBM sigma must be >= 0, got " + std::to_string(sigma));
}

TimeGrid::TimeGrid(std::vector<double> times) : times_(std::move(times)) {
  if (times_.empty()) throw InsufficientDataError("time grid must have at least one point");
  for (std::size_t i = 0; i < times_.size(); ++i) {
    if (!std::isfinite(times_[i]) || times_[i] < 0.0) {
      throw DomainError("time grid entries must be finite and >= 0");
    }
    if (i > 0 && !(times_[i] > times_[i - 1])) {
      throw GridOrderError("time grid must be strictly increasing (index " +
                           std::to_string(i) + ")");
    }
  }
}

TimeGrid TimeGrid::equispaced(std::size_t n, double t_max) {
  if (n == 0 || !(t_max > 0.0)) throw ParameterError("equispaced grid needs n >= 1, t_max > 0");
  std::vector<double> t(n);
  for (std::size_t k = 0; k < n; ++k) t[k] = static_cast<double>(k + 1) * t_max / static_cast<double>(n);
  return TimeGrid(std::move(t));
}

TimeGrid TimeGrid::linspace(double t_first, double t_last, std::size_t n) {
  if (n < 2 || !(t_last > t_first)) throw ParameterError("linspace needs n >= 2, t_last > t_first");
  std::vector<double> t(n);
  const double h = (t_last - t_first) / static_cast<double>(n - 1);
  for (std::size_t k = 0; k < n; ++k) t[k] = t_first + static_cast<double>(k) * h;
  t.back() = t_last;
  return TimeGrid(std::move(t));
}

double TimeGrid::min_gap() const {
  double gap = times_.front() > 0.0 ? times_.front() : std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < times_.size(); ++i) gap = std::min(gap, times_[i] - times_[i - 1]);
  return gap;
}

Trajectory::Trajectory(TimeGrid grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw ShapeError("trajectory has " + std::to_string(values_.size()) + " values for " +
                     std::to_string(grid_.size()) + " times");
  }
  if (!std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); })) {
    throw DomainError("trajectory values must be finite");
  }
}

std::vector<double> sample_standard_normals(SeededRng& rng, std::size_t n) {
  std::vector<double> out(n);
  for (auto& z : out) z = rng.normal();
  return out;
}

std::vector<double> sample_brownian_increments(const TimeGrid& grid, SeededRng& rng) {
  std::vector<double> out(grid.size());
  double prev = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    out[k] = std::sqrt(grid[k] - prev) * rng.normal();
    prev = grid[k];
  }
  return out;
}

Trajectory sample_gbm_exact(const GbmParams& params, const TimeGrid& grid, SeededRng& rng) {
  params.validate();
  const auto increments = sample_brownian_increments(grid, rng);
  const double drift = params.mu - 0.5 * params.sigma * params.sigma;
  std::vector<double> values(grid.size());
  double brownian = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    brownian += increments[k];
    values[k] = params.x0 * std::exp(drift * grid[k] + params.sigma * brownian);
  }
  return Trajectory(grid, std::move(values));
}

Trajectory sample_gbm_euler(const GbmParams& params, const TimeGrid& grid, double step,
                            SeededRng& rng) {
  params.validate();
  if (!(step > 0.0) || !std::isfinite(step)) throw ParameterError("Euler step must be > 0");
  if (step > grid.min_gap()) {
    throw ParameterError("Euler step exceeds the smallest observation gap");
  }
  std::vector<double> values(grid.size());
  double x = params.x0;
  double prev = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double gap = grid[k] - prev;
    if (gap > 0.0) {
      const auto substeps = static_cast<std::size_t>(std::ceil(gap / step - 1e-9));
      const double h = gap / static_cast<double>(substeps);
      const double sqrt_h = std::sqrt(h);
      for (std::size_t j = 0; j < substeps; ++j) {
        x += params.mu * x * h + params.sigma * x * sqrt_h * rng.normal();
      }
    }
    values[k] = x;
    prev = grid[k];
  }
  return Trajectory(grid, std::move(values));
}

double gbm_mean(const GbmParams& params, double t) {
  if (!(t >= 0.0)) throw DomainError("gbm_mean requires t >= 0");
  return params.x0 * std::exp(params.mu * t);
}

double gbm_variance(const GbmParams& params, double t) {
  if (!(t >= 0.0)) throw DomainError("gbm_variance requires t >= 0");
  return params.x0 * params.x0 * std::exp(2.0 * params.mu * t) *
         std::expm1(params.sigma * params.sigma * t);
}

double mgf_standard_normal(double lambda) { return std::exp(0.5 * lambda * lambda); }

}  // namespace sdelap
