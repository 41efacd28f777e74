#include "sdelap/laplace.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "sdelap/error.hpp"
#include "sdelap/kernels.hpp"

namespace sdelap {

namespace {

// e^z - 1 without cancellation for small |z|.
Complex expm1(Complex z) {
  const double half_sin = std::sin(0.5 * z.imag());
  const double re = std::expm1(z.real()) * std::cos(z.imag()) - 2.0 * half_sin * half_sin;
  return {re, std::exp(z.real()) * std::sin(z.imag())};
}

}  // namespace

Complex laplace_numeric(const Trajectory& traj, Complex s) {
  if (traj.size() < 2) throw InsufficientDataError("laplace_numeric needs at least 2 points");
  const auto t = traj.times();
  const auto x = traj.values();

  // [0, t_1] with x held at x(t_1): x_1 * (1 - e^{-s t_1}) / s
  Complex total = 0.0;
  if (t[0] > 0.0) {
    const Complex lead = (s == Complex(0.0)) ? Complex(t[0]) : -expm1(-s * t[0]) / s;
    total += x[0] * lead;
  }

  Complex prev = x[0] * std::exp(-s * t[0]);
  for (std::size_t k = 1; k < traj.size(); ++k) {
    const Complex cur = x[k] * std::exp(-s * t[k]);
    total += 0.5 * (t[k] - t[k - 1]) * (prev + cur);
    prev = cur;
  }
  return total;
}

Complex expected_laplace_gbm(const GbmParams& params, Complex s) {
  if (!(s.real() > params.mu)) {
    throw ConvergenceDomainError("E[F(s)] requires re(s) > mu (re(s) = " +
                                 std::to_string(s.real()) + ", mu = " +
                                 std::to_string(params.mu) + ")");
  }
  return params.x0 / (s - params.mu);
}

Complex expected_truncated_laplace(const GbmParams& params, Complex s, double horizon) {
  if (!(horizon > 0.0)) throw DomainError("truncation horizon must be > 0");
  const Complex shift = s - params.mu;
  if (shift == Complex(0.0)) return params.x0 * horizon;
  return params.x0 * (-expm1(-shift * horizon)) / shift;
}

double variance_bound_abs_laplace(const GbmParams& params, Complex s) {
  if (!(s.real() > 0.0)) throw DomainError("variance bound requires re(s) > 0");
  const double drift = params.mu - 0.5 * params.sigma * params.sigma;
  if (!(drift > 0.0)) {
    throw BoundInapplicableError("variance bound requires mu - sigma^2/2 > 0, got " +
                                 std::to_string(drift));
  }
  return params.x0 * params.x0 / (4.0 * s.real() * drift);
}

namespace {

void require_paths(std::size_t n_paths) {
  if (n_paths < 2) throw ParameterError("Monte Carlo estimates need n_paths >= 2");
}

}  // namespace

ComplexEstimate mc_mean_laplace(const GbmParams& params, Complex s, std::size_t n_paths,
                                const TimeGrid& grid, const SeededRng& rng) {
  require_paths(n_paths);
  params.validate();
  const auto samples = kernels::parallel::laplace_paths(params, grid, s, n_paths, rng);

  const double n = static_cast<double>(n_paths);
  Complex sum = 0.0;
  for (const auto& f : samples) sum += f;
  const Complex mean = sum / n;
  double ss_re = 0.0;
  double ss_im = 0.0;
  for (const auto& f : samples) {
    const Complex d = f - mean;
    ss_re += d.real() * d.real();
    ss_im += d.imag() * d.imag();
  }
  ComplexEstimate est;
  est.mean = mean;
  est.std_error_re = std::sqrt(ss_re / (n - 1.0) / n);
  est.std_error_im = std::sqrt(ss_im / (n - 1.0) / n);
  est.n = n_paths;
  return est;
}

RealEstimate mc_var_abs_laplace(const GbmParams& params, Complex s, std::size_t n_paths,
                                const TimeGrid& grid, const SeededRng& rng) {
  require_paths(n_paths);
  params.validate();
  const auto samples = kernels::parallel::laplace_paths(params, grid, s, n_paths, rng);

  const double n = static_cast<double>(n_paths);
  double sum = 0.0;
  for (const auto& f : samples) sum += std::abs(f);
  const double mean = sum / n;
  double ss = 0.0;
  for (const auto& f : samples) {
    const double d = std::abs(f) - mean;
    ss += d * d;
  }
  RealEstimate est;
  est.mean = ss / (n - 1.0);
  est.std_error = est.mean * std::sqrt(2.0 / (n - 1.0));
  est.n = n_paths;
  return est;
}

BoundReport check_bound(const GbmParams& params, Complex s, std::size_t n_paths,
                        const TimeGrid& grid, const SeededRng& rng) {
  BoundReport report;
  report.bound = variance_bound_abs_laplace(params, s);
  report.empirical_variance = mc_var_abs_laplace(params, s, n_paths, grid, rng).mean;
  report.holds = report.empirical_variance <= report.bound;
  report.margin = report.bound - report.empirical_variance;
  return report;
}

}  // namespace sdelap
