#pragma once

#include <complex>
#include <cstddef>

#include "sdelap/rng.hpp"
#include "sdelap/stochastic.hpp"

namespace sdelap {

using Complex = std::complex<double>;

/// Monte Carlo estimate of a complex mean with per-component standard errors.
struct ComplexEstimate {
  Complex mean;
  double std_error_re = 0.0;
  double std_error_im = 0.0;
  std::size_t n = 0;
};

/// Monte Carlo estimate of a real quantity.
struct RealEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
};

struct BoundReport {
  double empirical_variance = 0.0;
  double bound = 0.0;
  bool holds = false;
  double margin = 0.0;  // bound - empirical_variance
};

/// Truncated Laplace transform of a sampled path.
///
/// Trapezoid rule for the integrand e^{-st} x(t) over [t_1, t_N] plus the
/// exact integral of e^{-st} x(t_1) over [0, t_1]. The tail beyond t_N is
/// not extrapolated. Linear in the path values and conjugate-symmetric in s.
Complex laplace_numeric(const Trajectory& traj, Complex s);

// E[F(s)] = x0 / (s - mu); requires re(s) > mu.
Complex expected_laplace_gbm(const GbmParams& params, Complex s);

// E of the transform cut at `horizon`: x0 (1 - e^{(mu - s) horizon}) / (s - mu),
// or x0 * horizon when s == mu.
Complex expected_truncated_laplace(const GbmParams& params, Complex s, double horizon);

// x0^2 / (4 re(s) (mu - sigma^2/2)); requires re(s) > 0 and mu > sigma^2/2.
double variance_bound_abs_laplace(const GbmParams& params, Complex s);

// Mean of laplace_numeric over n_paths exact-sampler paths. Path i draws from
// rng.substream(i), so the estimate does not depend on thread count.
ComplexEstimate mc_mean_laplace(const GbmParams& params, Complex s, std::size_t n_paths,
                                const TimeGrid& grid, const SeededRng& rng);

// Unbiased sample variance of |F(s)|. std_error uses the normal-theory
// approximation var * sqrt(2 / (n - 1)).
RealEstimate mc_var_abs_laplace(const GbmParams& params, Complex s, std::size_t n_paths,
                                const TimeGrid& grid, const SeededRng& rng);

BoundReport check_bound(const GbmParams& params, Complex s, std::size_t n_paths,
                        const TimeGrid& grid, const SeededRng& rng);

}  // namespace sdelap
