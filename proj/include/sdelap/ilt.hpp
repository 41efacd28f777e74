#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace sdelap {

/// Fourier-series inversion on the Bromwich line re(s) = sigma0.
///
/// Samples F at s_k = sigma0 + i k pi / horizon, k = 0..n_terms-1, and
/// reconstructs
///   x(t) = e^{sigma0 t} / horizon * [ re F(s_0) / 2 + sum_{k>=1} re(F(s_k) e^{i k pi t / horizon}) ]
/// for 0 < t < horizon. No convergence acceleration is applied, so accuracy
/// comes from n_terms and from keeping t away from the horizon.
struct IltConfig {
  double sigma0 = 10.0;
  std::size_t n_terms = 1024;
  double horizon = 2.0;

  // Throws ConfigError unless n_terms >= 8, horizon > 0 and sigma0 is finite.
  void validate() const;
  friend bool operator==(const IltConfig&, const IltConfig&) = default;
};

std::vector<std::complex<double>> query_points(const IltConfig& config);

double ilt_fourier(std::span<const std::complex<double>> values, double t,
                   const IltConfig& config);

std::vector<double> ilt_grid(std::span<const std::complex<double>> values,
                             std::span<const double> times, const IltConfig& config);

/// The inversion as a real matrix acting on [re F(s_0..s_{K-1}), im F(s_0..s_{K-1})].
///
/// Row j holds the coefficients that produce x(times[j]); ilt_grid(values) equals
/// apply(values) up to rounding. The learner decodes through this map.
class DecodeMatrix {
 public:
  DecodeMatrix(std::span<const double> times, const IltConfig& config);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::span<const double> row(std::size_t j) const {
    return {coeffs_.data() + j * cols_, cols_};
  }

  // out[j] = sum_m row(j)[m] * packed[m], packed of length 2K.
  void apply(std::span<const double> packed, std::span<double> out) const;
  // grad_packed[m] += sum_j row(j)[m] * grad_out[j].
  void apply_transpose_add(std::span<const double> grad_out, std::span<double> grad_packed) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> coeffs_;
};

}  // namespace sdelap
