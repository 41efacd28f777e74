#include "sdelap/ilt.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "sdelap/error.hpp"

namespace sdelap {

void IltConfig::validate() const {
  if (n_terms < 8) throw ConfigError("ILT needs n_terms >= 8, got " + std::to_string(n_terms));
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ConfigError("ILT horizon must be > 0");
  if (!std::isfinite(sigma0)) throw ConfigError("ILT sigma0 must be finite");
}

std::vector<std::complex<double>> query_points(const IltConfig& config) {
  config.validate();
  std::vector<std::complex<double>> points(config.n_terms);
  const double step = std::numbers::pi / config.horizon;
  for (std::size_t k = 0; k < config.n_terms; ++k) {
    points[k] = {config.sigma0, static_cast<double>(k) * step};
  }
  return points;
}

namespace {

void check_time(double t, const IltConfig& config) {
  if (!(t > 0.0 && t < config.horizon)) {
    throw DomainError("ILT time " + std::to_string(t) + " outside (0, horizon)");
  }
}

}  // namespace

double ilt_fourier(std::span<const std::complex<double>> values, double t,
                   const IltConfig& config) {
  config.validate();
  if (values.size() != config.n_terms) {
    throw ShapeError("ILT expects " + std::to_string(config.n_terms) + " values, got " +
                     std::to_string(values.size()));
  }
  check_time(t, config);
  const double omega = std::numbers::pi * t / config.horizon;
  double sum = 0.5 * values[0].real();
  for (std::size_t k = 1; k < values.size(); ++k) {
    const double angle = static_cast<double>(k) * omega;
    sum += values[k].real() * std::cos(angle) - values[k].imag() * std::sin(angle);
  }
  return std::exp(config.sigma0 * t) / config.horizon * sum;
}

std::vector<double> ilt_grid(std::span<const std::complex<double>> values,
                             std::span<const double> times, const IltConfig& config) {
  for (double t : times) check_time(t, config);
  std::vector<double> out(times.size());
  for (std::size_t j = 0; j < times.size(); ++j) out[j] = ilt_fourier(values, times[j], config);
  return out;
}

DecodeMatrix::DecodeMatrix(std::span<const double> times, const IltConfig& config)
    : rows_(times.size()), cols_(2 * config.n_terms) {
  config.validate();
  coeffs_.resize(rows_ * cols_);
  const std::size_t terms = config.n_terms;
  for (std::size_t j = 0; j < rows_; ++j) {
    check_time(times[j], config);
    const double envelope = std::exp(config.sigma0 * times[j]) / config.horizon;
    const double omega = std::numbers::pi * times[j] / config.horizon;
    double* row = coeffs_.data() + j * cols_;
    row[0] = 0.5 * envelope;
    row[terms] = 0.0;
    for (std::size_t k = 1; k < terms; ++k) {
      const double angle = static_cast<double>(k) * omega;
      row[k] = envelope * std::cos(angle);
      row[terms + k] = -envelope * std::sin(angle);
    }
  }
}

void DecodeMatrix::apply(std::span<const double> packed, std::span<double> out) const {
  if (packed.size() != cols_ || out.size() != rows_) throw ShapeError("decode shape mismatch");
  for (std::size_t j = 0; j < rows_; ++j) {
    const double* row = coeffs_.data() + j * cols_;
    double acc = 0.0;
    for (std::size_t m = 0; m < cols_; ++m) acc += row[m] * packed[m];
    out[j] = acc;
  }
}

void DecodeMatrix::apply_transpose_add(std::span<const double> grad_out,
                                       std::span<double> grad_packed) const {
  if (grad_packed.size() != cols_ || grad_out.size() != rows_) {
    throw ShapeError("decode shape mismatch");
  }
  for (std::size_t j = 0; j < rows_; ++j) {
    const double* row = coeffs_.data() + j * cols_;
    const double g = grad_out[j];
    for (std::size_t m = 0; m < cols_; ++m) grad_packed[m] += row[m] * g;
  }
}

}  // namespace sdelap
