#pragma once

// Data-parallel inner loops. Each kernel exists twice with the same signature:
// `parallel` runs under OpenMP, `serial` is the plain loop kept as the
// reference. Work item i always draws from rng.substream(i) and writes only
// slot i, so both variants return bit-identical results for any thread count.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "sdelap/rng.hpp"
#include "sdelap/stochastic.hpp"

namespace sdelap {

class SurrogateModel;
struct PreparedExample;

namespace kernels {

namespace parallel {

// X_t of n independent exact-sampler paths.
std::vector<double> terminal_values(const GbmParams& params, double t, std::size_t n,
                                    const SeededRng& rng);

// laplace_numeric(sample_gbm_exact(...), s) for n independent paths.
std::vector<std::complex<double>> laplace_paths(const GbmParams& params, const TimeGrid& grid,
                                                std::complex<double> s, std::size_t n,
                                                const SeededRng& rng);

// Mean-squared-error gradient of `model` over `batch`, summed in item order.
// Returns the batch loss; `grad` must have model.weight_count() entries.
double batch_gradient(const SurrogateModel& model, std::span<const PreparedExample> batch,
                      std::span<double> grad);

}  // namespace parallel

namespace serial {

std::vector<double> terminal_values(const GbmParams& params, double t, std::size_t n,
                                    const SeededRng& rng);

std::vector<std::complex<double>> laplace_paths(const GbmParams& params, const TimeGrid& grid,
                                                std::complex<double> s, std::size_t n,
                                                const SeededRng& rng);

double batch_gradient(const SurrogateModel& model, std::span<const PreparedExample> batch,
                      std::span<double> grad);

}  // namespace serial

}  // namespace kernels
}  // namespace sdelap
