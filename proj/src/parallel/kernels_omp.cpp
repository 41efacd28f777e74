#include <cstdint>

#include "sdelap/error.hpp"
#include "sdelap/kernels.hpp"
#include "sdelap/laplace.hpp"
#include "sdelap/surrogate.hpp"

namespace sdelap::kernels::parallel {

std::vector<double> terminal_values(const GbmParams& params, double t, std::size_t n,
                                    const SeededRng& rng) {
  params.validate();
  const TimeGrid grid({t});
  std::vector<double> out(n);
  const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < count; ++i) {
    SeededRng path_rng = rng.substream(static_cast<std::uint64_t>(i));
    out[static_cast<std::size_t>(i)] = sample_gbm_exact(params, grid, path_rng).values()[0];
  }
  return out;
}

std::vector<std::complex<double>> laplace_paths(const GbmParams& params, const TimeGrid& grid,
                                                std::complex<double> s, std::size_t n,
                                                const SeededRng& rng) {
  params.validate();
  if (grid.size() < 2) throw InsufficientDataError("laplace_paths needs at least 2 grid points");
  std::vector<std::complex<double>> out(n);
  const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < count; ++i) {
    SeededRng path_rng = rng.substream(static_cast<std::uint64_t>(i));
    out[static_cast<std::size_t>(i)] =
        laplace_numeric(sample_gbm_exact(params, grid, path_rng), s);
  }
  return out;
}

double batch_gradient(const SurrogateModel& model, std::span<const PreparedExample> batch,
                      std::span<double> grad) {
  if (batch.empty()) throw ShapeError("gradient batch must be nonempty");
  if (grad.size() != model.weight_count()) throw ShapeError("gradient buffer size mismatch");
  const std::size_t width = model.weight_count();
  const double weight = 1.0 / static_cast<double>(batch.size());
  std::vector<double> per_item(batch.size() * width, 0.0);
  std::vector<double> losses(batch.size());
  const auto count = static_cast<std::int64_t>(batch.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < count; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    losses[idx] = detail::accumulate_example_gradient(
        model, batch[idx], weight, std::span<double>(per_item.data() + idx * width, width));
  }
  std::fill(grad.begin(), grad.end(), 0.0);
  double loss = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double* item = per_item.data() + i * width;
    for (std::size_t m = 0; m < width; ++m) grad[m] += item[m];
    loss += losses[i] * weight;
  }
  return loss;
}

}  // namespace sdelap::kernels::parallel
