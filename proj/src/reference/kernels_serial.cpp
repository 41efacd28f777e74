#include "sdelap/error.hpp"
#include "sdelap/kernels.hpp"
#include "sdelap/laplace.hpp"
#include "sdelap/surrogate.hpp"

namespace sdelap::kernels::serial {

std::vector<double> terminal_values(const GbmParams& params, double t, std::size_t n,
                                    const SeededRng& rng) {
  params.validate();
  const TimeGrid grid({t});
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    SeededRng path_rng = rng.substream(i);
    out[i] = sample_gbm_exact(params, grid, path_rng).values()[0];
  }
  return out;
}

std::vector<std::complex<double>> laplace_paths(const GbmParams& params, const TimeGrid& grid,
                                                std::complex<double> s, std::size_t n,
                                                const SeededRng& rng) {
  params.validate();
  if (grid.size() < 2) throw InsufficientDataError("laplace_paths needs at least 2 grid points");
  std::vector<std::complex<double>> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    SeededRng path_rng = rng.substream(i);
    out[i] = laplace_numeric(sample_gbm_exact(params, grid, path_rng), s);
  }
  return out;
}

double batch_gradient(const SurrogateModel& model, std::span<const PreparedExample> batch,
                      std::span<double> grad) {
  if (batch.empty()) throw ShapeError("gradient batch must be nonempty");
  if (grad.size() != model.weight_count()) throw ShapeError("gradient buffer size mismatch");
  const double weight = 1.0 / static_cast<double>(batch.size());
  std::fill(grad.begin(), grad.end(), 0.0);
  std::vector<double> item(model.weight_count());
  double loss = 0.0;
  for (const auto& example : batch) {
    std::fill(item.begin(), item.end(), 0.0);
    loss += detail::accumulate_example_gradient(model, example, weight, item) * weight;
    for (std::size_t m = 0; m < item.size(); ++m) grad[m] += item[m];
  }
  return loss;
}

}  // namespace sdelap::kernels::serial
