#pragma once

#include <array>
#include <cstdint>

namespace sdelap {

/// Reproducible random source keyed by (seed, stream).
///
/// The generator is xoshiro256** whose state is expanded with splitmix64 from
/// a hash of the key, so every (seed, stream) pair names a fixed sequence on
/// every platform. Normals use Box-Muller with the second variate cached.
/// Parallel code derives one sub-stream per work item with `substream(i)`
/// instead of sharing an engine between threads.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed = 0, std::uint64_t stream = 0);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

  // Independent generator for work item `index`; does not advance *this.
  SeededRng substream(std::uint64_t index) const;

  std::uint64_t next_u64();
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double low, double high);
  double normal();

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::array<std::uint64_t, 4> state_{};
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace sdelap
