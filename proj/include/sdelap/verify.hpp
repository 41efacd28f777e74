#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sdelap {

enum class VerifySuite { mgf, moments, laplace_mean, variance_bound, ilt_selftest };

std::string to_string(VerifySuite suite);
VerifySuite verify_suite_from_string(const std::string& name);

struct VerifyOptions {
  // Overrides the per-suite Monte Carlo path count (the moments suite uses
  // ten times this many paths for its variance cases).
  std::optional<std::size_t> n_paths;
  // Multiplies every two-sided tolerance.
  double tolerance_scale = 1.0;
  // Moves every two-sided oracle by this many tolerances. Used to check that
  // the tolerances actually reject a wrong target.
  double oracle_shift = 0.0;
  // Multiplies every upper bound.
  double bound_scale = 1.0;
  std::uint64_t seed = 2023;
};

struct VerifyCase {
  std::string name;
  double measured = 0.0;
  double expected = 0.0;
  // Two-sided cases pass when |measured - expected| <= tolerance; upper-bound
  // cases pass when measured <= expected and carry tolerance 0.
  double tolerance = 0.0;
  bool upper_bound = false;
  bool pass = false;
};

struct VerifyReport {
  std::string suite;
  std::vector<VerifyCase> cases;

  bool passed() const;
  std::string to_json() const;
};

VerifyReport verify(VerifySuite suite, const VerifyOptions& options = {});

}  // namespace sdelap
