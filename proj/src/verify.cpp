#include "sdelap/verify.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>

#include <json.hpp>

#include "sdelap/error.hpp"
#include "sdelap/ilt.hpp"
#include "sdelap/kernels.hpp"
#include "sdelap/laplace.hpp"
#include "sdelap/stochastic.hpp"

namespace sdelap {

namespace {

VerifyCase two_sided(std::string name, double measured, double expected, double tolerance,
                     const VerifyOptions& opt) {
  VerifyCase c;
  c.name = std::move(name);
  c.tolerance = tolerance * opt.tolerance_scale;
  c.expected = expected + opt.oracle_shift * c.tolerance;
  c.measured = measured;
  c.pass = std::abs(c.measured - c.expected) <= c.tolerance;
  return c;
}

VerifyCase upper(std::string name, double measured, double bound, const VerifyOptions& opt) {
  VerifyCase c;
  c.name = std::move(name);
  c.measured = measured;
  c.expected = bound * opt.bound_scale;
  c.upper_bound = true;
  c.pass = c.measured <= c.expected;
  return c;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::string complex_name(std::complex<double> s) {
  if (s.imag() == 0.0) return fmt(s.real());
  return fmt(s.real()) + "+" + fmt(s.imag()) + "i";
}

void run_mgf(const VerifyOptions& opt, VerifyReport& report) {
  const std::size_t n = opt.n_paths.value_or(10'000'000);
  const double lambdas[] = {0.25, 0.5, 1.0};
  for (std::size_t i = 0; i < std::size(lambdas); ++i) {
    SeededRng rng(opt.seed, 100 + i);
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) sum += std::exp(lambdas[i] * rng.normal());
    const double expected = mgf_standard_normal(lambdas[i]);
    report.cases.push_back(two_sided("lambda=" + fmt(lambdas[i]), sum / static_cast<double>(n),
                                     expected, 0.01 * expected, opt));
  }
}

void mean_and_se(const std::vector<double>& v, double& mean, double& se, double& var) {
  const double n = static_cast<double>(v.size());
  double sum = 0.0;
  for (double x : v) sum += x;
  mean = sum / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  var = ss / (n - 1.0);
  se = std::sqrt(var / n);
}

void run_moments(const VerifyOptions& opt, VerifyReport& report) {
  const std::size_t n_mean = opt.n_paths.value_or(100'000);
  const std::size_t n_var = 10 * n_mean;
  SeededRng draw(opt.seed, 200);
  for (int i = 0; i < 10; ++i) {
    GbmParams p;
    p.x0 = draw.uniform(0.1, 1.0);
    p.mu = draw.uniform(0.0, 4.0);
    // first five cases keep sigma <= 0.5 for the variance check
    p.sigma = i < 5 ? draw.uniform(0.1, 0.5) : draw.uniform(0.5, 1.0);
    const std::string tag = "x0=" + fmt(p.x0) + " mu=" + fmt(p.mu) + " sigma=" + fmt(p.sigma);

    const auto values = kernels::parallel::terminal_values(p, 1.0, n_mean, SeededRng(opt.seed, 300 + i));
    double mean, se, var;
    mean_and_se(values, mean, se, var);
    report.cases.push_back(two_sided("mean " + tag, mean, gbm_mean(p, 1.0), 4.0 * se, opt));

    if (i < 5) {
      const auto big = kernels::parallel::terminal_values(p, 1.0, n_var, SeededRng(opt.seed, 400 + i));
      mean_and_se(big, mean, se, var);
      const double expected = gbm_variance(p, 1.0);
      report.cases.push_back(two_sided("variance " + tag, var, expected, 0.05 * expected, opt));
    }
  }
}

void run_laplace_mean(const VerifyOptions& opt, VerifyReport& report) {
  const std::size_t n = opt.n_paths.value_or(2000);
  const GbmParams p{0.5, 4.0, 0.5};
  const TimeGrid grid = TimeGrid::linspace(0.0, 1.0, 2000);
  const std::complex<double> points[] = {{6.0, 0.0}, {8.0, 0.0}, {8.0, 4.0}};
  for (std::size_t i = 0; i < std::size(points); ++i) {
    const auto s = points[i];
    const auto est = mc_mean_laplace(p, s, n, grid, SeededRng(opt.seed, 500 + i));
    const auto target = expected_truncated_laplace(p, s, 1.0);
    const double budget = 1e-3 * std::abs(target);
    report.cases.push_back(two_sided("s=" + complex_name(s) + " re", est.mean.real(),
                                     target.real(), 3.0 * est.std_error_re + budget, opt));
    report.cases.push_back(two_sided("s=" + complex_name(s) + " im", est.mean.imag(),
                                     target.imag(), 3.0 * est.std_error_im + budget, opt));
  }
}

void run_variance_bound(const VerifyOptions& opt, VerifyReport& report) {
  const std::size_t n = opt.n_paths.value_or(2000);
  const TimeGrid grid = TimeGrid::linspace(0.0, 1.0, 2000);
  SeededRng draw(opt.seed, 600);
  for (int i = 0; i < 20; ++i) {
    GbmParams p;
    p.x0 = draw.uniform(0.1, 1.0);
    p.mu = draw.uniform(2.0, 8.0);
    p.sigma = draw.uniform(0.1, 1.0);
    const double re = p.mu + draw.uniform(1.0, 4.0);
    const double im = (i % 2 == 0) ? 0.0 : draw.uniform(0.0, 8.0);
    const std::complex<double> s{re, im};
    const auto r = check_bound(p, s, n, grid, SeededRng(opt.seed, 700 + i));
    report.cases.push_back(upper("x0=" + fmt(p.x0) + " mu=" + fmt(p.mu) + " sigma=" +
                                     fmt(p.sigma) + " s=" + complex_name(s),
                                 r.empirical_variance, r.bound, opt));
  }
}

struct TransformPair {
  const char* name;
  std::function<std::complex<double>(std::complex<double>)> transform;
  std::function<double(double)> signal;
  double sigma0;
};

void run_ilt_selftest(const VerifyOptions& opt, VerifyReport& report) {
  const TransformPair pairs[] = {
      {"1/s <-> 1", [](auto s) { return 1.0 / s; }, [](double) { return 1.0; }, 2.0},
      {"1/s^2 <-> t", [](auto s) { return 1.0 / (s * s); }, [](double t) { return t; }, 4.0},
      {"1/(s-4) <-> e^{4t}", [](auto s) { return 1.0 / (s - 4.0); },
       [](double t) { return std::exp(4.0 * t); }, 6.0},
      {"1/(s+1) <-> e^{-t}", [](auto s) { return 1.0 / (s + 1.0); },
       [](double t) { return std::exp(-t); }, 1.0},
  };
  const TimeGrid times = TimeGrid::linspace(0.05, 0.95, 181);
  for (const auto& pair : pairs) {
    const IltConfig cfg{pair.sigma0, 1024, 2.0};
    const auto qp = query_points(cfg);
    std::vector<std::complex<double>> values(qp.size());
    std::transform(qp.begin(), qp.end(), values.begin(), pair.transform);
    const auto recovered = ilt_grid(values, times.times(), cfg);
    double worst = 0.0;
    for (std::size_t j = 0; j < times.size(); ++j) {
      const double exact = pair.signal(times[j]);
      worst = std::max(worst, std::abs(recovered[j] - exact) / std::abs(exact));
    }
    // measured is the worst relative error, the oracle is exact recovery
    report.cases.push_back(two_sided(pair.name, worst, 0.0, 1e-2, opt));
  }
}

}  // namespace

std::string to_string(VerifySuite suite) {
  switch (suite) {
    case VerifySuite::mgf: return "mgf";
    case VerifySuite::moments: return "moments";
    case VerifySuite::laplace_mean: return "laplace-mean";
    case VerifySuite::variance_bound: return "variance-bound";
    case VerifySuite::ilt_selftest: return "ilt-selftest";
  }
  return "?";
}

VerifySuite verify_suite_from_string(const std::string& name) {
  for (auto s : {VerifySuite::mgf, VerifySuite::moments, VerifySuite::laplace_mean,
                 VerifySuite::variance_bound, VerifySuite::ilt_selftest}) {
    if (to_string(s) == name) return s;
  }
  throw ConfigError("unknown verify suite '" + name + "'");
}

bool VerifyReport::passed() const {
  return !cases.empty() &&
         std::all_of(cases.begin(), cases.end(), [](const VerifyCase& c) { return c.pass; });
}

std::string VerifyReport::to_json() const {
  nlohmann::ordered_json j;
  j["suite"] = suite;
  j["passed"] = passed();
  auto arr = nlohmann::ordered_json::array();
  for (const auto& c : cases) {
    nlohmann::ordered_json e;
    e["name"] = c.name;
    e["measured"] = c.measured;
    e["expected"] = c.expected;
    e["tolerance"] = c.tolerance;
    e["kind"] = c.upper_bound ? "upper-bound" : "two-sided";
    e["pass"] = c.pass;
    arr.push_back(std::move(e));
  }
  j["cases"] = std::move(arr);
  return j.dump(2) + "\n";
}

VerifyReport verify(VerifySuite suite, const VerifyOptions& options) {
  if (options.n_paths && *options.n_paths < 2) throw ConfigError("n_paths must be >= 2");
  if (!(options.tolerance_scale > 0.0)) throw ConfigError("tolerance_scale must be > 0");
  VerifyReport report;
  report.suite = to_string(suite);
  switch (suite) {
    case VerifySuite::mgf: run_mgf(options, report); break;
    case VerifySuite::moments: run_moments(options, report); break;
    case VerifySuite::laplace_mean: run_laplace_mean(options, report); break;
    case VerifySuite::variance_bound: run_variance_bound(options, report); break;
    case VerifySuite::ilt_selftest: run_ilt_selftest(options, report); break;
  }
  return report;
}

}  // namespace sdelap
