#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <type_traits>
#include <utility>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "cket/datagen.hpp"
#include "cket/errors.hpp"
#include "cket/resampling.hpp"
#include "cket/rng.hpp"

namespace cket {

// ---------------------------------------------------------------------------
// Scheduling
// ---------------------------------------------------------------------------

/// Runs fn(i) for i in [0, count) on up to `workers` threads (0 = hardware
/// concurrency). Callers write results into slot i, so output never depends
/// on the worker count. The first exception thrown is rethrown here.
template <class Fn>
void parallel_for(std::size_t count, std::size_t workers, Fn&& fn) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------------------
// Statistics helpers
// ---------------------------------------------------------------------------

/// Pearson chi-square statistic of a histogram against the uniform law.
inline double chi_square_uniform(const std::vector<std::size_t>& histogram) {
  if (histogram.empty()) throw EmptyInputError("histogram has no bins");
  std::size_t total = 0;
  for (auto c : histogram) total += c;
  if (total == 0) throw EmptyInputError("histogram is empty");
  const double expected = static_cast<double>(total) / static_cast<double>(histogram.size());
  double stat = 0.0;
  for (auto c : histogram) {
    const double d = static_cast<double>(c) - expected;
    stat += d * d / expected;
  }
  return stat;
}

inline double chi_square_quantile(double probability, double dof) {
  boost::math::chi_squared dist(dof);
  return boost::math::quantile(dist, probability);
}

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

/// One H0 or H1 experiment: a fresh dataset of size n from the true model and
/// a test of `candidate` on it. Both draws come from sub-streams of `seed`.
inline TestOutcome single_test(const TestConfig& config, const MixtureParams& truth,
                               const MixtureParams& candidate, std::size_t n,
                               std::uint64_t seed) {
  Rng data_rng(derive_seed(seed, kDataStream));
  const LabeledSample sample = sample_dataset(truth, n, data_rng);
  TestConfig cfg = config;
  cfg.seed = derive_seed(seed, kTestStream);
  return run_test(sample, regression_fn(candidate), cfg);
}

struct CalibrationReport {
  std::size_t trials = 0;
  std::size_t accepted = 0;
  double acceptance_rate = 0.0;
  double expected_acceptance = 0.0;
  std::vector<std::size_t> rank_histogram;  // bin r - 1 counts rank r
  double chi_square_stat = 0.0;
};

/// `trials` independent H0 experiments (fresh dataset each, candidate equal
/// to the truth). Deterministic in config.seed for any worker count.
inline CalibrationReport calibrate_type1(const TestConfig& config, const MixtureParams& params,
                                         std::size_t n, std::size_t trials,
                                         std::size_t workers = 0) {
  config.validate();
  params.validate();
  if (trials == 0) throw ConfigError("calibration needs at least one trial");
  if (n == 0) throw ConfigError("sample size must be at least 1");

  std::vector<std::size_t> ranks(trials);
  parallel_for(trials, workers, [&](std::size_t t) {
    const std::uint64_t seed = derive_seed(config.seed, kTrialStream, t);
    ranks[t] = single_test(config, params, params, n, seed).rank;
  });

  CalibrationReport report;
  report.trials = trials;
  report.rank_histogram.assign(config.m, 0);
  for (std::size_t r : ranks) {
    ++report.rank_histogram[r - 1];
    if (config.p_lo <= r && r <= config.q_hi) ++report.accepted;
  }
  report.acceptance_rate = static_cast<double>(report.accepted) / static_cast<double>(trials);
  report.expected_acceptance = config.acceptance_probability();
  report.chi_square_stat = chi_square_uniform(report.rank_histogram);
  return report;
}

/// Inclusive rectangular grid over candidate parameters (p, lambda).
struct GridSpec {
  double p_lo = 0.2;
  double p_hi = 0.8;
  double lambda_lo = 0.5;
  double lambda_hi = 1.5;
  double step = 0.01;

  void validate() const {
    if (!(p_lo < p_hi)) throw ConfigError("grid p range must satisfy lo < hi");
    if (!(lambda_lo < lambda_hi)) throw ConfigError("grid lambda range must satisfy lo < hi");
    if (!(step > 0.0)) throw ConfigError("grid step must be positive");
  }

  /// lo, lo + step, ... up to hi inclusive (hi is hit when (hi - lo) / step
  /// is an integer up to rounding).
  std::vector<double> axis(double lo, double hi) const {
    const double span = (hi - lo) / step;
    const auto count = static_cast<std::size_t>(std::floor(span + 1e-9)) + 1;
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) out[i] = lo + static_cast<double>(i) * step;
    return out;
  }

  std::vector<double> p_axis() const { return axis(p_lo, p_hi); }
  std::vector<double> lambda_axis() const { return axis(lambda_lo, lambda_hi); }
};

struct GridRow {
  double p = 0.0;
  double lambda = 0.0;
  std::size_t rank = 0;
  double normalized_rank = 0.0;
};

/// One test per grid candidate. With `shared_data` a single dataset from the
/// truth is reused by every cell; otherwise each cell draws its own.
inline std::vector<GridRow> grid_experiment(const GridSpec& grid, const TestConfig& config,
                                            const MixtureParams& params, std::size_t n,
                                            bool shared_data = true, std::size_t workers = 0) {
  grid.validate();
  config.validate();
  params.validate();
  if (n == 0) throw ConfigError("sample size must be at least 1");

  const auto ps = grid.p_axis();
  const auto lambdas = grid.lambda_axis();
  for (double p : ps) {
    if (!(p > 0.0 && p < 1.0)) throw ConfigError("grid p values must lie in (0, 1)");
  }
  for (double l : lambdas) {
    if (!(l > 0.0)) throw ConfigError("grid lambda values must be positive");
  }

  LabeledSample shared;
  if (shared_data) {
    Rng data_rng(derive_seed(config.seed, kDataStream, 0));
    shared = sample_dataset(params, n, data_rng);
  }

  std::vector<GridRow> rows(ps.size() * lambdas.size());
  parallel_for(rows.size(), workers, [&](std::size_t cell) {
    const double p = ps[cell / lambdas.size()];
    const double lambda = lambdas[cell % lambdas.size()];
    LabeledSample own;
    if (!shared_data) {
      Rng data_rng(derive_seed(config.seed, kDataStream, cell + 1));
      own = sample_dataset(params, n, data_rng);
    }
    TestConfig cfg = config;
    cfg.seed = derive_seed(config.seed, kTestStream, cell);
    const auto outcome =
        run_test(shared_data ? shared : own, regression_fn(candidate_params(p, lambda)), cfg);
    rows[cell] = GridRow{p, lambda, outcome.rank,
                         static_cast<double>(outcome.rank) / static_cast<double>(config.m)};
  });
  return rows;
}

struct ConsistencyRow {
  std::size_t n = 0;
  double mean_rank = 0.0;
  double mean_normalized_rank = 0.0;
  double sd_normalized_rank = 0.0;  // sample standard deviation over repeats
};

/// Mean rank of the original sample for candidate (p, lambda) over `repeats`
/// fresh datasets at each sample size.
inline std::vector<ConsistencyRow> consistency_curve(double cand_p, double cand_lambda,
                                                     const TestConfig& config,
                                                     const MixtureParams& params,
                                                     const std::vector<std::size_t>& sizes,
                                                     std::size_t repeats,
                                                     std::size_t workers = 0) {
  config.validate();
  params.validate();
  const MixtureParams candidate = candidate_params(cand_p, cand_lambda);
  candidate.validate();
  if (sizes.empty()) throw ConfigError("consistency curve needs at least one sample size");
  if (repeats == 0) throw ConfigError("consistency curve needs at least one repeat");
  for (auto n : sizes) {
    if (n == 0) throw ConfigError("sample sizes must be at least 1");
  }

  std::vector<std::size_t> ranks(sizes.size() * repeats);
  parallel_for(ranks.size(), workers, [&](std::size_t idx) {
    const std::size_t n = sizes[idx / repeats];
    const std::size_t r = idx % repeats;
    const std::uint64_t seed = derive_seed(derive_seed(config.seed, kTrialStream, n), kTrialStream, r);
    ranks[idx] = single_test(config, params, candidate, n, seed).rank;
  });

  std::vector<ConsistencyRow> rows;
  rows.reserve(sizes.size());
  const double m = static_cast<double>(config.m);
  for (std::size_t a = 0; a < sizes.size(); ++a) {
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t r = 0; r < repeats; ++r) {
      const double v = static_cast<double>(ranks[a * repeats + r]);
      sum += v;
      sum_sq += v * v;
    }
    const double reps = static_cast<double>(repeats);
    const double mean = sum / reps;
    const double var = repeats > 1 ? std::max(0.0, (sum_sq - reps * mean * mean) / (reps - 1)) : 0.0;
    rows.push_back(ConsistencyRow{sizes[a], mean, mean / m, std::sqrt(var) / m});
  }
  return rows;
}

// ---------------------------------------------------------------------------
// CSV output
// ---------------------------------------------------------------------------

/// 17 significant digits, enough to round-trip any double.
inline std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

template <class T>
std::string join(const std::vector<T>& values, char sep) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += sep;
    if constexpr (std::is_floating_point_v<T>) {
      out += format_double(values[i]);
    } else {
      out += std::to_string(values[i]);
    }
  }
  return out;
}

inline void write_test_csv(std::ostream& os, const TestConfig& config, const TestOutcome& outcome) {
  os << "rank,m,p_lo,q_hi,accepted,normalized_rank,z0,z_values,permutation\n";
  os << outcome.rank << ',' << config.m << ',' << config.p_lo << ',' << config.q_hi << ','
     << (outcome.accepted ? 1 : 0) << ','
     << format_double(static_cast<double>(outcome.rank) / static_cast<double>(config.m)) << ','
     << format_double(outcome.z_values.front()) << ',' << join(outcome.z_values, ';') << ','
     << join(outcome.permutation, ';') << '\n';
}

inline void write_calibration_csv(std::ostream& os, const TestConfig& config,
                                  const CalibrationReport& report) {
  os << "estimator,trials,m,p_lo,q_hi,accepted,acceptance_rate,expected_acceptance,"
        "chi_square,chi_square_q999,rank_histogram\n";
  os << to_string(config.estimator) << ',' << report.trials << ',' << config.m << ','
     << config.p_lo << ',' << config.q_hi << ',' << report.accepted << ','
     << format_double(report.acceptance_rate) << ',' << format_double(report.expected_acceptance)
     << ',' << format_double(report.chi_square_stat) << ','
     << format_double(chi_square_quantile(0.999, static_cast<double>(config.m - 1))) << ','
     << join(report.rank_histogram, ';') << '\n';
}

inline void write_grid_csv(std::ostream& os, const std::vector<GridRow>& rows) {
  os << "p,lambda,rank,normalized_rank\n";
  for (const auto& r : rows) {
    os << format_double(r.p) << ',' << format_double(r.lambda) << ',' << r.rank << ','
       << format_double(r.normalized_rank) << '\n';
  }
}

inline void write_consistency_csv(std::ostream& os, const std::vector<ConsistencyRow>& rows) {
  os << "n,mean_rank,mean_normalized_rank,sd_normalized_rank\n";
  for (const auto& r : rows) {
    os << r.n << ',' << format_double(r.mean_rank) << ',' << format_double(r.mean_normalized_rank)
       << ',' << format_double(r.sd_normalized_rank) << '\n';
  }
}

}  // namespace cket
