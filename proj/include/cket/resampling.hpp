#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "cket/embedding.hpp"
#include "cket/errors.hpp"
#include "cket/estimators.hpp"
#include "cket/kernels.hpp"
#include "cket/rng.hpp"
#include "cket/sample.hpp"

namespace cket {

enum class EstimatorKind { Vvkt, Pet };

inline std::string_view to_string(EstimatorKind kind) {
  return kind == EstimatorKind::Vvkt ? "vvkt" : "pet";
}

inline EstimatorKind parse_estimator(std::string_view name) {
  if (name == "vvkt") return EstimatorKind::Vvkt;
  if (name == "pet") return EstimatorKind::Pet;
  throw ConfigError("unknown estimator '" + std::string(name) + "' (expected vvkt or pet)");
}

/// Parameters of one test run. The test accepts H0 iff p_lo <= rank <= q_hi;
/// under H0 that happens with probability exactly (q_hi - p_lo + 1) / m.
struct TestConfig {
  std::size_t m = 40;
  std::size_t p_lo = 1;
  std::size_t q_hi = 38;
  EstimatorKind estimator = EstimatorKind::Pet;
  KernelSpec kernel{};
  std::optional<double> lambda;            // VVKT; n^(-1/4) when unset
  std::optional<std::size_t> k_neighbors;  // PET; floor(sqrt(n)) when unset
  std::uint64_t seed = 0;

  void validate() const {
    if (m < 2) throw ConfigError("m must be at least 2");
    if (p_lo < 1) throw ConfigError("p_lo must be at least 1");
    if (q_hi > m) throw ConfigError("q_hi must not exceed m");
    if (p_lo > q_hi) throw ConfigError("p_lo must not exceed q_hi");
    kernel.validate();
    if (lambda && !(*lambda > 0.0)) {
      throw InvalidRegularizationError("regularization lambda must be positive");
    }
    if (k_neighbors && *k_neighbors == 0) throw InvalidHyperparameterError("kNN needs k >= 1");
  }

  double acceptance_probability() const {
    return static_cast<double>(q_hi - p_lo + 1) / static_cast<double>(m);
  }

  double lambda_for(std::size_t n) const { return lambda.value_or(default_lambda(n)); }
  std::size_t k_for(std::size_t n) const { return k_neighbors.value_or(default_knn_k(n)); }
};

struct TestOutcome {
  std::size_t rank = 0;
  bool accepted = false;
  std::vector<double> z_values;         // Z_0 (original sample) first
  std::vector<std::size_t> permutation;  // pi(1..m); pi(m) tags the original
};

/// Ybar = +1 if u <= f(x), else -1, for u uniform on (-1, 1).
inline int label_from_uniform(double u, double fx) { return u <= fx ? 1 : -1; }

/// p(X_i) for every input; rejects candidates leaving [-1, 1].
inline std::vector<double> candidate_probabilities(const Inputs& inputs, const RegressionFn& f) {
  std::vector<double> p(static_cast<std::size_t>(inputs.rows()));
  for (Eigen::Index i = 0; i < inputs.rows(); ++i) {
    p[static_cast<std::size_t>(i)] = class_probability(f(inputs.row(i)));
  }
  return p;
}

/// One label per input, +1 with probability (f(X_i) + 1) / 2, one uniform
/// draw per label in input order.
inline std::vector<int> resample_labels(const Inputs& inputs, const RegressionFn& f, Rng& rng) {
  std::vector<int> labels(static_cast<std::size_t>(inputs.rows()));
  for (Eigen::Index i = 0; i < inputs.rows(); ++i) {
    const double fx = f(inputs.row(i));
    class_probability(fx);
    labels[static_cast<std::size_t>(i)] = label_from_uniform(uniform_open_pm1(rng), fx);
  }
  return labels;
}

inline void check_permutation(std::span<const std::size_t> pi, std::size_t m) {
  if (pi.size() != m) {
    throw InvalidPermutationError("permutation has " + std::to_string(pi.size()) +
                                  " entries, expected " + std::to_string(m));
  }
  std::vector<bool> seen(m + 1, false);
  for (std::size_t v : pi) {
    if (v < 1 || v > m || seen[v]) {
      throw InvalidPermutationError("not a permutation of 1.." + std::to_string(m));
    }
    seen[v] = true;
  }
}

/// Rank of entry `which` among tagged values: 1 + #{k != which :
/// z_k < z_which, or z_k == z_which and tag_k < tag_which}. With distinct
/// tags, the ranks of all entries form a permutation of 1..m.
inline std::size_t tagged_rank(std::size_t which, std::span<const double> z,
                               std::span<const std::size_t> tags) {
  if (z.size() != tags.size()) throw InputShapeError("values and tags differ in length");
  if (which >= z.size()) throw InputShapeError("rank index out of range");
  std::size_t rank = 1;
  for (std::size_t k = 0; k < z.size(); ++k) {
    if (k == which) continue;
    if (z[k] < z[which] || (z[k] == z[which] && tags[k] < tags[which])) ++rank;
  }
  return rank;
}

/// Rank of the original reference variable z0 against the alternatives.
/// pi[j - 1] tags alternative j (j = 1..m-1); pi[m - 1] tags the original.
inline std::size_t rank_with_ties(double z0, std::span<const double> z_alts,
                                  std::span<const std::size_t> pi) {
  const std::size_t m = z_alts.size() + 1;
  check_permutation(pi, m);
  const std::size_t own_tag = pi[m - 1];
  std::size_t rank = 1;
  for (std::size_t j = 0; j + 1 < m; ++j) {
    if (z_alts[j] < z0 || (z_alts[j] == z0 && pi[j] < own_tag)) ++rank;
  }
  return rank;
}

/// Uniform permutation of 1..m by Fisher-Yates.
inline std::vector<std::size_t> draw_permutation(std::size_t m, Rng& rng) {
  std::vector<std::size_t> pi(m);
  for (std::size_t i = 0; i < m; ++i) pi[i] = i + 1;
  for (std::size_t i = m; i-- > 1;) {
    std::uniform_int_distribution<std::size_t> pick(0, i);
    std::swap(pi[i], pi[pick(rng)]);
  }
  return pi;
}

namespace detail {

inline double mean_distance_to_map(const std::vector<double>& p, const Eigen::MatrixX2d& fitted) {
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    total += g_distance_sq(GVec{p[i], 1.0 - p[i]}, GVec{fitted(r, 0), fitted(r, 1)});
  }
  return total / static_cast<double>(p.size());
}

}  // namespace detail

/// Z_j for each label set on the shared inputs, VVKT path. K + lambda I is
/// factorized once; each dataset is then solved on its own, so Z_j depends on
/// D_j alone and identical datasets give bit-identical Z.
inline std::vector<double> vvkt_reference_variables(const Inputs& inputs,
                                                    const std::vector<double>& p,
                                                    const std::vector<std::vector<int>>& label_sets,
                                                    const KernelSpec& kernel, double lambda) {
  const RegularizedGramSolver solver(kernel, inputs, lambda);
  std::vector<double> z;
  z.reserve(label_sets.size());
  for (const auto& labels : label_sets) {
    const Eigen::MatrixX2d coeffs = solver.solve(label_matrix(labels));
    const Eigen::MatrixX2d fitted = solver.gram().matrix() * coeffs;
    z.push_back(detail::mean_distance_to_map(p, fitted));
  }
  return z;
}

/// Z_j for each label set on the shared inputs, PET path.
inline std::vector<double> pet_reference_variables(const LabeledSample& original,
                                                   const RegressionFn& f,
                                                   const std::vector<std::vector<int>>& label_sets,
                                                   const EstimatorFactory& make_estimator) {
  std::vector<double> z;
  z.reserve(label_sets.size());
  for (const auto& labels : label_sets) {
    auto estimator = make_estimator();
    estimator->fit(original.with_labels(labels));
    z.push_back(reference_variable(original.inputs(), f,
                                   [&](PointRef x) { return pet_mean_map(*estimator, x); }));
  }
  return z;
}

/// Full test: m - 1 resampled label sets under f on the original inputs,
/// reference variables for all m datasets, rank of the original with random
/// tie-breaking, and the decision. Deterministic in (sample, f, config.seed).
/// `make_estimator` overrides the kNN estimator on the PET path.
inline TestOutcome run_test(const LabeledSample& sample, const RegressionFn& f,
                            const TestConfig& config, const EstimatorFactory& make_estimator = {}) {
  config.validate();
  if (sample.empty()) throw EmptyInputError("test needs a nonempty sample");
  const std::size_t n = sample.size();
  const std::size_t m = config.m;
  const Inputs& inputs = sample.inputs();
  std::vector<double> fx(n);
  std::vector<double> p(n);
  for (std::size_t i = 0; i < n; ++i) {
    fx[i] = f(inputs.row(static_cast<Eigen::Index>(i)));
    p[i] = class_probability(fx[i]);
  }

  // U_{i,j} consumed row-major: input i outer, dataset j inner.
  std::vector<std::vector<int>> label_sets(m);
  label_sets[0] = sample.labels();
  for (std::size_t j = 1; j < m; ++j) label_sets[j].resize(n);
  Rng label_rng(derive_seed(config.seed, kLabelStream));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 1; j < m; ++j) {
      label_sets[j][i] = label_from_uniform(uniform_open_pm1(label_rng), fx[i]);
    }
  }

  TestOutcome out;
  if (config.estimator == EstimatorKind::Vvkt) {
    out.z_values =
        vvkt_reference_variables(inputs, p, label_sets, config.kernel, config.lambda_for(n));
  } else {
    const EstimatorFactory factory = make_estimator ? make_estimator : knn_factory(config.k_for(n));
    out.z_values = pet_reference_variables(sample, f, label_sets, factory);
  }

  Rng perm_rng(derive_seed(config.seed, kPermutationStream));
  out.permutation = draw_permutation(m, perm_rng);
  out.rank = rank_with_ties(out.z_values[0],
                            std::span<const double>(out.z_values).subspan(1), out.permutation);
  out.accepted = config.p_lo <= out.rank && out.rank <= config.q_hi;
  return out;
}

}  // namespace cket
