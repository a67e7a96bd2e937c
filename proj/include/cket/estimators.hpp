#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "cket/embedding.hpp"
#include "cket/errors.hpp"
#include "cket/sample.hpp"

namespace cket {

/// Estimator of the conditional probability p(x) = P(Y = +1 | X = x).
/// Implementations must return values in [0, 1] and be safe for concurrent
/// predict() calls once fitted.
class ProbEstimator {
 public:
  virtual ~ProbEstimator() = default;

  virtual void fit(const LabeledSample& sample) = 0;
  virtual double predict(PointRef x) const = 0;
};

/// Produces a fresh, unfitted estimator for each dataset.
using EstimatorFactory = std::function<std::unique_ptr<ProbEstimator>()>;

/// k-nearest-neighbour vote under Euclidean distance. Ties in distance go to
/// the lower training index; a query equal to a training input counts that
/// point as a neighbour.
class KnnEstimator final : public ProbEstimator {
 public:
  explicit KnnEstimator(std::size_t k) : k_(k) {
    if (k == 0) throw InvalidHyperparameterError("kNN needs k >= 1");
  }

  void fit(const LabeledSample& sample) override {
    if (k_ > sample.size()) {
      throw InvalidHyperparameterError("kNN k = " + std::to_string(k_) +
                                       " exceeds the sample size " + std::to_string(sample.size()));
    }
    sample_ = sample;
  }

  double predict(PointRef x) const override {
    std::size_t plus = 0;
    for (std::size_t idx : neighbors(x)) {
      if (sample_.labels()[idx] == 1) ++plus;
    }
    return static_cast<double>(plus) / static_cast<double>(k_);
  }

  /// Indices of the k nearest training points, closest first.
  std::vector<std::size_t> neighbors(PointRef x) const {
    if (sample_.empty()) throw InvalidHyperparameterError("kNN estimator used before fit");
    if (x.size() != sample_.dim()) {
      throw InputShapeError("query has dimension " + std::to_string(x.size()) +
                            ", estimator was fitted on dimension " +
                            std::to_string(sample_.dim()));
    }
    const Inputs& train = sample_.inputs();
    std::vector<std::pair<double, std::size_t>> dist(sample_.size());
    for (std::size_t i = 0; i < dist.size(); ++i) {
      dist[i] = {(train.row(static_cast<Eigen::Index>(i)) - x).squaredNorm(), i};
    }
    // (distance, index) is a strict total order, so the result is unique.
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k_), dist.end());
    std::vector<std::size_t> out(k_);
    for (std::size_t i = 0; i < k_; ++i) out[i] = dist[i].second;
    return out;
  }

  std::size_t k() const noexcept { return k_; }

 private:
  std::size_t k_;
  LabeledSample sample_;
};

inline double knn_predict(const KnnEstimator& estimator, PointRef x) {
  return estimator.predict(x);
}

/// k = floor(sqrt(n)), at least 1.
inline std::size_t default_knn_k(std::size_t n) {
  const auto k = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n))));
  return std::max<std::size_t>(k, 1);
}

/// Plug-in mean map (1 - p_hat(x)) l(., -1) + p_hat(x) l(., +1).
inline GVec pet_mean_map(double p_hat) { return GVec{p_hat, 1.0 - p_hat}; }

inline GVec pet_mean_map(const ProbEstimator& estimator, PointRef x) {
  return pet_mean_map(estimator.predict(x));
}

inline EstimatorFactory knn_factory(std::size_t k) {
  return [k] { return std::make_unique<KnnEstimator>(k); };
}

}  // namespace cket
