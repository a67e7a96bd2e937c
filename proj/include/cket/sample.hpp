#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "cket/errors.hpp"

namespace cket {

/// n x d table of input points, one point per row. Row-major so that a row
/// binds to PointRef without a copy.
using Inputs = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Point = Eigen::RowVectorXd;
using PointRef = Eigen::Ref<const Eigen::RowVectorXd>;

/// Candidate (or true) regression function x -> E[Y | X = x] in [-1, 1].
using RegressionFn = std::function<double(PointRef)>;

inline void check_label(int y) {
  if (y != 1 && y != -1) {
    throw InvalidLabelError("label must be -1 or +1, got " + std::to_string(y));
  }
}

/// A dataset {(X_i, Y_i)} with labels in {-1, +1}.
class LabeledSample {
 public:
  LabeledSample() = default;

  LabeledSample(Inputs inputs, std::vector<int> labels)
      : inputs_(std::move(inputs)), labels_(std::move(labels)) {
    if (static_cast<std::size_t>(inputs_.rows()) != labels_.size()) {
      throw InputShapeError("sample has " + std::to_string(inputs_.rows()) +
                            " inputs but " + std::to_string(labels_.size()) + " labels");
    }
    for (int y : labels_) check_label(y);
  }

  const Inputs& inputs() const noexcept { return inputs_; }
  const std::vector<int>& labels() const noexcept { return labels_; }
  std::size_t size() const noexcept { return labels_.size(); }
  Eigen::Index dim() const noexcept { return inputs_.cols(); }
  bool empty() const noexcept { return labels_.empty(); }

  /// Same inputs, different labels; used for the resampled datasets.
  LabeledSample with_labels(std::vector<int> labels) const {
    return LabeledSample(inputs_, std::move(labels));
  }

 private:
  Inputs inputs_;
  std::vector<int> labels_;
};

/// Builds a 1-d input table from a list of scalars.
inline Inputs inputs_1d(const std::vector<double>& xs) {
  Inputs out(static_cast<Eigen::Index>(xs.size()), 1);
  for (std::size_t i = 0; i < xs.size(); ++i) out(static_cast<Eigen::Index>(i), 0) = xs[i];
  return out;
}

}  // namespace cket
