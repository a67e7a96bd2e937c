#pragma once

#include <cmath>
#include <string>

#include <Eigen/Core>

#include "cket/errors.hpp"
#include "cket/sample.hpp"

namespace cket {

enum class KernelFamily { Gaussian };

/// Input-space kernel. Gaussian: k(x1, x2) = exp(-|x1 - x2|^2 / (2 sigma^2)),
/// bounded by 1.
struct KernelSpec {
  KernelFamily family = KernelFamily::Gaussian;
  double sigma = 0.5;

  void validate() const {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
      throw InvalidHyperparameterError("kernel bandwidth must be positive and finite");
    }
  }

  /// Uniform bound on k(x, x).
  double bound() const noexcept { return 1.0; }
};

inline double eval_kernel(const KernelSpec& spec, PointRef x1, PointRef x2) {
  if (x1.size() != x2.size()) {
    throw InputShapeError("kernel arguments differ in dimension (" + std::to_string(x1.size()) +
                          " vs " + std::to_string(x2.size()) + ")");
  }
  if (x1.size() == 0) throw InputShapeError("kernel arguments must have dimension >= 1");
  spec.validate();
  const double sq = (x1 - x2).squaredNorm();
  return std::exp(-sq / (2.0 * spec.sigma * spec.sigma));
}

/// Dense symmetric kernel matrix over a point set. The upper triangle is
/// computed once and mirrored, so symmetry is exact.
class GramMatrix {
 public:
  GramMatrix(const KernelSpec& spec, const Inputs& points) {
    if (points.rows() == 0) throw EmptyInputError("gram matrix needs at least one point");
    spec.validate();
    const Eigen::Index n = points.rows();
    entries_.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      entries_(i, i) = eval_kernel(spec, points.row(i), points.row(i));
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const double v = eval_kernel(spec, points.row(i), points.row(j));
        entries_(i, j) = v;
        entries_(j, i) = v;
      }
    }
  }

  const Eigen::MatrixXd& matrix() const noexcept { return entries_; }
  Eigen::Index size() const noexcept { return entries_.rows(); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return entries_(i, j); }

 private:
  Eigen::MatrixXd entries_;
};

inline GramMatrix gram_matrix(const KernelSpec& spec, const Inputs& points) {
  return GramMatrix(spec, points);
}

/// Row i holds k(query_i, train_j) for every training point j.
inline Eigen::MatrixXd cross_kernel(const KernelSpec& spec, const Inputs& queries,
                                    const Inputs& train) {
  if (queries.cols() != train.cols()) {
    throw InputShapeError("query dimension " + std::to_string(queries.cols()) +
                          " does not match training dimension " + std::to_string(train.cols()));
  }
  Eigen::MatrixXd out(queries.rows(), train.rows());
  for (Eigen::Index i = 0; i < queries.rows(); ++i) {
    for (Eigen::Index j = 0; j < train.rows(); ++j) {
      out(i, j) = eval_kernel(spec, queries.row(i), train.row(j));
    }
  }
  return out;
}

/// The naive output kernel l(y1, y2) = I(y1 == y2) on {-1, +1}.
inline int naive_output_kernel(int y1, int y2) {
  check_label(y1);
  check_label(y2);
  return y1 == y2 ? 1 : 0;
}

}  // namespace cket
