#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "cket/errors.hpp"
#include "cket/kernels.hpp"
#include "cket/sample.hpp"

namespace cket {

/// Element a_plus * l(., +1) + a_minus * l(., -1) of the output RKHS G.
/// The two sections are orthonormal under the naive kernel, so the G-norm is
/// the Euclidean norm of (a_plus, a_minus).
struct GVec {
  double plus = 0.0;
  double minus = 0.0;

  double norm_sq() const noexcept { return plus * plus + minus * minus; }

  friend bool operator==(const GVec&, const GVec&) = default;
};

/// l(., y) as a GVec.
inline GVec label_embedding(int y) {
  check_label(y);
  return y == 1 ? GVec{1.0, 0.0} : GVec{0.0, 1.0};
}

inline double g_distance_sq(const GVec& a, const GVec& b) noexcept {
  const double dp = a.plus - b.plus;
  const double dm = a.minus - b.minus;
  return dp * dp + dm * dm;
}

/// P(Y = +1 | X = x) implied by a regression value f(x).
inline double class_probability(double fx) {
  if (!(fx >= -1.0 && fx <= 1.0)) {
    throw InvalidCandidateError("regression value " + std::to_string(fx) +
                                " lies outside [-1, 1]");
  }
  return (fx + 1.0) / 2.0;
}

/// mu_f(x) = (1 - p(x)) l(., -1) + p(x) l(., +1) with p = (f + 1) / 2.
inline GVec theoretical_mean_map(double fx) {
  const double p = class_probability(fx);
  return GVec{p, 1.0 - p};
}

inline GVec theoretical_mean_map(const RegressionFn& f, PointRef x) {
  return theoretical_mean_map(f(x));
}

/// Default regularization lambda_n = n^(-1/4).
inline double default_lambda(std::size_t n) {
  return std::pow(static_cast<double>(n), -0.25);
}

/// Cholesky factorization of K + lambda I for a fixed input set. One
/// factorization serves every label set drawn on those inputs.
class RegularizedGramSolver {
 public:
  RegularizedGramSolver(const KernelSpec& kernel, const Inputs& inputs, double lambda)
      : gram_(kernel, inputs), lambda_(lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
      throw InvalidRegularizationError("regularization lambda must be positive and finite, got " +
                                       std::to_string(lambda));
    }
    Eigen::MatrixXd system = gram_.matrix();
    system.diagonal().array() += lambda;
    llt_.compute(system);
    if (llt_.info() != Eigen::Success) {
      Eigen::LDLT<Eigen::MatrixXd> ldlt(system);
      const double pivot = ldlt.vectorD().minCoeff();
      throw NumericalError("K + lambda I is not numerically positive definite (smallest pivot " +
                               std::to_string(pivot) + ")",
                           pivot);
    }
  }

  /// Solves (K + lambda I) C = rhs.
  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const { return llt_.solve(rhs); }

  const GramMatrix& gram() const noexcept { return gram_; }
  double lambda() const noexcept { return lambda_; }

 private:
  GramMatrix gram_;
  double lambda_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

/// n x 2 table whose row i is l(., Y_i) in (plus, minus) coordinates.
inline Eigen::MatrixX2d label_matrix(const std::vector<int>& labels) {
  Eigen::MatrixX2d out(static_cast<Eigen::Index>(labels.size()), 2);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const GVec e = label_embedding(labels[i]);
    out(static_cast<Eigen::Index>(i), 0) = e.plus;
    out(static_cast<Eigen::Index>(i), 1) = e.minus;
  }
  return out;
}

/// Regularized least-squares estimate of the conditional mean map with
/// operator kernel k * Id_G: mu_hat(x) = sum_i k(x, X_i) c_i.
class VvktModel {
 public:
  VvktModel(Inputs train_inputs, KernelSpec kernel, double lambda, Eigen::MatrixX2d coeffs)
      : train_inputs_(std::move(train_inputs)),
        kernel_(kernel),
        lambda_(lambda),
        coeffs_(std::move(coeffs)) {}

  GVec operator()(PointRef x) const {
    if (x.size() != train_inputs_.cols()) {
      throw InputShapeError("query has dimension " + std::to_string(x.size()) +
                            ", model was fitted on dimension " +
                            std::to_string(train_inputs_.cols()));
    }
    GVec out;
    for (Eigen::Index i = 0; i < train_inputs_.rows(); ++i) {
      const double k = eval_kernel(kernel_, x, train_inputs_.row(i));
      out.plus += k * coeffs_(i, 0);
      out.minus += k * coeffs_(i, 1);
    }
    return out;
  }

  const Inputs& train_inputs() const noexcept { return train_inputs_; }
  const KernelSpec& kernel() const noexcept { return kernel_; }
  double lambda() const noexcept { return lambda_; }
  const Eigen::MatrixX2d& coeffs() const noexcept { return coeffs_; }

 private:
  Inputs train_inputs_;
  KernelSpec kernel_;
  double lambda_;
  Eigen::MatrixX2d coeffs_;
};

inline VvktModel fit_vvkt(const LabeledSample& sample, const KernelSpec& kernel, double lambda) {
  if (sample.empty()) throw EmptyInputError("cannot fit on an empty sample");
  const RegularizedGramSolver solver(kernel, sample.inputs(), lambda);
  Eigen::MatrixX2d coeffs = solver.solve(label_matrix(sample.labels()));
  return VvktModel(sample.inputs(), kernel, lambda, std::move(coeffs));
}

inline GVec eval_vvkt(const VvktModel& model, PointRef x) { return model(x); }

/// Z = (1/n) sum_i |mu_f(X_i) - estimate(X_i)|_G^2. `estimate` is any
/// callable PointRef -> GVec.
template <class Evaluator>
double reference_variable(const Inputs& inputs, const RegressionFn& f, Evaluator&& estimate) {
  if (inputs.rows() == 0) throw EmptyInputError("reference variable needs at least one input");
  double total = 0.0;
  for (Eigen::Index i = 0; i < inputs.rows(); ++i) {
    const auto x = inputs.row(i);
    total += g_distance_sq(theoretical_mean_map(f, x), estimate(x));
  }
  return total / static_cast<double>(inputs.rows());
}

}  // namespace cket
