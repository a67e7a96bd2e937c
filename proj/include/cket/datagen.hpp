#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "cket/errors.hpp"
#include "cket/resampling.hpp"
#include "cket/rng.hpp"
#include "cket/sample.hpp"

namespace cket {

/// Two-Gaussian-class logistic model on the real line:
///
///   f(x) = (p e^{-(x-mu1)^2/lambda} - (1-p) e^{-(x-mu2)^2/lambda})
///        / (p e^{-(x-mu1)^2/lambda} + (1-p) e^{-(x-mu2)^2/lambda})
///
/// Defaults are the true parameters of the simulation study.
struct MixtureParams {
  double p_star = 0.5;
  double lambda_star = 1.0;
  double mu1 = 1.0;
  double mu2 = -1.0;

  void validate() const {
    if (!(p_star > 0.0 && p_star < 1.0)) throw ConfigError("mixture weight must lie in (0, 1)");
    if (!(lambda_star > 0.0)) throw ConfigError("mixture scale lambda must be positive");
  }
};

/// Candidate family for the grid and consistency experiments: (p, lambda)
/// vary, the translations stay at (1, -1).
inline MixtureParams candidate_params(double p, double lambda) {
  return MixtureParams{p, lambda, 1.0, -1.0};
}

inline double true_regression(const MixtureParams& params, double x) {
  params.validate();
  const double a = std::log(params.p_star) - (x - params.mu1) * (x - params.mu1) / params.lambda_star;
  const double b =
      std::log(1.0 - params.p_star) - (x - params.mu2) * (x - params.mu2) / params.lambda_star;
  const double top = std::max(a, b);
  const double ea = std::exp(a - top);
  const double eb = std::exp(b - top);
  return (ea - eb) / (ea + eb);
}

/// The model as a regression function on 1-d points.
inline RegressionFn regression_fn(const MixtureParams& params) {
  params.validate();
  return [params](PointRef x) {
    if (x.size() != 1) throw InputShapeError("mixture model is defined on 1-d inputs");
    return true_regression(params, x(0));
  };
}

/// n inputs i.i.d. uniform on [-1, 1], labels drawn from `regression`.
/// Inputs for all points are drawn before any label.
inline LabeledSample sample_dataset(std::size_t n, const RegressionFn& regression, Rng& rng) {
  if (n == 0) throw EmptyInputError("dataset size must be at least 1");
  Inputs inputs(static_cast<Eigen::Index>(n), 1);
  for (std::size_t i = 0; i < n; ++i) {
    inputs(static_cast<Eigen::Index>(i), 0) = uniform_open_pm1(rng);
  }
  std::vector<int> labels = resample_labels(inputs, regression, rng);
  return LabeledSample(std::move(inputs), std::move(labels));
}

/// Dataset from the model's own regression function.
inline LabeledSample sample_dataset(const MixtureParams& params, std::size_t n, Rng& rng) {
  return sample_dataset(n, regression_fn(params), rng);
}

}  // namespace cket
