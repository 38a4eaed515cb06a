#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "factuality/core.hpp"
#include "factuality/kernels.hpp"

namespace factuality::stats {

using kernels::Backend;

/// Mean absolute error. Throws Error on empty or unequal-length input.
double mae(std::span<const double> pred, std::span<const double> gold,
           Backend backend = Backend::Parallel);

/// Sample Pearson correlation; nullopt (Undefined) when either side has zero
/// variance. Throws Error on unequal lengths or fewer than two points.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y,
                              Backend backend = Backend::Parallel);

struct FitOptions {
  int max_iterations = 200;
  /// Converged once the relative log-likelihood change falls below this.
  double relative_tolerance = 1e-10;
  Backend backend = Backend::Parallel;
};

/// Proportional-odds model P(y <= k | x) = logistic(theta_k - beta * x) over
/// Minus < Neutral < Plus.
struct OrderedLogitModel {
  double beta = 0.0;
  std::array<double, 2> thresholds{};
  bool converged = false;
  double loglik = 0.0;
  int iterations = 0;
  /// Observed-information standard errors of (beta, theta1, theta2); NaN when
  /// the information matrix is singular.
  std::array<double, 3> std_errors{};
  /// Log-likelihood after initialization and after every accepted step.
  std::vector<double> loglik_trace;
  /// Set when the categories are (quasi-)separated by x: the likelihood has no
  /// finite maximizer and the fit is reported unconverged.
  bool separated = false;
};

/// Newton iterations with step halving on (beta, theta1, log(theta2 - theta1)),
/// starting from beta = 0 and the empirical cumulative logits.
OrderedLogitModel fit_ordered_logistic(std::span<const double> x, std::span<const Category> y,
                                       const FitOptions& options = {});

/// (P(Minus), P(Neutral), P(Plus)). Throws Error for an unconverged model
/// unless `force` is set.
std::array<double, 3> predict_ordered_logistic(const OrderedLogitModel& m, double x,
                                                bool force = false);

nlohmann::json to_json(const OrderedLogitModel& m);

struct GroupEffect {
  std::string group;
  std::size_t n = 0;
  double intercept_deviation = 0.0;
  double slope_deviation = 0.0;
  /// Fixed effect plus deviation.
  double intercept = 0.0;
  double slope = 0.0;
  /// Conditional (posterior) standard deviations of the deviations.
  double intercept_se = 0.0;
  double slope_se = 0.0;
};

/// y = (a + u_g) + (b + v_g) x + e with (u_g, v_g) ~ N(0, cov), e ~ N(0, residual_var).
struct MixedLinearModel {
  double fixed_intercept = 0.0;
  double fixed_slope = 0.0;
  std::array<double, 2> fixed_se{};
  /// Sorted by group name.
  std::vector<GroupEffect> groups;
  /// Row-major random-effect covariance of (intercept, slope).
  std::array<double, 4> cov{};
  double residual_var = 0.0;
  bool converged = false;
  double loglik = 0.0;
  int iterations = 0;
  std::vector<double> loglik_trace;
  std::vector<std::string> warnings;

  const GroupEffect& group(const std::string& name) const;
};

struct MixedFitOptions {
  int max_iterations = 200;
  double relative_tolerance = 1e-10;
  Backend backend = Backend::Parallel;
  /// Pin the random-effect covariance at zero (ordinary least squares).
  bool zero_covariance = false;
};

/// Maximum-likelihood fit by EM. Requires at least two groups of three or more
/// points each (one group suffices when the covariance is pinned at zero).
MixedLinearModel fit_mixed_linear(std::span<const double> x, std::span<const double> y,
                                  std::span<const std::string> group,
                                  const MixedFitOptions& options = {});

nlohmann::json to_json(const MixedLinearModel& m);

}  // namespace factuality::stats
