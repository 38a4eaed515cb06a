#pragma once

// Data-parallel reductions behind the metrics and model fits. Each kernel has
// a plain serial reference and an OpenMP version. The OpenMP version sums
// fixed-size blocks in parallel and combines the block partials in order, so
// its result does not depend on the thread count.

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace factuality::kernels {

enum class Backend { Serial, Parallel };

inline constexpr std::size_t kBlockSize = 4096;

struct CenteredProducts {
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
};

/// Log-likelihood, gradient and Hessian of the proportional-odds model in the
/// natural parameters (beta, theta1, theta2). Hessian is row-major 3x3.
struct OrdinalTerms {
  double loglik = 0.0;
  std::array<double, 3> grad{};
  std::array<double, 9> hess{};
};

/// Per-group sufficient statistics for a simple linear model.
struct GroupStats {
  double n = 0.0;
  double sx = 0.0;
  double sxx = 0.0;
  double sy = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
};

double log_sigmoid(double z);
double sigmoid(double z);

namespace serial {
double sum(std::span<const double> x);
double abs_diff_sum(std::span<const double> a, std::span<const double> b);
CenteredProducts centered_products(std::span<const double> x, std::span<const double> y, double mx,
                                   double my);
/// y holds category codes 0 (Minus), 1 (Neutral), 2 (Plus).
OrdinalTerms ordinal_terms(std::span<const double> x, std::span<const int> y, double beta,
                           double theta1, double theta2);
std::vector<GroupStats> group_stats(std::span<const double> x, std::span<const double> y,
                                    std::span<const int> group, std::size_t n_groups);
}  // namespace serial

namespace parallel {
double sum(std::span<const double> x);
double abs_diff_sum(std::span<const double> a, std::span<const double> b);
CenteredProducts centered_products(std::span<const double> x, std::span<const double> y, double mx,
                                   double my);
OrdinalTerms ordinal_terms(std::span<const double> x, std::span<const int> y, double beta,
                           double theta1, double theta2);
std::vector<GroupStats> group_stats(std::span<const double> x, std::span<const double> y,
                                    std::span<const int> group, std::size_t n_groups);
}  // namespace parallel

double sum(std::span<const double> x, Backend b);
double abs_diff_sum(std::span<const double> a, std::span<const double> b, Backend backend);
CenteredProducts centered_products(std::span<const double> x, std::span<const double> y, double mx,
                                   double my, Backend b);
OrdinalTerms ordinal_terms(std::span<const double> x, std::span<const int> y, double beta,
                           double theta1, double theta2, Backend b);
std::vector<GroupStats> group_stats(std::span<const double> x, std::span<const double> y,
                                    std::span<const int> group, std::size_t n_groups, Backend b);

/// Threads OpenMP would use; 1 when built without OpenMP.
int max_threads();

}  // namespace factuality::kernels
