#include "factuality/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace factuality::kernels {

double log_sigmoid(double z) {
  return z >= 0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z));
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace {

inline void add_ordinal_term(double x, int y, double beta, double t1, double t2, OrdinalTerms& acc) {
  const double eta1 = t1 - beta * x;
  const double eta2 = t2 - beta * x;
  double g1 = 0.0, g2 = 0.0, h11 = 0.0, h22 = 0.0, h12 = 0.0;
  if (y == 0) {
    const double f = sigmoid(eta1);
    acc.loglik += log_sigmoid(eta1);
    g1 = 1.0 - f;
    h11 = -f * (1.0 - f);
  } else if (y == 2) {
    const double f = sigmoid(eta2);
    acc.loglik += log_sigmoid(-eta2);
    g2 = -f;
    h22 = -f * (1.0 - f);
  } else {
    // p = F2 - F1 = F2 * (1 - F1) * d with d = 1 - exp(eta1 - eta2)
    const double f1 = sigmoid(eta1);
    const double f2 = sigmoid(eta2);
    const double d = -std::expm1(eta1 - eta2);
    acc.loglik += log_sigmoid(eta2) + log_sigmoid(-eta1) + std::log(d);
    const double a1 = f1 / (f2 * d);                  // f1 / p
    const double a2 = (1.0 - f2) / ((1.0 - f1) * d);  // f2 / p
    g1 = -a1;
    g2 = a2;
    h11 = -a1 * (1.0 - 2.0 * f1) - a1 * a1;
    h22 = a2 * (1.0 - 2.0 * f2) - a2 * a2;
    h12 = a1 * a2;
  }
  acc.grad[0] += -x * (g1 + g2);
  acc.grad[1] += g1;
  acc.grad[2] += g2;
  const double hbb = x * x * (h11 + 2.0 * h12 + h22);
  const double hb1 = -x * (h11 + h12);
  const double hb2 = -x * (h12 + h22);
  acc.hess[0] += hbb;
  acc.hess[1] += hb1;
  acc.hess[2] += hb2;
  acc.hess[3] += hb1;
  acc.hess[4] += h11;
  acc.hess[5] += h12;
  acc.hess[6] += hb2;
  acc.hess[7] += h12;
  acc.hess[8] += h22;
}

void merge(OrdinalTerms& into, const OrdinalTerms& part) {
  into.loglik += part.loglik;
  for (std::size_t k = 0; k < 3; ++k) into.grad[k] += part.grad[k];
  for (std::size_t k = 0; k < 9; ++k) into.hess[k] += part.hess[k];
}

void merge(GroupStats& into, const GroupStats& part) {
  into.n += part.n;
  into.sx += part.sx;
  into.sxx += part.sxx;
  into.sy += part.sy;
  into.sxy += part.sxy;
  into.syy += part.syy;
}

inline void add_point(GroupStats& g, double x, double y) {
  g.n += 1.0;
  g.sx += x;
  g.sxx += x * x;
  g.sy += y;
  g.sxy += x * y;
  g.syy += y * y;
}

std::size_t block_count(std::size_t n) { return (n + kBlockSize - 1) / kBlockSize; }

/// Runs `body(begin, end, partial)` over fixed blocks in parallel and folds
/// the partials left to right.
template <typename Partial, typename Body, typename Merge>
Partial blocked_reduce(std::size_t n, Partial init, Body body, Merge merge_fn) {
  const std::size_t blocks = block_count(n);
  std::vector<Partial> partials(blocks, init);
  const auto nb = static_cast<std::ptrdiff_t>(blocks);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < nb; ++b) {
    const std::size_t begin = static_cast<std::size_t>(b) * kBlockSize;
    const std::size_t end = std::min(n, begin + kBlockSize);
    body(begin, end, partials[b]);
  }
  Partial total = init;
  for (const auto& p : partials) merge_fn(total, p);
  return total;
}

}  // namespace

namespace serial {

double sum(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s;
}

double abs_diff_sum(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

CenteredProducts centered_products(std::span<const double> x, std::span<const double> y, double mx,
                                   double my) {
  CenteredProducts c;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    c.sxx += dx * dx;
    c.syy += dy * dy;
    c.sxy += dx * dy;
  }
  return c;
}

OrdinalTerms ordinal_terms(std::span<const double> x, std::span<const int> y, double beta,
                           double theta1, double theta2) {
  OrdinalTerms acc;
  for (std::size_t i = 0; i < x.size(); ++i) add_ordinal_term(x[i], y[i], beta, theta1, theta2, acc);
  return acc;
}

std::vector<GroupStats> group_stats(std::span<const double> x, std::span<const double> y,
                                    std::span<const int> group, std::size_t n_groups) {
  std::vector<GroupStats> out(n_groups);
  for (std::size_t i = 0; i < x.size(); ++i) add_point(out[group[i]], x[i], y[i]);
  return out;
}

}  // namespace serial

namespace parallel {

double sum(std::span<const double> x) {
  return blocked_reduce(
      x.size(), 0.0,
      [&](std::size_t b, std::size_t e, double& p) {
        for (std::size_t i = b; i < e; ++i) p += x[i];
      },
      [](double& into, double part) { into += part; });
}

double abs_diff_sum(std::span<const double> a, std::span<const double> b) {
  return blocked_reduce(
      a.size(), 0.0,
      [&](std::size_t lo, std::size_t hi, double& p) {
        for (std::size_t i = lo; i < hi; ++i) p += std::abs(a[i] - b[i]);
      },
      [](double& into, double part) { into += part; });
}

CenteredProducts centered_products(std::span<const double> x, std::span<const double> y, double mx,
                                   double my) {
  return blocked_reduce(
      x.size(), CenteredProducts{},
      [&](std::size_t b, std::size_t e, CenteredProducts& c) {
        for (std::size_t i = b; i < e; ++i) {
          const double dx = x[i] - mx;
          const double dy = y[i] - my;
          c.sxx += dx * dx;
          c.syy += dy * dy;
          c.sxy += dx * dy;
        }
      },
      [](CenteredProducts& into, const CenteredProducts& p) {
        into.sxx += p.sxx;
        into.syy += p.syy;
        into.sxy += p.sxy;
      });
}

OrdinalTerms ordinal_terms(std::span<const double> x, std::span<const int> y, double beta,
                           double theta1, double theta2) {
  return blocked_reduce(
      x.size(), OrdinalTerms{},
      [&](std::size_t b, std::size_t e, OrdinalTerms& acc) {
        for (std::size_t i = b; i < e; ++i) add_ordinal_term(x[i], y[i], beta, theta1, theta2, acc);
      },
      [](OrdinalTerms& into, const OrdinalTerms& p) { merge(into, p); });
}

std::vector<GroupStats> group_stats(std::span<const double> x, std::span<const double> y,
                                    std::span<const int> group, std::size_t n_groups) {
  return blocked_reduce(
      x.size(), std::vector<GroupStats>(n_groups),
      [&](std::size_t b, std::size_t e, std::vector<GroupStats>& acc) {
        for (std::size_t i = b; i < e; ++i) add_point(acc[group[i]], x[i], y[i]);
      },
      [](std::vector<GroupStats>& into, const std::vector<GroupStats>& p) {
        for (std::size_t g = 0; g < into.size(); ++g) merge(into[g], p[g]);
      });
}

}  // namespace parallel

double sum(std::span<const double> x, Backend b) {
  return b == Backend::Serial ? serial::sum(x) : parallel::sum(x);
}

double abs_diff_sum(std::span<const double> a, std::span<const double> b, Backend backend) {
  return backend == Backend::Serial ? serial::abs_diff_sum(a, b) : parallel::abs_diff_sum(a, b);
}

CenteredProducts centered_products(std::span<const double> x, std::span<const double> y, double mx,
                                   double my, Backend b) {
  return b == Backend::Serial ? serial::centered_products(x, y, mx, my)
                              : parallel::centered_products(x, y, mx, my);
}

OrdinalTerms ordinal_terms(std::span<const double> x, std::span<const int> y, double beta,
                           double theta1, double theta2, Backend b) {
  return b == Backend::Serial ? serial::ordinal_terms(x, y, beta, theta1, theta2)
                              : parallel::ordinal_terms(x, y, beta, theta1, theta2);
}

std::vector<GroupStats> group_stats(std::span<const double> x, std::span<const double> y,
                                    std::span<const int> group, std::size_t n_groups, Backend b) {
  return b == Backend::Serial ? serial::group_stats(x, y, group, n_groups)
                              : parallel::group_stats(x, y, group, n_groups);
}

}  // namespace factuality::kernels
