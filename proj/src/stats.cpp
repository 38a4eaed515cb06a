#include "factuality/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <utility>

#include <Eigen/Dense>

namespace factuality::stats {

using nlohmann::json;

double mae(std::span<const double> pred, std::span<const double> gold, Backend backend) {
  if (pred.size() != gold.size()) throw Error("mae: length mismatch");
  if (pred.empty()) throw Error("mae: empty input");
  return kernels::abs_diff_sum(pred, gold, backend) / static_cast<double>(pred.size());
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y, Backend backend) {
  if (x.size() != y.size()) throw Error("pearson: length mismatch");
  if (x.size() < 2) throw Error("pearson: needs at least two points");
  const double n = static_cast<double>(x.size());
  const double mx = kernels::sum(x, backend) / n;
  const double my = kernels::sum(y, backend) / n;
  const auto c = kernels::centered_products(x, y, mx, my, backend);
  if (c.sxx <= 0.0 || c.syy <= 0.0) return std::nullopt;
  const double r = c.sxy / std::sqrt(c.sxx * c.syy);
  return std::clamp(r, -1.0, 1.0);
}

// ---------------------------------------------------------------------------
// Ordered logistic regression

namespace {

int category_code(Category c) {
  switch (c) {
    case Category::Minus: return 0;
    case Category::Neutral: return 1;
    case Category::Plus: return 2;
  }
  return 1;
}

double logit(double p) { return std::log(p / (1.0 - p)); }

struct OrdinalPoint {
  double beta;
  double theta1;
  double log_gap;
  double theta2() const { return theta1 + std::exp(log_gap); }
};

/// Gradient and Hessian in (beta, theta1, log_gap) from natural-parameter terms.
void reparameterize(const kernels::OrdinalTerms& t, double log_gap, Eigen::Vector3d& grad,
                    Eigen::Matrix3d& hess) {
  const double e = std::exp(log_gap);
  Eigen::Matrix3d jac;
  jac << 1, 0, 0,
         0, 1, 0,
         0, 1, e;
  const Eigen::Vector3d g(t.grad[0], t.grad[1], t.grad[2]);
  const Eigen::Matrix3d h = Eigen::Map<const Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>(t.hess.data());
  grad = jac.transpose() * g;
  hess = jac.transpose() * h * jac;
  hess(2, 2) += t.grad[2] * e;
}

/// Newton direction for maximization, damped until -H is positive definite.
Eigen::Vector3d ascent_direction(const Eigen::Matrix3d& hess, const Eigen::Vector3d& grad) {
  Eigen::Matrix3d neg = -hess;
  const double scale = std::max(1.0, neg.diagonal().cwiseAbs().maxCoeff());
  double ridge = 0.0;
  for (int attempt = 0; attempt < 40; ++attempt) {
    Eigen::LLT<Eigen::Matrix3d> llt(neg + ridge * Eigen::Matrix3d::Identity());
    if (llt.info() == Eigen::Success) {
      Eigen::Vector3d d = llt.solve(grad);
      if (d.allFinite()) return d;
    }
    ridge = ridge == 0.0 ? 1e-10 * scale : ridge * 10.0;
  }
  return grad / scale;
}

}  // namespace

OrderedLogitModel fit_ordered_logistic(std::span<const double> x, std::span<const Category> y,
                                       const FitOptions& options) {
  if (x.size() != y.size()) throw Error("ordered logit: length mismatch");
  if (x.size() < 3) throw Error("ordered logit: needs at least three observations");
  std::vector<int> codes(y.size());
  std::array<std::size_t, 3> counts{};
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!std::isfinite(x[i])) throw Error("ordered logit: non-finite predictor");
    codes[i] = category_code(y[i]);
    ++counts[codes[i]];
  }
  const int distinct = (counts[0] > 0) + (counts[1] > 0) + (counts[2] > 0);
  if (distinct < 2) throw Error("ordered logit: needs at least two distinct categories");

  const double n = static_cast<double>(x.size());
  const double floor_p = 0.5 / n;
  double p1 = std::clamp(static_cast<double>(counts[0]) / n, floor_p, 1.0 - 2.0 * floor_p);
  double p2 = std::clamp(static_cast<double>(counts[0] + counts[1]) / n, floor_p, 1.0 - floor_p);
  if (p2 <= p1) p2 = std::min(p1 + floor_p, 1.0 - 0.5 * floor_p);

  OrdinalPoint cur{0.0, logit(p1), std::log(logit(p2) - logit(p1))};
  auto evaluate = [&](const OrdinalPoint& p) {
    return kernels::ordinal_terms(x, codes, p.beta, p.theta1, p.theta2(), options.backend);
  };

  OrderedLogitModel m;
  auto terms = evaluate(cur);
  m.loglik_trace.push_back(terms.loglik);
  bool diverging = false;

  for (int it = 0; it < options.max_iterations; ++it) {
    Eigen::Vector3d grad;
    Eigen::Matrix3d hess;
    reparameterize(terms, cur.log_gap, grad, hess);
    if (grad.norm() <= 1e-12 * n) {
      m.converged = true;
      break;
    }
    const Eigen::Vector3d dir = ascent_direction(hess, grad);

    bool accepted = false;
    double step = 1.0;
    for (int halving = 0; halving < 60; ++halving, step *= 0.5) {
      const OrdinalPoint cand{cur.beta + step * dir[0], cur.theta1 + step * dir[1],
                              cur.log_gap + step * dir[2]};
      if (!std::isfinite(cand.beta) || !std::isfinite(cand.theta1) || !std::isfinite(cand.theta2())) {
        continue;
      }
      auto cand_terms = evaluate(cand);
      if (std::isfinite(cand_terms.loglik) && cand_terms.loglik >= terms.loglik) {
        const double change = (cand_terms.loglik - terms.loglik) / std::max(std::abs(terms.loglik), 1e-300);
        cur = cand;
        terms = cand_terms;
        accepted = true;
        m.iterations = it + 1;
        m.loglik_trace.push_back(terms.loglik);
        if (change < options.relative_tolerance) m.converged = true;
        break;
      }
    }
    if (!accepted) {
      // No ascent possible along the Newton direction: at a stationary point
      // up to floating-point resolution.
      m.converged = grad.norm() <= 1e-6 * n;
      break;
    }
    if (std::abs(cur.beta) > 1e4 || std::abs(cur.theta2()) > 1e4 || std::abs(cur.theta1) > 1e4) {
      diverging = true;
      break;
    }
    if (m.converged) break;
  }
  // Under separation the likelihood climbs towards zero as the slope grows;
  // Newton then stalls on a flat ridge that looks like convergence.
  const auto [xmin, xmax] = std::minmax_element(x.begin(), x.end());
  const double spread = std::abs(cur.beta) * (*xmax - *xmin);
  m.separated = diverging || terms.loglik > -1e-6 * n || spread > 60.0;
  if (m.separated) m.converged = false;

  m.beta = cur.beta;
  m.thresholds = {cur.theta1, cur.theta2()};
  m.loglik = terms.loglik;

  const Eigen::Matrix3d info =
      -Eigen::Map<const Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>(terms.hess.data());
  Eigen::FullPivLU<Eigen::Matrix3d> lu(info);
  if (lu.isInvertible()) {
    const Eigen::Matrix3d covariance = lu.inverse();
    for (int k = 0; k < 3; ++k) {
      m.std_errors[k] = covariance(k, k) > 0 ? std::sqrt(covariance(k, k))
                                             : std::numeric_limits<double>::quiet_NaN();
    }
  } else {
    m.std_errors.fill(std::numeric_limits<double>::quiet_NaN());
  }
  return m;
}

std::array<double, 3> predict_ordered_logistic(const OrderedLogitModel& m, double x, bool force) {
  if (!m.converged && !force) {
    throw Error("ordered logit: model did not converge; pass force to predict anyway");
  }
  const double eta1 = m.thresholds[0] - m.beta * x;
  const double eta2 = m.thresholds[1] - m.beta * x;
  const double p_minus = kernels::sigmoid(eta1);
  const double p_plus = kernels::sigmoid(-eta2);
  // sigma(eta2) - sigma(eta1) without cancellation
  const double p_neutral = kernels::sigmoid(eta2) * kernels::sigmoid(-eta1) * -std::expm1(eta1 - eta2);
  return {p_minus, std::max(p_neutral, 0.0), p_plus};
}

json to_json(const OrderedLogitModel& m) {
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  return json{{"model", "ordered_logit"},
              {"beta", m.beta},
              {"thresholds", {m.thresholds[0], m.thresholds[1]}},
              {"std_errors", {num(m.std_errors[0]), num(m.std_errors[1]), num(m.std_errors[2])}},
              {"converged", m.converged},
              {"separated", m.separated},
              {"loglik", m.loglik},
              {"iterations", m.iterations}};
}

// ---------------------------------------------------------------------------
// Linear mixed model with random intercepts and slopes

const GroupEffect& MixedLinearModel::group(const std::string& name) const {
  for (const auto& g : groups) {
    if (g.group == name) return g;
  }
  throw Error("mixed model: no group '" + name + "'");
}

namespace {

using Eigen::Matrix2d;
using Eigen::Vector2d;

struct GroupMoments {
  Matrix2d ztz;
  Vector2d zty;
  double yty = 0.0;
  double n = 0.0;
};

struct Posterior {
  Matrix2d cov;  // C_j
  Vector2d mode;  // b_j
};

Posterior posterior(const GroupMoments& g, const Vector2d& beta, const Matrix2d& d, double sigma2) {
  const Matrix2d a = g.ztz / sigma2;
  Matrix2d c = d * (a * d + Matrix2d::Identity()).inverse();
  c = 0.5 * (c + c.transpose());
  const Vector2d ztr = g.zty - g.ztz * beta;
  return {c, c * ztr / sigma2};
}

double marginal_loglik(const std::vector<GroupMoments>& groups, const Vector2d& beta, const Matrix2d& d,
                       double sigma2) {
  constexpr double kLog2Pi = 1.8378770664093454835606594728112;
  double ll = 0.0;
  for (const auto& g : groups) {
    const Matrix2d a = g.ztz / sigma2;
    const Matrix2d c = d * (a * d + Matrix2d::Identity()).inverse();
    const Vector2d ztr = g.zty - g.ztz * beta;
    const double rtr = g.yty - 2.0 * beta.dot(g.zty) + beta.dot(g.ztz * beta);
    const double quad = (rtr - ztr.dot(c * ztr) / sigma2) / sigma2;
    const double logdet = g.n * std::log(sigma2) + std::log((Matrix2d::Identity() + d * a).determinant());
    ll += -0.5 * (g.n * kLog2Pi + logdet + quad);
  }
  return ll;
}

/// Joint least-squares update of beta and the expansion matrix alpha from the
/// expected complete-data normal equations. nullopt if they are singular.
std::optional<std::pair<Vector2d, Matrix2d>> expanded_step(const std::vector<GroupMoments>& groups,
                                                           const std::vector<Posterior>& post,
                                                           const std::vector<Matrix2d>& second) {
  // unknowns: beta0, beta1, alpha00, alpha01, alpha10, alpha11 (alpha row-major)
  Eigen::Matrix<double, 6, 6> lhs = Eigen::Matrix<double, 6, 6>::Zero();
  Eigen::Matrix<double, 6, 1> rhs = Eigen::Matrix<double, 6, 1>::Zero();
  for (std::size_t j = 0; j < groups.size(); ++j) {
    const auto& g = groups[j];
    const Vector2d& mu = post[j].mode;
    lhs.block<2, 2>(0, 0) += g.ztz;
    rhs.head<2>() += g.zty;
    for (int k = 0; k < 2; ++k) {
      for (int l = 0; l < 2; ++l) {
        const int a = 2 + 2 * k + l;
        lhs.block<2, 1>(0, a) += g.ztz.col(k) * mu[l];
        rhs[a] += g.zty[k] * mu[l];
        for (int k2 = 0; k2 < 2; ++k2) {
          for (int l2 = 0; l2 < 2; ++l2) lhs(a, 2 + 2 * k2 + l2) += g.ztz(k, k2) * second[j](l, l2);
        }
      }
    }
  }
  lhs.block<4, 2>(2, 0) = lhs.block<2, 4>(0, 2).transpose();
  Eigen::LDLT<Eigen::Matrix<double, 6, 6>> ldlt(lhs);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return std::nullopt;
  const Eigen::Matrix<double, 6, 1> sol = ldlt.solve(rhs);
  const double dmax = ldlt.vectorD().cwiseAbs().maxCoeff();
  if (!sol.allFinite() || ldlt.vectorD().minCoeff() <= 1e-12 * dmax) return std::nullopt;
  Matrix2d alpha;
  alpha << sol[2], sol[3], sol[4], sol[5];
  return std::make_pair(Vector2d(sol[0], sol[1]), alpha);
}

/// Likelihood with beta and sigma2 profiled out, as a function of the relative
/// covariance factor L (D = sigma2 L L'). The boundary where D is singular is
/// an interior point of this parameterization.
struct Profiled {
  Vector2d beta;
  double sigma2 = 0.0;
  double ll = -std::numeric_limits<double>::infinity();
};

Profiled profile_loglik(const std::vector<GroupMoments>& groups, double total_n, const Eigen::Vector3d& t) {
  constexpr double kLog2Pi = 1.8378770664093454835606594728112;
  Matrix2d l;
  l << t[0], 0.0, t[1], t[2];
  Matrix2d xvx = Matrix2d::Zero();
  Vector2d xvy = Vector2d::Zero();
  double yvy = 0.0;
  double logdet = 0.0;
  for (const auto& g : groups) {
    const Matrix2d inner = Matrix2d::Identity() + l.transpose() * g.ztz * l;
    const Matrix2d k = l * inner.inverse() * l.transpose();
    xvx += g.ztz - g.ztz * k * g.ztz;
    xvy += g.zty - g.ztz * k * g.zty;
    yvy += g.yty - g.zty.dot(k * g.zty);
    logdet += std::log(inner.determinant());
  }
  Profiled p;
  Eigen::LDLT<Matrix2d> ldlt(xvx);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return p;
  p.beta = ldlt.solve(xvy);
  p.sigma2 = (yvy - p.beta.dot(xvy)) / total_n;
  if (!(p.sigma2 > 0.0) || !std::isfinite(logdet)) return p;
  p.ll = -0.5 * (total_n * (kLog2Pi + std::log(p.sigma2) + 1.0) + logdet);
  return p;
}

/// Lifts the smaller eigenvalue of a symmetric 2x2 matrix to `floor_ratio`
/// times the larger one. Returns true if a ridge was added.
bool stabilize(Matrix2d& d, double floor_ratio) {
  d = 0.5 * (d + d.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix2d> eig(d);
  const double hi = eig.eigenvalues()[1];
  const double lo = eig.eigenvalues()[0];
  if (hi <= 0.0) {
    d.setZero();
    return false;
  }
  if (lo < floor_ratio * hi) {
    d += (floor_ratio * hi - lo) * Matrix2d::Identity();
    return true;
  }
  return false;
}

}  // namespace

MixedLinearModel fit_mixed_linear(std::span<const double> x, std::span<const double> y,
                                  std::span<const std::string> group, const MixedFitOptions& options) {
  if (x.size() != y.size() || x.size() != group.size()) throw Error("mixed model: length mismatch");
  std::map<std::string, int> ids;
  for (const auto& g : group) ids.emplace(g, 0);
  int next = 0;
  for (auto& [_, id] : ids) id = next++;
  const std::size_t m = ids.size();
  if (m < 2 && !options.zero_covariance) throw Error("mixed model: needs at least two groups");
  if (m < 1) throw Error("mixed model: empty input");

  std::vector<int> gidx(group.size());
  for (std::size_t i = 0; i < group.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw Error("mixed model: non-finite input");
    gidx[i] = ids.at(group[i]);
  }
  const auto raw = kernels::group_stats(x, y, gidx, m, options.backend);

  std::vector<GroupMoments> groups(m);
  Matrix2d xtx = Matrix2d::Zero();
  Vector2d xty = Vector2d::Zero();
  double yty = 0.0;
  double total_n = 0.0;
  std::vector<std::string> names(m);
  for (const auto& [name, id] : ids) names[id] = name;
  for (std::size_t j = 0; j < m; ++j) {
    const auto& s = raw[j];
    if (s.n < 3) throw Error("mixed model: group '" + names[j] + "' has fewer than three points");
    groups[j].ztz << s.n, s.sx, s.sx, s.sxx;
    groups[j].zty << s.sy, s.sxy;
    groups[j].yty = s.syy;
    groups[j].n = s.n;
    xtx += groups[j].ztz;
    xty += groups[j].zty;
    yty += s.syy;
    total_n += s.n;
  }
  if (std::abs(xtx.determinant()) <= 1e-12 * xtx.squaredNorm()) {
    throw Error("mixed model: predictor has no variance");
  }

  MixedLinearModel model;
  // Residual variance never drops below this; an exact fit would otherwise
  // drive it to zero and the posterior precision to infinity.
  const double sigma2_floor = 1e-12 * std::max(yty / total_n, 1e-100);
  Vector2d beta = xtx.ldlt().solve(xty);
  double sigma2 = std::max((yty - 2.0 * beta.dot(xty) + beta.dot(xtx * beta)) / total_n, sigma2_floor);
  Matrix2d d = Matrix2d::Zero();
  if (!options.zero_covariance) {
    for (const auto& g : groups) {
      Vector2d b = g.ztz.fullPivLu().solve(g.zty) - beta;
      if (!b.allFinite()) b.setZero();
      d += b * b.transpose() / static_cast<double>(m);
    }
    const double scale = std::max(d.trace(), 1e-8 * sigma2);
    if (d.trace() <= 0.0) d = scale * Matrix2d::Identity();
    stabilize(d, 1e-6);
  }

  double ll = marginal_loglik(groups, beta, d, sigma2);
  model.loglik_trace.push_back(ll);
  bool warned = false;

  for (int it = 0; it < options.max_iterations; ++it) {
    std::vector<Posterior> post(m);
    for (std::size_t j = 0; j < m; ++j) post[j] = posterior(groups[j], beta, d, sigma2);

    // Second moments E[b b'] of the random effects under the posterior.
    std::vector<Matrix2d> second(m);
    Matrix2d mean_second = Matrix2d::Zero();
    for (std::size_t j = 0; j < m; ++j) {
      second[j] = post[j].mode * post[j].mode.transpose() + post[j].cov;
      mean_second += second[j] / static_cast<double>(m);
    }

    // M-step. With random effects this is the parameter-expanded variant: the
    // effects enter as alpha * b, alpha is fitted jointly with beta and folded
    // back into D. alpha = I reduces it to the plain EM update.
    Vector2d beta_new;
    Matrix2d alpha = Matrix2d::Identity();
    bool expanded = false;
    if (!options.zero_covariance) {
      if (auto px = expanded_step(groups, post, second)) {
        beta_new = px->first;
        alpha = px->second;
        expanded = true;
      }
    }
    if (!expanded) {
      Vector2d rhs = Vector2d::Zero();
      for (std::size_t j = 0; j < m; ++j) rhs += groups[j].zty - groups[j].ztz * post[j].mode;
      beta_new = xtx.ldlt().solve(rhs);
    }

    double rss = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const auto& g = groups[j];
      const Vector2d am = alpha * post[j].mode;
      rss += g.yty - 2.0 * beta_new.dot(g.zty) - 2.0 * g.zty.dot(am) + beta_new.dot(g.ztz * beta_new) +
             2.0 * beta_new.dot(g.ztz * am) + (g.ztz * alpha * second[j] * alpha.transpose()).trace();
    }
    const Matrix2d d_new = alpha * mean_second * alpha.transpose();
    beta = beta_new;
    sigma2 = std::max(rss / total_n, sigma2_floor);
    if (!options.zero_covariance) {
      d = d_new;
      if (stabilize(d, 1e-10) && !warned) {
        model.warnings.push_back("random-effect covariance became singular; added a ridge");
        warned = true;
      }
    }

    const double ll_new = marginal_loglik(groups, beta, d, sigma2);
    model.loglik_trace.push_back(ll_new);
    model.iterations = it + 1;
    const double change = std::abs(ll_new - ll) / std::max(std::abs(ll), 1e-300);
    ll = ll_new;
    if (change < options.relative_tolerance) {
      model.converged = true;
      break;
    }
  }

  // EM slows to a crawl when the covariance approaches singularity. Finish with
  // Newton steps on the profiled likelihood, accepting only improvements.
  if (!model.converged && !options.zero_covariance) {
    Eigen::LLT<Matrix2d> chol(d / sigma2);
    if (chol.info() == Eigen::Success) {
      const Matrix2d l0 = chol.matrixL();
      Eigen::Vector3d t(l0(0, 0), l0(1, 0), l0(1, 1));
      Profiled cur = profile_loglik(groups, total_n, t);
      auto f = [&](const Eigen::Vector3d& v) { return profile_loglik(groups, total_n, v).ll; };
      for (int it = 0; it < options.max_iterations && std::isfinite(cur.ll); ++it) {
        Eigen::Vector3d grad;
        Eigen::Matrix3d hess;
        Eigen::Vector3d h;
        for (int k = 0; k < 3; ++k) h[k] = 1e-4 * std::max(1.0, std::abs(t[k]));
        for (int a = 0; a < 3; ++a) {
          Eigen::Vector3d ea = Eigen::Vector3d::Zero();
          ea[a] = h[a];
          const double fp = f(t + ea);
          const double fm = f(t - ea);
          grad[a] = (fp - fm) / (2.0 * h[a]);
          hess(a, a) = (fp - 2.0 * cur.ll + fm) / (h[a] * h[a]);
          for (int b = 0; b < a; ++b) {
            Eigen::Vector3d eb = Eigen::Vector3d::Zero();
            eb[b] = h[b];
            hess(a, b) = hess(b, a) =
                (f(t + ea + eb) - f(t + ea - eb) - f(t - ea + eb) + f(t - ea - eb)) / (4.0 * h[a] * h[b]);
          }
        }
        if (!grad.allFinite() || !hess.allFinite()) break;
        const Eigen::Vector3d dir = ascent_direction(hess, grad);
        bool accepted = false;
        double step = 1.0;
        for (int halving = 0; halving < 40; ++halving, step *= 0.5) {
          const Eigen::Vector3d cand_t = t + step * dir;
          const Profiled cand = profile_loglik(groups, total_n, cand_t);
          if (std::isfinite(cand.ll) && cand.ll >= cur.ll) {
            const double change = (cand.ll - cur.ll) / std::max(std::abs(cur.ll), 1e-300);
            t = cand_t;
            cur = cand;
            accepted = true;
            if (change < options.relative_tolerance) model.converged = true;
            break;
          }
        }
        if (!accepted) {
          model.converged = grad.norm() <= 1e-6 * std::max(1.0, std::abs(cur.ll));
        }
        if (accepted && cur.ll >= ll) {
          Matrix2d l;
          l << t[0], 0.0, t[1], t[2];
          beta = cur.beta;
          sigma2 = std::max(cur.sigma2, sigma2_floor);
          d = sigma2 * l * l.transpose();
          ll = marginal_loglik(groups, beta, d, sigma2);
          model.loglik_trace.push_back(ll);
          ++model.iterations;
        }
        if (!accepted || model.converged) break;
      }
    }
  }

  model.fixed_intercept = beta[0];
  model.fixed_slope = beta[1];
  model.residual_var = sigma2;
  model.cov = {d(0, 0), d(0, 1), d(1, 0), d(1, 1)};
  model.loglik = ll;

  Matrix2d info = Matrix2d::Zero();
  for (std::size_t j = 0; j < m; ++j) {
    const auto p = posterior(groups[j], beta, d, sigma2);
    const auto& g = groups[j];
    info += (g.ztz - g.ztz * p.cov * g.ztz / sigma2) / sigma2;
    GroupEffect e;
    e.group = names[j];
    e.n = static_cast<std::size_t>(g.n);
    e.intercept_deviation = p.mode[0];
    e.slope_deviation = p.mode[1];
    e.intercept = beta[0] + p.mode[0];
    e.slope = beta[1] + p.mode[1];
    e.intercept_se = std::sqrt(std::max(p.cov(0, 0), 0.0));
    e.slope_se = std::sqrt(std::max(p.cov(1, 1), 0.0));
    model.groups.push_back(std::move(e));
  }
  const Matrix2d fixed_cov = info.inverse();
  model.fixed_se = {std::sqrt(std::max(fixed_cov(0, 0), 0.0)), std::sqrt(std::max(fixed_cov(1, 1), 0.0))};
  if (!model.converged) {
    model.warnings.push_back("EM stopped after " + std::to_string(model.iterations) +
                             " iterations without reaching the tolerance");
  }
  return model;
}

json to_json(const MixedLinearModel& m) {
  json groups = json::array();
  for (const auto& g : m.groups) {
    groups.push_back({{"group", g.group},
                      {"n", g.n},
                      {"intercept", g.intercept},
                      {"slope", g.slope},
                      {"intercept_deviation", g.intercept_deviation},
                      {"slope_deviation", g.slope_deviation},
                      {"intercept_se", g.intercept_se},
                      {"slope_se", g.slope_se}});
  }
  return json{{"model", "mixed_linear"},
              {"fixed_intercept", m.fixed_intercept},
              {"fixed_slope", m.fixed_slope},
              {"fixed_se", {m.fixed_se[0], m.fixed_se[1]}},
              {"groups", groups},
              {"cov", {{m.cov[0], m.cov[1]}, {m.cov[2], m.cov[3]}}},
              {"residual_var", m.residual_var},
              {"converged", m.converged},
              {"loglik", m.loglik},
              {"iterations", m.iterations},
              {"warnings", m.warnings}};
}

}  // namespace factuality::stats
