#pragma once

// Least-squares fits on PWO matrices: the main-effects model and a two-stage
// stepwise search that brings in interactions of active main effects.

#include <boost/math/distributions/fisher_f.hpp>

#include "oofa/linalg.hpp"
#include "oofa/perm.hpp"

namespace oofa {

struct Response {
  std::vector<double> y;
  double sigma2_hat = std::numeric_limits<double>::quiet_NaN();
};

/// A model term: one PWO column (main effect) or the product of two.
struct Term {
  std::vector<int> columns;
  std::string name;
  double coefficient = 0;
  double std_error = 0;
  double unscaled_variance = 0;  // diagonal of (X'X)^-1
};

enum class Heredity { weak, strong };

struct FittedModel {
  int m = 0;
  double intercept = 0;
  std::vector<Term> terms;
  int residual_df = 0;
  double r2 = 0;
  double rss = 0;
  double sigma2 = std::numeric_limits<double>::quiet_NaN();
  bool stepwise = false;
  std::vector<int> stage1_actives;
};

inline std::string term_name(int m, const std::vector<int>& cols) {
  std::string s;
  for (int c : cols) {
    if (!s.empty()) s += ':';
    auto [k, l] = pwo_pair(m, c);
    s += "F" + std::to_string(k) + std::to_string(l);
  }
  return s;
}

namespace detail {

inline void check_response(const PwoMatrix& p, const Response& y) {
  if (static_cast<int>(y.y.size()) != static_cast<int>(p.rows.size()))
    throw ValidationError("response has " + std::to_string(y.y.size()) + " values for a design of " +
                          std::to_string(p.rows.size()) + " runs");
}

inline Eigen::MatrixXd term_matrix(const PwoMatrix& p, const std::vector<std::vector<int>>& terms) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(p.rows.size()), static_cast<Eigen::Index>(terms.size()) + 1);
  for (std::size_t i = 0; i < p.rows.size(); ++i) {
    x(i, 0) = 1.0;
    for (std::size_t t = 0; t < terms.size(); ++t) {
      double v = 1.0;
      for (int c : terms[t]) v *= p.rows[i][c];
      x(i, t + 1) = v;
    }
  }
  return x;
}

struct LsFit {
  bool full_rank = false;
  Eigen::VectorXd beta;
  double rss = 0;
};

inline LsFit least_squares(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  LsFit f;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  qr.setThreshold(1e-10);
  if (qr.rank() < x.cols()) return f;
  f.full_rank = true;
  f.beta = qr.solve(y);
  f.rss = (y - x * f.beta).squaredNorm();
  return f;
}

inline FittedModel fit_terms(const PwoMatrix& p, const Response& resp, const std::vector<std::vector<int>>& terms) {
  const Eigen::MatrixXd x = term_matrix(p, terms);
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(resp.y.data(), static_cast<Eigen::Index>(resp.y.size()));
  const auto f = least_squares(x, y);
  if (!f.full_rank) throw ValidationError("singular model matrix: the selected terms are linearly dependent");
  FittedModel out;
  out.m = p.m;
  out.intercept = f.beta[0];
  out.rss = f.rss;
  out.residual_df = static_cast<int>(x.rows() - x.cols());
  out.sigma2 = out.residual_df > 0 ? f.rss / out.residual_df : std::numeric_limits<double>::quiet_NaN();
  const double tss = (y.array() - y.mean()).square().sum();
  out.r2 = tss > 0 ? 1.0 - f.rss / tss : 1.0;
  const Eigen::MatrixXd inv = (x.transpose() * x).ldlt().solve(Eigen::MatrixXd::Identity(x.cols(), x.cols()));
  for (std::size_t t = 0; t < terms.size(); ++t) {
    Term term;
    term.columns = terms[t];
    term.name = term_name(p.m, terms[t]);
    term.coefficient = f.beta[static_cast<Eigen::Index>(t) + 1];
    term.unscaled_variance = inv(t + 1, t + 1);
    term.std_error = std::sqrt(out.sigma2 * term.unscaled_variance);
    out.terms.push_back(std::move(term));
  }
  return out;
}

/// Upper-tail probability of a one-degree partial F test. An exact fit of the
/// larger model gives 0 when the term reduced RSS and 1 when it did not.
inline double partial_f_pvalue(double rss_small, double rss_big, int df_big, double scale) {
  const double eps = 1e-10 * scale;
  const double drop = std::max(0.0, rss_small - rss_big);
  if (rss_big <= eps) return drop > eps ? 0.0 : 1.0;
  if (df_big <= 0) return 1.0;
  const double f = drop / (rss_big / df_big);
  boost::math::fisher_f dist(1.0, static_cast<double>(df_big));
  return boost::math::cdf(boost::math::complement(dist, f));
}

/// Forward-backward selection over `pool`; returns indices into `pool` in
/// entry order.
inline std::vector<int> select(const PwoMatrix& p, const Eigen::VectorXd& y, const std::vector<std::vector<int>>& pool,
                               double alpha_in, double alpha_out) {
  const int n = static_cast<int>(y.size());
  const double scale = std::max((y.array() - y.mean()).square().sum(), 1e-300);
  std::vector<int> in;
  auto rss_of = [&](const std::vector<int>& idx, bool& ok) {
    std::vector<std::vector<int>> terms;
    for (int k : idx) terms.push_back(pool[k]);
    const auto f = least_squares(term_matrix(p, terms), y);
    ok = f.full_rank;
    return f.rss;
  };
  bool ok = true;
  double current = rss_of(in, ok);
  const int cap = 4 * static_cast<int>(pool.size() * pool.size()) + 8;
  for (int step = 0; step < cap; ++step) {
    bool changed = false;
    int best = -1;
    double best_p = alpha_in, best_rss = 0;
    for (int k = 0; k < static_cast<int>(pool.size()); ++k) {
      if (std::find(in.begin(), in.end(), k) != in.end()) continue;
      auto trial = in;
      trial.push_back(k);
      const int df = n - static_cast<int>(trial.size()) - 1;
      if (df < 0) continue;
      const double rss = rss_of(trial, ok);
      if (!ok) continue;
      const double pv = partial_f_pvalue(current, rss, df, scale);
      if (pv < best_p) {
        best_p = pv;
        best = k;
        best_rss = rss;
      }
    }
    if (best >= 0) {
      in.push_back(best);
      current = best_rss;
      changed = true;
    }
    int worst = -1;
    double worst_p = alpha_out, worst_rss = 0;
    const int df = n - static_cast<int>(in.size()) - 1;
    for (std::size_t k = 0; k < in.size(); ++k) {
      if (changed && in[k] == best) continue;
      auto trial = in;
      trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(k));
      const double rss = rss_of(trial, ok);
      const double pv = partial_f_pvalue(rss, current, df, scale);
      if (pv > worst_p) {
        worst_p = pv;
        worst = static_cast<int>(k);
        worst_rss = rss;
      }
    }
    if (worst >= 0) {
      in.erase(in.begin() + worst);
      current = worst_rss;
      changed = true;
    }
    if (!changed) break;
  }
  return in;
}

}  // namespace detail

/// Least-squares fit of y on [1 | P].
inline FittedModel fit_main_effects(const PwoMatrix& p, const Response& y) {
  detail::check_response(p, y);
  if (static_cast<int>(p.rows.size()) <= p.m_prime + 1)
    throw ValidationError("main-effects fit needs more than " + std::to_string(p.m_prime + 1) + " runs, got " +
                          std::to_string(p.rows.size()));
  std::vector<std::vector<int>> terms;
  for (int c = 0; c < p.m_prime; ++c) terms.push_back({c});
  return detail::fit_terms(p, y, terms);
}

/// Two-stage stepwise regression. Stage 1 selects main effects; stage 2 reruns
/// the selection over the stage-1 actives plus interactions allowed by the
/// heredity rule (weak: one parent active, strong: both).
inline FittedModel stepwise(const PwoMatrix& p, const Response& resp, double alpha_in = 0.05, double alpha_out = 0.05,
                            Heredity heredity = Heredity::weak) {
  detail::check_response(p, resp);
  if (!(alpha_in > 0 && alpha_in < 1 && alpha_out > 0 && alpha_out < 1))
    throw ValidationError("stepwise levels must lie in (0, 1)");
  if (alpha_out < alpha_in) throw ValidationError("alpha_out must not be below alpha_in");
  const Eigen::VectorXd y =
      Eigen::Map<const Eigen::VectorXd>(resp.y.data(), static_cast<Eigen::Index>(resp.y.size()));

  std::vector<std::vector<int>> mains;
  for (int c = 0; c < p.m_prime; ++c) mains.push_back({c});
  auto stage1 = detail::select(p, y, mains, alpha_in, alpha_out);
  std::vector<int> actives;
  for (int k : stage1) actives.push_back(mains[k][0]);
  std::sort(actives.begin(), actives.end());
  auto is_active = [&](int c) { return std::binary_search(actives.begin(), actives.end(), c); };

  std::vector<std::vector<int>> pool;
  for (int c : actives) pool.push_back({c});
  for (int a = 0; a < p.m_prime; ++a)
    for (int b = a + 1; b < p.m_prime; ++b) {
      const int parents = is_active(a) + is_active(b);
      if (parents == 2 || (parents == 1 && heredity == Heredity::weak)) pool.push_back({a, b});
    }
  auto stage2 = detail::select(p, y, pool, alpha_in, alpha_out);
  std::sort(stage2.begin(), stage2.end());
  std::vector<std::vector<int>> terms;
  for (int k : stage2) terms.push_back(pool[k]);
  auto model = detail::fit_terms(p, resp, terms);
  model.stepwise = true;
  model.stage1_actives = actives;
  return model;
}

}  // namespace oofa
