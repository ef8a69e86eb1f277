#include <gtest/gtest.h>

#include "support.hpp"

using namespace oofa;

namespace {

Response response_of(const PwoMatrix& p, const std::function<double(const std::vector<std::uint8_t>&)>& f) {
  Response r;
  for (const auto& row : p.rows) r.y.push_back(f(row));
  return r;
}

std::vector<std::string> names(const FittedModel& f) {
  std::vector<std::string> out;
  for (const auto& t : f.terms) out.push_back(t.name);
  return out;
}

}  // namespace

TEST(Analysis, ConstantResponseHasZeroEffects) {
  const auto p = expand(full_design(4));
  const auto fit = fit_main_effects(p, response_of(p, [](auto&) { return 3.5; }));
  EXPECT_NEAR(fit.intercept, 3.5, 1e-10);
  for (const auto& t : fit.terms) EXPECT_NEAR(t.coefficient, 0.0, 1e-10);
}

TEST(Analysis, NoiselessMainEffectsRecoveredExactly) {
  const auto p = expand(full_design(4));
  const int f01 = pwo_column(4, 0, 1), f23 = pwo_column(4, 2, 3);
  const auto fit = fit_main_effects(p, response_of(p, [&](const auto& r) { return 2.0 * r[f01] - 3.0 * r[f23]; }));
  for (const auto& t : fit.terms) {
    const double want = t.columns[0] == f01 ? 2.0 : t.columns[0] == f23 ? -3.0 : 0.0;
    EXPECT_NEAR(t.coefficient, want, 1e-10) << t.name;
  }
  EXPECT_NEAR(fit.r2, 1.0, 1e-12);
}

TEST(Analysis, FullDesignEffectVarianceIsFourTimesVif) {
  for (int m : {4, 5}) {
    const auto d = full_design(m);
    const auto p = expand(d);
    std::mt19937_64 rng(1);
    std::normal_distribution<double> noise;
    Response y;
    for (int i = 0; i < p.size(); ++i) y.y.push_back(noise(rng));
    const auto fit = fit_main_effects(p, y);
    const double vif = *mean_vif(d);
    for (const auto& t : fit.terms) {
      EXPECT_NEAR(p.size() * t.unscaled_variance, 4.0 * vif, 1e-9);
      EXPECT_NEAR(t.std_error, fit.terms.front().std_error, 1e-12);
    }
    if (m == 4) EXPECT_NEAR(4.0 * vif, 4.0 * 1.8, 1e-12);
  }
}

TEST(Analysis, ResidualsOrthogonalToColumns) {
  std::mt19937_64 rng(4);
  const auto d = test::random_subset_design(5, 30, rng);
  const auto p = expand(d);
  std::normal_distribution<double> noise;
  Response y;
  for (int i = 0; i < p.size(); ++i) y.y.push_back(noise(rng) + p.rows[i][0]);
  const auto fit = fit_main_effects(p, y);
  double ynorm = 0;
  for (double v : y.y) ynorm += v * v;
  ynorm = std::sqrt(ynorm);
  std::vector<double> resid(p.size());
  for (int i = 0; i < p.size(); ++i) {
    double yhat = fit.intercept;
    for (const auto& t : fit.terms) yhat += t.coefficient * p.rows[i][t.columns[0]];
    resid[i] = y.y[i] - yhat;
  }
  double s0 = 0;
  for (double r : resid) s0 += r;
  EXPECT_LT(std::abs(s0), 1e-8 * ynorm);
  for (int c = 0; c < p.m_prime; ++c) {
    double s = 0;
    for (int i = 0; i < p.size(); ++i) s += resid[i] * p.rows[i][c];
    EXPECT_LT(std::abs(s), 1e-8 * ynorm);
  }
}

TEST(Analysis, FitErrors) {
  const auto p = expand(design_from_rows(4, {1, 2, 3, 4, 5, 6, 7}));
  EXPECT_THROW(fit_main_effects(p, Response{std::vector<double>(7, 1.0)}), ValidationError);
  const auto q = expand(full_design(4));
  EXPECT_THROW(fit_main_effects(q, Response{std::vector<double>(5, 1.0)}), ValidationError);
  // eight copies of one run: enough rows, rank one
  const auto r = expand(design_from_rows(4, {1, 1, 1, 1, 1, 1, 1, 1}));
  EXPECT_THROW(fit_main_effects(r, Response{std::vector<double>(8, 1.0)}), ValidationError);
}

TEST(Stepwise, SingleNoiselessMainEffect) {
  const auto p = expand(full_design(4));
  const int f12 = pwo_column(4, 1, 2);
  const auto fit = stepwise(p, response_of(p, [&](const auto& r) { return 5.0 * r[f12]; }));
  EXPECT_EQ(names(fit), (std::vector<std::string>{"F12"}));
  EXPECT_NEAR(fit.terms[0].coefficient, 5.0, 1e-10);
}

TEST(Stepwise, RecoversInteractionOfActiveMainEffect) {
  const auto p = expand(full_design(4));
  const int f01 = pwo_column(4, 0, 1), f23 = pwo_column(4, 2, 3);
  const auto fit = stepwise(p, response_of(p, [&](const auto& r) { return r[f01] + r[f01] * r[f23]; }));
  bool has_interaction = false;
  for (const auto& t : fit.terms)
    if (t.columns == std::vector<int>{f01, f23}) {
      has_interaction = true;
      EXPECT_NEAR(t.coefficient, 1.0, 1e-8);
    }
  EXPECT_TRUE(has_interaction);
  EXPECT_NEAR(fit.r2, 1.0, 1e-10);
}

TEST(Stepwise, StrongHeredityNeedsBothParents) {
  const auto p = expand(full_design(4));
  const int f01 = pwo_column(4, 0, 1);
  const auto fit = stepwise(p, response_of(p, [&](const auto& r) { return 3.0 * r[f01]; }), 0.05, 0.05, Heredity::strong);
  for (const auto& t : fit.terms) EXPECT_EQ(t.columns.size(), 1u);
}

TEST(Stepwise, NullResponseSelectsAtNominalRate) {
  const auto d = full_design(4);
  const auto p = expand(d);
  std::mt19937_64 rng(99);
  std::normal_distribution<double> noise;
  const int sims = 400;
  int empty = 0, with_f01 = 0;
  for (int k = 0; k < sims; ++k) {
    Response y;
    for (int i = 0; i < p.size(); ++i) y.y.push_back(noise(rng));
    const auto fit = stepwise(p, y);
    empty += fit.stage1_actives.empty();
    for (int c : fit.stage1_actives) with_f01 += c == 0;
  }
  const double rate = static_cast<double>(with_f01) / sims;
  // a given null term enters at roughly the per-test level
  EXPECT_GT(rate, 0.01);
  EXPECT_LT(rate, 0.12);
  EXPECT_GT(empty, sims / 2);
}

TEST(Stepwise, InvariantUnderRunPermutation) {
  const auto d = full_design(4);
  const auto p = expand(d);
  std::mt19937_64 rng(6);
  std::normal_distribution<double> noise;
  Response y;
  for (int i = 0; i < p.size(); ++i) y.y.push_back(2.0 * p.rows[i][1] - p.rows[i][4] + 0.3 * noise(rng));
  std::vector<int> perm(p.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  PwoMatrix q = p;
  Response z;
  for (int i = 0; i < p.size(); ++i) {
    q.rows[i] = p.rows[perm[i]];
    z.y.push_back(y.y[perm[i]]);
  }
  const auto a = stepwise(p, y), b = stepwise(q, z);
  EXPECT_EQ(names(a), names(b));
  for (std::size_t k = 0; k < a.terms.size(); ++k) EXPECT_NEAR(a.terms[k].coefficient, b.terms[k].coefficient, 1e-9);
}

TEST(Stepwise, ArgumentChecks) {
  const auto p = expand(full_design(4));
  Response y{std::vector<double>(24, 0.0)};
  EXPECT_THROW(stepwise(p, y, 0.0, 0.05), ValidationError);
  EXPECT_THROW(stepwise(p, y, 0.1, 0.05), ValidationError);
  EXPECT_THROW(stepwise(p, Response{{1.0}}), ValidationError);
}
