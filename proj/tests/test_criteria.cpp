#include <gtest/gtest.h>

#include "support.hpp"

using namespace oofa;

TEST(Criteria, Chi2MatchesOracleOnRandomDesigns) {
  std::mt19937_64 rng(11);
  for (int m : {3, 4, 5}) {
    const auto& cs = test::full_candidates(m);
    for (int rep = 0; rep < 6; ++rep) {
      const int n = 4 + static_cast<int>(rng() % 20);
      const auto d = test::random_design(m, n, rng);
      for (int t : {2, 3}) {
        if (pwo_count(m) < t) continue;
        EXPECT_NEAR(chi2_summary(d, cs, t, ChiSquareRule::sparse).ave, test::oracle_chi2_ave(d, t, true), 1e-10);
        EXPECT_NEAR(chi2_summary(d, cs, t, ChiSquareRule::literal).ave, test::oracle_chi2_ave(d, t, false), 1e-10);
      }
    }
  }
}

TEST(Criteria, FullDesignIsBalancedAtEveryStrength) {
  for (int m : {3, 4, 5}) {
    const auto d = full_design(m);
    const auto r = evaluate(d, test::full_candidates(m));
    EXPECT_EQ(r.chi2_ave_2, 0.0);
    EXPECT_EQ(r.chi2_ave_3, 0.0);
    EXPECT_EQ(r.fo_2, 1.0);
    EXPECT_TRUE(r.is_oofa_oa_2);
    EXPECT_TRUE(r.is_oofa_oa_3);
    EXPECT_NEAR(r.d_eff, 1.0, 1e-12);
  }
}

TEST(Criteria, ReplicatedFullDesignKeepsBalance) {
  auto d = full_design(4);
  auto twice = d;
  twice.runs.insert(twice.runs.end(), d.runs.begin(), d.runs.end());
  const auto r = evaluate(twice, test::full_candidates(4));
  EXPECT_TRUE(r.is_oofa_oa_3);
  EXPECT_NEAR(r.d_eff, 1.0, 1e-12);
}

TEST(Criteria, DEfficiencyMatchesDenseDeterminant) {
  std::mt19937_64 rng(5);
  for (int m : {3, 4, 5}) {
    for (int rep = 0; rep < 5; ++rep) {
      const auto d = test::random_design(m, pwo_count(m) + 3 + static_cast<int>(rng() % 10), rng);
      EXPECT_NEAR(d_efficiency(d, test::full_candidates(m)), test::oracle_d_eff(d), 1e-9);
    }
  }
}

TEST(Criteria, SingularDesignHasZeroEfficiency) {
  const auto d = design_from_rows(5, {1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1});
  EXPECT_EQ(d_efficiency(d, test::full_candidates(5)), 0.0);
  EXPECT_FALSE(mean_vif(d).has_value());
  EXPECT_EQ(d_efficiency(design_from_rows(5, {1, 2, 3}), test::full_candidates(5)), 0.0);
}

TEST(Criteria, MeanVifMatchesRegressionOracle) {
  std::mt19937_64 rng(21);
  for (int m : {3, 4, 5}) {
    for (int rep = 0; rep < 4; ++rep) {
      const auto d = test::random_subset_design(m, std::min<int>(factorial(m), pwo_count(m) + 6), rng);
      const auto v = mean_vif(d);
      if (!v) continue;
      EXPECT_NEAR(*v, test::oracle_mean_vif(d), 1e-8);
    }
  }
}

TEST(Criteria, FullDesignVifClosedForm) {
  for (int m = 3; m <= 7; ++m) {
    const auto v = mean_vif(full_design(m));
    ASSERT_TRUE(v.has_value());
    EXPECT_NEAR(*v, 3.0 * (m - 1) / (m + 1), 1e-9) << "m=" << m;
  }
}

TEST(Criteria, SimilarityMatchesPairwiseOracle) {
  std::mt19937_64 rng(8);
  for (int m : {3, 4, 5}) {
    const auto d = test::random_design(m, 9, rng);
    const auto sim = moments(expand(d), 3);
    for (int s = 1; s <= 3; ++s) EXPECT_NEAR(sim[s - 1], test::oracle_sim(d, s), 1e-10);
  }
  EXPECT_THROW(moments(expand(design_from_rows(4, {1})), 2), ValidationError);
  EXPECT_THROW(moments(expand(design_from_rows(4, {1, 2})), 0), ValidationError);
}

TEST(Criteria, SimilarityMonotoneInS) {
  std::mt19937_64 rng(9);
  for (int rep = 0; rep < 20; ++rep) {
    const auto d = test::random_design(5, 6 + rep, rng);
    const auto sim = moments(expand(d), 4);
    for (int s = 1; s < 4; ++s) EXPECT_LE(sim[s - 1], sim[s] + 1e-12);
  }
}

TEST(Criteria, FullDesignSimilarityAnchors) {
  auto sim = moments(expand(full_design(4)), 2);
  EXPECT_NEAR(sim[0], 3.0, 1e-12);
  EXPECT_NEAR(sim[1], 3.34, 0.005);
  sim = moments(expand(full_design(5)), 1);
  EXPECT_NEAR(sim[0], 5.0, 1e-12);
  sim = moments(expand(full_design(6)), 2);
  EXPECT_NEAR(sim[0], 7.5, 1e-12);
  EXPECT_NEAR(sim[1], 7.96, 0.005);
}

TEST(Criteria, LeaveOneOutAgreesWithExplicitProjection) {
  std::mt19937_64 rng(13);
  for (int m : {4, 5}) {
    const auto& cs = test::full_candidates(m);
    const auto& sub = test::full_candidates(m - 1);
    for (int rep = 0; rep < 4; ++rep) {
      const auto d = test::random_design(m, 10 + rep, rng);
      for (int t : {2, 3}) {
        double ave = 0, fo = 0;
        for (int c = 0; c < m; ++c) {
          const auto s = chi2_summary(leave_one_out(d, c), sub, t);
          ave += s.ave;
          fo += s.fo;
        }
        const auto loo = loo_summary(d, cs, t);
        EXPECT_NEAR(loo.ave, ave / m, 1e-10);
        EXPECT_NEAR(loo.fo, fo / m, 1e-10);
      }
    }
  }
  EXPECT_THROW(loo_summary(full_design(2), test::full_candidates(2), 2), ValidationError);
}

TEST(Criteria, StageCountsAndRmv) {
  const auto d = full_design(4);
  for (const auto& row : stage_counts(d))
    for (int f : row) EXPECT_EQ(f, 6);
  EXPECT_EQ(rmv_ord(d), 0.0);
  const auto lopsided = design_from_rows(3, {1, 1, 1});
  // component k sits at stage k in all three runs: each row of f is (3,0,0)
  // up to order, squared deviations 4+1+1 per component, 18/9 overall
  EXPECT_NEAR(rmv_ord_raw(lopsided), std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(rmv_ord(lopsided), 2.0, 1e-12);
}

TEST(Criteria, InputValidation) {
  const auto& cs4 = test::full_candidates(4);
  EXPECT_THROW(evaluate(design_from_rows(5, {1, 2}), cs4), ValidationError);
  EXPECT_THROW(chi2_summary(design_from_rows(4, {1, 2}), cs4, 1), ValidationError);
  EXPECT_THROW(chi2_summary(design_from_rows(4, {1, 2}), cs4, 4), ValidationError);
  const auto constrained = build_candidates(4, {Constraint::precedes(0, 1)});
  EXPECT_THROW(evaluate(design_from_rows(4, {1, 24}), constrained), ValidationError);
  EXPECT_THROW(evaluate(Design(), cs4), ValidationError);
}

TEST(Criteria, BalancedFlagUsesExactArithmetic) {
  const auto& cs = test::full_candidates(4);
  const auto d = test::fixture_design("table2_design1_m4_n12");
  for (const auto& v : chi2_all(d, cs, 2)) {
    EXPECT_TRUE(v.balanced);
    EXPECT_EQ(v.value, 0.0);
  }
}

TEST(Ranking, CompetitionRanksAndMidrankFinal) {
  auto rep = [](double fo, double chi) {
    CriteriaReport r;
    r.fo_3 = fo;
    r.chi2_ave_3 = chi;
    return r;
  };
  const std::vector<RankCriterion> crit{{"fo_3", true}, {"chi2_ave_3", false}};
  const auto t = rank_designs({{"a", rep(0.9, 0.2)}, {"b", rep(0.9, 0.1)}, {"c", rep(0.5, 0.3)}, {"d", rep(0.8, 0.05)}}, crit);
  ASSERT_EQ(t.rows.size(), 4u);
  EXPECT_EQ(t.rows[0].id, "b");
  EXPECT_EQ(t.rows[0].ranks, (std::vector<int>{1, 2}));
  // a: ranks (1,3) avg 2; d: ranks (3,1) avg 2 -> tie shares final rank 2.5
  EXPECT_EQ(t.rows[1].id, "a");
  EXPECT_EQ(t.rows[2].id, "d");
  EXPECT_DOUBLE_EQ(t.rows[1].final_rank, 2.5);
  EXPECT_DOUBLE_EQ(t.rows[2].final_rank, 2.5);
  EXPECT_DOUBLE_EQ(t.rows[3].final_rank, 4.0);
  EXPECT_EQ(t.worst, (std::vector<double>{0.5, 0.3}));
}

TEST(Ranking, PopulationShiftsRanks) {
  CriteriaReport a, b, x;
  a.fo_3 = 0.8;
  b.fo_3 = 0.7;
  x.fo_3 = 0.75;
  const std::vector<RankCriterion> crit{{"fo_3", true}};
  const auto alone = rank_designs({{"a", a}, {"b", b}}, crit);
  EXPECT_EQ(alone.rows[1].ranks[0], 2);
  const auto within = rank_designs({{"a", a}, {"b", b}}, crit, {a, b, x});
  EXPECT_EQ(within.rows[1].ranks[0], 3);
}

TEST(Ranking, Errors) {
  EXPECT_THROW(rank_designs({}, default_rank_criteria()), ValidationError);
  CriteriaReport r;
  EXPECT_THROW(criterion_value(r, "bogus"), ValidationError);
  EXPECT_THROW(criterion_value(r, "sim_2"), ValidationError);
}
