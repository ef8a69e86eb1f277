#include <gtest/gtest.h>

#include "support.hpp"

using namespace oofa;

namespace {

/// Smallest N for which every N*E/M is an integer, found by direct search.
std::int64_t brute_min_n(const std::vector<std::vector<int>>& orders, int m, int t) {
  const auto cols = test::pairs_of(m);
  std::vector<std::map<std::vector<int>, long>> tabs;
  for (const auto& c : combinations(static_cast<int>(cols.size()), t)) {
    std::vector<std::pair<int, int>> sel;
    for (int k : c) sel.push_back(cols[k]);
    tabs.push_back(test::joint_counts(orders, sel));
  }
  const auto big = static_cast<std::int64_t>(orders.size());
  for (std::int64_t n = 1;; ++n) {
    bool ok = true;
    for (const auto& tab : tabs)
      for (const auto& [cell, e] : tab) ok = ok && (n * e) % big == 0;
    if (ok) return n;
  }
}

}  // namespace

TEST(Reference, CountsMatchEnumeration) {
  for (int m : {3, 4, 5}) {
    const auto& cs = test::full_candidates(m);
    const auto full = test::all_orders(m);
    const auto cols = test::pairs_of(m);
    for (int t : {2, 3}) {
      for (const auto& c : combinations(static_cast<int>(cols.size()), t)) {
        std::vector<std::pair<int, int>> sel;
        for (int k : c) sel.push_back(cols[k]);
        const auto brute = test::joint_counts(full, sel);
        const auto tab = reference_counts(cs, c);
        std::int64_t total = 0;
        for (int cell = 0; cell < tab.cell_count(); ++cell) {
          std::vector<int> key;
          for (int b = t - 1; b >= 0; --b) key.push_back((cell >> b) & 1);
          const auto it = brute.find(key);
          EXPECT_EQ(tab.counts[cell], it == brute.end() ? 0 : it->second);
          total += tab.counts[cell];
        }
        EXPECT_EQ(total, static_cast<std::int64_t>(factorial(m)));
      }
    }
  }
}

TEST(Reference, PairTablesForFourComponents) {
  const auto& cs = test::full_candidates(4);
  // synergistic F01,F02; antagonistic F01,F12; independent F01,F23
  EXPECT_EQ(reference_counts(cs, {0, 1}).counts, (std::vector<std::int64_t>{8, 4, 4, 8}));
  EXPECT_EQ(reference_counts(cs, {0, 3}).counts, (std::vector<std::int64_t>{4, 8, 8, 4}));
  EXPECT_EQ(reference_counts(cs, {0, 5}).counts, (std::vector<std::int64_t>{6, 6, 6, 6}));
  EXPECT_EQ(pair_kind(4, 0, 1), PairKind::synergistic);
  EXPECT_EQ(pair_kind(4, 0, 3), PairKind::antagonistic);
  EXPECT_EQ(pair_kind(4, 0, 5), PairKind::independent);
}

TEST(Reference, ThreePairTypesWithExpectedCounts) {
  for (int m = 3; m <= 6; ++m) {
    const auto types = classify_pairs(m);
    int independent = 0, other = 0;
    for (int a = 0; a < pwo_count(m); ++a)
      for (int b = a + 1; b < pwo_count(m); ++b) (pair_kind(m, a, b) == PairKind::independent ? independent : other)++;
    EXPECT_EQ(types.size(), m == 3 ? 1u : 2u) << "m=" << m;
    int total = 0;
    for (const auto& [type, n] : types) total += n;
    EXPECT_EQ(total, independent + other);
    if (m >= 4) {
      const auto f = static_cast<std::int64_t>(factorial(m) / 4);
      EXPECT_EQ(types.at(TableType::of({f, f, f, f})), independent);
    }
  }
  EXPECT_THROW(classify_pairs(2), ValidationError);
}

TEST(Reference, PairKindMatchesTableShape) {
  const int m = 5;
  const auto& cs = test::full_candidates(m);
  for (int a = 0; a < pwo_count(m); ++a)
    for (int b = a + 1; b < pwo_count(m); ++b) {
      const auto c = reference_counts(cs, {a, b}).counts;
      switch (pair_kind(m, a, b)) {
        case PairKind::independent: EXPECT_TRUE(c[0] == c[1] && c[1] == c[2] && c[2] == c[3]); break;
        case PairKind::synergistic: EXPECT_TRUE(c[0] == c[3] && c[0] == 2 * c[1] && c[1] == c[2]); break;
        case PairKind::antagonistic: EXPECT_TRUE(c[1] == c[2] && c[1] == 2 * c[0] && c[0] == c[3]); break;
      }
    }
}

TEST(Reference, RejectsBadTuples) {
  const auto& cs = test::full_candidates(4);
  EXPECT_THROW(reference_counts(cs, {0}), ValidationError);
  EXPECT_THROW(reference_counts(cs, {0, 0}), ValidationError);
  EXPECT_THROW(reference_counts(cs, {0, 1, 2, 3}), ValidationError);
  EXPECT_THROW(admissible_min_N(cs, 1), ValidationError);
  EXPECT_THROW(admissible_min_N(cs, 4), ValidationError);
}

TEST(Reference, AdmissibleRunSizes) {
  for (int m = 4; m <= 6; ++m) {
    EXPECT_EQ(admissible_min_N(test::full_candidates(m), 2), 12);
    EXPECT_EQ(admissible_min_N(test::full_candidates(m), 3), 24);
  }
  EXPECT_EQ(admissible_min_N(test::full_candidates(3), 2), 6);
}

TEST(Reference, AdmissibleAgreesWithDirectSearch) {
  for (int m = 3; m <= 5; ++m)
    for (int t : {2, 3}) {
      if (t == 3 && m == 3) continue;
      EXPECT_EQ(admissible_min_N(test::full_candidates(m), t), brute_min_n(test::all_orders(m), m, t));
    }
  // constrained set: component 0 before component 1
  const auto cs = build_candidates(4, {Constraint::precedes(0, 1)});
  std::vector<std::vector<int>> orders;
  for (const auto& o : test::all_orders(4))
    if (test::before(o, 0, 1)) orders.push_back(o);
  EXPECT_EQ(admissible_min_N(cs, 2), brute_min_n(orders, 4, 2));
}
