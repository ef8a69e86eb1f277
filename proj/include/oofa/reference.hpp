#pragma once

// Expected-frequency tables under a candidate set, their frequency-pattern
// types, and the run sizes at which exact balance is arithmetically possible.

#include <map>
#include <numeric>

#include "oofa/candidates.hpp"

namespace oofa {

/// Reference table for one tuple of extended columns, tallied over the
/// reference pool of the candidate set.
inline ReferenceTable reference_counts(const CandidateSet& cands, const std::vector<int>& cols) {
  if (cols.size() < 2 || cols.size() > 3) throw ValidationError("reference tables are built for pairs or triples");
  std::set<int> distinct(cols.begin(), cols.end());
  if (distinct.size() != cols.size()) throw ValidationError("tuple columns must be distinct");
  return cands.reference().table_for(cols);
}

/// Structural relation between two PWO factors F_kl and F_uv.
enum class PairKind { synergistic, antagonistic, independent };

inline PairKind pair_kind(int m, int col_a, int col_b) {
  auto [k, l] = pwo_pair(m, col_a);
  auto [u, v] = pwo_pair(m, col_b);
  if (k == u || l == v) return PairKind::synergistic;
  if (l == u || k == v) return PairKind::antagonistic;
  return PairKind::independent;
}

/// Tally of table types over all t-tuples of the candidate set's reference tables.
inline std::map<TableType, int> classify_tuples(const CandidateSet& cands, int t) {
  std::map<TableType, int> out;
  for (const auto& tab : cands.reference().tables(t)) ++out[TableType::of(tab.counts)];
  return out;
}

/// wt-classes of all PWO column pairs of the unrestricted full design.
inline std::map<TableType, int> classify_pairs(int m) {
  if (m < 3) throw ValidationError("pair classification needs m >= 3");
  return classify_tuples(build_candidates(m), 2);
}

/// Smallest N for which N*E/M is an integer in every cell of every t-tuple
/// reference table. Balanced designs can only have multiples of this size.
inline std::int64_t admissible_min_N(const CandidateSet& cands, int t) {
  if (t < 2 || t > 3) throw ValidationError("strength must be 2 or 3");
  const auto& ref = cands.reference();
  const std::int64_t total = ref.size();
  std::int64_t n = 1;
  for (const auto& tab : ref.tables(t))
    for (auto e : tab.counts)
      if (e > 0) n = std::lcm(n, total / std::gcd(e, total));
  return n;
}

}  // namespace oofa
