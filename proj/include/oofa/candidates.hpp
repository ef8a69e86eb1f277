#pragma once

// Candidate sets: all m! orderings, orderings restricted by precedence
// constraints, and orderings crossed with process-factor level combinations.

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "oofa/perm.hpp"
#include "oofa/table.hpp"

namespace oofa {

/// Precedence restriction on orderings. A chain (a,b,c) requires a before b before c;
/// precedes(a,b) is the two-element chain.
struct Constraint {
  std::vector<int> chain;

  static Constraint precedes(int a, int b) { return {{a, b}}; }
  static Constraint ordered(std::vector<int> c) { return {std::move(c)}; }

  bool satisfied_by(const Permutation& p) const {
    const auto pos = p.positions();
    for (std::size_t i = 0; i + 1 < chain.size(); ++i)
      if (pos[chain[i]] > pos[chain[i + 1]]) return false;
    return true;
  }

  void check(int m) const {
    if (chain.size() < 2) throw ValidationError("a precedence constraint needs two or more components");
    std::set<int> seen;
    for (int c : chain) {
      if (c < 0 || c >= m) throw ValidationError("constraint names component " + std::to_string(c) + " outside 0.." + std::to_string(m - 1));
      if (!seen.insert(c).second) throw ValidationError("constraint repeats component " + std::to_string(c));
    }
  }
};

struct ProcessFactor {
  std::string name;
  int levels = 2;
};

/// Process factors crossed with the orderings. An empty fraction means the full
/// level grid; otherwise only the listed level combinations are allowed.
struct ProcessFactorSpec {
  std::vector<ProcessFactor> factors;
  std::vector<std::vector<int>> fraction;

  std::vector<std::vector<int>> combinations() const {
    for (const auto& f : factors)
      if (f.levels < 2) throw ValidationError("process factor '" + f.name + "' needs at least 2 levels");
    if (!fraction.empty()) {
      std::set<std::vector<int>> seen;
      for (const auto& row : fraction) {
        if (row.size() != factors.size()) throw ValidationError("fraction row width differs from factor count");
        for (std::size_t k = 0; k < row.size(); ++k)
          if (row[k] < 0 || row[k] >= factors[k].levels) throw ValidationError("fraction level out of range for factor '" + factors[k].name + "'");
        if (!seen.insert(row).second) throw ValidationError("fraction rows must be unique");
      }
      return fraction;
    }
    std::vector<std::vector<int>> grid{{}};
    for (const auto& f : factors) {
      std::vector<std::vector<int>> next;
      for (const auto& g : grid)
        for (int v = 0; v < f.levels; ++v) {
          next.push_back(g);
          next.back().push_back(v);
        }
      grid = std::move(next);
    }
    return grid;
  }
};

class CandidateSet;

namespace detail {
struct TableCache {
  std::once_flag once[4];
  std::vector<ReferenceTable> by_strength[4];
};
}  // namespace detail

/// The admissible runs for a design search, together with the pool that defines
/// reference frequencies. Without a base design both are the same set; with a
/// base design the search pool shrinks to the base orderings while reference
/// frequencies still come from the complete array.
class CandidateSet {
 public:
  int m() const { return m_; }
  int m_prime() const { return pwo_count(m_); }
  int process_count() const { return static_cast<int>(process_.factors.size()); }
  const ProcessFactorSpec& process() const { return process_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }
  int size() const { return static_cast<int>(orders_.size()); }
  int column_count() const { return m_prime() + process_count(); }

  const Permutation& order(int i) const { return orders_[i]; }
  const std::vector<int>& levels(int i) const { return levels_[i]; }
  const std::vector<std::uint8_t>& extended(int i) const { return extended_[i]; }

  /// Level count of each extended column (2 for PWO columns).
  const std::vector<int>& column_levels() const { return column_levels_; }

  /// Pool used for reference frequencies (this set unless built from a base design).
  const CandidateSet& reference() const { return reference_ ? *reference_ : *this; }
  bool has_separate_reference() const { return static_cast<bool>(reference_); }

  /// Index of a run in this set, or -1.
  int find(const Permutation& p, const std::vector<int>& lv) const {
    auto it = index_.find(key(p, lv));
    return it == index_.end() ? -1 : it->second;
  }

  bool contains(const Permutation& p, const std::vector<int>& lv) const { return find(p, lv) >= 0; }

  /// Extended row (PWO levels then process levels) for an arbitrary run.
  std::vector<std::uint8_t> extend(const Permutation& p, const std::vector<int>& lv) const {
    auto row = pwo_row(p);
    for (int v : lv) row.push_back(static_cast<std::uint8_t>(v));
    return row;
  }

  /// Reference tables for every t-tuple of extended columns, lexicographic order.
  /// Computed once per strength by exact enumeration and shared afterwards.
  const std::vector<ReferenceTable>& tables(int t) const;

  /// Single-tuple reference table by enumeration.
  ReferenceTable table_for(const std::vector<int>& cols) const {
    ReferenceTable tab;
    tab.columns = cols;
    int cells = 1;
    for (int c : cols) {
      if (c < 0 || c >= column_count()) throw ValidationError("column index out of range");
      tab.levels.push_back(column_levels_[c]);
      cells *= column_levels_[c];
    }
    tab.counts.assign(cells, 0);
    for (const auto& row : extended_) ++tab.counts[tab.cell_of(row)];
    tab.total = size();
    return tab;
  }

  friend CandidateSet build_candidates(int, const std::vector<Constraint>&,
                                       const std::optional<ProcessFactorSpec>&,
                                       const std::optional<Design>&, int);

 private:
  static std::string key(const Permutation& p, const std::vector<int>& lv) {
    std::string k;
    for (int c : p.labels()) k.push_back(static_cast<char>(c));
    k.push_back('|');
    for (int v : lv) k.push_back(static_cast<char>(v));
    return k;
  }

  void add(const Permutation& p, const std::vector<int>& lv) {
    if (!index_.emplace(key(p, lv), size()).second) return;
    orders_.push_back(p);
    levels_.push_back(lv);
    extended_.push_back(extend(p, lv));
  }

  int m_ = 0;
  std::vector<Constraint> constraints_;
  ProcessFactorSpec process_;
  std::vector<Permutation> orders_;
  std::vector<std::vector<int>> levels_;
  std::vector<std::vector<std::uint8_t>> extended_;
  std::vector<int> column_levels_;
  std::unordered_map<std::string, int> index_;
  std::shared_ptr<const CandidateSet> reference_;
  std::shared_ptr<detail::TableCache> cache_ = std::make_shared<detail::TableCache>();
};

inline const std::vector<ReferenceTable>& CandidateSet::tables(int t) const {
  if (t < 1 || t > 3) throw ValidationError("tuple strength must be 1, 2 or 3");
  std::call_once(cache_->once[t], [&] {
    auto& out = cache_->by_strength[t];
    for (const auto& cols : combinations(column_count(), t)) out.push_back(table_for(cols));
  });
  return cache_->by_strength[t];
}

/// Builds a candidate set. Rows are (base rows, or all m! orderings) that satisfy
/// every constraint, crossed with the process combinations.
inline CandidateSet build_candidates(int m, const std::vector<Constraint>& constraints = {},
                                     const std::optional<ProcessFactorSpec>& process = std::nullopt,
                                     const std::optional<Design>& base = std::nullopt,
                                     int max_m = kDefaultMaxComponents) {
  for (const auto& c : constraints) c.check(m);
  const ProcessFactorSpec spec = process.value_or(ProcessFactorSpec{});
  const auto combos = spec.combinations();

  auto make = [&](const std::vector<Permutation>& orders) {
    CandidateSet cs;
    cs.m_ = m;
    cs.constraints_ = constraints;
    cs.process_ = spec;
    cs.column_levels_.assign(pwo_count(m), 2);
    for (const auto& f : spec.factors) cs.column_levels_.push_back(f.levels);
    for (const auto& p : orders) {
      bool ok = true;
      for (const auto& c : constraints) ok = ok && c.satisfied_by(p);
      if (!ok) continue;
      for (const auto& lv : combos) cs.add(p, lv);
    }
    return cs;
  };

  const Design full = full_design(m, max_m);
  CandidateSet whole = make(full.runs);
  if (whole.size() == 0) throw ValidationError("constraints leave no admissible ordering");
  if (!base) return whole;

  if (base->m != m) throw ValidationError("base design has m=" + std::to_string(base->m) + ", expected " + std::to_string(m));
  for (const auto& r : base->runs)
    for (const auto& c : constraints)
      if (!c.satisfied_by(r)) throw ValidationError("base design run violates a precedence constraint");
  CandidateSet pool = make(base->runs);
  pool.reference_ = std::make_shared<const CandidateSet>(std::move(whole));
  return pool;
}

/// True iff every run of d is a row of the candidate pool.
inline bool validate_against(const Design& d, const CandidateSet& cands) {
  static const std::vector<int> none;
  for (int i = 0; i < d.size(); ++i) {
    const auto& lv = d.has_process() ? d.levels[i] : none;
    if (d.runs[i].size() != cands.m()) return false;
    if (static_cast<int>(lv.size()) != cands.process_count()) return false;
    if (!cands.contains(d.runs[i], lv)) return false;
  }
  return true;
}

}  // namespace oofa
