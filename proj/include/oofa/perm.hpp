#pragma once

// Permutation arithmetic, lexicographic indexing, design matrices and the
// pair-wise-ordering (PWO) expansion of component orderings.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace oofa {

/// Raised for any violated precondition on user-supplied values.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Default ceiling on the component count for full enumeration (8! = 40320).
inline constexpr int kDefaultMaxComponents = 8;

inline std::uint64_t factorial(int n) {
  std::uint64_t f = 1;
  for (int k = 2; k <= n; ++k) f *= static_cast<std::uint64_t>(k);
  return f;
}

/// Number of PWO factors for m components.
constexpr int pwo_count(int m) { return m * (m - 1) / 2; }

/// Column of F_{k,l} (k < l) in the PWO matrix: (0,1),(0,2),...,(0,m-1),(1,2),...
constexpr int pwo_column(int m, int k, int l) {
  return k * m - k * (k + 1) / 2 + (l - k - 1);
}

/// The component pair (k, l) of PWO column `col`.
inline std::pair<int, int> pwo_pair(int m, int col) {
  for (int k = 0; k < m - 1; ++k) {
    const int width = m - 1 - k;
    if (col < width) return {k, k + 1 + col};
    col -= width;
  }
  throw ValidationError("PWO column out of range");
}

/// An ordering of m components: position k holds the component added at stage k.
class Permutation {
 public:
  Permutation() = default;

  explicit Permutation(std::vector<int> labels) : labels_(std::move(labels)) {
    const int m = static_cast<int>(labels_.size());
    if (m < 2) throw ValidationError("a permutation needs at least 2 components");
    std::vector<bool> seen(labels_.size(), false);
    for (int c : labels_) {
      if (c < 0 || c >= m || seen[c])
        throw ValidationError("labels must be a permutation of 0.." + std::to_string(m - 1));
      seen[c] = true;
    }
  }

  static Permutation identity(int m) {
    std::vector<int> v(m);
    std::iota(v.begin(), v.end(), 0);
    return Permutation(std::move(v));
  }

  int size() const { return static_cast<int>(labels_.size()); }
  int operator[](int stage) const { return labels_[stage]; }
  const std::vector<int>& labels() const { return labels_; }

  /// Stage at which each component is added.
  std::vector<int> positions() const {
    std::vector<int> pos(labels_.size());
    for (int k = 0; k < size(); ++k) pos[labels_[k]] = k;
    return pos;
  }

  Permutation reversed() const {
    return Permutation(std::vector<int>(labels_.rbegin(), labels_.rend()));
  }

  /// Renames component c to sigma[c].
  Permutation relabeled(const std::vector<int>& sigma) const {
    std::vector<int> v(labels_.size());
    for (int k = 0; k < size(); ++k) v[k] = sigma[labels_[k]];
    return Permutation(std::move(v));
  }

  auto operator<=>(const Permutation&) const = default;

 private:
  std::vector<int> labels_;
};

/// 1-based lexicographic index -> permutation of (0..m-1).
inline Permutation unrank(int m, std::uint64_t index) {
  if (m < 2 || m > 20) throw ValidationError("component count out of range");
  const std::uint64_t total = factorial(m);
  if (index < 1 || index > total)
    throw ValidationError("row index " + std::to_string(index) + " outside 1.." +
                          std::to_string(total) + " for m=" + std::to_string(m));
  std::uint64_t rest = index - 1;
  std::vector<int> pool(m);
  std::iota(pool.begin(), pool.end(), 0);
  std::vector<int> out;
  out.reserve(m);
  for (int k = m; k >= 1; --k) {
    const std::uint64_t block = factorial(k - 1);
    const auto pick = static_cast<std::size_t>(rest / block);
    rest %= block;
    out.push_back(pool[pick]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  return Permutation(std::move(out));
}

/// Inverse of unrank: 1-based lexicographic index.
inline std::uint64_t rank(const Permutation& p) {
  const int m = p.size();
  std::uint64_t r = 0;
  std::vector<bool> used(m, false);
  for (int k = 0; k < m; ++k) {
    int smaller = 0;
    for (int c = 0; c < p[k]; ++c)
      if (!used[c]) ++smaller;
    r += static_cast<std::uint64_t>(smaller) * factorial(m - 1 - k);
    used[p[k]] = true;
  }
  return r + 1;
}

/// PWO levels of one ordering: entry (k,l) is 1 iff k is added before l.
inline std::vector<std::uint8_t> pwo_row(const Permutation& p) {
  const int m = p.size();
  const auto pos = p.positions();
  std::vector<std::uint8_t> row;
  row.reserve(pwo_count(m));
  for (int k = 0; k < m; ++k)
    for (int l = k + 1; l < m; ++l) row.push_back(pos[k] < pos[l] ? 1 : 0);
  return row;
}

/// Rebuilds an ordering from a complete PWO row. Each component's stage is the
/// number of components added before it; returns false for a cyclic row.
inline bool permutation_from_pwo(int m, const std::vector<std::uint8_t>& row, Permutation& out) {
  if (static_cast<int>(row.size()) != pwo_count(m)) return false;
  std::vector<int> before(m, 0);
  for (int k = 0; k < m; ++k)
    for (int l = k + 1; l < m; ++l) {
      if (row[pwo_column(m, k, l)]) ++before[l];
      else ++before[k];
    }
  std::vector<int> labels(m, -1);
  for (int c = 0; c < m; ++c) {
    if (labels[before[c]] != -1) return false;
    labels[before[c]] = c;
  }
  out = Permutation(std::move(labels));
  return pwo_row(out) == row;
}

/// N runs, each a full ordering of the same m components. Optional process
/// levels ride alongside the orderings (one vector per run, or none at all).
struct Design {
  int m = 0;
  std::vector<Permutation> runs;
  std::vector<std::vector<int>> levels;

  Design() = default;
  Design(int m_, std::vector<Permutation> runs_, std::vector<std::vector<int>> levels_ = {})
      : m(m_), runs(std::move(runs_)), levels(std::move(levels_)) {
    validate();
  }

  int size() const { return static_cast<int>(runs.size()); }
  bool has_process() const { return !levels.empty(); }
  int process_count() const { return levels.empty() ? 0 : static_cast<int>(levels.front().size()); }

  void validate() const {
    if (m < 2) throw ValidationError("design needs m >= 2");
    for (const auto& r : runs)
      if (r.size() != m) throw ValidationError("every run must order exactly m components");
    if (!levels.empty()) {
      if (levels.size() != runs.size())
        throw ValidationError("process levels must be given for every run");
      for (const auto& l : levels)
        if (l.size() != levels.front().size())
          throw ValidationError("every run needs the same number of process levels");
    }
  }

  bool operator==(const Design&) const = default;
};

/// N x m' matrix of PWO levels, columns in (k,l) lexicographic order.
struct PwoMatrix {
  int m = 0;
  int m_prime = 0;
  std::vector<std::vector<std::uint8_t>> rows;

  int size() const { return static_cast<int>(rows.size()); }
  std::uint8_t operator()(int i, int j) const { return rows[i][j]; }
};

inline PwoMatrix expand(const Design& d) {
  PwoMatrix p{d.m, pwo_count(d.m), {}};
  p.rows.reserve(d.runs.size());
  for (const auto& r : d.runs) p.rows.push_back(pwo_row(r));
  return p;
}

/// All m! orderings in lexicographic order.
inline Design full_design(int m, int max_m = kDefaultMaxComponents) {
  if (m < 2 || m > max_m)
    throw ValidationError("m=" + std::to_string(m) + " outside supported range 2.." +
                          std::to_string(max_m));
  std::vector<int> v(m);
  std::iota(v.begin(), v.end(), 0);
  std::vector<Permutation> runs;
  runs.reserve(factorial(m));
  do runs.emplace_back(v);
  while (std::next_permutation(v.begin(), v.end()));
  return Design(m, std::move(runs));
}

/// Design from 1-based lexicographic row indices.
inline Design design_from_rows(int m, const std::vector<std::uint64_t>& rows) {
  std::vector<Permutation> runs;
  runs.reserve(rows.size());
  for (auto r : rows) runs.push_back(unrank(m, r));
  return Design(m, std::move(runs));
}

inline std::vector<std::uint64_t> rows_of(const Design& d) {
  std::vector<std::uint64_t> out;
  out.reserve(d.runs.size());
  for (const auto& r : d.runs) out.push_back(rank(r));
  return out;
}

/// Drops component c from one ordering and closes the label gap.
inline Permutation drop_component(const Permutation& p, int c) {
  std::vector<int> v;
  v.reserve(p.size() - 1);
  for (int x : p.labels())
    if (x != c) v.push_back(x > c ? x - 1 : x);
  return Permutation(std::move(v));
}

/// Each run loses component c; surviving labels are renumbered 0..m-2 keeping order.
inline Design leave_one_out(const Design& d, int c) {
  if (d.m < 3) throw ValidationError("leave-one-out needs m >= 3");
  if (c < 0 || c >= d.m)
    throw ValidationError("component " + std::to_string(c) + " outside 0.." + std::to_string(d.m - 1));
  std::vector<Permutation> runs;
  runs.reserve(d.runs.size());
  for (const auto& r : d.runs) runs.push_back(drop_component(r, c));
  return Design(d.m - 1, std::move(runs), d.levels);
}

/// Reverses every ordering (swaps all PWO levels).
inline Design reversed(const Design& d) {
  Design out = d;
  for (auto& r : out.runs) r = r.reversed();
  return out;
}

inline Design relabeled(const Design& d, const std::vector<int>& sigma) {
  Design out = d;
  for (auto& r : out.runs) r = r.relabeled(sigma);
  return out;
}

}  // namespace oofa
