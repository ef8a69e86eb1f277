#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

namespace oofa {

/// Expected level-combination counts for one tuple of extended columns,
/// tallied over a candidate set. Cells are indexed mixed-radix with the first
/// column most significant. Zero cells are structural zeros.
struct ReferenceTable {
  std::vector<int> columns;
  std::vector<int> levels;
  std::vector<std::int64_t> counts;
  std::int64_t total = 0;

  int cell_count() const { return static_cast<int>(counts.size()); }
  bool structural_zero(int cell) const { return counts[cell] == 0; }

  template <class Row>
  int cell_of(const Row& extended_row) const {
    int cell = 0;
    for (std::size_t k = 0; k < columns.size(); ++k)
      cell = cell * levels[k] + static_cast<int>(extended_row[columns[k]]);
    return cell;
  }
};

/// Frequency pattern of a table: its sorted cell counts. Two tables with equal
/// patterns are wt-isomorphic.
struct TableType {
  std::vector<std::int64_t> signature;

  static TableType of(std::vector<std::int64_t> counts) {
    std::sort(counts.begin(), counts.end());
    return {std::move(counts)};
  }
  auto operator<=>(const TableType&) const = default;
};

/// All t-subsets of {0..n-1} in lexicographic order.
inline std::vector<std::vector<int>> combinations(int n, int t) {
  std::vector<std::vector<int>> out;
  if (t <= 0 || t > n) return out;
  std::vector<int> idx(t);
  for (int i = 0; i < t; ++i) idx[i] = i;
  while (true) {
    out.push_back(idx);
    int i = t - 1;
    while (i >= 0 && idx[i] == n - t + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int j = i + 1; j < t; ++j) idx[j] = idx[j - 1] + 1;
  }
  return out;
}

}  // namespace oofa
