#pragma once

// wt-isomorphism signatures and exact d-isomorphism by canonical form.
// Both look at the orderings only; process levels are ignored.

#include <bit>
#include <cstdio>
#include <map>
#include <string>

#include "oofa/perm.hpp"
#include "oofa/table.hpp"

namespace oofa {

inline constexpr int kMaxIsomorphM = 7;

/// Multisets of observed table types over all PWO pairs and triples.
struct WtSignature {
  std::map<TableType, int> pair_types;
  std::map<TableType, int> triple_types;

  bool operator==(const WtSignature&) const = default;
  auto operator<=>(const WtSignature&) const = default;
};

namespace detail {
inline std::map<TableType, int> observed_types(const PwoMatrix& p, int t) {
  std::map<TableType, int> out;
  for (const auto& cols : combinations(p.m_prime, t)) {
    std::vector<std::int64_t> counts(std::size_t{1} << t, 0);
    for (const auto& row : p.rows) {
      int cell = 0;
      for (int c : cols) cell = cell * 2 + row[c];
      ++counts[cell];
    }
    ++out[TableType::of(std::move(counts))];
  }
  return out;
}

inline void check_isomorph_size(int m) {
  if (m > kMaxIsomorphM)
    throw ValidationError("isomorphism checks support m <= " + std::to_string(kMaxIsomorphM));
}

inline void check_same_shape(const Design& a, const Design& b) {
  if (a.m != b.m || a.size() != b.size())
    throw ValidationError("designs differ in shape: m=" + std::to_string(a.m) + " N=" + std::to_string(a.size()) +
                          " vs m=" + std::to_string(b.m) + " N=" + std::to_string(b.size()));
}
}  // namespace detail

inline WtSignature wt_signature(const Design& d) {
  detail::check_isomorph_size(d.m);
  const auto p = expand(d);
  return {detail::observed_types(p, 2), detail::observed_types(p, 3)};
}

/// Stable 64-bit FNV-1a digest of a signature, hex encoded.
inline std::string signature_digest(const WtSignature& s) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](std::int64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= static_cast<std::uint64_t>((v >> (8 * b)) & 0xff);
      h *= 1099511628211ull;
    }
  };
  for (const auto* part : {&s.pair_types, &s.triple_types}) {
    mix(-1);
    for (const auto& [type, freq] : *part) {
      mix(static_cast<std::int64_t>(type.signature.size()));
      for (auto c : type.signature) mix(c);
      mix(freq);
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline bool wt_isomorphic(const Design& a, const Design& b) {
  detail::check_same_shape(a, b);
  return wt_signature(a) == wt_signature(b);
}

/// Lexicographically smallest row-sorted design (rows as 1-based lex indices)
/// over all component relabelings, with and without reversal.
inline std::vector<std::uint64_t> canonical_form(const Design& d) {
  detail::check_isomorph_size(d.m);
  std::vector<int> sigma(d.m);
  std::iota(sigma.begin(), sigma.end(), 0);
  std::vector<std::uint64_t> best, cur(d.runs.size());
  std::vector<int> labels(d.m);
  std::vector<std::uint64_t> fact(d.m);
  for (int k = 0; k < d.m; ++k) fact[k] = factorial(k);
  do {
    for (int rev = 0; rev < 2; ++rev) {
      for (std::size_t i = 0; i < d.runs.size(); ++i) {
        for (int k = 0; k < d.m; ++k) {
          const int src = rev ? d.m - 1 - k : k;
          labels[k] = sigma[d.runs[i][src]];
        }
        // inline lex rank; labels are a permutation by construction
        std::uint64_t r = 0;
        unsigned used = 0;
        for (int k = 0; k < d.m; ++k) {
          const unsigned below = used & ((1u << labels[k]) - 1u);
          const int smaller = labels[k] - std::popcount(below);
          r += static_cast<std::uint64_t>(smaller) * fact[d.m - 1 - k];
          used |= 1u << labels[k];
        }
        cur[i] = r + 1;
      }
      std::sort(cur.begin(), cur.end());
      if (best.empty() || cur < best) best = cur;
    }
  } while (std::next_permutation(sigma.begin(), sigma.end()));
  return best;
}

inline bool d_isomorphic(const Design& a, const Design& b) {
  detail::check_same_shape(a, b);
  return canonical_form(a) == canonical_form(b);
}

}  // namespace oofa
