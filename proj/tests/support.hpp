#pragma once

// Fixture loading and brute-force oracles shared by the unit tests. The
// oracles work from explicit enumerations and dense linear algebra so they do
// not share code paths with the library routines they check.

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "oofa/io.hpp"
#include "oofa/reference.hpp"

namespace oofa::test {

inline std::string fixture_path(const std::string& name) { return std::string(OOFA_FIXTURES) + "/" + name; }

inline Design fixture_design(const std::string& name) {
  const auto rf = load_rows_file(fixture_path(name + ".rows"));
  return design_from_rows(rf.m, rf.rows);
}

inline const CandidateSet& full_candidates(int m) {
  static std::map<int, CandidateSet> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(m);
  if (it == cache.end()) it = cache.emplace(m, build_candidates(m)).first;
  return it->second;
}

/// All orderings of 0..m-1 in lexicographic order, via std::next_permutation.
inline std::vector<std::vector<int>> all_orders(int m) {
  std::vector<int> v(m);
  std::iota(v.begin(), v.end(), 0);
  std::vector<std::vector<int>> out;
  do out.push_back(v);
  while (std::next_permutation(v.begin(), v.end()));
  return out;
}

/// F_kl for an ordering given as a label sequence.
inline int before(const std::vector<int>& order, int k, int l) {
  const auto pk = std::find(order.begin(), order.end(), k) - order.begin();
  const auto pl = std::find(order.begin(), order.end(), l) - order.begin();
  return pk < pl ? 1 : 0;
}

inline std::vector<std::pair<int, int>> pairs_of(int m) {
  std::vector<std::pair<int, int>> out;
  for (int k = 0; k < m; ++k)
    for (int l = k + 1; l < m; ++l) out.emplace_back(k, l);
  return out;
}

inline std::vector<std::vector<int>> orders_of(const Design& d) {
  std::vector<std::vector<int>> out;
  for (const auto& r : d.runs) out.push_back(r.labels());
  return out;
}

/// Counts of each 0/1 level combination of the listed PWO pairs.
inline std::map<std::vector<int>, long> joint_counts(const std::vector<std::vector<int>>& orders,
                                                     const std::vector<std::pair<int, int>>& cols) {
  std::map<std::vector<int>, long> out;
  for (const auto& o : orders) {
    std::vector<int> key;
    for (auto [k, l] : cols) key.push_back(before(o, k, l));
    ++out[key];
  }
  return out;
}

/// chi2 of one PWO tuple of a design against the full m! array. `sparse`
/// additionally skips unobserved cells whose scaled expectation is below one.
inline double oracle_chi2(const std::vector<std::vector<int>>& design, const std::vector<std::vector<int>>& full,
                          const std::vector<std::pair<int, int>>& cols, bool sparse) {
  const auto obs = joint_counts(design, cols);
  const auto ref = joint_counts(full, cols);
  const double n = static_cast<double>(design.size()), big = static_cast<double>(full.size());
  double s = 0;
  for (const auto& [cell, e] : ref) {
    const auto it = obs.find(cell);
    const double o = it == obs.end() ? 0.0 : static_cast<double>(it->second);
    const double expect = n * static_cast<double>(e) / big;
    if (sparse && o == 0 && expect < 1.0) continue;
    s += (o - expect) * (o - expect) / expect;
  }
  return s;
}

inline double oracle_chi2_ave(const Design& d, int t, bool sparse) {
  const auto full = all_orders(d.m);
  const auto design = orders_of(d);
  const auto cols = pairs_of(d.m);
  double s = 0;
  int count = 0;
  for (const auto& c : combinations(static_cast<int>(cols.size()), t)) {
    std::vector<std::pair<int, int>> sel;
    for (int k : c) sel.push_back(cols[k]);
    s += oracle_chi2(design, full, sel, sparse);
    ++count;
  }
  return s / count;
}

/// Dense [1 | P] matrix straight from the orderings.
inline Eigen::MatrixXd oracle_model(const std::vector<std::vector<int>>& orders, int m) {
  const auto cols = pairs_of(m);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(orders.size()), static_cast<Eigen::Index>(cols.size()) + 1);
  for (std::size_t i = 0; i < orders.size(); ++i) {
    x(i, 0) = 1;
    for (std::size_t c = 0; c < cols.size(); ++c) x(i, c + 1) = before(orders[i], cols[c].first, cols[c].second);
  }
  return x;
}

inline double oracle_d_eff(const Design& d) {
  const auto x = oracle_model(orders_of(d), d.m);
  const auto xf = oracle_model(all_orders(d.m), d.m);
  const double p = static_cast<double>(x.cols());
  const double num = (x.transpose() * x / static_cast<double>(x.rows())).determinant();
  const double den = (xf.transpose() * xf / static_cast<double>(xf.rows())).determinant();
  if (num <= 0) return 0;
  return std::pow(num / den, 1.0 / p);
}

/// Mean VIF by regressing each PWO column on the others.
inline double oracle_mean_vif(const Design& d) {
  const auto x = oracle_model(orders_of(d), d.m);
  const int p = static_cast<int>(x.cols()) - 1;
  double s = 0;
  for (int j = 1; j <= p; ++j) {
    Eigen::MatrixXd others(x.rows(), p);
    int k = 0;
    for (int c = 0; c <= p; ++c)
      if (c != j) others.col(k++) = x.col(c);
    const Eigen::VectorXd y = x.col(j);
    const Eigen::VectorXd fit = others * others.colPivHouseholderQr().solve(y);
    const double rss = (y - fit).squaredNorm();
    const double tss = (y.array() - y.mean()).square().sum();
    s += tss / rss;
  }
  return s / p;
}

/// Sim_s with the N^-2 normalization over all ordered run pairs.
inline double oracle_sim(const Design& d, int s) {
  const auto o = orders_of(d);
  const auto cols = pairs_of(d.m);
  double k = 0;
  for (const auto& a : o)
    for (const auto& b : o) {
      int delta = 0;
      for (auto [u, v] : cols) delta += before(a, u, v) == before(b, u, v);
      k += std::pow(delta, s);
    }
  k /= static_cast<double>(o.size() * o.size());
  return std::pow(k, 1.0 / s);
}

inline Design random_design(int m, int n, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::uint64_t> pick(1, factorial(m));
  std::vector<std::uint64_t> rows;
  for (int i = 0; i < n; ++i) rows.push_back(pick(rng));
  return design_from_rows(m, rows);
}

/// Random distinct rows.
inline Design random_subset_design(int m, int n, std::mt19937_64& rng) {
  std::vector<std::uint64_t> all(factorial(m));
  std::iota(all.begin(), all.end(), 1);
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(n);
  return design_from_rows(m, all);
}

inline std::vector<int> random_sigma(int m, std::mt19937_64& rng) {
  std::vector<int> s(m);
  std::iota(s.begin(), s.end(), 0);
  std::shuffle(s.begin(), s.end(), rng);
  return s;
}

}  // namespace oofa::test
