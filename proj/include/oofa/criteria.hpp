#pragma once

// Goodness measures of an order-of-addition design relative to a candidate set.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "oofa/linalg.hpp"
#include "oofa/reference.hpp"

namespace oofa {

/// How chi-square treats sparse cells. `literal` skips only structural zeros
/// (E = 0). `sparse` additionally skips a cell that is unobserved while its
/// expected count N*E/M is below one; this is the convention behind the
/// published strength-3 values for 12-run designs. Balance (chi^2 = 0) is the
/// same under both.
enum class ChiSquareRule { sparse, literal };

struct TupleChi2 {
  double value = 0.0;
  bool balanced = true;
};

struct Chi2Summary {
  double ave = 0.0;
  double max = 0.0;
  double fo = 1.0;
  int tuples = 0;
};

namespace detail {

inline std::vector<std::vector<std::uint8_t>> extended_rows(const Design& d, const CandidateSet& cands) {
  static const std::vector<int> none;
  if (d.m != cands.m()) throw ValidationError("design has m=" + std::to_string(d.m) + " but candidate set has m=" + std::to_string(cands.m()));
  if (d.process_count() != cands.process_count())
    throw ValidationError("design carries " + std::to_string(d.process_count()) + " process columns, candidate set expects " + std::to_string(cands.process_count()));
  const auto& ref = cands.reference();
  std::vector<std::vector<std::uint8_t>> rows;
  rows.reserve(d.runs.size());
  for (int i = 0; i < d.size(); ++i) {
    const auto& lv = d.has_process() ? d.levels[i] : none;
    if (!ref.contains(d.runs[i], lv))
      throw ValidationError("run " + std::to_string(i + 1) + " (row " + std::to_string(rank(d.runs[i])) + ") is not in the candidate set");
    rows.push_back(ref.extend(d.runs[i], lv));
  }
  return rows;
}

inline TupleChi2 chi2_from_counts(const ReferenceTable& tab, const std::vector<std::int64_t>& observed,
                                  std::int64_t n_runs, ChiSquareRule rule) {
  TupleChi2 r;
  const double scale = static_cast<double>(n_runs) / static_cast<double>(tab.total);
  for (int cell = 0; cell < tab.cell_count(); ++cell) {
    const std::int64_t e = tab.counts[cell];
    const std::int64_t n = observed[cell];
    if (n * tab.total != n_runs * e) r.balanced = false;
    if (e == 0) continue;
    if (rule == ChiSquareRule::sparse && n == 0 && n_runs * e < tab.total) continue;
    const double expect = scale * static_cast<double>(e);
    const double diff = static_cast<double>(n) - expect;
    r.value += diff * diff / expect;
  }
  if (r.balanced) r.value = 0.0;
  return r;
}

inline TupleChi2 chi2_rows(const std::vector<std::vector<std::uint8_t>>& rows, const ReferenceTable& tab,
                           ChiSquareRule rule) {
  std::vector<std::int64_t> observed(tab.cell_count(), 0);
  for (const auto& r : rows) ++observed[tab.cell_of(r)];
  return chi2_from_counts(tab, observed, static_cast<std::int64_t>(rows.size()), rule);
}

inline Chi2Summary summarize(const std::vector<TupleChi2>& v, const std::vector<bool>* keep = nullptr) {
  Chi2Summary s;
  int zeros = 0;
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (keep && !(*keep)[i]) continue;
    ++s.tuples;
    sum += v[i].value;
    s.max = std::max(s.max, v[i].value);
    if (v[i].balanced) ++zeros;
  }
  if (s.tuples > 0) {
    s.ave = sum / s.tuples;
    s.fo = static_cast<double>(zeros) / s.tuples;
  }
  return s;
}

inline bool column_touches(int m, int col, int component) {
  if (col >= pwo_count(m)) return false;
  auto [k, l] = pwo_pair(m, col);
  return k == component || l == component;
}

}  // namespace detail

/// Chi-square deviation of one column tuple from its reference frequencies.
inline double chi2_tuple(const Design& d, const CandidateSet& cands, const std::vector<int>& cols,
                         ChiSquareRule rule = ChiSquareRule::sparse) {
  const auto rows = detail::extended_rows(d, cands);
  return detail::chi2_rows(rows, reference_counts(cands, cols), rule).value;
}

/// Per-tuple chi-square over every t-tuple, in the order of cands.tables(t).
inline std::vector<TupleChi2> chi2_all(const Design& d, const CandidateSet& cands, int t,
                                       ChiSquareRule rule = ChiSquareRule::sparse) {
  const auto rows = detail::extended_rows(d, cands);
  std::vector<TupleChi2> out;
  const auto& tabs = cands.reference().tables(t);
  out.reserve(tabs.size());
  for (const auto& tab : tabs) out.push_back(detail::chi2_rows(rows, tab, rule));
  return out;
}

/// Average, maximum and fraction-zero of chi-square over all t-tuples.
inline Chi2Summary chi2_summary(const Design& d, const CandidateSet& cands, int t,
                                ChiSquareRule rule = ChiSquareRule::sparse) {
  if (t < 2 || t > 3) throw ValidationError("strength must be 2 or 3");
  return detail::summarize(chi2_all(d, cands, t, rule));
}

struct LooSummary {
  double ave = 0.0;
  double fo = 1.0;
};

namespace detail {
// Leave-one-out from precomputed tuple values: the reference frequencies of a
// projected candidate set are the parent's tables on tuples avoiding the
// dropped component.
inline LooSummary loo_from_tuples(int m, const std::vector<ReferenceTable>& tabs,
                                  const std::vector<TupleChi2>& vals) {
  LooSummary s{0.0, 0.0};
  for (int c = 0; c < m; ++c) {
    std::vector<bool> keep(tabs.size());
    for (std::size_t i = 0; i < tabs.size(); ++i) {
      bool touches = false;
      for (int col : tabs[i].columns) touches = touches || column_touches(m, col, c);
      keep[i] = !touches;
    }
    const auto sub = summarize(vals, &keep);
    s.ave += sub.ave;
    s.fo += sub.fo;
  }
  s.ave /= m;
  s.fo /= m;
  return s;
}
}  // namespace detail

/// Mean over the m leave-one-component-out designs of chi2_ave,t and FO_t.
inline LooSummary loo_summary(const Design& d, const CandidateSet& cands, int t,
                              ChiSquareRule rule = ChiSquareRule::sparse) {
  if (d.m < 3) throw ValidationError("leave-one-out needs m >= 3");
  if (t < 2 || t > 3) throw ValidationError("strength must be 2 or 3");
  return detail::loo_from_tuples(d.m, cands.reference().tables(t), chi2_all(d, cands, t, rule));
}

/// D-efficiency of the main-effects model relative to the reference pool:
/// [det(X'X/N) / det(X_C'X_C/M)]^(1/p). Zero when X'X is singular.
inline double d_efficiency(const Design& d, const CandidateSet& cands) {
  const auto rows = detail::extended_rows(d, cands);
  if (rows.empty()) return 0.0;
  const auto& ref = cands.reference();
  const auto x = model_matrix(rows, ref.column_levels());
  const Eigen::MatrixXd info = x.transpose() * x / static_cast<double>(rows.size());
  const auto ld = logdet_psd(info);
  if (!ld) return 0.0;
  const Eigen::MatrixXd full = reference_information(cands) / static_cast<double>(ref.size());
  const auto ld_full = logdet_psd(full);
  if (!ld_full) return 0.0;
  return std::exp((*ld - *ld_full) / static_cast<double>(info.rows()));
}

/// Mean variance-inflation factor of the PWO main effects (process columns,
/// when present, stay in the model). nullopt when the model is singular.
inline std::optional<double> mean_vif(const Design& d) {
  const int mp = pwo_count(d.m);
  std::vector<int> lv(mp, 2);
  std::vector<std::vector<std::uint8_t>> rows;
  for (int i = 0; i < d.size(); ++i) {
    auto r = pwo_row(d.runs[i]);
    if (d.has_process()) {
      for (int v : d.levels[i]) r.push_back(static_cast<std::uint8_t>(v));
    }
    rows.push_back(std::move(r));
  }
  if (d.has_process()) {
    for (int k = 0; k < d.process_count(); ++k) {
      int hi = 1;
      for (const auto& l : d.levels) hi = std::max(hi, l[k]);
      lv.push_back(hi + 1);
    }
  }
  const Eigen::MatrixXd x = model_matrix(rows, lv).rightCols(model_width(lv) - 1);
  if (x.rows() < 2) return std::nullopt;
  const Eigen::MatrixXd xc = x.rowwise() - x.colwise().mean();
  const Eigen::MatrixXd s = xc.transpose() * xc;
  for (Eigen::Index j = 0; j < s.rows(); ++j)
    if (!(s(j, j) > 0.0)) return std::nullopt;
  const Eigen::VectorXd scale = s.diagonal().cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd r = scale.asDiagonal() * s * scale.asDiagonal();
  if (!logdet_psd(r)) return std::nullopt;
  const Eigen::MatrixXd rinv = r.ldlt().solve(Eigen::MatrixXd::Identity(r.rows(), r.cols()));
  double sum = 0.0;
  for (int j = 0; j < mp; ++j) sum += rinv(j, j);
  return sum / mp;
}

/// Power-moment similarity of PWO rows: K_s = N^-2 sum_{i,j} delta_ij^s over all
/// ordered pairs (the diagonal included), Sim_s = K_s^(1/s); delta_ij counts
/// coinciding PWO levels.
inline std::vector<double> moments(const PwoMatrix& p, int s_max) {
  if (s_max < 1) throw ValidationError("s_max must be at least 1");
  if (p.size() < 2) throw ValidationError("moments need at least two runs");
  const int n = p.size();
  std::vector<double> k(s_max, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      int delta = 0;
      for (int c = 0; c < p.m_prime; ++c) delta += p(i, c) == p(j, c);
      double pw = 1.0;
      for (int s = 0; s < s_max; ++s) {
        pw *= delta;
        k[s] += pw;
      }
    }
  std::vector<double> sim(s_max);
  for (int s = 0; s < s_max; ++s) sim[s] = std::pow(k[s] / (static_cast<double>(n) * n), 1.0 / (s + 1));
  return sim;
}

/// f[k][l]: number of runs adding component k at stage l.
inline std::vector<std::vector<int>> stage_counts(const Design& d) {
  std::vector<std::vector<int>> f(d.m, std::vector<int>(d.m, 0));
  for (const auto& r : d.runs)
    for (int l = 0; l < d.m; ++l) ++f[r[l]][l];
  return f;
}

/// Root-mean dispersion of the stage counts about each component's mean,
/// [(1/m^2) sum_k sum_l (f_kl - mean_k)^2]^(1/2).
inline double rmv_ord_raw(const Design& d) {
  const auto f = stage_counts(d);
  double ss = 0.0;
  for (const auto& row : f) {
    double mean = 0.0;
    for (int v : row) mean += v;
    mean /= d.m;
    for (int v : row) ss += (v - mean) * (v - mean);
  }
  return std::sqrt(ss / (static_cast<double>(d.m) * d.m));
}

/// Order-of-addition imbalance on the published scale: the raw dispersion times
/// sqrt((m+1)/(m-1)).
inline double rmv_ord(const Design& d) {
  return rmv_ord_raw(d) * std::sqrt(static_cast<double>(d.m + 1) / (d.m - 1));
}

struct CriteriaReport {
  int m = 0;
  int n_runs = 0;
  double chi2_ave_2 = 0, chi2_max_2 = 0, fo_2 = 1;
  double chi2_ave_3 = 0, chi2_max_3 = 0, fo_3 = 1;
  double chi2_ave_2_loo = 0, fo_2_loo = 1, chi2_ave_3_loo = 0, fo_3_loo = 1;
  double d_eff = 0;
  std::optional<double> mean_vif;
  std::vector<double> sim;
  double rmv_ord = 0;
  bool is_oofa_oa_2 = false, is_oofa_oa_3 = false;
};

struct EvaluateOptions {
  ChiSquareRule rule = ChiSquareRule::sparse;
  int s_max = 3;
};

/// Every scalar measure of a design against a candidate set.
inline CriteriaReport evaluate(const Design& d, const CandidateSet& cands, const EvaluateOptions& opt = {}) {
  if (d.size() == 0) throw ValidationError("design has no runs");
  CriteriaReport r;
  r.m = d.m;
  r.n_runs = d.size();
  const auto& ref = cands.reference();
  for (int t : {2, 3}) {
    const auto vals = chi2_all(d, cands, t, opt.rule);
    const auto s = detail::summarize(vals);
    const bool oa = std::all_of(vals.begin(), vals.end(), [](const TupleChi2& v) { return v.balanced; });
    LooSummary loo;
    if (d.m >= 3) loo = detail::loo_from_tuples(d.m, ref.tables(t), vals);
    if (t == 2) {
      r.chi2_ave_2 = s.ave, r.chi2_max_2 = s.max, r.fo_2 = s.fo, r.is_oofa_oa_2 = oa;
      r.chi2_ave_2_loo = loo.ave, r.fo_2_loo = loo.fo;
    } else {
      r.chi2_ave_3 = s.ave, r.chi2_max_3 = s.max, r.fo_3 = s.fo, r.is_oofa_oa_3 = oa;
      r.chi2_ave_3_loo = loo.ave, r.fo_3_loo = loo.fo;
    }
  }
  r.d_eff = d_efficiency(d, cands);
  r.mean_vif = mean_vif(d);
  if (d.size() >= 2) r.sim = moments(expand(d), opt.s_max);
  r.rmv_ord = rmv_ord(d);
  return r;
}

// ---------------------------------------------------------------------------
// Multi-criteria ranking

struct RankCriterion {
  std::string name;
  bool maximize = false;
};

/// Named scalar from a report: chi2_ave_2, fo_3_loo, sim_3, rmv_ord, d_eff, ...
inline double criterion_value(const CriteriaReport& r, const std::string& name) {
  static const std::map<std::string, double CriteriaReport::*> fields = {
      {"chi2_ave_2", &CriteriaReport::chi2_ave_2},         {"chi2_max_2", &CriteriaReport::chi2_max_2},
      {"fo_2", &CriteriaReport::fo_2},                     {"chi2_ave_3", &CriteriaReport::chi2_ave_3},
      {"chi2_max_3", &CriteriaReport::chi2_max_3},         {"fo_3", &CriteriaReport::fo_3},
      {"chi2_ave_2_loo", &CriteriaReport::chi2_ave_2_loo}, {"fo_2_loo", &CriteriaReport::fo_2_loo},
      {"chi2_ave_3_loo", &CriteriaReport::chi2_ave_3_loo}, {"fo_3_loo", &CriteriaReport::fo_3_loo},
      {"d_eff", &CriteriaReport::d_eff},                   {"rmv_ord", &CriteriaReport::rmv_ord},
  };
  if (auto it = fields.find(name); it != fields.end()) return r.*(it->second);
  if (name == "mean_vif") return r.mean_vif.value_or(std::numeric_limits<double>::infinity());
  if (name.rfind("sim_", 0) == 0) {
    const int s = std::stoi(name.substr(4));
    if (s < 1 || s > static_cast<int>(r.sim.size())) throw ValidationError("report has no " + name);
    return r.sim[s - 1];
  }
  throw ValidationError("unknown criterion '" + name + "'");
}

/// The five secondary criteria used to order strength-2 orthogonal designs.
inline std::vector<RankCriterion> default_rank_criteria() {
  return {{"fo_3", true}, {"chi2_ave_3", false}, {"fo_3_loo", true}, {"chi2_ave_3_loo", false}, {"sim_3", false}};
}

struct RankedRow {
  std::string id;
  std::vector<double> values;
  std::vector<int> ranks;
  double average_rank = 0;
  double final_rank = 0;
};

struct RankedTable {
  std::vector<RankCriterion> criteria;
  std::vector<RankedRow> rows;  // best first
  std::vector<double> worst;    // worst value per criterion over the ranked population
};

namespace detail {
inline bool id_less(const std::string& a, const std::string& b) {
  auto numeric = [](const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
  };
  if (numeric(a) && numeric(b) && a.size() != b.size()) return a.size() < b.size();
  return a < b;
}
}  // namespace detail

/// Ranks designs on each criterion (ties share the lowest rank), averages the
/// ranks, and orders by average rank with ties broken by id. Ranks are counted
/// within `population` when one is given (it should contain the designs being
/// ranked); otherwise within the designs themselves. The final rank gives tied
/// averages the mean of the positions they span.
inline RankedTable rank_designs(const std::vector<std::pair<std::string, CriteriaReport>>& designs,
                                const std::vector<RankCriterion>& criteria,
                                const std::vector<CriteriaReport>& population = {}) {
  if (designs.empty()) throw ValidationError("nothing to rank");
  if (criteria.empty()) throw ValidationError("no ranking criteria given");
  std::vector<const CriteriaReport*> pool;
  if (population.empty())
    for (const auto& d : designs) pool.push_back(&d.second);
  else
    for (const auto& r : population) pool.push_back(&r);

  RankedTable out;
  out.criteria = criteria;
  for (const auto& c : criteria) {
    double w = criterion_value(*pool.front(), c.name);
    for (const auto* r : pool) {
      const double v = criterion_value(*r, c.name);
      w = c.maximize ? std::min(w, v) : std::max(w, v);
    }
    out.worst.push_back(w);
  }
  for (const auto& [id, rep] : designs) {
    RankedRow row;
    row.id = id;
    double sum = 0;
    for (const auto& c : criteria) {
      const double v = criterion_value(rep, c.name);
      int better = 0;
      for (const auto* r : pool) {
        const double u = criterion_value(*r, c.name);
        if (c.maximize ? u > v : u < v) ++better;
      }
      row.values.push_back(v);
      row.ranks.push_back(better + 1);
      sum += better + 1;
    }
    row.average_rank = sum / static_cast<double>(criteria.size());
    out.rows.push_back(std::move(row));
  }
  std::stable_sort(out.rows.begin(), out.rows.end(), [](const RankedRow& a, const RankedRow& b) {
    if (a.average_rank != b.average_rank) return a.average_rank < b.average_rank;
    return detail::id_less(a.id, b.id);
  });
  for (std::size_t i = 0; i < out.rows.size();) {
    std::size_t j = i;
    while (j < out.rows.size() && out.rows[j].average_rank == out.rows[i].average_rank) ++j;
    const double mid = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) out.rows[k].final_rank = mid;
    i = j;
  }
  return out;
}

}  // namespace oofa
