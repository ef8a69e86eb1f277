#pragma once

// Point-exchange searches over a candidate pool: Fedorov exchange on the
// D-criterion and the same exchange skeleton on chi2_ave,2, run from many
// seeded random starts.

#include <atomic>
#include <cstdlib>
#include <memory>
#include <random>
#include <set>
#include <thread>

#include "oofa/criteria.hpp"
#include "oofa/isomorph.hpp"

namespace oofa {

/// Seedable generator with a sequence fixed by the C++ standard. Bounded draws
/// use rejection so results do not depend on the library's distributions.
class Rng {
 public:
  static constexpr const char* name = "mt19937_64/splitmix64";

  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  static std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do x = engine_();
    while (x >= limit);
    return x % n;
  }

  /// Uniform real in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

enum class Objective { d_opt, chi2_ave_2 };
enum class Keep { best_only, all_optima };

inline constexpr int kSingularRetries = 50;
inline constexpr double kRidge = 1e-8;

struct SearchConfig {
  int n_runs = 0;
  Objective criterion = Objective::d_opt;
  int starts = 1;
  std::uint64_t seed = 0;
  int max_passes = 1000;
  std::shared_ptr<const CandidateSet> candidate;
  Keep keep = Keep::best_only;
  int threads = 0;  // 0: OOFA_THREADS, else hardware concurrency
  ChiSquareRule rule = ChiSquareRule::sparse;
  bool evaluate_reports = true;
};

struct StartTrace {
  int start = 0;
  double objective = 0;  // log det(X'X) for d_opt, chi2_ave,2 otherwise
  int passes = 0;
  int swaps = 0;
  int retries = 0;
  bool degenerate = false;
  bool monotone = true;      // every accepted swap improved the objective
  double max_drift = 0;      // incremental vs from-scratch objective, relative
};

struct FoundDesign {
  Design design;
  CriteriaReport report;
  double objective = 0;
  bool duplicate_runs = false;
  std::string wt_digest;
};

struct SearchResult {
  std::vector<FoundDesign> designs;
  int distinct_wt_classes = 0;
  std::vector<StartTrace> trace;
  std::uint64_t seed = 0;
  std::string generator = Rng::name;
  int optimal_starts = 0;
};

inline int worker_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("OOFA_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace detail {

inline std::vector<int> random_subset(Rng& rng, int pool, int n) {
  std::vector<int> idx(pool);
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < n; ++i) {
    const int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(pool - i)));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(n);
  return idx;
}

struct StartOutcome {
  std::vector<int> rows;
  StartTrace trace;
};

/// Fedorov exchange from one start. Each pass performs the single best
/// (design point, candidate) swap by the rank-two determinant update
/// det(M - x_i x_i' + x_j x_j') / det(M) = (1 + d_j)(1 - d_i) + d_ij^2.
/// A singular start is carried on M + eps*I until full rank is reached.
inline StartOutcome fedorov_start(const Eigen::MatrixXd& pool, int n, int max_passes, Rng& rng) {
  const int cands = static_cast<int>(pool.rows());
  const int p = static_cast<int>(pool.cols());
  StartOutcome out;
  for (int attempt = 0; attempt <= kSingularRetries; ++attempt) {
    out.trace = StartTrace{};
    out.trace.retries = attempt;
    out.rows = random_subset(rng, cands, n);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(p, p);
    for (int r : out.rows) m += pool.row(r).transpose() * pool.row(r);

    auto objective = [&](const Eigen::MatrixXd& info, bool& ridge) {
      auto ld = logdet_psd(info);
      ridge = !ld;
      if (ld) return *ld;
      return *logdet_psd(info + kRidge * Eigen::MatrixXd::Identity(p, p));
    };
    bool ridge = false;
    double current = objective(m, ridge);

    for (int pass = 0; pass < max_passes; ++pass) {
      const Eigen::MatrixXd work = ridge ? Eigen::MatrixXd(m + kRidge * Eigen::MatrixXd::Identity(p, p)) : m;
      const Eigen::MatrixXd inv = work.ldlt().solve(Eigen::MatrixXd::Identity(p, p));
      const Eigen::MatrixXd w = pool * inv;                              // C x p
      const Eigen::VectorXd dj = (w.array() * pool.array()).rowwise().sum();
      double best = 1.0 + 1e-12;
      int best_i = -1, best_j = -1;
      for (int i = 0; i < n; ++i) {
        const int a = out.rows[i];
        const double di = dj[a];
        const Eigen::VectorXd dij = w * pool.row(a).transpose();
        for (int j = 0; j < cands; ++j) {
          if (j == a) continue;
          const double delta = (1.0 + dj[j]) * (1.0 - di) + dij[j] * dij[j];
          if (delta > best) {
            best = delta;
            best_i = i;
            best_j = j;
          }
        }
      }
      out.trace.passes = pass + 1;
      if (best_i < 0) break;
      const int a = out.rows[best_i];
      m += pool.row(best_j).transpose() * pool.row(best_j) - pool.row(a).transpose() * pool.row(a);
      out.rows[best_i] = best_j;
      ++out.trace.swaps;
      const double predicted = current + std::log(best);
      const bool was_ridge = ridge;
      const double fresh = objective(m, ridge);
      if (was_ridge == ridge) {
        out.trace.max_drift = std::max(out.trace.max_drift, std::abs(std::expm1(predicted - fresh)));
        if (!(fresh > current)) out.trace.monotone = false;
      }
      current = fresh;
    }
    out.trace.objective = current;
    out.trace.degenerate = ridge;
    if (!ridge || n < p) break;
  }
  return out;
}

/// chi2_ave,2 exchange from one start, with cell counts updated incrementally.
struct Chi2Exchange {
  const std::vector<ReferenceTable>* tabs = nullptr;
  std::vector<std::vector<std::uint8_t>> cell;  // [candidate][tuple]
  ChiSquareRule rule = ChiSquareRule::sparse;
  int n = 0;

  double cell_term(const ReferenceTable& tab, int c, std::int64_t count) const {
    const std::int64_t e = tab.counts[c];
    if (e == 0) return 0.0;
    if (rule == ChiSquareRule::sparse && count == 0 && static_cast<std::int64_t>(n) * e < tab.total) return 0.0;
    const double expect = static_cast<double>(n) * static_cast<double>(e) / static_cast<double>(tab.total);
    const double diff = static_cast<double>(count) - expect;
    return diff * diff / expect;
  }

  double total(const std::vector<std::vector<std::int64_t>>& counts) const {
    double s = 0;
    for (std::size_t t = 0; t < tabs->size(); ++t)
      for (int c = 0; c < (*tabs)[t].cell_count(); ++c) s += cell_term((*tabs)[t], c, counts[t][c]);
    return s;
  }

  StartOutcome run(int max_passes, Rng& rng) const {
    const int cands = static_cast<int>(cell.size());
    const int nt = static_cast<int>(tabs->size());
    StartOutcome out;
    out.rows = random_subset(rng, cands, n);
    std::vector<std::vector<std::int64_t>> counts(nt);
    for (int t = 0; t < nt; ++t) counts[t].assign((*tabs)[t].cell_count(), 0);
    for (int r : out.rows)
      for (int t = 0; t < nt; ++t) ++counts[t][cell[r][t]];
    double current = total(counts);
    std::vector<std::vector<double>> rem(nt), add(nt);
    for (int pass = 0; pass < max_passes; ++pass) {
      for (int t = 0; t < nt; ++t) {
        const auto& tab = (*tabs)[t];
        rem[t].resize(tab.cell_count());
        add[t].resize(tab.cell_count());
        for (int c = 0; c < tab.cell_count(); ++c) {
          const double base = cell_term(tab, c, counts[t][c]);
          rem[t][c] = counts[t][c] > 0 ? cell_term(tab, c, counts[t][c] - 1) - base : 0.0;
          add[t][c] = cell_term(tab, c, counts[t][c] + 1) - base;
        }
      }
      double best = -1e-12;
      int best_i = -1, best_j = -1;
      for (int i = 0; i < n; ++i) {
        const auto& from = cell[out.rows[i]];
        for (int j = 0; j < cands; ++j) {
          if (j == out.rows[i]) continue;
          const auto& to = cell[j];
          double delta = 0;
          for (int t = 0; t < nt; ++t)
            if (from[t] != to[t]) delta += rem[t][from[t]] + add[t][to[t]];
          if (delta < best) {
            best = delta;
            best_i = i;
            best_j = j;
          }
        }
      }
      out.trace.passes = pass + 1;
      if (best_i < 0) break;
      const int a = out.rows[best_i];
      for (int t = 0; t < nt; ++t) {
        --counts[t][cell[a][t]];
        ++counts[t][cell[best_j][t]];
      }
      out.rows[best_i] = best_j;
      ++out.trace.swaps;
      const double predicted = current + best;
      const double fresh = total(counts);
      out.trace.max_drift = std::max(out.trace.max_drift, std::abs(predicted - fresh) / std::max(1.0, fresh));
      if (!(fresh < current)) out.trace.monotone = false;
      current = fresh;
    }
    out.trace.objective = nt > 0 ? current / nt : 0.0;
    return out;
  }
};

template <class Fn>
void run_parallel(int jobs, int threads, Fn&& fn) {
  threads = std::max(1, std::min(threads, jobs));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int k = next++; k < jobs; k = next++) fn(k);
  };
  if (threads == 1) {
    worker();
    return;
  }
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

inline Design design_of(const CandidateSet& cs, std::vector<int> rows) {
  std::sort(rows.begin(), rows.end(), [&](int a, int b) {
    if (cs.order(a) != cs.order(b)) return cs.order(a) < cs.order(b);
    return cs.levels(a) < cs.levels(b);
  });
  std::vector<Permutation> runs;
  std::vector<std::vector<int>> levels;
  for (int r : rows) {
    runs.push_back(cs.order(r));
    if (cs.process_count() > 0) levels.push_back(cs.levels(r));
  }
  return Design(cs.m(), std::move(runs), std::move(levels));
}

inline void check_config(const SearchConfig& cfg) {
  if (!cfg.candidate) throw ValidationError("search needs a candidate set");
  if (cfg.starts < 1) throw ValidationError("starts must be at least 1");
  if (cfg.n_runs < 1) throw ValidationError("run count must be at least 1");
  if (cfg.n_runs > cfg.candidate->size())
    throw ValidationError("run count " + std::to_string(cfg.n_runs) + " exceeds the candidate pool of " +
                          std::to_string(cfg.candidate->size()));
}

inline SearchResult collect(const SearchConfig& cfg, std::vector<StartOutcome>& outcomes) {
  const auto& cs = *cfg.candidate;
  const bool maximize = cfg.criterion == Objective::d_opt;
  SearchResult res;
  res.seed = cfg.seed;
  for (auto& o : outcomes) res.trace.push_back(o.trace);

  std::vector<int> usable;
  for (int s = 0; s < static_cast<int>(outcomes.size()); ++s)
    if (!outcomes[s].trace.degenerate || !maximize) usable.push_back(s);
  if (usable.empty())
    for (int s = 0; s < static_cast<int>(outcomes.size()); ++s) usable.push_back(s);

  double best = outcomes[usable.front()].trace.objective;
  for (int s : usable) {
    const double v = outcomes[s].trace.objective;
    best = maximize ? std::max(best, v) : std::min(best, v);
  }
  const double tol = maximize ? 1e-9 * std::max(1.0, std::abs(best)) : 1e-9;
  struct Item {
    double objective;
    std::vector<std::uint64_t> key;
    Design design;
  };
  std::vector<Item> items;
  std::set<std::vector<std::uint64_t>> seen;
  for (int s : usable) {
    const double v = outcomes[s].trace.objective;
    if (std::abs(v - best) > tol) continue;
    ++res.optimal_starts;
    Design d = design_of(cs, outcomes[s].rows);
    std::vector<std::uint64_t> key;
    for (int i = 0; i < d.size(); ++i) {
      key.push_back(rank(d.runs[i]));
      if (d.has_process())
        for (int v2 : d.levels[i]) key.push_back(static_cast<std::uint64_t>(v2));
    }
    if (!seen.insert(key).second) continue;
    items.push_back({v, std::move(key), std::move(d)});
  }
  std::sort(items.begin(), items.end(), [&](const Item& a, const Item& b) {
    if (a.objective != b.objective) return maximize ? a.objective > b.objective : a.objective < b.objective;
    return a.key < b.key;
  });
  if (cfg.keep == Keep::best_only && items.size() > 1) items.resize(1);

  std::set<std::string> classes;
  for (auto& it : items) {
    FoundDesign f;
    f.objective = it.objective;
    for (int i = 1; i < it.design.size(); ++i)
      if (it.design.runs[i] == it.design.runs[i - 1] &&
          (!it.design.has_process() || it.design.levels[i] == it.design.levels[i - 1]))
        f.duplicate_runs = true;
    if (cfg.evaluate_reports) f.report = evaluate(it.design, cs, {cfg.rule, 3});
    if (cs.m() <= kMaxIsomorphM) {
      f.wt_digest = signature_digest(wt_signature(it.design));
      classes.insert(f.wt_digest);
    }
    f.design = std::move(it.design);
    res.designs.push_back(std::move(f));
  }
  res.distinct_wt_classes = static_cast<int>(classes.size());
  return res;
}

}  // namespace detail

/// Multi-start Fedorov exchange maximizing det(X'X) over the candidate pool.
inline SearchResult fedorov_search(const SearchConfig& cfg) {
  detail::check_config(cfg);
  if (cfg.criterion != Objective::d_opt) throw ValidationError("fedorov_search runs the D-criterion");
  const auto& cs = *cfg.candidate;
  std::vector<std::vector<std::uint8_t>> ext;
  for (int i = 0; i < cs.size(); ++i) ext.push_back(cs.extended(i));
  const Eigen::MatrixXd pool = model_matrix(ext, cs.column_levels());
  std::vector<detail::StartOutcome> outcomes(cfg.starts);
  detail::run_parallel(cfg.starts, worker_count(cfg.threads), [&](int s) {
    Rng rng(cfg.seed ^ static_cast<std::uint64_t>(s));
    outcomes[s] = detail::fedorov_start(pool, cfg.n_runs, cfg.max_passes, rng);
    outcomes[s].trace.start = s;
  });
  return detail::collect(cfg, outcomes);
}

/// Multi-start exchange minimizing chi2_ave,2; usable below model rank.
inline SearchResult chi2_exchange_search(const SearchConfig& cfg) {
  detail::check_config(cfg);
  if (cfg.criterion != Objective::chi2_ave_2) throw ValidationError("chi2_exchange_search minimizes chi2_ave_2");
  const auto& cs = *cfg.candidate;
  detail::Chi2Exchange ex;
  ex.tabs = &cs.reference().tables(2);
  ex.rule = cfg.rule;
  ex.n = cfg.n_runs;
  for (int i = 0; i < cs.size(); ++i) {
    std::vector<std::uint8_t> cells;
    for (const auto& tab : *ex.tabs) cells.push_back(static_cast<std::uint8_t>(tab.cell_of(cs.extended(i))));
    ex.cell.push_back(std::move(cells));
  }
  std::vector<detail::StartOutcome> outcomes(cfg.starts);
  detail::run_parallel(cfg.starts, worker_count(cfg.threads), [&](int s) {
    Rng rng(cfg.seed ^ static_cast<std::uint64_t>(s));
    outcomes[s] = ex.run(cfg.max_passes, rng);
    outcomes[s].trace.start = s;
  });
  return detail::collect(cfg, outcomes);
}

inline SearchResult run_search(const SearchConfig& cfg) {
  return cfg.criterion == Objective::d_opt ? fedorov_search(cfg) : chi2_exchange_search(cfg);
}

// ---------------------------------------------------------------------------
// Catalog: batch searches for balanced designs, deduplicated and ranked.

struct CatalogSpec {
  int n_runs = 0;
  int m = 0;
  int strength = 2;
  int starts = 100;
  std::uint64_t seed = 1;
};

struct CatalogEntry {
  CatalogSpec spec;
  int optimal_starts = 0;
  int balanced_designs = 0;              // distinct designs with chi2_ave,t = 0
  std::vector<FoundDesign> classes;      // one representative per wt-class
  std::optional<RankedTable> ranking;
};

struct CatalogReport {
  std::vector<CatalogEntry> entries;
};

/// Runs a D-optimal search per spec, keeps the balanced optima, reduces them to
/// one design per wt-class and ranks the classes on the secondary criteria.
inline CatalogReport catalog_run(const std::vector<CatalogSpec>& specs, int threads = 0) {
  CatalogReport rep;
  for (const auto& spec : specs) {
    if (spec.strength < 2 || spec.strength > 3) throw ValidationError("catalog strength must be 2 or 3");
    SearchConfig cfg;
    cfg.n_runs = spec.n_runs;
    cfg.starts = spec.starts;
    cfg.seed = spec.seed;
    cfg.keep = Keep::all_optima;
    cfg.threads = threads;
    cfg.candidate = std::make_shared<const CandidateSet>(build_candidates(spec.m));
    auto res = fedorov_search(cfg);
    CatalogEntry e;
    e.spec = spec;
    e.optimal_starts = res.optimal_starts;
    std::set<std::string> classes;
    for (auto& f : res.designs) {
      const bool balanced = spec.strength == 2 ? f.report.is_oofa_oa_2 : f.report.is_oofa_oa_3;
      if (!balanced) continue;
      ++e.balanced_designs;
      if (classes.insert(f.wt_digest).second) e.classes.push_back(std::move(f));
    }
    if (!e.classes.empty()) {
      std::vector<std::pair<std::string, CriteriaReport>> rows;
      for (std::size_t k = 0; k < e.classes.size(); ++k) rows.emplace_back(std::to_string(k + 1), e.classes[k].report);
      e.ranking = rank_designs(rows, default_rank_criteria());
    }
    rep.entries.push_back(std::move(e));
  }
  return rep;
}

}  // namespace oofa
