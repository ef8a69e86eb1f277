// Build a 12-run design for four components, search for a D-optimal
// alternative and compare the two.

#include <iostream>

#include "oofa/io.hpp"

int main() {
  using namespace oofa;

  const auto pool = std::make_shared<const CandidateSet>(build_candidates(4));
  const Design given = design_from_rows(4, {1, 4, 6, 8, 9, 11, 14, 16, 17, 19, 21, 24});
  const auto before = evaluate(given, *pool);

  SearchConfig cfg;
  cfg.n_runs = 12;
  cfg.starts = 50;
  cfg.seed = 2024;
  cfg.candidate = pool;
  const auto found = fedorov_search(cfg);
  const auto& best = found.designs.front();

  std::cout << "given design:   chi2_ave_2=" << before.chi2_ave_2 << " d_eff=" << before.d_eff << "\n";
  std::cout << "searched design: chi2_ave_2=" << best.report.chi2_ave_2 << " d_eff=" << best.report.d_eff << "\n";
  std::cout << "same wt-class: " << (wt_isomorphic(given, best.design) ? "yes" : "no") << "\n\n";
  std::cout << design_to_csv(best.design);
  return 0;
}
