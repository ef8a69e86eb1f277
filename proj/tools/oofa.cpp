// Command-line front end: evaluate, search, compare, rank, analyze,
// admissible and catalog. Exit codes: 0 ok, 1 invalid input, 2 internal error.

#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "oofa/io.hpp"
#include "oofa/reference.hpp"

namespace fs = std::filesystem;
using namespace oofa;

namespace {

struct Context {
  std::vector<std::string> argv;
  std::map<std::string, std::string> digests;
};

/// A design source is a CSV path, a `.rows` fixture path, or `rows:<list>`
/// (which needs --m).
Design load_source(const std::string& src, int m, Context& ctx, const std::string& label) {
  if (src.rfind("rows:", 0) == 0) {
    if (m < 2) throw ValidationError(label + ": a row list needs --m");
    const auto rows = parse_rows(src.substr(5), label);
    ctx.digests[label] = io::fnv1a_hex(src);
    return design_from_rows(m, rows);
  }
  ctx.digests[label] = io::fnv1a_hex(io::read_file(src));
  if (fs::path(src).extension() == ".rows") {
    const auto rf = load_rows_file(src);
    if (m >= 2 && m != rf.m) throw ValidationError(src + ": file has m=" + std::to_string(rf.m) + ", --m gives " + std::to_string(m));
    return design_from_rows(rf.m, rf.rows);
  }
  return load_design(src);
}

CandidateSet load_candidates(const std::string& path, int m, Context& ctx) {
  if (path.empty()) return build_candidates(m);
  ctx.digests["candidates"] = io::fnv1a_hex(io::read_file(path));
  auto spec = load_candidate_spec(path);
  if (spec.m != m) throw ValidationError(path + ": candidate spec has m=" + std::to_string(spec.m) + ", design has m=" + std::to_string(m));
  return spec.build();
}

ChiSquareRule parse_rule(const std::string& s) {
  if (s == "sparse") return ChiSquareRule::sparse;
  if (s == "literal") return ChiSquareRule::literal;
  throw ValidationError("--chi2-rule must be 'sparse' or 'literal'");
}

void emit(const json& j, const std::string& out) {
  const std::string text = j.dump(2) + "\n";
  if (out.empty() || out == "-")
    std::cout << text;
  else
    io::write_file(out, text);
}

std::pair<std::string, std::string> split_id(const std::string& s) {
  const auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0) throw ValidationError("'" + s + "' must have the form ID=SOURCE");
  return {s.substr(0, eq), s.substr(eq + 1)};
}

std::vector<RankCriterion> parse_criteria(const std::vector<std::string>& names) {
  if (names.empty()) return default_rank_criteria();
  std::vector<RankCriterion> out;
  for (auto n : names) {
    bool maximize = false;
    if (!n.empty() && (n.back() == '+' || n.back() == '-')) {
      maximize = n.back() == '+';
      n.pop_back();
    } else {
      throw ValidationError("criterion '" + n + "' needs a direction suffix: '+' to maximize, '-' to minimize");
    }
    out.push_back({n, maximize});
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  Context ctx;
  ctx.argv.assign(argv, argv + argc);
  CLI::App app{"Order-of-addition design toolkit"};
  app.fallthrough();
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  std::string chi2_rule = "sparse";
  std::string out;
  app.add_option("--chi2-rule", chi2_rule, "chi-square sparse-cell rule: sparse or literal")->capture_default_str();
  app.add_option("-o,--out", out, "output file (search: directory); default stdout");

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "Report every criterion for one design");
  std::string ev_design, ev_rows, ev_cands;
  int ev_m = 0, ev_smax = 3;
  ev->add_option("--design", ev_design, "design CSV, .rows file, or rows:<list>");
  ev->add_option("--rows", ev_rows, "1-based reference rows, comma separated");
  ev->add_option("--m", ev_m, "number of components");
  ev->add_option("--candidates", ev_cands, "candidate spec JSON");
  ev->add_option("--s-max", ev_smax, "highest similarity moment")->capture_default_str();

  // search
  auto* se = app.add_subcommand("search", "Multi-start exchange search");
  int se_m = 0, se_runs = 0, se_starts = 100, se_passes = 1000, se_threads = 0;
  std::uint64_t se_seed = 1;
  std::string se_crit = "d", se_cands, se_keep = "best";
  se->add_option("--m", se_m, "number of components")->required();
  se->add_option("--runs", se_runs, "run size N")->required();
  se->add_option("--criterion", se_crit, "d or chi2")->capture_default_str();
  se->add_option("--starts", se_starts, "random starts")->capture_default_str();
  se->add_option("--seed", se_seed, "64-bit seed")->capture_default_str();
  se->add_option("--max-passes", se_passes, "exchange pass cap per start")->capture_default_str();
  se->add_option("--candidates", se_cands, "candidate spec JSON");
  se->add_option("--keep", se_keep, "best or all (all distinct optima)")->capture_default_str();
  se->add_option("--threads", se_threads, "worker threads; default OOFA_THREADS or all cores");

  // compare
  auto* co = app.add_subcommand("compare", "Test two designs for wt- and d-isomorphism");
  std::string co_a, co_b;
  int co_m = 0;
  co->add_option("a", co_a, "first design source")->required();
  co->add_option("b", co_b, "second design source")->required();
  co->add_option("--m", co_m, "number of components for rows: sources");

  // rank
  auto* rk = app.add_subcommand("rank", "Rank designs on several criteria");
  std::vector<std::string> rk_designs, rk_criteria;
  std::string rk_format = "json";
  int rk_m = 0;
  rk->add_option("--design", rk_designs, "ID=SOURCE, repeatable")->required();
  rk->add_option("--criterion", rk_criteria, "NAME+ (maximize) or NAME- (minimize), repeatable");
  rk->add_option("--m", rk_m, "number of components for rows: sources");
  rk->add_option("--format", rk_format, "json or latex")->capture_default_str();

  // analyze
  auto* an = app.add_subcommand("analyze", "Fit a response on the PWO model");
  std::string an_design, an_rows, an_resp, an_hered = "weak";
  int an_m = 0;
  bool an_step = false;
  double an_in = 0.05, an_out = 0.05;
  an->add_option("--design", an_design, "design source");
  an->add_option("--rows", an_rows, "1-based reference rows");
  an->add_option("--m", an_m, "number of components");
  an->add_option("--response", an_resp, "response CSV, one value per run")->required();
  an->add_flag("--stepwise", an_step, "two-stage stepwise selection");
  an->add_option("--alpha-in", an_in, "entry level")->capture_default_str();
  an->add_option("--alpha-out", an_out, "removal level")->capture_default_str();
  an->add_option("--heredity", an_hered, "weak or strong")->capture_default_str();

  // admissible
  auto* ad = app.add_subcommand("admissible", "Smallest run size allowing exact balance");
  int ad_m = 0, ad_t = 2;
  std::string ad_cands;
  ad->add_option("--m", ad_m, "number of components")->required();
  ad->add_option("--t", ad_t, "strength, 2 or 3")->capture_default_str();
  ad->add_option("--candidates", ad_cands, "candidate spec JSON");

  // catalog
  auto* ca = app.add_subcommand("catalog", "Search, deduplicate by wt-class and rank");
  std::vector<std::string> ca_specs;
  int ca_starts = 100, ca_threads = 0;
  std::uint64_t ca_seed = 1;
  std::string ca_format = "json";
  ca->add_option("--spec", ca_specs, "N,m,t triple, repeatable")->required();
  ca->add_option("--starts", ca_starts, "random starts per spec")->capture_default_str();
  ca->add_option("--seed", ca_seed, "64-bit seed")->capture_default_str();
  ca->add_option("--threads", ca_threads, "worker threads");
  ca->add_option("--format", ca_format, "json or latex")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    const ChiSquareRule rule = parse_rule(chi2_rule);

    if (*ev) {
      Design d;
      if (!ev_design.empty())
        d = load_source(ev_design, ev_m, ctx, "design");
      else if (!ev_rows.empty())
        d = load_source("rows:" + ev_rows, ev_m, ctx, "design");
      else
        throw ValidationError("evaluate needs --design or --rows");
      const auto cands = load_candidates(ev_cands, d.m, ctx);
      const auto rep = evaluate(d, cands, {rule, ev_smax});
      emit(envelope("evaluate", ctx.argv, std::nullopt, ctx.digests, to_json(rep)), out);
      return 0;
    }

    if (*se) {
      SearchConfig cfg;
      cfg.n_runs = se_runs;
      cfg.starts = se_starts;
      cfg.seed = se_seed;
      cfg.max_passes = se_passes;
      cfg.threads = se_threads;
      cfg.rule = rule;
      if (se_crit == "d")
        cfg.criterion = Objective::d_opt;
      else if (se_crit == "chi2")
        cfg.criterion = Objective::chi2_ave_2;
      else
        throw ValidationError("--criterion must be 'd' or 'chi2'");
      if (se_keep == "best")
        cfg.keep = Keep::best_only;
      else if (se_keep == "all")
        cfg.keep = Keep::all_optima;
      else
        throw ValidationError("--keep must be 'best' or 'all'");
      cfg.candidate = std::make_shared<const CandidateSet>(load_candidates(se_cands, se_m, ctx));
      const auto res = run_search(cfg);
      const json env = envelope("search", ctx.argv, se_seed, ctx.digests, to_json(res));
      if (out.empty() || out == "-") {
        emit(env, "");
        return 0;
      }
      fs::create_directories(out);
      std::set<std::string> written;
      int k = 0;
      for (const auto& f : res.designs) {
        if (!f.wt_digest.empty() && !written.insert(f.wt_digest).second) continue;
        char name[32];
        std::snprintf(name, sizeof name, "design_%03d.csv", ++k);
        save_design((fs::path(out) / name).string(), f.design);
      }
      emit(env, (fs::path(out) / "summary.json").string());
      return 0;
    }

    if (*co) {
      const Design a = load_source(co_a, co_m, ctx, "a");
      const Design b = load_source(co_b, co_m, ctx, "b");
      if (a.m != b.m || a.size() != b.size())
        throw ValidationError("designs differ in shape: m=" + std::to_string(a.m) + " N=" + std::to_string(a.size()) +
                              " vs m=" + std::to_string(b.m) + " N=" + std::to_string(b.size()));
      const auto cands = build_candidates(a.m);
      json p;
      p["wt_isomorphic"] = wt_isomorphic(a, b);
      p["d_isomorphic"] = d_isomorphic(a, b);
      p["wt_signature_a"] = signature_digest(wt_signature(a));
      p["wt_signature_b"] = signature_digest(wt_signature(b));
      p["report_a"] = to_json(evaluate(a, cands, {rule, 3}));
      p["report_b"] = to_json(evaluate(b, cands, {rule, 3}));
      emit(envelope("compare", ctx.argv, std::nullopt, ctx.digests, p), out);
      return 0;
    }

    if (*rk) {
      std::vector<std::pair<std::string, CriteriaReport>> reports;
      std::map<int, CandidateSet> cache;
      for (const auto& s : rk_designs) {
        auto [id, src] = split_id(s);
        const Design d = load_source(src, rk_m, ctx, id);
        auto it = cache.find(d.m);
        if (it == cache.end()) it = cache.emplace(d.m, build_candidates(d.m)).first;
        reports.emplace_back(id, evaluate(d, it->second, {rule, 3}));
      }
      const auto table = rank_designs(reports, parse_criteria(rk_criteria));
      if (rk_format == "latex") {
        if (out.empty() || out == "-")
          std::cout << to_latex(table);
        else
          io::write_file(out, to_latex(table));
      } else if (rk_format == "json") {
        emit(envelope("rank", ctx.argv, std::nullopt, ctx.digests, to_json(table)), out);
      } else {
        throw ValidationError("--format must be 'json' or 'latex'");
      }
      return 0;
    }

    if (*an) {
      Design d;
      if (!an_design.empty())
        d = load_source(an_design, an_m, ctx, "design");
      else if (!an_rows.empty())
        d = load_source("rows:" + an_rows, an_m, ctx, "design");
      else
        throw ValidationError("analyze needs --design or --rows");
      ctx.digests["response"] = io::fnv1a_hex(io::read_file(an_resp));
      const Response y = load_response(an_resp);
      const auto p = expand(d);
      Heredity h;
      if (an_hered == "weak")
        h = Heredity::weak;
      else if (an_hered == "strong")
        h = Heredity::strong;
      else
        throw ValidationError("--heredity must be 'weak' or 'strong'");
      const auto model = an_step ? stepwise(p, y, an_in, an_out, h) : fit_main_effects(p, y);
      emit(envelope("analyze", ctx.argv, std::nullopt, ctx.digests, to_json(model)), out);
      return 0;
    }

    if (*ad) {
      const auto cands = load_candidates(ad_cands, ad_m, ctx);
      json p;
      p["m"] = ad_m;
      p["t"] = ad_t;
      p["min_runs"] = admissible_min_N(cands, ad_t);
      emit(envelope("admissible", ctx.argv, std::nullopt, ctx.digests, p), out);
      return 0;
    }

    if (*ca) {
      std::vector<CatalogSpec> specs;
      for (const auto& s : ca_specs) {
        const auto f = io::split(s, ',');
        if (f.size() != 3) throw ValidationError("--spec '" + s + "' must be N,m,t");
        CatalogSpec c;
        c.n_runs = static_cast<int>(io::parse_int(f[0], "--spec"));
        c.m = static_cast<int>(io::parse_int(f[1], "--spec"));
        c.strength = static_cast<int>(io::parse_int(f[2], "--spec"));
        c.starts = ca_starts;
        c.seed = ca_seed;
        specs.push_back(c);
      }
      const auto rep = catalog_run(specs, ca_threads);
      if (ca_format == "latex") {
        std::string text;
        for (const auto& e : rep.entries) {
          text += "% N=" + std::to_string(e.spec.n_runs) + " m=" + std::to_string(e.spec.m) +
                  " t=" + std::to_string(e.spec.strength) + "\n";
          if (e.ranking) text += to_latex(*e.ranking);
        }
        if (out.empty() || out == "-")
          std::cout << text;
        else
          io::write_file(out, text);
        return 0;
      }
      if (ca_format != "json") throw ValidationError("--format must be 'json' or 'latex'");
      json entries = json::array();
      for (const auto& e : rep.entries) {
        json j;
        j["n_runs"] = e.spec.n_runs;
        j["m"] = e.spec.m;
        j["strength"] = e.spec.strength;
        j["starts"] = e.spec.starts;
        j["optimal_starts"] = e.optimal_starts;
        j["balanced_designs"] = e.balanced_designs;
        json cls = json::array();
        for (const auto& f : e.classes) {
          json c = to_json(f.design);
          c["wt_class"] = f.wt_digest;
          c["report"] = to_json(f.report);
          cls.push_back(c);
        }
        j["wt_classes"] = cls;
        j["ranking"] = e.ranking ? to_json(*e.ranking) : json(nullptr);
        entries.push_back(j);
      }
      emit(envelope("catalog", ctx.argv, ca_seed, ctx.digests, {{"entries", entries}}), out);
      return 0;
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
