#pragma once

// File formats: design CSV, reference-row lists, response columns, candidate
// specs (JSON), report envelopes (JSON) and LaTeX ranking tables.

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "oofa/analysis.hpp"
#include "oofa/criteria.hpp"
#include "oofa/isomorph.hpp"
#include "oofa/search.hpp"

namespace oofa {

using json = nlohmann::ordered_json;

inline constexpr const char* kToolName = "oofa";
inline constexpr const char* kToolVersion = "0.1.0";

namespace io {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write file '" + path + "'");
  out << text;
}

inline std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.push_back("");
  return out;
}

inline long long parse_int(const std::string& tok, const std::string& where) {
  if (tok.empty()) throw ValidationError(where + ": empty field");
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(tok, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != tok.size()) throw ValidationError(where + ": '" + tok + "' is not an integer");
  return v;
}

inline double parse_double(const std::string& tok, const std::string& where) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(tok, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (tok.empty() || used != tok.size() || !std::isfinite(v))
    throw ValidationError(where + ": '" + tok + "' is not a finite number");
  return v;
}

/// Reads `key=value` pairs from a `# ...` header line.
inline std::map<std::string, std::string> header_fields(const std::string& line) {
  std::map<std::string, std::string> out;
  std::istringstream in(line.substr(1));
  std::string tok;
  while (in >> tok) {
    const auto eq = tok.find('=');
    if (eq != std::string::npos) out[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  return out;
}

}  // namespace io

// ---------------------------------------------------------------------------
// Design CSV. Canonical form:
//   # m=<m>[ p=<p>]
//   s1,...,sm[,x1,...,xp]
//   one line per run: the components in addition order, then process levels.

inline std::string design_to_csv(const Design& d) {
  std::ostringstream out;
  out << "# m=" << d.m;
  if (d.has_process()) out << " p=" << d.process_count();
  out << "\n";
  for (int k = 0; k < d.m; ++k) out << (k ? "," : "") << "s" << (k + 1);
  for (int k = 0; k < d.process_count(); ++k) out << ",x" << (k + 1);
  out << "\n";
  for (int i = 0; i < d.size(); ++i) {
    for (int k = 0; k < d.m; ++k) out << (k ? "," : "") << d.runs[i][k];
    if (d.has_process())
      for (int v : d.levels[i]) out << "," << v;
    out << "\n";
  }
  return out.str();
}

inline Design design_from_csv(const std::string& text, const std::string& source = "design") {
  std::istringstream in(text);
  std::string line;
  int m = -1, p = 0, lineno = 0;
  bool header_seen = false;
  std::vector<Permutation> runs;
  std::vector<std::vector<int>> levels;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = source + ":" + std::to_string(lineno);
    line = io::trim(line);
    if (line.empty()) continue;
    if (line[0] == '#') {
      auto f = io::header_fields(line);
      if (f.count("m")) m = static_cast<int>(io::parse_int(f["m"], where));
      if (f.count("p")) p = static_cast<int>(io::parse_int(f["p"], where));
      continue;
    }
    if (!header_seen && (std::isalpha(static_cast<unsigned char>(line[0])))) {
      header_seen = true;
      const auto cols = io::split(line, ',');
      if (m < 0) {
        m = 0;
        for (const auto& c : cols)
          if (!c.empty() && c[0] == 's') ++m;
        p = static_cast<int>(cols.size()) - m;
      }
      continue;
    }
    const auto toks = io::split(line, ',');
    if (m < 0) {
      m = static_cast<int>(toks.size());
      p = 0;
    }
    if (static_cast<int>(toks.size()) != m + p)
      throw ValidationError(where + ": expected " + std::to_string(m + p) + " fields, found " +
                            std::to_string(toks.size()));
    std::vector<int> order, lv;
    for (int k = 0; k < m; ++k) order.push_back(static_cast<int>(io::parse_int(toks[k], where)));
    for (int k = 0; k < p; ++k) {
      const long long v = io::parse_int(toks[m + k], where);
      if (v < 0) throw ValidationError(where + ": process level must be non-negative");
      lv.push_back(static_cast<int>(v));
    }
    try {
      runs.emplace_back(std::move(order));
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    }
    if (p > 0) levels.push_back(std::move(lv));
  }
  if (runs.empty()) throw ValidationError(source + ": no runs found");
  return Design(m, std::move(runs), std::move(levels));
}

inline Design load_design(const std::string& path) { return design_from_csv(io::read_file(path), path); }
inline void save_design(const std::string& path, const Design& d) { io::write_file(path, design_to_csv(d)); }

/// Comma- or whitespace-separated 1-based row indices.
inline std::vector<std::uint64_t> parse_rows(const std::string& text, const std::string& where = "--rows") {
  std::vector<std::uint64_t> out;
  std::string tok;
  std::string norm = text;
  for (char& c : norm)
    if (c == ',' || c == ';' || c == '\n' || c == '\r' || c == '\t') c = ' ';
  std::istringstream in(norm);
  while (in >> tok) {
    const long long v = io::parse_int(tok, where);
    if (v < 1) throw ValidationError(where + ": row index " + tok + " must be at least 1");
    out.push_back(static_cast<std::uint64_t>(v));
  }
  if (out.empty()) throw ValidationError(where + ": no row indices given");
  return out;
}

struct RowsFile {
  int m = 0;
  std::vector<std::uint64_t> rows;
};

/// Row-list fixture: a `# m=<m>` header then the indices.
inline RowsFile load_rows_file(const std::string& path) {
  const auto text = io::read_file(path);
  std::istringstream in(text);
  std::string line, body;
  RowsFile rf;
  while (std::getline(in, line)) {
    const auto t = io::trim(line);
    if (!t.empty() && t[0] == '#') {
      auto f = io::header_fields(t);
      if (f.count("m")) rf.m = static_cast<int>(io::parse_int(f["m"], path));
    } else {
      body += t + "\n";
    }
  }
  if (rf.m < 2) throw ValidationError(path + ": missing '# m=<m>' header");
  rf.rows = parse_rows(body, path);
  return rf;
}

/// One response value per line; an optional non-numeric header line is skipped.
inline Response load_response(const std::string& path) {
  const auto text = io::read_file(path);
  std::istringstream in(text);
  std::string line;
  Response r;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto t = io::trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto fields = io::split(t, ',');
    t = fields.back();
    if (r.y.empty() && lineno == 1 && std::isalpha(static_cast<unsigned char>(t[0]))) continue;
    r.y.push_back(io::parse_double(t, path + ":" + std::to_string(lineno)));
  }
  if (r.y.empty()) throw ValidationError(path + ": no response values");
  return r;
}

// ---------------------------------------------------------------------------
// Candidate spec JSON:
//   {"m": 5,
//    "constraints": [["precedes", 0, 1], ["chain", 2, 3, 4]],
//    "process": {"factors": [["A", 2], ...], "fraction": [[0, 1, ...], ...]},
//    "base_design": {"rows": [...]} | {"csv": "<path>"}}

struct CandidateSpec {
  int m = 0;
  std::vector<Constraint> constraints;
  std::optional<ProcessFactorSpec> process;
  std::optional<Design> base;

  CandidateSet build() const { return build_candidates(m, constraints, process, base); }
};

inline CandidateSpec candidate_spec_from_json(const json& j, const std::string& where = "candidate spec") {
  try {
    CandidateSpec s;
    s.m = j.at("m").get<int>();
    if (j.contains("constraints")) {
      for (const auto& c : j.at("constraints")) {
        const auto kind = c.at(0).get<std::string>();
        std::vector<int> chain;
        for (std::size_t k = 1; k < c.size(); ++k) chain.push_back(c.at(k).get<int>());
        if (kind == "precedes" && chain.size() != 2) throw ValidationError(where + ": 'precedes' takes two components");
        if (kind != "precedes" && kind != "chain") throw ValidationError(where + ": unknown constraint '" + kind + "'");
        s.constraints.push_back(Constraint::ordered(chain));
      }
    }
    if (j.contains("process")) {
      ProcessFactorSpec p;
      for (const auto& f : j.at("process").at("factors"))
        p.factors.push_back({f.at(0).get<std::string>(), f.at(1).get<int>()});
      if (j.at("process").contains("fraction"))
        p.fraction = j.at("process").at("fraction").get<std::vector<std::vector<int>>>();
      s.process = p;
    }
    if (j.contains("base_design")) {
      const auto& b = j.at("base_design");
      if (b.contains("rows"))
        s.base = design_from_rows(s.m, b.at("rows").get<std::vector<std::uint64_t>>());
      else if (b.contains("csv"))
        s.base = load_design(b.at("csv").get<std::string>());
      else
        throw ValidationError(where + ": base_design needs 'rows' or 'csv'");
    }
    return s;
  } catch (const json::exception& e) {
    throw ValidationError(where + ": " + e.what());
  }
}

inline CandidateSpec load_candidate_spec(const std::string& path) {
  json j;
  try {
    j = json::parse(io::read_file(path));
  } catch (const json::parse_error& e) {
    throw ValidationError(path + ": " + e.what());
  }
  return candidate_spec_from_json(j, path);
}

// ---------------------------------------------------------------------------
// JSON serializers.

inline json to_json(const CriteriaReport& r) {
  json j;
  j["m"] = r.m;
  j["n_runs"] = r.n_runs;
  j["chi2_ave_2"] = r.chi2_ave_2;
  j["chi2_max_2"] = r.chi2_max_2;
  j["fo_2"] = r.fo_2;
  j["chi2_ave_3"] = r.chi2_ave_3;
  j["chi2_max_3"] = r.chi2_max_3;
  j["fo_3"] = r.fo_3;
  j["chi2_ave_2_loo"] = r.chi2_ave_2_loo;
  j["fo_2_loo"] = r.fo_2_loo;
  j["chi2_ave_3_loo"] = r.chi2_ave_3_loo;
  j["fo_3_loo"] = r.fo_3_loo;
  j["d_eff"] = r.d_eff;
  j["mean_vif"] = r.mean_vif ? json(*r.mean_vif) : json(nullptr);
  j["sim"] = r.sim;
  j["rmv_ord"] = r.rmv_ord;
  j["is_oofa_oa_2"] = r.is_oofa_oa_2;
  j["is_oofa_oa_3"] = r.is_oofa_oa_3;
  return j;
}

inline json to_json(const Design& d) {
  json j;
  j["m"] = d.m;
  j["rows"] = rows_of(d);
  if (d.has_process()) j["levels"] = d.levels;
  return j;
}

inline json to_json(const SearchResult& r) {
  json j;
  j["seed"] = r.seed;
  j["generator"] = r.generator;
  j["optimal_starts"] = r.optimal_starts;
  j["distinct_wt_classes"] = r.distinct_wt_classes;
  json ds = json::array();
  for (const auto& f : r.designs) {
    json e = to_json(f.design);
    e["objective"] = f.objective;
    e["duplicate_runs"] = f.duplicate_runs;
    e["wt_class"] = f.wt_digest;
    e["report"] = to_json(f.report);
    ds.push_back(e);
  }
  j["designs"] = ds;
  json tr = json::array();
  for (const auto& t : r.trace)
    tr.push_back({{"start", t.start},
                  {"objective", t.objective},
                  {"passes", t.passes},
                  {"swaps", t.swaps},
                  {"retries", t.retries},
                  {"degenerate", t.degenerate},
                  {"monotone", t.monotone},
                  {"max_drift", t.max_drift}});
  j["trace"] = tr;
  return j;
}

inline json to_json(const FittedModel& f) {
  json j;
  j["intercept"] = f.intercept;
  json terms = json::array();
  for (const auto& t : f.terms)
    terms.push_back({{"term", t.name}, {"coefficient", t.coefficient}, {"std_error", t.std_error}});
  j["terms"] = terms;
  j["residual_df"] = f.residual_df;
  j["r2"] = f.r2;
  j["sigma2"] = std::isfinite(f.sigma2) ? json(f.sigma2) : json(nullptr);
  if (f.stepwise) {
    json names = json::array();
    for (int c : f.stage1_actives) names.push_back(term_name(f.m, {c}));
    j["stage1_actives"] = names;
  }
  return j;
}

inline json to_json(const RankedTable& t) {
  json j;
  json crit = json::array();
  for (const auto& c : t.criteria) crit.push_back({{"name", c.name}, {"maximize", c.maximize}});
  j["criteria"] = crit;
  json rows = json::array();
  for (const auto& r : t.rows)
    rows.push_back({{"id", r.id},
                    {"values", r.values},
                    {"ranks", r.ranks},
                    {"average_rank", r.average_rank},
                    {"final_rank", r.final_rank}});
  j["rows"] = rows;
  j["worst"] = t.worst;
  return j;
}

inline json to_json(const WtSignature& s) {
  auto part = [](const std::map<TableType, int>& m) {
    json a = json::array();
    for (const auto& [type, n] : m) a.push_back({{"type", type.signature}, {"count", n}});
    return a;
  };
  return {{"pairs", part(s.pair_types)}, {"triples", part(s.triple_types)}};
}

/// Stable report wrapper: tool identity, command echo, seed, input digests.
inline json envelope(const std::string& command, const std::vector<std::string>& argv, std::optional<std::uint64_t> seed,
                     const std::map<std::string, std::string>& input_digests, json payload) {
  json j;
  j["tool"] = kToolName;
  j["version"] = kToolVersion;
  j["command"] = command;
  j["argv"] = argv;
  j["seed"] = seed ? json(*seed) : json(nullptr);
  json in = json::object();
  for (const auto& [k, v] : input_digests) in[k] = v;
  j["inputs"] = in;
  j["payload"] = std::move(payload);
  return j;
}

// ---------------------------------------------------------------------------
// LaTeX ranking table in the style of a printed design comparison.

inline std::string latex_criterion(const std::string& name) {
  static const std::map<std::string, std::string> labels = {
      {"fo_2", "$FO_2$"},
      {"fo_3", "$FO_3$"},
      {"chi2_ave_2", "$\\chi^2_{ave,2}$"},
      {"chi2_ave_3", "$\\chi^2_{ave,3}$"},
      {"chi2_max_2", "$\\chi^2_{max,2}$"},
      {"chi2_max_3", "$\\chi^2_{max,3}$"},
      {"fo_2_loo", "$FO_{2,-1}$"},
      {"fo_3_loo", "$FO_{3,-1}$"},
      {"chi2_ave_2_loo", "$\\chi^2_{ave,2,-1}$"},
      {"chi2_ave_3_loo", "$\\chi^2_{ave,3,-1}$"},
      {"d_eff", "$D_{eff}$"},
      {"mean_vif", "VIF"},
      {"rmv_ord", "$RMV_{ord}$"},
  };
  if (auto it = labels.find(name); it != labels.end()) return it->second;
  if (name.rfind("sim_", 0) == 0) return "$Sim_{" + name.substr(4) + "}$";
  return name;
}

inline std::string to_latex(const RankedTable& t) {
  auto num = [](double v, int digits) {
    std::ostringstream s;
    s.setf(std::ios::fixed);
    s.precision(digits);
    s << v;
    return s.str();
  };
  std::ostringstream out;
  out << "\\begin{tabular}{l";
  for (std::size_t k = 0; k < t.criteria.size(); ++k) out << "r";
  out << "rr}\n\\hline\nID";
  for (const auto& c : t.criteria) out << " & " << latex_criterion(c.name);
  out << " & Avg. rank & Rank \\\\\n\\hline\n";
  for (const auto& r : t.rows) {
    out << r.id;
    for (std::size_t k = 0; k < r.values.size(); ++k) {
      const int digits = t.criteria[k].name.rfind("sim_", 0) == 0 ? 3 : 2;
      out << " & " << num(r.values[k], digits) << " (" << r.ranks[k] << ")";
    }
    out << " & " << num(r.average_rank, 1) << " & " << num(r.final_rank, 1) << " \\\\\n";
  }
  out << "\\hline\nWorst";
  for (std::size_t k = 0; k < t.worst.size(); ++k) {
    const int digits = t.criteria[k].name.rfind("sim_", 0) == 0 ? 3 : 2;
    out << " & " << num(t.worst[k], digits);
  }
  out << " & & \\\\\n\\hline\n\\end{tabular}\n";
  return out.str();
}

}  // namespace oofa
