#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "certifier.hpp"
#include "constants.hpp"
#include "errors.hpp"
#include "expansion.hpp"
#include "graph.hpp"
#include "json.hpp"
#include "norms.hpp"
#include "poincare.hpp"
#include "random_graphs.hpp"
#include "rng.hpp"
#include "spectral.hpp"

namespace gapcert::cli {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolVersion = "0.3.0";

enum ExitCode : int { kOk = 0, kUsage = 1, kFalsified = 2 };

// Non-finite values become "inf" / "-inf" strings, NaN becomes null.
inline json num(double x) {
  if (std::isnan(x)) return nullptr;
  if (std::isinf(x)) return x > 0 ? json("inf") : json("-inf");
  return x;
}

inline json log_json(const LogScalar& x) {
  return {{"sign", x.sign()}, {"ln_value", num(x.ln())}, {"log10_value", num(x.log10())}};
}

inline json set_json(const VertexSet& s) { return json(std::vector<Vertex>(s.begin(), s.end())); }

// ---------------------------------------------------------------- I/O

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

// Numeric matrix: one row per line, comma or whitespace separated; blank
// lines and '#' comments skipped.
inline std::vector<std::vector<double>> parse_matrix_csv(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls_(line);
    std::vector<double> row;
    std::string tok;
    while (ls_ >> tok) {
      std::size_t used = 0;
      double x = 0.0;
      try {
        x = std::stod(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size()) throw ParseError(line_no, "not a number: '" + tok + "'");
      row.push_back(x);
    }
    if (row.empty()) continue;
    if (!rows.empty() && row.size() != rows.front().size()) throw ParseError(line_no, "ragged row");
    rows.push_back(std::move(row));
  }
  return rows;
}

inline VectorField field_from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw std::invalid_argument("empty field file");
  VectorField f(static_cast<int>(rows.size()), static_cast<int>(rows.front().size()));
  for (std::size_t v = 0; v < rows.size(); ++v)
    for (std::size_t j = 0; j < rows[v].size(); ++j) f(static_cast<int>(v), static_cast<int>(j)) = rows[v][j];
  return f;
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string csv_line(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    out += csv_escape(cells[i]);
  }
  return out + "\r\n";
}

// Shortest decimal that round-trips.
inline std::string shortest(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline std::string csv_cell(const json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) return shortest(v.get<double>());
  return v.dump();
}

// Runs fn(i) for i in [0, count) on up to `jobs` threads. Results must be
// written to per-index slots so the outcome is independent of scheduling.
inline void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(std::max(1, jobs), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i; (i = next++) < count;) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// One CSV row per grid point. A row whose evaluation throws keeps its grid
// columns, gets the message in "error", and the sweep moves on.
using GridPoint = std::map<std::string, json>;

inline std::string sweep(const std::vector<std::string>& grid_columns, const std::vector<std::string>& result_columns,
                         const std::vector<GridPoint>& grid, const std::function<json(const GridPoint&)>& eval,
                         int jobs = 1) {
  std::vector<std::string> header = grid_columns;
  header.insert(header.end(), result_columns.begin(), result_columns.end());
  header.push_back("error");
  std::vector<std::string> lines(grid.size());
  parallel_for(grid.size(), jobs, [&](std::size_t i) {
    json res = json::object();
    std::string err;
    try {
      res = eval(grid[i]);
    } catch (const std::exception& ex) {
      err = ex.what();
    }
    std::vector<std::string> cells;
    for (const auto& c : grid_columns) cells.push_back(grid[i].count(c) ? csv_cell(grid[i].at(c)) : "");
    for (const auto& c : result_columns) cells.push_back(res.contains(c) ? csv_cell(res.at(c)) : "");
    cells.push_back(err);
    lines[i] = csv_line(cells);
  });
  std::string out = csv_line(header);
  for (const auto& l : lines) out += l;
  return out;
}

// ------------------------------------------------------------ reports

struct Report {
  json spec;
  json result;
  int exit_code = kOk;
  double wall_ms = 0.0;

  json to_json(const std::string& subcommand) const {
    return {{"schema_version", kSchemaVersion}, {"tool_version", kToolVersion}, {"subcommand", subcommand},
            {"spec", spec},  {"result", result},  {"exit_code", exit_code},      {"wall_ms", wall_ms}};
  }
};

inline json spectra_json(const RegularGraph& g, bool want_cheeger) {
  SpectralSummary s = eigen_summary(g);
  json r = {{"n", g.n()},           {"d", g.d()},           {"lambda1", s.lambda1}, {"lambda2", s.lambda2},
            {"lambda_min", s.lambda_min}, {"lambda", s.lambda}, {"exact", s.dense}, {"residual", s.residual}};
  if (s.dense) r["eigenvalues"] = s.eigenvalues;
  auto fr = friedman_check(s, g.d(), 0.0);
  r["friedman_2_1"] = {{"threshold", fr.threshold_2_1},
                       {"passes", fr.threshold_passes},
                       {"lambda2_gate", fr.lambda2_gate},
                       {"ramanujan_bound", fr.friedman_bound}};
  if (want_cheeger && g.n() <= 24) {
    auto ch = cheeger_exact(g);
    auto sw = cheeger_sandwich_check(g, s.lambda2);
    r["cheeger"] = {{"h_num", ch.h.num},       {"h_den", ch.h.den}, {"h", ch.h.value()},   {"exact", true},
                    {"witness", set_json(ch.witness)}, {"sandwich_holds", sw.holds()}, {"sandwich_lower", sw.lower}, {"sandwich_upper", sw.upper}};
  }
  return r;
}

inline json witness_json(const ExpanWitness& w) {
  json t = json::array();
  for (const Edge& e : w.t_set) t.push_back({e.u, e.v});
  return {{"s", set_json(w.s)}, {"ell", w.ell}, {"ball_size", w.ball_size}, {"threshold", log_json(w.threshold)},
          {"t_set", t},         {"t_counts", w.t_counts}};
}

inline json verdict_json(const ExpanVerdict& v) {
  json r = {{"part", to_string(v.part)},
            {"mode", to_string(v.mode)},
            {"verdict", to_string(v.verdict)},
            {"checked", v.checked},
            {"exact", v.mode == CheckMode::Exact}};
  if (v.witness) r["witness"] = witness_json(*v.witness);
  return r;
}

inline json tally_json(const Tally& t) {
  json r = {{"name", t.name}, {"checked", t.checked}, {"failed", t.failed}, {"passed", t.passed()}};
  if (!t.first_failure.empty()) r["first_failure"] = t.first_failure;
  return r;
}

inline json cert_json(const CertReport& R) {
  json scales = json::array();
  for (const auto& s : R.scales) {
    json levels = json::array();
    for (const auto& l : s.levels)
      levels.push_back({{"b", l.b},
                        {"m_size", l.m_size},
                        {"branch", l.branch == 'i' ? "i" : (l.branch == '2' ? "ii" : "none")},
                        {"count_i", l.count_i},
                        {"need_i", log_json(l.need_i)},
                        {"count_ii", l.count_ii},
                        {"need_ii", log_json(l.need_ii)},
                        {"e_prime", l.e_prime},
                        {"heavy_edges", l.heavy},
                        {"cotype_split_runs", l.cotype_split_runs},
                        {"cotype_split_log_space", l.cotype_split_vacuous}});
    scales.push_back({{"ell", s.ell},
                      {"vertices", s.vertices},
                      {"sum_support_norms", s.sum_support},
                      {"lhs", log_json(s.lhs)},
                      {"rhs", log_json(s.rhs)},
                      {"holds", s.holds},
                      {"levels", levels}});
  }
  json tallies = json::array();
  for (const auto& t : R.log.tallies()) tallies.push_back(tally_json(t));
  const auto& P = R.params.params;
  json r = {{"mode", to_string(R.params.mode)},
            {"all_passed", R.all_passed()},
            {"exact", true},
            {"n", R.n},
            {"d", R.d},
            {"k", R.k},
            {"q", R.q},
            {"C", R.C},
            {"p", R.p},
            {"params", {{"alpha", log_json(P.alpha)}, {"eps", P.eps}, {"L", log_json(P.L)}}},
            {"part_a", to_string(R.params.part_a)},
            {"part_b", to_string(R.params.part_b)},
            {"alpha_certified", log_json(R.params.alpha_certified)},
            {"restricted_cotype", R.restricted_cotype},
            {"constants",
             {{"Pi", log_json(R.pi)},
              {"four_over_cprime", log_json(R.four_over_cprime)},
              {"Ltilde", log_json(R.ltilde)},
              {"c", log_json(R.c)},
              {"chat", log_json(R.chat)},
              {"cprime", log_json(R.cprime)}}},
            {"greedy_crossover", R.crossover},
            {"sum_nodes", R.sum_nodes},
            {"sum_edges", R.sum_edges},
            {"ratio", num(R.ratio)},
            {"ratio_le_four_over_cprime", R.ratio_le_recombination},
            {"ratio_le_pi", R.ratio_le_pi},
            {"scales", scales},
            {"assertions", tallies}};
  if (R.real_input) {
    const auto& e = *R.encoding;
    r["real"] = {{"delta", e.delta},
                 {"m", e.m},
                 {"node_sandwich", {{"lhs", e.node_lhs}, {"rhs", e.node_rhs}, {"holds", e.node_ok}}},
                 {"edge_sandwich", {{"lhs", e.edge_lhs}, {"rhs", e.edge_rhs}, {"holds", e.edge_ok}}},
                 {"sum_nodes", R.real_sum_nodes},
                 {"sum_edges", R.real_sum_edges},
                 {"ratio", num(R.real_ratio)},
                 {"ratio_le_three_halves_pi", R.real_ratio_ok}};
  }
  if (R.p > 1.0) r["p_extrapolation"] = {{"lhs", log_json(R.p_lhs)}, {"rhs", log_json(R.p_rhs)}, {"holds", R.p_holds}};
  return r;
}

inline json cotype_json(const CotypeResult& c) {
  return {{"raw", num(c.raw)}, {"capped", num(c.capped)}, {"expectation", c.expectation}, {"sum_norms_q", c.sum_norms_q}};
}

// --------------------------------------------------------------- parsing helpers

inline std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::string tok;
  std::istringstream in(s);
  while (std::getline(in, tok, ',')) {
    tok.erase(0, tok.find_first_not_of(" \t"));
    tok.erase(tok.find_last_not_of(" \t") + 1);
    if (tok.empty()) continue;
    std::size_t used = 0;
    double x = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument("bad list entry '" + tok + "'");
    out.push_back(x);
  }
  return out;
}

// "paper" (the nominal value) or a natural log value.
inline LogScalar parse_alpha(const std::string& s, int d) {
  if (s == "paper") return alpha_nominal(d);
  return LogScalar::from_log(std::stod(s));
}

inline RegularGraph load_graph(const std::string& path, int base) {
  return load_edge_list(read_file(path), base == 1 ? IndexBase::One : IndexBase::Zero);
}

inline UncondNorm load_norm(const std::string& path) {
  if (path.empty()) return UncondNorm::lq(2.0);
  try {
    return UncondNorm::from_json(json::parse(read_file(path)));
  } catch (const json::exception& ex) {
    throw std::invalid_argument("norm file '" + path + "': " + ex.what());
  }
}

// ------------------------------------------------------------- commands

struct GenArgs {
  int n = 0, d = 3, count = 1, base = 0, jobs = 1;
  std::uint64_t seed = 0;
  std::string out;
};

inline Report run_gen(const GenArgs& a) {
  Report r;
  r.spec = {{"n", a.n}, {"d", a.d}, {"seed", a.seed}, {"count", a.count}, {"out", a.out}, {"base", a.base}};
  std::filesystem::create_directories(a.out);
  std::vector<json> items(a.count);
  Rng root(a.seed);
  parallel_for(a.count, a.jobs, [&](std::size_t i) {
    Rng rng = root.split(i);
    auto t0 = std::chrono::steady_clock::now();
    auto sg = sample_simple_regular(a.n, a.d, rng);
    double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    std::string name = "graph_" + std::to_string(i) + ".edges";
    write_file((std::filesystem::path(a.out) / name).string(),
               save_edge_list(sg.graph, a.base == 1 ? IndexBase::One : IndexBase::Zero));
    items[i] = {{"file", name}, {"index", i}, {"seed", a.seed}, {"stream", i}, {"rejections", sg.rejections},
                {"wall_ms", ms}};
  });
  r.result = {{"graphs", items}, {"exact", true}};
  return r;
}

struct SpectraArgs {
  std::string in;
  int base = 0;
  bool cheeger = true;
};

inline Report run_spectra(const SpectraArgs& a) {
  Report r;
  r.spec = {{"in", a.in}, {"base", a.base}, {"cheeger", a.cheeger}, {"seed", nullptr}};
  r.result = spectra_json(load_graph(a.in, a.base), a.cheeger);
  return r;
}

struct ExpanArgs {
  std::string in, alpha = "paper", L = "paper", mode = "exact", part = "both";
  double eps = 0.2;
  long long trials = 10000;
  std::uint64_t seed = 0;
  int base = 0;
};

inline Report run_expan(const ExpanArgs& a) {
  Report r;
  r.spec = {{"in", a.in},     {"alpha_log", a.alpha}, {"eps", a.eps},   {"L", a.L},   {"mode", a.mode},
            {"part", a.part}, {"trials", a.trials},   {"seed", a.seed}, {"base", a.base}};
  RegularGraph g = load_graph(a.in, a.base);
  ExpanParams p;
  p.alpha = parse_alpha(a.alpha, g.d());
  p.eps = a.eps;
  p.L = a.L == "paper" ? ls(24.0) / p.alpha : LogScalar::from_double(std::stod(a.L));
  p.validate();
  json verdicts = json::array();
  bool failed = false;
  auto add = [&](const ExpanVerdict& v) {
    failed |= v.verdict == Verdict::Fail;
    verdicts.push_back(verdict_json(v));
  };
  const bool do_a = a.part == "A" || a.part == "both";
  const bool do_b = a.part == "B" || a.part == "both";
  if (!do_a && !do_b) throw std::invalid_argument("--part must be A, B or both");
  Rng rng(a.seed);
  if (a.mode == "exact") {
    if (do_a) add(partA_check_exact(g, p.alpha));
    if (do_b) add(partB_check_exact(g, p));
  } else if (a.mode == "sampled") {
    if (do_a) {
      auto v = partA_check_sampled(g, p.alpha, a.trials, rng);
      add(v);
      verdicts.back()["trials"] = a.trials;
      verdicts.back()["std_error"] = nullptr;
    }
    if (do_b) throw std::invalid_argument("part B has no sampled mode; use exact or sufficient");
  } else if (a.mode == "sufficient") {
    if (do_a) {
      auto s = eigen_summary(g);
      LogScalar cert = partA_certified_alpha(g, s.lambda);
      bool ok = p.alpha <= cert;
      verdicts.push_back({{"part", "A"},
                          {"mode", "sufficient"},
                          {"verdict", to_string(ok ? Verdict::Pass : Verdict::Inconclusive)},
                          {"certified_alpha", log_json(cert)},
                          {"exact", true}});
    }
    if (do_b) add(partB_spectral_sufficient(g));
  } else {
    throw std::invalid_argument("--mode must be exact, sampled or sufficient");
  }
  r.result = {{"n", g.n()},
              {"d", g.d()},
              {"params", {{"alpha", log_json(p.alpha)}, {"eps", p.eps}, {"L", log_json(p.L)}}},
              {"verdicts", verdicts}};
  r.exit_code = failed ? kFalsified : kOk;
  return r;
}

struct GammaArgs {
  std::string in, norm;
  double p = 2.0;
  int k = 1, restarts = 4, base = 0;
  double budget = 1e5;
  std::uint64_t seed = 0;
};

inline Report run_gamma(const GammaArgs& a) {
  Report r;
  r.spec = {{"in", a.in},         {"norm", a.norm}, {"p", a.p},       {"k", a.k}, {"budget", a.budget},
            {"restarts", a.restarts}, {"seed", a.seed}, {"base", a.base}};
  RegularGraph g = load_graph(a.in, a.base);
  UncondNorm nm = load_norm(a.norm);
  Rng rng(a.seed);
  SearchOptions opt;
  opt.restarts = a.restarts;
  auto rep = gamma_search(g, PoincareQuery{nm, a.p}, a.k, static_cast<long long>(a.budget), rng, nullptr, opt);
  r.result = {{"n", g.n()},
              {"d", g.d()},
              {"ratio", num(rep.ratio)},
              {"numerator", rep.numerator},
              {"denominator", rep.denominator},
              {"lower_bound", true},
              {"exact", false},
              {"trials", rep.evaluations},
              {"std_error", nullptr}};
  if (nm.kind() == UncondNorm::Kind::Lq && nm.q() == 2.0 && a.p == 2.0) {
    auto sc = gamma_scalar_l2_exact(g);
    r.result["scalar_l2"] = {{"certified", num(sc.certified)},
                             {"closed_form", num(sc.closed_form)},
                             {"lambda2", sc.lambda2},
                             {"exact", true}};
  }
  return r;
}

struct CertifyArgs {
  std::string in, field, norm, alpha_mode = "both", json_out;
  double q = 2.0, C = 1.0, p = 1.0;
  bool force_selection = false;
  int base = 0;
};

inline Report run_certify(const CertifyArgs& a) {
  Report r;
  r.spec = {{"in", a.in},       {"f", a.field},         {"norm", a.norm},
            {"q", a.q},         {"C", a.C},             {"alpha_mode", a.alpha_mode},
            {"p", a.p},         {"force_selection", a.force_selection}, {"seed", nullptr},
            {"base", a.base}};
  RegularGraph g = load_graph(a.in, a.base);
  VectorField f = field_from_rows(parse_matrix_csv(read_file(a.field)));
  UncondNorm nm = load_norm(a.norm);
  std::vector<ParamMode> modes;
  if (a.alpha_mode == "paper" || a.alpha_mode == "both") modes.push_back(ParamMode::Nominal);
  if (a.alpha_mode == "fitted" || a.alpha_mode == "both") modes.push_back(ParamMode::Fitted);
  if (modes.empty()) throw std::invalid_argument("--alpha-mode must be paper, fitted or both");
  CertOptions opt;
  opt.greedy.force_selection = a.force_selection;
  json runs = json::array();
  bool all = true;
  for (ParamMode m : modes) {
    auto rep = certify(g, f, nm, a.q, a.C, choose_params(g, m), a.p, opt);
    all &= rep.all_passed();
    runs.push_back(cert_json(rep));
  }
  r.result = {{"runs", runs}, {"all_passed", all}};
  r.exit_code = all ? kOk : kFalsified;
  return r;
}

struct CotypeArgs {
  std::string norm, vectors;
  double q = 2.0;
  std::optional<double> C;
  long long trials = 100000;
  std::uint64_t seed = 0;
};

inline Report run_cotype(const CotypeArgs& a) {
  Report r;
  r.spec = {{"norm", a.norm}, {"vectors", a.vectors}, {"q", a.q}, {"trials", a.trials}, {"seed", a.seed}};
  if (a.C) r.spec["C"] = *a.C;
  UncondNorm nm = load_norm(a.norm);
  VectorList xs = parse_matrix_csv(read_file(a.vectors));
  if (static_cast<int>(xs.size()) <= kCotypeExactMaxM) {
    r.result = cotype_json(cotype_constant_exact(nm, xs, a.q));
    r.result["exact"] = true;
  } else {
    Rng rng(a.seed);
    auto est = cotype_constant_montecarlo(nm, xs, a.q, a.trials, rng);
    r.result = cotype_json(est.value);
    r.result["exact"] = false;
    r.result["trials"] = est.trials;
    r.result["std_error"] = est.std_error;
  }
  r.result["m"] = xs.size();
  if (a.C) {
    Rng rng(a.seed);
    auto v = restricted_cotype_check(nm, xs, a.q, *a.C, a.trials, rng);
    r.result["restricted"] = {{"verdict", to_string(v.verdict)}, {"exact", v.exact},
                              {"subsets_checked", v.subsets_checked}, {"witness", v.witness}};
    if (v.verdict == Verdict::Fail) r.exit_code = kFalsified;
  }
  return r;
}

struct ConstantsArgs {
  std::string id, alpha = "0", L = "1", baseline;
  double q = 2.0, C = 1.0, K = 1.0, eps = 1.0, lambda2 = 0.0;
  int d = 3;
  long long i = 1;
  bool identities = false;
};

inline Report run_constants(const ConstantsArgs& a) {
  Report r;
  r.spec = {{"id", a.id}, {"q", a.q}, {"C", a.C},   {"K", a.K},   {"d", a.d},     {"alpha", a.alpha},
            {"eps", a.eps}, {"L", a.L}, {"i", a.i}, {"lambda2", a.lambda2}, {"identities", a.identities},
            {"baseline", a.baseline}, {"seed", nullptr}};
  r.result = json::object();
  if (!a.id.empty()) {
    ConstantParams p;
    p.q = a.q;
    p.C = a.C;
    p.K = a.K;
    p.d = a.d;
    p.alpha = parse_alpha(a.alpha, a.d);
    p.eps = a.eps;
    p.L = a.L == "paper" ? L_nominal(a.d) : LogScalar::from_double(std::stod(a.L));
    p.i = a.i;
    p.lambda2 = a.lambda2;
    ConstantTag tag = parse_constant_tag(a.id);
    LogScalar v = eval_constant({tag, p});
    r.result = log_json(v);
    r.result["id"] = a.id;
    r.result["exact"] = true;
    if (std::isfinite(v.to_double()) && v.to_double() != 0.0) r.result["value"] = v.to_double();
    if (tag == ConstantTag::L0) r.result["value"] = L0_constant();
  }
  if (a.identities) {
    auto rep = identity_checks();
    json checks = json::array();
    for (const auto& c : rep.checks) checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    r.result["identities"] = {{"all_passed", rep.all_passed()}, {"checks", checks}};
    if (!rep.all_passed()) r.exit_code = kFalsified;
  }
  if (!a.baseline.empty()) {
    json rows = json::array();
    for (const auto& row : baseline_comparison(parse_list(a.baseline), a.d, a.lambda2, a.C, a.K))
      rows.push_back({{"q", row.q}, {"ln_gamma", row.ln_gamma}, {"ln_os_i", row.ln_os_i}, {"ln_os_ii", row.ln_os_ii}});
    r.result["baseline"] = rows;
  }
  if (a.id.empty() && !a.identities && a.baseline.empty())
    throw std::invalid_argument("constants: give --id, --identities or --baseline");
  return r;
}

struct UcSweepArgs {
  int d = 6, samples = 1, jobs = 1;
  std::string n_list, q_list = "2,4,8", csv;
  std::uint64_t seed = 0;
  double C = 20.0, K = 20.0, distortion = 1.0;
};

inline const std::vector<std::string>& uc_result_columns() {
  static const std::vector<std::string> cols = {"avg_dist",       "avg_dist_distinct", "log_d_n", "edge_avg",
                                                "q_lower_bound",  "ln_q_bound_raw",    "lambda2", "ln_gamma"};
  return cols;
}

inline std::string uc_sweep_csv(const UcSweepArgs& a) {
  std::vector<GridPoint> grid;
  std::uint64_t idx = 0;
  for (double n : parse_list(a.n_list))
    for (int s = 0; s < a.samples; ++s, ++idx)
      grid.push_back({{"n", static_cast<int>(n)}, {"d", a.d}, {"sample", s}, {"seed", a.seed}, {"stream", idx}});
  const auto qs = parse_list(a.q_list);
  UcParams up;
  up.C = a.C;
  up.K = a.K;
  up.distortion = a.distortion;
  Rng root(a.seed);
  return sweep({"n", "d", "sample", "seed", "stream"}, uc_result_columns(), grid,
               [&](const GridPoint& pt) {
                 Rng rng = root.split(pt.at("stream").get<std::uint64_t>());
                 auto g = sample_simple_regular(pt.at("n").get<int>(), a.d, rng).graph;
                 auto row = uc_row(g, qs, up);
                 std::string lg;
                 for (const auto& [q, v] : row.ln_gamma) lg += (lg.empty() ? "" : ";") + shortest(q) + ":" + shortest(v);
                 return json{{"avg_dist", row.avg_dist},
                             {"avg_dist_distinct", row.avg_dist_distinct},
                             {"log_d_n", row.log_d_n},
                             {"edge_avg", row.edge_avg},
                             {"q_lower_bound", row.q_lower_bound},
                             {"ln_q_bound_raw", row.ln_q_bound_raw},
                             {"lambda2", extremal_summary(g).lambda2},
                             {"ln_gamma", lg}};
               },
               a.jobs);
}

inline Report run_uc_sweep(const UcSweepArgs& a) {
  Report r;
  r.spec = {{"d", a.d}, {"n", a.n_list}, {"samples", a.samples}, {"q", a.q_list},
            {"seed", a.seed}, {"C", a.C}, {"K", a.K}, {"distortion", a.distortion}, {"csv", a.csv}};
  std::string text = uc_sweep_csv(a);
  if (!a.csv.empty()) write_file(a.csv, text);
  r.result = {{"rows", std::count(text.begin(), text.end(), '\n') - 1}, {"csv", a.csv}, {"exact", true}};
  return r;
}

// ------------------------------------------------------------- dispatch

inline std::string format_report(const Report& r, const std::string& sub) { return r.to_json(sub).dump(2) + "\n"; }

// Parses argv, runs one subcommand, writes the report. Returns the exit code.
int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr);

}  // namespace gapcert::cli
