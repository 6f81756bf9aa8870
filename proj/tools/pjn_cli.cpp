// Command-line front end. Every command prints one JSON report; the exit
// status is 0 when all exact checks pass, 1 on an exact-check failure, 2 on a
// usage or range error and 3 on I/O or format errors.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pjn/acceptance.hpp"
#include "pjn/candidates.hpp"
#include "pjn/chains.hpp"
#include "pjn/czdecomp.hpp"
#include "pjn/error.hpp"
#include "pjn/field.hpp"
#include "pjn/field_io.hpp"
#include "pjn/json_io.hpp"
#include "pjn/oscillation.hpp"
#include "pjn/packing.hpp"
#include "pjn/report.hpp"

namespace {

using nlohmann::json;
using namespace pjn;

constexpr const char* kVersion = "0.1.0";

struct RunConfig {
  std::string command;
  std::string config;
  std::string field;
  std::string out;
  std::string report;

  int n = 1;
  double p = 2.0;
  std::string preset = "random_cells";
  std::vector<double> lo;
  std::vector<double> hi;
  std::vector<std::size_t> resolution;
  double a = 0.0;
  double jump = 4.0;
  double step_time = 0.0;
  bool nonincreasing = false;
  double slope = 1.0;
  std::vector<double> spike;
  double cap = 1e3;

  double gamma = 0.25;
  double alpha = 0.5;
  double rho = NAN;  // unset: gamma
  double sigma = NAN;
  double q = 2.0;
  double r = 1.0;
  double s = 1.0;

  int scales = 3;
  std::vector<std::size_t> stride;
  std::string mode = "auto";

  std::vector<double> center;
  double center_t = 0.0;
  double edge = 0.0;
  std::optional<double> c;
  std::vector<double> point;

  double lambda = 0.0;
  double delta = 0.0;
  int lambdas = 24;
  int max_depth = 4;
  double min_cells = 2.0;
  bool tree = false;
  bool full = false;

  std::size_t samples = 32;
  std::uint64_t seed = 0;
  std::vector<int> only;
};

json config_echo(const RunConfig& c) {
  json j{{"command", c.command}, {"n", c.n},         {"p", c.p},         {"gamma", c.gamma}, {"alpha", c.alpha},
         {"rho", c.rho},         {"sigma", c.sigma}, {"q", c.q},         {"r", c.r},         {"s", c.s},
         {"scales", c.scales},   {"mode", c.mode},   {"seed", c.seed},   {"samples", c.samples}};
  if (!c.field.empty()) j["field"] = c.field;
  else j["preset"] = c.preset;
  if (!c.stride.empty()) j["stride"] = c.stride;
  return j;
}

void add_options(CLI::App* sub, RunConfig& c) {
  sub->add_option("--config", c.config, "JSON file with option values; command-line flags win");
  sub->add_option("--field", c.field, "field file (otherwise one is generated from the preset options)");
  sub->add_option("--report", c.report, "write the JSON report here instead of stdout");

  sub->add_option("--n", c.n, "spatial dimension");
  sub->add_option("--p", c.p, "parabolic exponent");
  sub->add_option("--preset", c.preset, "generator: constant|time_step|time_ramp|random_cells|log_spike");
  sub->add_option("--lo", c.lo, "domain lower corner (n+1 values)");
  sub->add_option("--hi", c.hi, "domain upper corner (n+1 values)");
  sub->add_option("--resolution", c.resolution, "cells per axis (n+1 values)");
  sub->add_option("--a", c.a, "constant preset value");
  sub->add_option("--jump", c.jump, "time_step jump");
  sub->add_option("--step-time", c.step_time, "time_step location");
  sub->add_flag("--nonincreasing", c.nonincreasing, "time_step decreases in time");
  sub->add_option("--slope", c.slope, "time_ramp slope");
  sub->add_option("--spike", c.spike, "log_spike point (n+1 values)");
  sub->add_option("--cap", c.cap, "log_spike clamp");

  sub->add_option("--gamma", c.gamma, "time lag of the norm");
  sub->add_option("--alpha", c.alpha, "decomposition lag");
  sub->add_option("--rho", c.rho, "target lag of the upper part (default gamma)");
  sub->add_option("--sigma", c.sigma, "target lag of the lower part (default gamma)");
  sub->add_option("--q", c.q, "packing exponent");
  sub->add_option("--r", c.r, "oscillation exponent");
  sub->add_option("--s", c.s, "second oscillation exponent");

  sub->add_option("--scales", c.scales, "candidate ladder scales");
  sub->add_option("--stride", c.stride, "candidate center stride per axis, in cells");
  sub->add_option("--mode", c.mode, "packing mode: greedy|exact|auto");

  sub->add_option("--center", c.center, "rectangle spatial center");
  sub->add_option("--center-t", c.center_t, "rectangle time center");
  sub->add_option("--edge", c.edge, "rectangle edge L (0 selects the largest rectangle centered in the domain)");
  sub->add_option("--c", c.c, "evaluate the oscillation at this constant");
  sub->add_option("--point", c.point, "query point (n+1 values)");

  sub->add_option("--lambda", c.lambda, "level (0 selects half the largest excess over c_R0)");
  sub->add_option("--delta", c.delta, "lower level of the good-lambda check (0 selects lambda/2)");
  sub->add_option("--lambdas", c.lambdas, "points of the geometric lambda ladder");
  sub->add_option("--max-depth", c.max_depth, "decomposition depth limit");
  sub->add_option("--min-cells", c.min_cells, "smallest piece width in cells that may still be cut");
  sub->add_flag("--tree", c.tree, "include every decomposition node");
  sub->add_flag("--full", c.full, "include every chain rectangle");

  sub->add_option("--samples", c.samples, "random chain sources in addition to corners and center");
  sub->add_option("--seed", c.seed, "random seed");
  sub->add_option("--only", c.only, "acceptance criteria to run (default all)");
}

/// Options from the config file fill only what the command line left unset.
void apply_config_file(CLI::App* sub, const std::string& path) {
  std::ifstream is(path);
  if (!is) throw FormatError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(is);
  } catch (const json::exception& e) {
    throw FormatError(std::string("config file is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw FormatError("config file must hold a JSON object");
  auto text = [](const json& v) -> std::string {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    return v.dump();
  };
  for (auto& [key, value] : j.items()) {
    if (key == "config") continue;
    CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (opt == nullptr) throw CLI::ValidationError("config file", "unknown option '" + key + "'");
    if (opt->count() > 0) continue;
    if (value.is_array()) {
      for (auto& v : value) opt->add_result(text(v));
    } else {
      opt->add_result(text(value));
    }
    opt->run_callback();
  }
}

GridField field_of(const RunConfig& c) {
  if (!c.field.empty()) return load_field(c.field);
  const GeometryParams geo(c.n, c.p);
  const std::size_t d = static_cast<std::size_t>(c.n) + 1;
  std::vector<double> lo = c.lo.empty() ? std::vector<double>(d, -1.0) : c.lo;
  std::vector<double> hi = c.hi.empty() ? std::vector<double>(d, 1.0) : c.hi;
  std::vector<std::size_t> res = c.resolution;
  if (res.empty()) {
    res.assign(d, 16);
    res.back() = 64;
  }
  if (lo.size() != d || hi.size() != d || res.size() != d)
    throw RangeError("--lo, --hi and --resolution need n+1 values each");
  GeneratorParams gp;
  gp.a = c.a;
  gp.jump = c.jump;
  gp.step_time = c.step_time;
  gp.nonincreasing = c.nonincreasing;
  gp.slope = c.slope;
  gp.spike = c.spike;
  gp.cap = c.cap;
  return generate(c.preset, gp, Box(lo, hi), res, geo, c.seed);
}

/// The rectangle given by --center/--center-t/--edge, or the largest one
/// centered in the field domain.
ParabolicRectangle rectangle_of(const RunConfig& c, const GridField& f) {
  const Box& d = f.domain();
  if (c.edge > 0.0) {
    std::vector<double> cx = c.center;
    if (cx.empty()) {
      for (std::size_t a = 0; a + 1 < d.dims(); ++a) cx.push_back(0.5 * (d.lo[a] + d.hi[a]));
    }
    if (cx.size() + 1 != d.dims()) throw RangeError("--center needs n values");
    ParabolicRectangle R(cx, c.center_t, c.edge, f.params());
    if (!f.inside(R.box())) throw DomainError("rectangle leaves the field domain");
    return R;
  }
  std::vector<double> cx;
  for (std::size_t a = 0; a + 1 < d.dims(); ++a) cx.push_back(0.5 * (d.lo[a] + d.hi[a]));
  return ParabolicRectangle(cx, 0.5 * (d.t_lo() + d.t_hi()), largest_fitting_edge(d, f.params().p), f.params());
}

CandidateLadder ladder_of(const RunConfig& c) {
  CandidateLadder l;
  l.scales = c.scales;
  l.stride = c.stride;
  return l;
}

double default_lambda(const GridField& f, double c_R0) {
  double spread = 0.0;
  for (double v : f.values()) spread = std::max(spread, v - c_R0);
  return spread > 0.0 ? 0.5 * spread : 1.0;
}

std::vector<double> lambda_ladder(const GridField& f, int count) {
  double spread = 0.0;
  for (double v : f.values()) spread = std::max(spread, std::abs(v));
  return geometric_ladder(1e-3 * (spread + 1.0), 4.0 * (spread + 1.0), count);
}

struct Outcome {
  json result = json::object();
  CheckList checks;
  bool extra_failure = false;
};

Outcome cmd_gen(const RunConfig& c) {
  if (c.out.empty()) throw RangeError("gen needs --out");
  const GridField f = field_of(c);
  save_field(c.out, f);
  Outcome o;
  o.result = {{"path", c.out}, {"header", field_header(f)}};
  return o;
}

Outcome cmd_osc(const RunConfig& c) {
  const GridField f = field_of(c);
  const ParabolicRectangle R = rectangle_of(c, f);
  const OscParams op(TimeLag(c.gamma), c.r);
  Outcome o;
  o.result = {{"rectangle", to_json(R)}, {"optimal", to_json(optimal_constant(f, R, op))}};
  if (c.c) {
    o.result["at_c"] = {{"c", *c.c}, {"oscillation", oscillation(f, R, op, *c.c)},
                        {"alt_oscillation", alt_oscillation(f, R, op, *c.c)}};
  }
  return o;
}

Outcome cmd_norm(const RunConfig& c) {
  const GridField f = field_of(c);
  const auto cands = enumerate_candidates(f, f.domain(), ladder_of(c));
  const JnParams jp(TimeLag(c.gamma), c.r, c.q);
  const NormValue pb = pbmo_norm(f, cands, jp.osc());
  const JnResult jn = pjnq_norm(f, cands, jp, parse_packing_mode(c.mode));
  const EmbeddingReport emb = pbmo_embedding_check(f, cands, jp);
  Outcome o;
  o.result = {{"candidate_count", cands.size()}, {"pbmo", pb.value}, {"pjn", packing_json(jn, cands)}};
  if (pb.argmax) o.result["pbmo_argmax"] = to_json(cands[*pb.argmax]);
  o.checks = emb.checks;
  return o;
}

Outcome cmd_sharp(const RunConfig& c) {
  const GridField f = field_of(c);
  const ParabolicRectangle R0 = rectangle_of(c, f);
  if (c.point.size() != f.dims()) throw RangeError("--point needs n+1 values");
  const auto cands = enumerate_candidates(f, R0.box(), ladder_of(c));
  const NormValue v = sharp_maximal(f, c.point, R0, cands, OscParams(TimeLag(c.gamma), c.r));
  Outcome o;
  o.result = {{"point", c.point}, {"R0", to_json(R0)}, {"value", v.value}, {"candidate_count", cands.size()}};
  if (v.argmax) o.result["argmax"] = to_json(cands[*v.argmax]);
  else o.result["argmax"] = nullptr;
  return o;
}

CZParams cz_params_of(const RunConfig& c) {
  return CZParams(TimeLag(c.gamma), c.alpha, c.r, c.q, c.max_depth, c.min_cells);
}

Outcome cmd_cz(const RunConfig& c) {
  const GridField f = field_of(c);
  const ParabolicRectangle R0 = rectangle_of(c, f);
  const CZParams params = cz_params_of(c);
  const double c0 = optimal_constant(f, R0, params.osc()).c_star;
  const double lam = c.lambda > 0.0 ? c.lambda : default_lambda(f, c0);
  const CZSelection sel = cz_select(f, R0, params, lam);
  Outcome o;
  o.result = to_json(sel, c.tree);
  o.checks = check_structure(f, sel);
  return o;
}

ChainParams chain_params_of(const RunConfig& c) { return ChainParams(c.gamma, c.alpha, c.rho, c.sigma, c.q, c.r); }

Outcome cmd_chain(const RunConfig& c) {
  const ChainParams cp = chain_params_of(c);
  const GridField f = field_of(c);
  const ParabolicRectangle R0 = rectangle_of(c, f);
  const ChainM m = chain_m(R0.p(), cp.alpha, cp.rho, cp.sigma);
  const UGrid grid(R0, cp.rho, m.m, cp.alpha);
  const double norm = desk_norm_in(f, R0, cp.jn_alpha(), ladder_of(c)).norm;
  Outcome o;
  o.result = {{"m", m.m},
              {"epsilon", m.eps},
              {"expression", m.expr},
              {"slabs", grid.slabs()},
              {"tau", grid.tau()},
              {"central", to_json(central_rectangle(grid))},
              {"sampling", "corners, center and seeded random sources"}};
  o.checks.add(central_containment(grid, cp));
  json chains = json::array();
  for (auto [i, j] : sample_sources(grid, c.samples, c.seed)) {
    const Chain ch = build_chain(grid, i, j);
    CheckList cl = check_chain(grid, ch, cp);
    const TelescopeReport tr = telescope_bound(f, ch, cp, norm);
    cl.append(tr.checks);
    json cj = to_json(ch, c.full);
    cj["eta_min"] = [&] {
      double e = 1.0;
      for (std::uint64_t k = 1; k < ch.length(); ++k) {
        const Box up = ch.upper(k);
        e = std::min(e, intersection_measure(up, ch.lower(k - 1)) / up.measure());
      }
      return e;
    }();
    cj["telescope_lines"] = tr.lines;
    cj["checks"] = cl.to_json();
    cj["verdict"] = cl.exact_pass() ? "pass" : "fail";
    chains.push_back(cj);
    for (auto& chk : cl.checks) {
      if (chk.tag == CheckTag::exact && !chk.pass) o.extra_failure = true;
    }
  }
  o.result["chains"] = chains;
  return o;
}

Outcome cmd_constants(const RunConfig& c) {
  Outcome o;
  const ConstantsReport cz = cz_constants(c.n, c.p, c.q, c.r, c.gamma, c.alpha);
  o.result["decomposition"] = to_json(cz);
  if (c.gamma > 0.0) {
    const ChainParams cp = chain_params_of(c);
    const ChainM m = chain_m(c.p, cp.alpha, cp.rho, cp.sigma);
    o.result["chain_m"] = {{"m", m.m}, {"epsilon", m.eps}, {"expression", m.expr}};
    o.result["lag_change"] = to_json(lag_change_constants(c.n, c.p, cp));
  }
  o.result["c0"] = lag_equivalence_c0(std::min(c.r, c.s), std::max(c.r, c.s));
  return o;
}

Outcome cmd_verify(const RunConfig& c) {
  const GridField f = field_of(c);
  const ParabolicRectangle R0 = rectangle_of(c, f);
  const CZParams params = cz_params_of(c);
  const JnParams jp(TimeLag(c.gamma), c.r, c.q);
  const auto cands = enumerate_candidates(f, f.domain(), ladder_of(c));
  Outcome o;

  const EmbeddingReport emb = pbmo_embedding_check(f, cands, jp);
  o.checks.append(emb.checks);

  const double norm = desk_norm_in(f, R0, jp, ladder_of(c), parse_packing_mode(c.mode)).norm;
  const WeakTypeReport wt = verify_weak_type(f, R0, params, lambda_ladder(f, c.lambdas), norm);
  o.checks.append(wt.checks);
  o.result["weak_type"] = {{"norm", norm},
                           {"c_R0", wt.c_R0},
                           {"max_plus_ratio", json_number(wt.max_plus_ratio)},
                           {"max_minus_ratio", json_number(wt.max_minus_ratio)},
                           {"constants", to_json(wt.constants)},
                           {"candidate_set_insufficient", wt.candidate_set_insufficient}};

  const double lam = c.lambda > 0.0 ? c.lambda : default_lambda(f, wt.c_R0);
  const CZSelection sel = cz_select(f, R0, params, lam);
  o.checks.append(check_structure(f, sel));
  const double delta = c.delta > 0.0 ? c.delta : 0.5 * lam;
  const GoodLambdaReport gl = verify_good_lambda(f, R0, params, lam, delta, norm);
  o.checks.append(gl.checks);
  o.result["good_lambda"] = {{"lambda", lam},          {"delta", delta},         {"lambda0", gl.lambda0},
                             {"S_lambda", gl.s_lambda}, {"S_scaled", gl.s_scaled}, {"S_delta", gl.s_delta},
                             {"vitali_inputs", gl.vitali_inputs}, {"vitali_kept", gl.vitali_kept}};

  if (c.gamma > 0.0) {
    const ChainParams cp = chain_params_of(c);
    const double norm_gamma = desk_norm_in(f, R0, cp.jn_gamma(), ladder_of(c), parse_packing_mode(c.mode)).norm;
    const LagChangeReport lc = verify_lag_change(f, R0, cp, lambda_ladder(f, c.lambdas), {c.samples, c.seed}, norm_gamma);
    o.checks.append(lc.checks);
    o.result["lag_change"] = {{"m", lc.m.m},
                              {"c_central", lc.c_central},
                              {"threshold", lc.threshold},
                              {"max_plus_ratio", json_number(lc.max_plus_ratio)},
                              {"max_minus_ratio", json_number(lc.max_minus_ratio)},
                              {"chains_checked", lc.chains_checked},
                              {"sampling", "corners, center and seeded random sources"},
                              {"constants", to_json(lc.constants)}};
    if (c.rho > 0.0 && c.r <= c.s && c.s < c.q) {
      const LagEquivalenceReport le = verify_lag_equivalence(f, c.gamma, c.rho, c.r, c.s, c.q, cands,
                                                             parse_packing_mode(c.mode));
      o.checks.append(le.checks);
      o.result["lag_equivalence"] = {{"c0", le.c0},
                                     {"norm_gamma_r", le.norm_gamma_r},
                                     {"norm_rho_s", le.norm_rho_s},
                                     {"max_per_candidate_ratio", le.max_per_candidate_ratio}};
    } else {
      o.result["lag_equivalence"] = "skipped: needs rho > 0 and r <= s < q";
    }
  } else {
    o.result["lag_change"] = "skipped: needs gamma > 0";
  }
  return o;
}

Outcome cmd_accept(const RunConfig& c) {
  acceptance::Config cfg;
  if (c.seed != 0) cfg.seed = c.seed;
  Outcome o;
  json rows = json::array();
  for (const auto& r : acceptance::run_all(cfg, c.only)) {
    json row = acceptance::to_json(r);
    row.erase("seconds");  // timing lives in the timing block
    rows.push_back(row);
    o.result["timing_by_criterion"][std::to_string(r.id)] = r.seconds;
    if (!r.pass) o.extra_failure = true;
  }
  o.result["criteria"] = rows;
  return o;
}

Outcome dispatch(const RunConfig& c) {
  if (c.command == "gen") return cmd_gen(c);
  if (c.command == "osc") return cmd_osc(c);
  if (c.command == "norm") return cmd_norm(c);
  if (c.command == "sharp") return cmd_sharp(c);
  if (c.command == "cz") return cmd_cz(c);
  if (c.command == "chain") return cmd_chain(c);
  if (c.command == "constants") return cmd_constants(c);
  if (c.command == "verify") return cmd_verify(c);
  if (c.command == "accept") return cmd_accept(c);
  throw RangeError("unknown command '" + c.command + "'");
}

int emit(const json& report, const std::string& path) {
  const std::string text = report.dump(2) + "\n";
  if (path.empty()) {
    std::cout << text;
    return 0;
  }
  std::ofstream os(path);
  if (!os || !(os << text)) {
    std::cerr << "error: cannot write report to '" << path << "'\n";
    return 3;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parabolic John-Nirenberg desk toolkit"};
  app.require_subcommand(1);
  RunConfig cfg;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"gen", "generate a field file"},
      {"osc", "oscillation and minimal constant on one rectangle"},
      {"norm", "desk PBMO and PJN norms with the achieving packing"},
      {"sharp", "sharp maximal function lower bound at a point"},
      {"cz", "stopping-time selection with structural checks"},
      {"chain", "chain construction with invariants and telescoping lines"},
      {"constants", "constant chains in log2"},
      {"verify", "all inequality checks on one field"},
      {"accept", "acceptance suite"}};
  std::vector<CLI::App*> subs;
  for (auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    add_options(sub, cfg);
    if (name == "gen") sub->add_option("--out", cfg.out, "field file to write")->required();
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
    for (CLI::App* sub : subs) {
      if (sub->parsed()) {
        cfg.command = sub->get_name();
        if (!cfg.config.empty()) apply_config_file(sub, cfg.config);
        if (std::isnan(cfg.rho)) cfg.rho = cfg.gamma;
        if (std::isnan(cfg.sigma)) cfg.sigma = cfg.gamma;
      }
    }
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }

  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = dispatch(cfg);
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const bool exact_ok = out.checks.exact_pass() && !out.extra_failure;
  json report{{"command", cfg.command},
              {"config", config_echo(cfg)},
              {"result", out.result},
              {"checks", out.checks.to_json()},
              {"exact_failures", out.checks.failures(CheckTag::exact)},
              {"diagnostic_failures", out.checks.failures(CheckTag::diagnostic)},
              {"status", exact_ok ? "pass" : "fail"},
              {"timing", {{"seconds", seconds}}},
              {"versions", {{"pjn", kVersion},
                            {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                                  std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                                  std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                            {"cli11", CLI11_VERSION}}}};
  if (const int io = emit(report, cfg.report); io != 0) return io;
  return exact_ok ? 0 : 1;
}
