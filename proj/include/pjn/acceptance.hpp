#pragma once

// The acceptance suite: ten property checks at desk scale, each with a pinned
// tolerance and a runtime budget. Shared by the acceptance test binary and the
// `accept` command of the CLI.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pjn/candidates.hpp"
#include "pjn/chains.hpp"
#include "pjn/czdecomp.hpp"
#include "pjn/field.hpp"
#include "pjn/field_io.hpp"
#include "pjn/geometry.hpp"
#include "pjn/oscillation.hpp"
#include "pjn/packing.hpp"
#include "pjn/parallel.hpp"
#include "pjn/testing/oracles.hpp"

namespace pjn::acceptance {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  double seconds = 0.0;
  double budget = 0.0;
  std::string detail;
  std::vector<std::string> exercised;
};

inline nlohmann::json to_json(const CriterionResult& r) {
  return nlohmann::json{{"id", r.id},         {"name", r.name},   {"verdict", r.pass ? "pass" : "fail"},
                        {"seconds", r.seconds}, {"budget_seconds", r.budget}, {"detail", r.detail},
                        {"exercised", r.exercised}};
}

struct Config {
  std::uint64_t seed = 20240601;
};

namespace detail {

inline Box unit_domain() { return Box({-1.0, -1.0}, {1.0, 1.0}); }
inline std::vector<std::size_t> desk_resolution() { return {16, 64}; }

inline GridField random_field(std::uint64_t seed, double p = 2.0) {
  return generate("random_cells", {}, unit_domain(), desk_resolution(), GeometryParams(1, p), seed);
}

/// A mix of generators for suites that want more than white noise.
inline GridField mixed_field(std::size_t k, std::uint64_t seed, double p = 2.0) {
  GeneratorParams gp;
  const GeometryParams geo(1, p);
  switch (k % 4) {
    case 0:
      return generate("random_cells", gp, unit_domain(), desk_resolution(), geo, seed);
    case 1: {
      std::mt19937_64 rng(seed);
      gp.spike = {2.0 * unit_from_bits(rng()) - 1.0, 2.0 * unit_from_bits(rng()) - 1.0};
      gp.cap = 6.0;
      return generate("log_spike", gp, unit_domain(), desk_resolution(), geo, seed);
    }
    case 2: {
      std::mt19937_64 rng(seed);
      gp.step_time = 1.6 * unit_from_bits(rng()) - 0.8;
      gp.jump = 1.0 + 3.0 * unit_from_bits(rng());
      const GridField step = generate("time_step", gp, unit_domain(), desk_resolution(), geo, seed);
      const GridField noise = generate("random_cells", {}, unit_domain(), desk_resolution(), geo, seed + 1);
      return combine(step, noise, [](double a, double b) { return a + 0.25 * b; });
    }
    default: {
      gp.slope = 2.0;
      const GridField ramp = generate("time_ramp", gp, unit_domain(), desk_resolution(), geo, seed);
      const GridField noise = generate("random_cells", {}, unit_domain(), desk_resolution(), geo, seed + 7);
      return combine(ramp, noise, [](double a, double b) { return a + 0.5 * b; });
    }
  }
}

/// Pairwise-disjoint family drawn greedily from the candidates in seeded order.
inline std::vector<ParabolicRectangle> random_packing(const std::vector<ParabolicRectangle>& cands, std::uint64_t seed,
                                                      std::size_t max_size) {
  std::vector<std::size_t> order(cands.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<ParabolicRectangle> out;
  for (auto i : order) {
    if (out.size() >= max_size) break;
    const Box b = cands[i].box();
    if (std::all_of(out.begin(), out.end(), [&](const ParabolicRectangle& R) { return disjoint(R.box(), b); }))
      out.push_back(cands[i]);
  }
  return out;
}

inline std::vector<ParabolicRectangle> desk_candidates(const GridField& f) {
  CandidateLadder ladder;
  ladder.scales = 3;
  return enumerate_candidates(f, f.domain(), ladder);
}

/// (Σ |R+(γ)| osc^{q/r})^{1/q} over a fixed family.
inline double family_norm(const GridField& f, const std::vector<ParabolicRectangle>& fam, const JnParams& jp) {
  return std::pow(packing_value(f, fam, jp), 1.0 / jp.q);
}

inline std::vector<ParabolicRectangle> reflect_family(const std::vector<ParabolicRectangle>& fam, double pivot) {
  std::vector<ParabolicRectangle> out;
  for (auto& R : fam) out.push_back(R.reflect_time(pivot));
  return out;
}

inline bool rel_close(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max({std::abs(a), std::abs(b), 1e-300});
}

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

template <class Fn>
CriterionResult run_timed(int id, std::string name, double budget, std::vector<std::string> exercised, Fn&& body) {
  CriterionResult r;
  r.id = id;
  r.name = std::move(name);
  r.budget = budget;
  r.exercised = std::move(exercised);
  Timer t;
  std::ostringstream detail;
  bool ok = false;
  try {
    ok = body(detail);
  } catch (const std::exception& e) {
    detail << " exception: " << e.what();
    ok = false;
  }
  r.seconds = t.seconds();
  if (r.seconds >= budget) detail << " runtime " << r.seconds << "s over budget " << budget << "s;";
  r.pass = ok && r.seconds < budget;
  r.detail = detail.str();
  return r;
}

}  // namespace detail

/// 1. Norm algebra on fixed packings: translation, quasi-triangle, scaling
/// (negative factors reverse time), max/min.
inline CriterionResult norm_algebra(const Config& cfg) {
  return detail::run_timed(
      1, "norm_algebra", 60.0,
      {"translation invariance", "quasi-triangle inequality", "positive scaling", "negative scaling reverses time",
       "max/min lattice bound"},
      [&](std::ostringstream& out) {
        const GridField probe = detail::random_field(cfg.seed);
        const auto cands = detail::desk_candidates(probe);
        std::vector<std::vector<ParabolicRectangle>> packings;
        for (std::uint64_t k = 0; k < 20; ++k) packings.push_back(detail::random_packing(cands, cfg.seed + 1000 + k, 6));
        const double pivot = time_pivot(probe);
        std::vector<std::vector<ParabolicRectangle>> reflected;
        for (auto& fam : packings) reflected.push_back(detail::reflect_family(fam, pivot));

        const std::vector<JnParams> params{JnParams(TimeLag(0.25), 1.0, 2.0), JnParams(TimeLag(0.25), 0.5, 3.0)};
        constexpr std::size_t kFields = 50;
        std::vector<double> shifts(kFields), scales(kFields);
        std::mt19937_64 rng(cfg.seed + 77);
        for (std::size_t s = 0; s < kFields; ++s) {
          shifts[s] = 6.0 * unit_from_bits(rng()) - 3.0;
          scales[s] = 0.1 + 4.0 * unit_from_bits(rng());
        }
        std::vector<std::size_t> case_count(kFields, 0), fail_count(kFields, 0);
        std::vector<double> worst(kFields, 0.0);
        parallel_for(kFields, [&](std::size_t s) {
          std::size_t& cases = case_count[s];
          std::size_t& failures = fail_count[s];
          double& worst_exact = worst[s];
          const GridField f = detail::random_field(cfg.seed + s);
          const GridField g = detail::random_field(cfg.seed + 500 + s);
          const double a = shifts[s];
          const double scale = scales[s];
          const GridField f_shift = f.transformed([a](double v) { return v + a; });
          const GridField f_pos = f.transformed([scale](double v) { return scale * v; });
          const GridField f_neg = f.transformed([scale](double v) { return -scale * v; });
          const GridField f_rev = reflect_time_field(f, false);
          const GridField sum = combine(f, g, [](double x, double y) { return x + y; });
          const GridField mx = combine(f, g, [](double x, double y) { return std::max(x, y); });
          const GridField mn = combine(f, g, [](double x, double y) { return std::min(x, y); });
          for (const JnParams& jp : params) {
            const double K = std::max(std::exp2(1.0 / jp.r - 1.0), std::exp2(1.0 - 1.0 / jp.r));
            const double K4 = std::max(1.0, std::exp2(1.0 / jp.r - 1.0));
            for (std::size_t k = 0; k < packings.size(); ++k) {
              const auto& fam = packings[k];
              const double nf = detail::family_norm(f, fam, jp);
              const double ng = detail::family_norm(g, fam, jp);
              auto exact = [&](double lhs, double rhs) {
                ++cases;
                const double err = std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), 1e-300});
                if (lhs != rhs) worst_exact = std::max(worst_exact, err);
                if (!detail::rel_close(lhs, rhs, 1e-12)) ++failures;
              };
              auto bound = [&](double lhs, double rhs) {
                ++cases;
                if (!leq_slack(lhs, rhs, 1e-9)) ++failures;
              };
              exact(detail::family_norm(f_shift, fam, jp), nf);
              bound(detail::family_norm(sum, fam, jp), K * (nf + ng));
              exact(detail::family_norm(f_pos, fam, jp), scale * nf);
              exact(detail::family_norm(f_neg, fam, jp), scale * detail::family_norm(f_rev, reflected[k], jp));
              bound(detail::family_norm(mx, fam, jp), K4 * (nf + ng));
              bound(detail::family_norm(mn, fam, jp), K4 * (nf + ng));
            }
          }
        });
        std::size_t cases = 0, failures = 0;
        double worst_exact = 0.0;
        for (std::size_t s = 0; s < kFields; ++s) {
          cases += case_count[s];
          failures += fail_count[s];
          worst_exact = std::max(worst_exact, worst[s]);
        }
        out << cases << " cases, " << failures << " failures, worst relative error on exact cases " << worst_exact
            << ";";
        return failures == 0;
      });
}

/// 2. Breakpoint minimizer against a 10^4-point dense scan (r = 1).
inline CriterionResult optimal_constant_oracle(const Config& cfg) {
  return detail::run_timed(
      2, "optimal_constant_oracle", 30.0, {"minimal constant attained", "r = 1 breakpoint scan"},
      [&](std::ostringstream& out) {
        std::mt19937_64 rng(cfg.seed + 2);
        std::size_t bad_min = 0, bad_grid = 0;
        double worst_gap = 0.0;
        const OscParams op(TimeLag(0.25), 1.0);
        for (int k = 0; k < 200; ++k) {
          const GridField f = detail::mixed_field(static_cast<std::size_t>(k), cfg.seed + 3000 + k);
          const double Lmax = largest_fitting_edge(f.domain(), 2.0);
          const double L = Lmax * (0.1 + 0.9 * unit_from_bits(rng()));
          const double cx = (1.0 - L) * (2.0 * unit_from_bits(rng()) - 1.0);
          const double ht = L * L;
          const double ct = (1.0 - ht) * (2.0 * unit_from_bits(rng()) - 1.0);
          const ParabolicRectangle R({cx}, ct, L, f.params());
          const OscResult res = optimal_constant(f, R, op);
          const auto scan = testing::dense_scan(f, R, op, 10000);
          const double direct = oscillation(f, R, op, res.c_star);
          // osc is 2-Lipschitz in c, so the grid minimum is within step of the true minimum
          for (double v : scan.values) {
            if (!leq_slack(direct, v, 1e-12, 1e-14)) {
              ++bad_min;
              break;
            }
          }
          const double gap = scan.best_value - direct;
          worst_gap = std::max(worst_gap, gap);
          if (gap > 2.0 * scan.step + 1e-12) ++bad_grid;
        }
        out << "200 pairs; minimizer above some scanned value: " << bad_min << "; outside grid error: " << bad_grid
            << "; worst scan-minus-exact gap " << worst_gap << ";";
        return bad_min == 0 && bad_grid == 0;
      });
}

/// 3. Branch-and-bound against exhaustive enumeration; greedy below exact.
inline CriterionResult packing_oracle(const Config& cfg) {
  return detail::run_timed(
      3, "packing_oracle", 60.0, {"disjoint packing supremum", "greedy lower bound"}, [&](std::ostringstream& out) {
        std::mt19937_64 rng(cfg.seed + 3);
        std::size_t mismatch = 0, greedy_above = 0;
        const JnParams jp(TimeLag(0.25), 1.0, 2.0);
        for (int k = 0; k < 50; ++k) {
          const GridField f = detail::mixed_field(static_cast<std::size_t>(k), cfg.seed + 4000 + k);
          const std::size_t count = 4 + static_cast<std::size_t>(rng() % 9);  // 4..12
          std::vector<ParabolicRectangle> cands;
          while (cands.size() < count) {
            const double L = 0.15 + 0.5 * unit_from_bits(rng());
            const double cx = (1.0 - L) * (2.0 * unit_from_bits(rng()) - 1.0);
            const double ct = (1.0 - L * L) * (2.0 * unit_from_bits(rng()) - 1.0);
            cands.emplace_back(std::vector<double>{cx}, ct, L, f.params());
          }
          const auto osc = candidate_oscillations(f, cands, jp.osc());
          std::vector<double> w(cands.size());
          for (std::size_t i = 0; i < w.size(); ++i) w[i] = packing_weight(cands[i], osc[i], jp);
          const auto conflict = conflict_matrix(cands);
          const double brute = testing::exhaustive_packing(w, conflict);
          const double exact = exact_packing(w, conflict).total;
          const double greedy = greedy_packing(w, conflict).total;
          if (!detail::rel_close(brute, exact, 1e-12)) ++mismatch;
          if (!leq_slack(greedy, exact, 1e-12)) ++greedy_above;
        }
        out << "50 instances; exact != exhaustive: " << mismatch << "; greedy > exact: " << greedy_above << ";";
        return mismatch == 0 && greedy_above == 0;
      });
}

/// 4. Structural invariants of the stopping-time selection.
inline CriterionResult cz_structure(const Config& cfg) {
  return detail::run_timed(
      4, "cz_structure", 120.0,
      {"subdivision tiling", "time-length bracket", "nested associated rectangles", "measure relations",
       "disjointified lower family", "selected measure bound"},
      [&](std::ostringstream& out) {
        const CZParams params(TimeLag(0.0), 0.5, 1.0, 2.0, 3, 2.0);
        std::size_t runs = 0, failed = 0, selected = 0;
        std::string first_failure;
        for (int k = 0; k < 20; ++k) {
          const GridField f = detail::mixed_field(static_cast<std::size_t>(k), cfg.seed + 5000 + k);
          const ParabolicRectangle R0({0.0}, 0.0, 1.0, f.params());
          const double c0 = optimal_constant(f, R0, params.osc()).c_star;
          double spread = 0.0;
          for (double v : f.values()) spread = std::max(spread, v - c0);
          if (spread <= 0.0) spread = 1.0;
          for (double frac : {0.1, 0.3, 0.6}) {
            const CZSelection sel = cz_select(f, R0, params, frac * spread);
            const CheckList cl = check_structure(f, sel);
            ++runs;
            selected += sel.selected.size();
            if (!cl.exact_pass()) {
              ++failed;
              for (auto& c : cl.checks) {
                if (!c.pass && first_failure.empty()) first_failure = c.name;
              }
            }
          }
        }
        out << runs << " runs, " << selected << " selected boxes, " << failed << " runs with violations";
        if (!first_failure.empty()) out << " (first: " << first_failure << ")";
        out << ";";
        return failed == 0;
      });
}

/// 5. Weak-type ratio against the assembled constant, both time directions.
inline CriterionResult weak_type(const Config& cfg) {
  return detail::run_timed(
      5, "weak_type", 60.0, {"weak-type estimate for every lambda", "reverse-time minus side"},
      [&](std::ostringstream& out) {
        const CZParams params(TimeLag(0.0), 0.5, 1.0, 2.0);
        std::size_t failed = 0;
        double worst_log2 = -INFINITY, log2C = 0.0;
        bool caveat = true;
        for (int k = 0; k < 10; ++k) {
          const GridField f = detail::mixed_field(static_cast<std::size_t>(k), cfg.seed + 6000 + k);
          const ParabolicRectangle R0({0.0}, 0.0, 1.0, f.params());
          const double norm = desk_norm_in(f, R0, JnParams(params.gamma, params.r, params.q)).norm;
          double spread = 0.0;
          for (double v : f.values()) spread = std::max(spread, std::abs(v));
          const auto ladder = geometric_ladder(1e-3 * (spread + 1.0), 4.0 * (spread + 1.0), 24);
          const WeakTypeReport rep = verify_weak_type(f, R0, params, ladder, norm);
          log2C = rep.constants.C.log2;
          for (double ratio : {rep.max_plus_ratio, rep.max_minus_ratio}) {
            if (ratio > 0.0) worst_log2 = std::max(worst_log2, std::log2(ratio));
          }
          if (!rep.checks.exact_pass() || !std::isfinite(rep.max_plus_ratio) || !std::isfinite(rep.max_minus_ratio))
            ++failed;
          for (auto& c : rep.checks.checks) caveat = caveat && !c.note.empty();
        }
        out << "10 fields; log2 C = " << log2C << "; worst log2 ratio " << worst_log2 << "; failures " << failed
            << "; lower-bound caveat recorded: " << (caveat ? "yes" : "no") << ";";
        return failed == 0 && caveat;
      });
}

/// 6. Nonincreasing-in-time fields have zero norms and empty level sets.
inline CriterionResult monotone_zero(const Config& cfg) {
  return detail::run_timed(
      6, "monotone_zero", 10.0, {"nonincreasing fields have zero forward oscillation"},
      [&](std::ostringstream& out) {
        const GeometryParams geo(1, 2.0);
        std::vector<GridField> fields;
        GeneratorParams gp;
        gp.nonincreasing = true;
        for (double s : {-0.5, 0.0, 0.3}) {
          gp.step_time = s;
          fields.push_back(generate("time_step", gp, detail::unit_domain(), detail::desk_resolution(), geo, 0));
        }
        GeneratorParams ramp;
        ramp.slope = -1.5;
        fields.push_back(generate("time_ramp", ramp, detail::unit_domain(), detail::desk_resolution(), geo, 0));
        GeneratorParams cst;
        cst.a = 2.5;
        fields.push_back(generate("constant", cst, detail::unit_domain(), detail::desk_resolution(), geo, 0));
        // random time profile, sorted to be nonincreasing, constant in space
        const GridField noise = detail::random_field(cfg.seed + 6);
        const std::size_t nt = noise.resolution().back();
        std::vector<double> profile(noise.values().begin(), noise.values().begin() + static_cast<std::ptrdiff_t>(nt));
        std::sort(profile.begin(), profile.end(), std::greater<>());
        std::vector<double> vals(noise.values().size());
        for (std::size_t k = 0; k < vals.size(); ++k) vals[k] = profile[k % nt];
        fields.emplace_back(noise.domain(), noise.resolution(), vals, geo);

        std::size_t nonzero = 0;
        for (const GridField& f : fields) {
          const auto cands = detail::desk_candidates(f);
          for (double gamma : {0.0, 0.25, 0.5}) {
            const OscParams op(TimeLag(gamma), 1.0);
            if (pbmo_norm(f, cands, op).value != 0.0) ++nonzero;
            if (pjnq_norm(f, cands, JnParams(TimeLag(gamma), 1.0, 2.0), PackingMode::greedy).norm != 0.0) ++nonzero;
          }
          const ParabolicRectangle R0({0.0}, 0.0, 1.0, geo);
          const CZParams params(TimeLag(0.0), 0.5, 1.0, 2.0);
          const WeakTypeReport rep = verify_weak_type(f, R0, params, geometric_ladder(1e-9, 10.0, 20), 0.0);
          for (auto& row : rep.rows) {
            if (row.plus_measure != 0.0 || row.minus_measure != 0.0) ++nonzero;
          }
        }
        out << fields.size() << " fields; nonzero quantities: " << nonzero << ";";
        return nonzero == 0;
      });
}

struct ChainConfig {
  double p;
  ChainParams params;
};

inline std::vector<ChainConfig> chain_configs() {
  return {{2.0, ChainParams(0.25, 0.5, 0.25, 0.25, 2.0, 1.0)}, {4.0, ChainParams(0.09, 0.1, 0.09, 0.09, 2.0, 1.0)}};
}

/// 7. Chain construction invariants and the telescoping estimate.
inline CriterionResult chain_suite(const Config& cfg) {
  return detail::run_timed(
      7, "chain_suite", 120.0,
      {"chains end on the central rectangle", "overlap ratios", "shift fraction bound", "extension count bracket",
       "chain length bound", "central rectangle containment", "telescoping estimate"},
      [&](std::ostringstream& out) {
        std::size_t chains = 0, violations = 0, lines = 0;
        std::string first;
        for (const ChainConfig& cc : chain_configs()) {
          const GeometryParams geo(1, cc.p);
          const ParabolicRectangle R0({0.0}, 0.0, 1.0, geo);
          const ChainM m = chain_m(cc.p, cc.params.alpha, cc.params.rho, cc.params.sigma);
          const UGrid grid(R0, cc.params.rho, m.m, cc.params.alpha);
          if (!central_containment(grid, cc.params).pass) {
            ++violations;
            if (first.empty()) first = "central containment";
          }
          const auto sources = sample_sources(grid, 32, cfg.seed + 7);
          std::vector<GridField> fields;
          for (int k = 0; k < 5; ++k) fields.push_back(detail::mixed_field(static_cast<std::size_t>(k), cfg.seed + 7000 + k, cc.p));
          std::vector<double> norms;
          for (auto& f : fields) norms.push_back(desk_norm_in(f, R0, cc.params.jn_alpha()).norm);
          for (auto [i, j] : sources) {
            const Chain ch = build_chain(grid, i, j);
            ++chains;
            auto tally = [&](const CheckList& cl) {
              for (auto& c : cl.checks) {
                if (c.tag == CheckTag::exact && !c.pass) {
                  ++violations;
                  if (first.empty()) first = c.name;
                }
              }
            };
            tally(check_chain(grid, ch, cc.params));
            for (std::size_t k = 0; k < fields.size(); ++k) {
              const TelescopeReport tr = telescope_bound(fields[k], ch, cc.params, norms[k]);
              lines += tr.checks.checks.size();
              tally(tr.checks);
            }
          }
        }
        out << chains << " chains, " << lines << " telescoping line checks, " << violations << " violations";
        if (!first.empty()) out << " (first: " << first << ")";
        out << ";";
        return violations == 0;
      });
}

/// 8. Lag/exponent equivalence, per candidate and at norm level.
inline CriterionResult lag_equivalence(const Config& cfg) {
  return detail::run_timed(
      8, "lag_equivalence", 60.0, {"per-candidate Hölder step", "norm-level lag equivalence"},
      [&](std::ostringstream& out) {
        std::size_t cands_total = 0, per_fail = 0, norm_fail = 0;
        for (int k = 0; k < 10; ++k) {
          const GridField f = detail::mixed_field(static_cast<std::size_t>(k), cfg.seed + 8000 + k);
          const auto cands = detail::desk_candidates(f);
          const auto rep = verify_lag_equivalence(f, 0.5, 0.25, 0.5, 1.0, 2.0, cands);
          cands_total += rep.candidates;
          per_fail += rep.per_candidate_failures;
          for (auto& c : rep.checks.checks) {
            if (c.tag == CheckTag::exact && !c.pass && c.name != "per_candidate_holder_step") ++norm_fail;
          }
        }
        out << cands_total << " candidates, per-candidate failures " << per_fail << ", norm-level failures "
            << norm_fail << ";";
        return per_fail == 0 && norm_fail == 0;
      });
}

/// 9. The packing profile in q is nondecreasing and reaches the largest
/// oscillation at q = 64.
inline CriterionResult q_limit(const Config& cfg) {
  return detail::run_timed(
      9, "q_limit", 30.0, {"profile increasing in q", "limit q -> infinity equals the bounded-oscillation norm"},
      [&](std::ostringstream& out) {
        const std::vector<double> qs{2, 4, 8, 16, 32, 64};
        std::size_t decreasing = 0, far = 0;
        double worst_rel = 0.0;
        for (int k = 0; k < 10; ++k) {
          const GridField f = detail::mixed_field(static_cast<std::size_t>(k), cfg.seed + 9000 + k);
          const auto cands = detail::desk_candidates(f);
          const auto fam = detail::random_packing(cands, cfg.seed + 9100 + k, 8);
          const QProfile prof = q_limit_profile(f, fam, TimeLag(0.25), 1.0, qs);
          for (std::size_t i = 1; i < prof.values.size(); ++i) {
            if (!leq_slack(prof.values[i - 1], prof.values[i], 1e-12)) ++decreasing;
          }
          if (prof.limit > 0.0) {
            const double rel = std::abs(prof.values.back() - prof.limit) / prof.limit;
            worst_rel = std::max(worst_rel, rel);
            if (rel > 1e-6) ++far;
          }
        }
        out << "10 packings; decreasing steps " << decreasing << "; q=64 farther than 1e-6 from the limit: " << far
            << " (worst relative gap " << worst_rel << ");";
        return decreasing == 0 && far == 0;
      });
}

/// 10. Prefix sums against naive integration; clipping against Monte Carlo.
inline CriterionResult integration_oracle(const Config& cfg) {
  return detail::run_timed(
      10, "integration_oracle", 60.0, {"prefix-sum box integrals", "partial-volume clipping"},
      [&](std::ostringstream& out) {
        std::mt19937_64 rng(cfg.seed + 10);
        std::size_t prefix_bad = 0, mc_bad = 0;
        double worst_prefix = 0.0, worst_sigma = 0.0;
        for (int k = 0; k < 10; ++k) {
          const GridField f = detail::mixed_field(static_cast<std::size_t>(k), cfg.seed + 10000 + k);
          for (int b = 0; b < 100; ++b) {
            std::vector<double> lo(2), hi(2);
            for (std::size_t a = 0; a < 2; ++a) {
              const std::size_t n = f.resolution()[a];
              std::size_t i0 = rng() % n, i1 = rng() % n;
              if (i0 > i1) std::swap(i0, i1);
              lo[a] = f.cell_bound(a, i0);
              hi[a] = f.cell_bound(a, i1 + 1);
            }
            const Box box(lo, hi);
            const double fast = f.box_average(box) * box.measure();
            const double slow = testing::naive_integral(f, box);
            const double scale = std::max(1e-300, testing::naive_integral(f.transformed([](double v) { return std::abs(v); }), box));
            const double rel = std::abs(fast - slow) / scale;
            worst_prefix = std::max(worst_prefix, rel);
            if (rel > 1e-12) ++prefix_bad;
          }
          if (k == 0) {
            for (int b = 0; b < 10; ++b) {
              std::vector<double> lo(2), hi(2);
              for (std::size_t a = 0; a < 2; ++a) {
                double u = 2.0 * unit_from_bits(rng()) - 1.0, v = 2.0 * unit_from_bits(rng()) - 1.0;
                if (u > v) std::swap(u, v);
                if (v - u < 0.05) v = std::min(1.0, u + 0.05);
                if (v - u < 0.05) u = v - 0.05;
                lo[a] = u;
                hi[a] = v;
              }
              const Box box(lo, hi);
              const double clipped = f.integral(box) / box.measure();
              const auto mc = testing::monte_carlo_mean(f, box, 1000000, cfg.seed + 10500 + b);
              const double dev = std::abs(clipped - mc.mean);
              if (mc.stderr_ > 0.0) worst_sigma = std::max(worst_sigma, dev / mc.stderr_);
              if (dev > 3.0 * mc.stderr_ + 1e-12 * (1.0 + std::abs(clipped))) ++mc_bad;
            }
          }
        }
        out << "1000 aligned boxes (worst relative error " << worst_prefix << ", failures " << prefix_bad
            << "); 10 clipped boxes (worst deviation " << worst_sigma << " standard errors, failures " << mc_bad << ");";
        return prefix_bad == 0 && mc_bad == 0;
      });
}

inline std::vector<std::function<CriterionResult(const Config&)>> criteria() {
  return {norm_algebra, optimal_constant_oracle, packing_oracle, cz_structure, weak_type,
          monotone_zero, chain_suite, lag_equivalence, q_limit, integration_oracle};
}

inline std::vector<CriterionResult> run_all(const Config& cfg, const std::vector<int>& only = {}) {
  std::vector<CriterionResult> out;
  const auto all = criteria();
  for (std::size_t k = 0; k < all.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    out.push_back(all[k](cfg));
  }
  return out;
}

}  // namespace pjn::acceptance
