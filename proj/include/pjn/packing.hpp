#pragma once

// Desk-scale John–Nirenberg norm: every candidate rectangle R_i carries the
// weight |R_i+(γ)| · osc_i^{q/r}, and the squared-off norm is the largest
// total weight of a pairwise-disjoint subfamily. Candidates are finite, so
// every value here is a lower bound of the true supremum.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "pjn/error.hpp"
#include "pjn/geometry.hpp"
#include "pjn/oscillation.hpp"
#include "pjn/parallel.hpp"
#include "pjn/report.hpp"

namespace pjn {

enum class PackingMode { greedy, exact, automatic };

inline const char* to_string(PackingMode m) {
  switch (m) {
    case PackingMode::greedy: return "greedy";
    case PackingMode::exact: return "exact";
    case PackingMode::automatic: return "auto";
  }
  return "?";
}

inline PackingMode parse_packing_mode(const std::string& s) {
  if (s == "greedy") return PackingMode::greedy;
  if (s == "exact") return PackingMode::exact;
  if (s == "auto") return PackingMode::automatic;
  throw RangeError("unknown packing mode '" + s + "' (expected greedy, exact or auto)");
}

/// Exact search is always used up to this many candidates in automatic mode.
inline constexpr std::size_t kExactMandatory = 20;
/// Exact search refuses larger candidate sets.
inline constexpr std::size_t kExactCap = 64;

struct JnParams {
  TimeLag lag;
  double r = 1.0;
  double q = 2.0;

  JnParams() = default;
  JnParams(TimeLag g, double r_, double q_) : lag(g), r(r_), q(q_) {
    detail::require(q > 1.0 && std::isfinite(q), "q must satisfy 1 < q < inf");
    detail::require(r > 0.0 && r < q, "exponent r must satisfy 0 < r < q");
  }
  OscParams osc() const { return OscParams(lag, r); }
};

struct Packing {
  std::vector<std::size_t> indices;  // into the candidate list, ascending
  std::vector<double> weights;
  double total = 0.0;
};

struct JnResult {
  double norm = 0.0;
  Packing packing;
  std::size_t candidate_count = 0;
  PackingMode mode = PackingMode::greedy;
  std::vector<OscResult> oscillations;  // per candidate
};

/// |R+(γ)| · osc^{q/r} for one rectangle.
inline double packing_weight(const ParabolicRectangle& R, const OscResult& osc, const JnParams& jp) {
  if (osc.value <= 0.0) return 0.0;
  return R.part_measure(jp.lag) * std::pow(osc.value, jp.q / jp.r);
}

inline std::vector<OscResult> candidate_oscillations(const GridField& f, const std::vector<ParabolicRectangle>& cands,
                                                     const OscParams& op) {
  std::vector<OscResult> out(cands.size());
  parallel_for(cands.size(), [&](std::size_t i) { out[i] = optimal_constant(f, cands[i], op); });
  return out;
}

/// Pairwise-conflict matrix of the full rectangles.
inline std::vector<std::vector<bool>> conflict_matrix(const std::vector<ParabolicRectangle>& cands) {
  const std::size_t k = cands.size();
  std::vector<Box> boxes;
  boxes.reserve(k);
  for (auto& c : cands) boxes.push_back(c.box());
  std::vector<std::vector<bool>> conflict(k, std::vector<bool>(k, false));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      const bool c = !disjoint(boxes[i], boxes[j]);
      conflict[i][j] = conflict[j][i] = c;
    }
  }
  return conflict;
}

namespace detail {

/// Weight-descending order, ties by candidate index; zero weights dropped.
inline std::vector<std::size_t> weight_order(const std::vector<double>& w) {
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] > 0.0) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return w[a] > w[b]; });
  return order;
}

inline Packing make_packing(std::vector<std::size_t> idx, const std::vector<double>& w) {
  std::sort(idx.begin(), idx.end());
  Packing p;
  p.indices = std::move(idx);
  for (auto i : p.indices) {
    p.weights.push_back(w[i]);
    p.total += w[i];
  }
  return p;
}

class BranchAndBound {
 public:
  BranchAndBound(const std::vector<double>& w, const std::vector<std::vector<bool>>& conflict)
      : order_(weight_order(w)) {
    const std::size_t k = order_.size();
    weights_.resize(k);
    masks_.assign(k, 0);
    for (std::size_t a = 0; a < k; ++a) {
      weights_[a] = w[order_[a]];
      for (std::size_t b = 0; b < k; ++b) {
        if (a != b && conflict[order_[a]][order_[b]]) masks_[a] |= std::uint64_t{1} << b;
      }
    }
    suffix_.assign(k + 1, 0.0);
    for (std::size_t a = k; a-- > 0;) suffix_[a] = suffix_[a + 1] + weights_[a];
  }

  std::vector<std::size_t> solve() {
    search(0, 0, 0.0);
    std::vector<std::size_t> out;
    for (std::size_t a = 0; a < order_.size(); ++a) {
      if ((best_set_ >> a) & 1U) out.push_back(order_[a]);
    }
    return out;
  }

 private:
  void search(std::size_t pos, std::uint64_t chosen, double value) {
    if (value > best_) {
      best_ = value;
      best_set_ = chosen;
    }
    if (pos == order_.size()) return;
    if (value + suffix_[pos] <= best_) return;
    if ((masks_[pos] & chosen) == 0) search(pos + 1, chosen | (std::uint64_t{1} << pos), value + weights_[pos]);
    search(pos + 1, chosen, value);
  }

  std::vector<std::size_t> order_;
  std::vector<double> weights_;
  std::vector<std::uint64_t> masks_;
  std::vector<double> suffix_;
  double best_ = 0.0;
  std::uint64_t best_set_ = 0;
};

}  // namespace detail

inline Packing greedy_packing(const std::vector<double>& w, const std::vector<std::vector<bool>>& conflict) {
  std::vector<std::size_t> accepted;
  for (std::size_t i : detail::weight_order(w)) {
    const bool ok = std::none_of(accepted.begin(), accepted.end(), [&](std::size_t j) { return conflict[i][j]; });
    if (ok) accepted.push_back(i);
  }
  return detail::make_packing(std::move(accepted), w);
}

inline Packing exact_packing(const std::vector<double>& w, const std::vector<std::vector<bool>>& conflict) {
  if (w.size() > kExactCap)
    throw RangeError("exact packing refuses more than " + std::to_string(kExactCap) +
                     " candidates; use greedy mode");
  detail::BranchAndBound bb(w, conflict);
  return detail::make_packing(bb.solve(), w);
}

inline PackingMode resolve_mode(PackingMode mode, std::size_t count) {
  if (mode == PackingMode::automatic) return count <= kExactMandatory ? PackingMode::exact : PackingMode::greedy;
  return mode;
}

/// Norm from precomputed oscillations (lets callers reuse them across modes).
inline JnResult pjnq_norm(const std::vector<ParabolicRectangle>& cands, std::vector<OscResult> osc, const JnParams& jp,
                          PackingMode mode) {
  JnResult res;
  res.candidate_count = cands.size();
  res.mode = resolve_mode(mode, cands.size());
  if (res.mode == PackingMode::exact && cands.size() > kExactCap)
    throw RangeError("exact packing refuses " + std::to_string(cands.size()) + " candidates (cap " +
                     std::to_string(kExactCap) + "); use greedy mode");
  std::vector<double> w(cands.size());
  for (std::size_t i = 0; i < cands.size(); ++i) w[i] = packing_weight(cands[i], osc[i], jp);
  const auto conflict = conflict_matrix(cands);
  res.packing = res.mode == PackingMode::exact ? exact_packing(w, conflict) : greedy_packing(w, conflict);
  res.norm = std::pow(res.packing.total, 1.0 / jp.q);
  res.oscillations = std::move(osc);
  return res;
}

inline JnResult pjnq_norm(const GridField& f, const std::vector<ParabolicRectangle>& cands, const JnParams& jp,
                          PackingMode mode) {
  if (mode == PackingMode::exact && cands.size() > kExactCap)
    throw RangeError("exact packing refuses " + std::to_string(cands.size()) + " candidates (cap " +
                     std::to_string(kExactCap) + "); use greedy mode");
  return pjnq_norm(cands, candidate_oscillations(f, cands, jp.osc()), jp, mode);
}

/// Σ |R_i+(γ)| osc_i^{q/r} over a fixed family (disjointness not checked).
inline double packing_value(const GridField& f, const std::vector<ParabolicRectangle>& family, const JnParams& jp) {
  double total = 0.0;
  for (auto& R : family) total += packing_weight(R, optimal_constant(f, R, jp.osc()), jp);
  return total;
}

inline bool pairwise_disjoint(const std::vector<ParabolicRectangle>& family) {
  for (std::size_t i = 0; i < family.size(); ++i) {
    for (std::size_t j = i + 1; j < family.size(); ++j) {
      if (!disjoint(family[i].box(), family[j].box())) return false;
    }
  }
  return true;
}

struct SplitValues {
  double v_plus = 0.0;
  double v_minus = 0.0;
  double v_combined = 0.0;
};

/// One-sided sums with the per-rectangle minimal constants.
inline SplitValues split_values(const GridField& f, const std::vector<ParabolicRectangle>& family, const JnParams& jp) {
  SplitValues s;
  const double e = jp.q / jp.r;
  for (auto& R : family) {
    const OscResult o = optimal_constant(f, R, jp.osc());
    const double m = R.part_measure(jp.lag);
    s.v_plus += m * std::pow(o.plus_term, e);
    s.v_minus += m * std::pow(o.minus_term, e);
    s.v_combined += m * std::pow(o.value, e);
  }
  return s;
}

struct QProfile {
  std::vector<double> q;
  std::vector<double> values;
  double limit = 0.0;  // max_i osc_i^{1/r}
};

/// (⨍_Ω (Σ_i χ_{R_i+(γ)} osc_i^{1/r})^q)^{1/q} for each q of the ladder.
inline QProfile q_limit_profile(const GridField& f, const std::vector<ParabolicRectangle>& family, TimeLag lag, double r,
                                const std::vector<double>& q_ladder) {
  if (!pairwise_disjoint(family)) throw RangeError("q_limit_profile needs a pairwise-disjoint family");
  const double omega = f.domain().measure();
  std::vector<double> heights, fractions;
  QProfile out;
  out.q = q_ladder;
  for (auto& R : family) {
    const double h = std::pow(optimal_constant(f, R, OscParams(lag, r)).value, 1.0 / r);
    heights.push_back(h);
    fractions.push_back(R.part_measure(lag) / omega);
    out.limit = std::max(out.limit, h);
  }
  for (double q : q_ladder) {
    if (out.limit == 0.0) {
      out.values.push_back(0.0);
      continue;
    }
    double s = 0.0;
    for (std::size_t i = 0; i < heights.size(); ++i) s += fractions[i] * std::pow(heights[i] / out.limit, q);
    out.values.push_back(out.limit * std::pow(s, 1.0 / q));
  }
  return out;
}

struct EmbeddingReport {
  double pbmo = 0.0;
  double omega_measure = 0.0;
  double rhs = 0.0;
  double greedy_norm = 0.0;
  std::optional<double> exact_norm;
  CheckList checks;
};

/// ‖f‖_{PJN} <= |Ω|^{1/q} ‖f‖_{PBMO} on a shared candidate set.
inline EmbeddingReport pbmo_embedding_check(const GridField& f, const std::vector<ParabolicRectangle>& cands,
                                            const JnParams& jp) {
  EmbeddingReport rep;
  auto osc = candidate_oscillations(f, cands, jp.osc());
  for (auto& o : osc) rep.pbmo = std::max(rep.pbmo, std::pow(o.value, 1.0 / jp.r));
  rep.omega_measure = f.domain().measure();
  rep.rhs = std::pow(rep.omega_measure, 1.0 / jp.q) * rep.pbmo;
  rep.greedy_norm = pjnq_norm(cands, osc, jp, PackingMode::greedy).norm;
  Check g = make_check("pjn_greedy_le_omega_pbmo", rep.greedy_norm, rep.rhs);
  g.note = "ratio=" + std::to_string(rep.rhs > 0 ? rep.greedy_norm / rep.rhs : 0.0);
  rep.checks.add(g);
  if (cands.size() <= kExactMandatory) {
    rep.exact_norm = pjnq_norm(cands, osc, jp, PackingMode::exact).norm;
    Check e = make_check("pjn_exact_le_omega_pbmo", *rep.exact_norm, rep.rhs);
    e.note = "ratio=" + std::to_string(rep.rhs > 0 ? *rep.exact_norm / rep.rhs : 0.0);
    rep.checks.add(e);
  }
  return rep;
}

}  // namespace pjn
