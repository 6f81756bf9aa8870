#pragma once

// The lagged two-sided oscillation
//
//   osc(c) = ⨍_{R+(γ)} (f - c)_+^r + ⨍_{R-(γ)} (f - c)_-^r
//
// and its minimizing constant c_R. For r = 1 the map c ↦ osc(c) is convex and
// piecewise linear with kinks at the cell values, so the minimum is found
// exactly by scanning the kinks. For r != 1 every kink is evaluated and each
// gap between consecutive kinks is refined by golden-section search, unless a
// monotonicity bound shows the gap cannot beat the best kink.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <tuple>
#include <utility>
#include <vector>

#include "pjn/error.hpp"
#include "pjn/field.hpp"
#include "pjn/geometry.hpp"

namespace pjn {

struct OscParams {
  TimeLag lag;
  double r = 1.0;

  OscParams() = default;
  OscParams(TimeLag g, double exponent) : lag(g), r(exponent) {
    detail::require(r > 0.0 && std::isfinite(r), "oscillation exponent r must be positive");
  }
};

struct OscResult {
  double c_star = 0.0;
  double value = 0.0;
  double plus_term = 0.0;
  double minus_term = 0.0;
  /// false when the minimum is certified only at scan resolution (r != 1).
  bool exact = true;
};

/// Cell values and partial volumes on the two lagged parts of a rectangle.
struct LaggedSample {
  std::vector<std::pair<double, double>> upper;  // (value, volume)
  std::vector<std::pair<double, double>> lower;
  double upper_measure = 0.0;
  double lower_measure = 0.0;

  static LaggedSample from_boxes(const GridField& f, const Box& up, const Box& down) {
    LaggedSample s;
    s.upper = f.weighted_values(up);
    s.lower = f.weighted_values(down);
    for (auto& [v, w] : s.upper) s.upper_measure += w;
    for (auto& [v, w] : s.lower) s.lower_measure += w;
    return s;
  }

  static LaggedSample of(const GridField& f, const ParabolicRectangle& R, TimeLag lag) {
    return from_boxes(f, R.upper_part(lag), R.lower_part(lag));
  }

  /// (plus term, minus term) at constant c.
  std::pair<double, double> terms(double c, double r) const {
    auto side = [&](const std::vector<std::pair<double, double>>& cells, double measure, Sign s) {
      double acc = 0.0;
      for (auto& [v, w] : cells) {
        const double d = truncated(v, c, s);
        if (d > 0.0) acc += w * (r == 1.0 ? d : std::pow(d, r));
      }
      return acc / measure;
    };
    return {side(upper, upper_measure, Sign::plus), side(lower, lower_measure, Sign::minus)};
  }

  double evaluate(double c, double r) const {
    auto [a, b] = terms(c, r);
    return a + b;
  }
};

namespace detail {

inline std::vector<double> breakpoints(const LaggedSample& s) {
  std::vector<double> bp;
  bp.reserve(s.upper.size() + s.lower.size());
  for (auto& [v, w] : s.upper) bp.push_back(v);
  for (auto& [v, w] : s.lower) bp.push_back(v);
  std::sort(bp.begin(), bp.end());
  bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
  return bp;
}

/// osc(b) at every breakpoint b for r = 1, by sorted prefix sums.
inline std::vector<double> linear_scan(const LaggedSample& s, const std::vector<double>& bp) {
  auto up = s.upper;
  auto down = s.lower;
  std::sort(up.begin(), up.end());
  std::sort(down.begin(), down.end());
  // plus(b) = Σ_{v>b} w (v - b) / |U|; minus(b) = Σ_{v<b} w (b - v) / |D|
  double up_w = 0.0, up_wv = 0.0;
  for (auto& [v, w] : up) {
    up_w += w;
    up_wv += w * v;
  }
  double down_w = 0.0, down_wv = 0.0;
  std::size_t iu = 0, id = 0;
  std::vector<double> out(bp.size());
  for (std::size_t k = 0; k < bp.size(); ++k) {
    const double b = bp[k];
    while (iu < up.size() && up[iu].first <= b) {
      up_w -= up[iu].second;
      up_wv -= up[iu].second * up[iu].first;
      ++iu;
    }
    while (id < down.size() && down[id].first < b) {
      down_w += down[id].second;
      down_wv += down[id].second * down[id].first;
      ++id;
    }
    const double plus = iu < up.size() ? (up_wv - b * up_w) / s.upper_measure : 0.0;
    const double minus = (b * down_w - down_wv) / s.lower_measure;
    out[k] = std::max(0.0, plus) + std::max(0.0, minus);
  }
  return out;
}

inline double golden_minimize(const LaggedSample& s, double r, double a, double b, double tol, double& best_c) {
  constexpr double inv_phi = 0.6180339887498949;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = s.evaluate(x1, r);
  double f2 = s.evaluate(x2, r);
  for (int it = 0; it < 200 && (b - a) > tol; ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = s.evaluate(x1, r);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = s.evaluate(x2, r);
    }
  }
  if (f1 <= f2) {
    best_c = x1;
    return f1;
  }
  best_c = x2;
  return f2;
}

}  // namespace detail

/// Minimal oscillation over c, with the smallest minimizer on ties.
inline OscResult optimal_constant(const LaggedSample& s, double r) {
  const std::vector<double> bp = detail::breakpoints(s);
  double vscale = 1.0;
  for (double b : bp) vscale = std::max(vscale, std::abs(b));
  const double tie = 1e-12 * vscale;

  std::vector<double> at_bp, plus_bp, minus_bp;
  if (r == 1.0) {
    at_bp = detail::linear_scan(s, bp);
  } else {
    at_bp.resize(bp.size());
    plus_bp.resize(bp.size());
    minus_bp.resize(bp.size());
    for (std::size_t k = 0; k < bp.size(); ++k) {
      std::tie(plus_bp[k], minus_bp[k]) = s.terms(bp[k], r);
      at_bp[k] = plus_bp[k] + minus_bp[k];
    }
  }
  const double scan_min = *std::min_element(at_bp.begin(), at_bp.end());

  // re-evaluate the near-minimal breakpoints directly to avoid prefix-sum cancellation
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::pair<double, double>> near;
  for (std::size_t k = 0; k < bp.size(); ++k) {
    if (at_bp[k] <= scan_min + 4.0 * tie) {
      const double direct = r == 1.0 ? s.evaluate(bp[k], r) : at_bp[k];
      near.emplace_back(bp[k], direct);
      best = std::min(best, direct);
    }
  }
  double c_star = 0.0;
  for (auto& [c, v] : near) {
    if (v <= best + tie) {
      c_star = c;
      break;
    }
  }
  double value = best;
  bool exact = true;

  if (r != 1.0) {
    exact = false;
    const double tol = 1e-10 * vscale;
    for (std::size_t k = 0; k + 1 < bp.size(); ++k) {
      // the plus term decreases and the minus term increases in c, so on
      // [bp[k], bp[k+1]] the functional is at least plus(bp[k+1]) + minus(bp[k])
      if (plus_bp[k + 1] + minus_bp[k] >= value - tie) continue;
      double c = 0.0;
      const double v = detail::golden_minimize(s, r, bp[k], bp[k + 1], tol, c);
      if (v < value - tie) {
        value = v;
        c_star = c;
      }
    }
  }
  auto [plus, minus] = s.terms(c_star, r);
  return OscResult{c_star, plus + minus, plus, minus, exact};
}

inline OscResult optimal_constant(const GridField& f, const ParabolicRectangle& R, const OscParams& params) {
  return optimal_constant(LaggedSample::of(f, R, params.lag), params.r);
}

/// ⨍_{R+(γ)} (f - c)_+^r + ⨍_{R-(γ)} (f - c)_-^r.
inline double oscillation(const GridField& f, const ParabolicRectangle& R, const OscParams& params, double c) {
  const Box up = R.upper_part(params.lag);
  const Box down = R.lower_part(params.lag);
  return f.truncated_power_average(up, c, params.r, Sign::plus) +
         f.truncated_power_average(down, c, params.r, Sign::minus);
}

/// (⨍ (f - c)_+^r)^{1/r} + (⨍ (f - c)_-^r)^{1/r}.
inline double alt_oscillation(const GridField& f, const ParabolicRectangle& R, const OscParams& params, double c) {
  const double a = f.truncated_power_average(R.upper_part(params.lag), c, params.r, Sign::plus);
  const double b = f.truncated_power_average(R.lower_part(params.lag), c, params.r, Sign::minus);
  return std::pow(a, 1.0 / params.r) + std::pow(b, 1.0 / params.r);
}

struct NormValue {
  double value = 0.0;
  std::optional<std::size_t> argmax;
};

/// max over candidates of (minimal oscillation)^{1/r}; a lower bound of the
/// supremum over all subrectangles.
inline NormValue pbmo_norm(const GridField& f, const std::vector<ParabolicRectangle>& candidates,
                           const OscParams& params) {
  if (candidates.empty()) throw DegenerateInput("pbmo_norm needs a nonempty candidate set");
  NormValue out;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const double v = std::pow(optimal_constant(f, candidates[i], params).value, 1.0 / params.r);
    if (!out.argmax || v > out.value) {
      out.value = v;
      out.argmax = i;
    }
  }
  return out;
}

/// Lower bound of M♯f(point): the largest minimal oscillation over the
/// candidates R with point ∈ R ⊂ R0 (no 1/r power).
inline NormValue sharp_maximal(const GridField& f, const std::vector<double>& point, const ParabolicRectangle& R0,
                               const std::vector<ParabolicRectangle>& candidates, const OscParams& params) {
  const Box outer = R0.box();
  if (!outer.contains_point(point)) throw DomainError("sharp_maximal: point lies outside R0");
  NormValue out;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const Box b = candidates[i].box();
    if (!b.contains_point(point) || !contains(outer, b)) continue;
    const double v = optimal_constant(f, candidates[i], params).value;
    if (!out.argmax || v > out.value) {
      out.value = v;
      out.argmax = i;
    }
  }
  return out;
}

}  // namespace pjn
