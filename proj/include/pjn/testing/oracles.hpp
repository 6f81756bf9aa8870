#pragma once

// Slow reference computations used by the tests and the acceptance suite.
// None of them shares code paths with the routines they check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "pjn/field.hpp"
#include "pjn/field_io.hpp"
#include "pjn/geometry.hpp"
#include "pjn/oscillation.hpp"

namespace pjn::testing {

/// ∫_b f by visiting every cell of the grid.
inline double naive_integral(const GridField& f, const Box& b) {
  double total = 0.0;
  for (std::size_t k = 0; k < f.cell_count(); ++k) {
    const double w = intersection_measure(f.cell_box(k), b);
    if (w > 0.0) total += w * f.values()[k];
  }
  return total;
}

struct MonteCarloMean {
  double mean = 0.0;
  double stderr_ = 0.0;
};

/// Sample mean of f over b with its standard error.
inline MonteCarloMean monte_carlo_mean(const GridField& f, const Box& b, std::size_t samples, std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  std::vector<double> pt(b.dims());
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    for (std::size_t a = 0; a < b.dims(); ++a) pt[a] = b.lo[a] + unit_from_bits(engine()) * b.length(a);
    const double v = f.value_at(pt);
    sum += v;
    sum2 += v * v;
  }
  MonteCarloMean out;
  const double ns = static_cast<double>(samples);
  out.mean = sum / ns;
  const double var = std::max(0.0, sum2 / ns - out.mean * out.mean);
  out.stderr_ = std::sqrt(var / ns);
  return out;
}

/// ⨍_{up} (f-c)_+^r + ⨍_{down} (f-c)_-^r by cell visits.
inline double naive_oscillation(const GridField& f, const Box& up, const Box& down, double c, double r) {
  double a = 0.0, b = 0.0;
  for (std::size_t k = 0; k < f.cell_count(); ++k) {
    const Box cell = f.cell_box(k);
    const double v = f.values()[k];
    const double wu = intersection_measure(cell, up);
    const double wd = intersection_measure(cell, down);
    if (wu > 0.0 && v > c) a += wu * std::pow(v - c, r);
    if (wd > 0.0 && v < c) b += wd * std::pow(c - v, r);
  }
  return a / up.measure() + b / down.measure();
}

struct DenseScan {
  double best_c = 0.0;
  double best_value = std::numeric_limits<double>::infinity();
  double step = 0.0;
  std::vector<double> values;
};

/// osc(c) on `points` equally spaced constants spanning the cell values in R.
inline DenseScan dense_scan(const GridField& f, const ParabolicRectangle& R, const OscParams& params, int points) {
  const Box up = R.upper_part(params.lag);
  const Box down = R.lower_part(params.lag);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const Box& b : {up, down}) {
    for (auto& [v, w] : f.weighted_values(b)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  DenseScan out;
  out.step = points > 1 ? (hi - lo) / (points - 1) : 0.0;
  out.values.reserve(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k) {
    const double c = lo + out.step * k;
    const double v = oscillation(f, R, params, c);
    out.values.push_back(v);
    if (v < out.best_value) {
      out.best_value = v;
      out.best_c = c;
    }
  }
  return out;
}

/// Largest total weight of a pairwise non-conflicting subset, by enumeration.
inline double exhaustive_packing(const std::vector<double>& w, const std::vector<std::vector<bool>>& conflict) {
  const std::size_t n = w.size();
  double best = 0.0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    double total = 0.0;
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) {
      if (!(mask >> i & 1U)) continue;
      for (std::size_t j = i + 1; j < n; ++j) {
        if ((mask >> j & 1U) && conflict[i][j]) {
          ok = false;
          break;
        }
      }
      total += w[i];
    }
    if (ok) best = std::max(best, total);
  }
  return best;
}

/// Σ |R+(γ)| osc^{q/r} over a fixed family, every oscillation by dense-free
/// minimization over the cell values (r = 1 minimizer lies on a cell value).
inline double naive_family_value_r1(const GridField& f, const std::vector<ParabolicRectangle>& family, TimeLag lag,
                                    double q) {
  double total = 0.0;
  for (auto& R : family) {
    const Box up = R.upper_part(lag);
    const Box down = R.lower_part(lag);
    double best = std::numeric_limits<double>::infinity();
    for (const Box& b : {up, down}) {
      for (auto& [v, w] : f.weighted_values(b)) best = std::min(best, naive_oscillation(f, up, down, v, 1.0));
    }
    if (best > 0.0) total += R.part_measure(lag) * std::pow(best, q);
  }
  return total;
}

}  // namespace pjn::testing
