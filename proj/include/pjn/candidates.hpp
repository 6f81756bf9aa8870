#pragma once

// Finite candidate families of parabolic rectangles: a geometric ladder of
// edge lengths crossed with a lattice of centers on the field grid.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "pjn/error.hpp"
#include "pjn/field.hpp"
#include "pjn/geometry.hpp"

namespace pjn {

struct CandidateLadder {
  int scales = 3;
  /// Smallest edge length; 0 selects the largest fitting edge / 2^(scales-1).
  double edge_min = 0.0;
  /// Center stride per axis in grid cells; empty selects max(1, cells/8).
  std::vector<std::size_t> stride;
};

/// Largest edge L with Q(c, L) x (t - L^p, t + L^p) fitting in `region`.
inline double largest_fitting_edge(const Box& region, double p) {
  double edge = 0.5 * region.time_length();
  edge = std::pow(edge, 1.0 / p);
  for (std::size_t a = 0; a + 1 < region.dims(); ++a) edge = std::min(edge, 0.5 * region.length(a));
  return edge;
}

inline std::vector<std::size_t> default_stride(const GridField& f) {
  std::vector<std::size_t> s(f.dims());
  for (std::size_t a = 0; a < f.dims(); ++a) s[a] = std::max<std::size_t>(1, f.resolution()[a] / 8);
  return s;
}

/// Rectangles inside `region`, ordered by edge (ascending) and then
/// lexicographically by center, spatial axes first.
inline std::vector<ParabolicRectangle> enumerate_candidates(const GridField& f, const Box& region,
                                                            const CandidateLadder& ladder) {
  if (ladder.scales < 1) throw RangeError("candidate ladder needs at least one scale");
  const GeometryParams& gp = f.params();
  const std::size_t d = f.dims();
  const std::vector<std::size_t> stride = ladder.stride.empty() ? default_stride(f) : ladder.stride;
  if (stride.size() != d) throw RangeError("ladder stride must list one entry per axis");
  for (auto s : stride) {
    if (s == 0) throw RangeError("ladder stride entries must be >= 1");
  }

  double base = ladder.edge_min;
  if (base <= 0.0) base = largest_fitting_edge(region, gp.p) / std::pow(2.0, ladder.scales - 1);

  std::vector<double> mid(d), step(d);
  for (std::size_t a = 0; a < d; ++a) {
    mid[a] = 0.5 * (region.lo[a] + region.hi[a]);
    step[a] = static_cast<double>(stride[a]) * f.cell_width(a);
  }

  std::vector<ParabolicRectangle> out;
  for (int k = 0; k < ladder.scales; ++k) {
    const double edge = base * std::pow(2.0, k);
    const double half_t = std::pow(edge, gp.p);
    std::vector<std::vector<double>> positions(d);
    for (std::size_t a = 0; a < d; ++a) {
      const double reach = (a + 1 == d) ? half_t : edge;
      const double room = 0.5 * region.length(a) - reach;
      const double tol = kGeoRelTol * region.scale();
      if (room < -tol) break;
      const auto kmax = static_cast<long long>(std::floor((std::max(room, 0.0) + tol) / step[a]));
      for (long long j = -kmax; j <= kmax; ++j) positions[a].push_back(mid[a] + static_cast<double>(j) * step[a]);
    }
    if (std::any_of(positions.begin(), positions.end(), [](const auto& v) { return v.empty(); })) continue;

    std::vector<std::size_t> pos(d, 0);
    while (true) {
      std::vector<double> cx(d - 1);
      for (std::size_t a = 0; a + 1 < d; ++a) cx[a] = positions[a][pos[a]];
      ParabolicRectangle rect(std::move(cx), positions[d - 1][pos[d - 1]], edge, gp);
      if (contains(region, rect.box())) out.push_back(std::move(rect));
      std::size_t a = d;
      while (a-- > 0) {
        if (++pos[a] < positions[a].size()) break;
        pos[a] = 0;
      }
      if (a == static_cast<std::size_t>(-1)) break;
    }
  }
  return out;
}

}  // namespace pjn
