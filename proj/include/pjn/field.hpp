#pragma once

// Piecewise-constant fields on a space-time box. Every integral below is
// exact for such fields: a query box is clipped against the cell grid axis by
// axis and each intersected cell contributes value × partial volume.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "pjn/error.hpp"
#include "pjn/geometry.hpp"

namespace pjn {

enum class Sign { plus, minus };

/// (v - c)_+ or (v - c)_- = -min(v - c, 0).
inline double truncated(double v, double c, Sign s) {
  const double d = v - c;
  return s == Sign::plus ? (d > 0.0 ? d : 0.0) : (d < 0.0 ? -d : 0.0);
}

/// One grid cell clipped against a query box.
struct CellPiece {
  std::size_t index;
  double volume;
};

class GridField {
 public:
  GridField() = default;

  GridField(Box domain, std::vector<std::size_t> resolution, std::vector<double> values, GeometryParams params)
      : domain_(std::move(domain)), resolution_(std::move(resolution)), values_(std::move(values)), params_(params) {
    if (domain_.dims() != static_cast<std::size_t>(params_.n) + 1)
      throw RangeError("field domain must have n+1 axes");
    if (resolution_.size() != domain_.dims()) throw RangeError("resolution must list one count per axis");
    std::size_t count = 1;
    for (std::size_t r : resolution_) {
      if (r == 0) throw RangeError("resolution entries must be >= 1");
      count *= r;
    }
    if (values_.size() != count) throw RangeError("value array length must equal the product of resolutions");
    for (double v : values_) {
      if (!std::isfinite(v)) throw RangeError("field values must be finite");
    }
    build_prefix();
  }

  /// Field sampled from `fn` at cell centers.
  static GridField sample(Box domain, std::vector<std::size_t> resolution, GeometryParams params,
                          const std::function<double(std::span<const double>)>& fn) {
    std::size_t count = 1;
    for (std::size_t r : resolution) count *= r;
    std::vector<double> vals(count);
    std::vector<double> pt(domain.dims());
    std::vector<std::size_t> idx(domain.dims(), 0);
    for (std::size_t flat = 0; flat < count; ++flat) {
      std::size_t rem = flat;
      for (std::size_t a = domain.dims(); a-- > 0;) {
        idx[a] = rem % resolution[a];
        rem /= resolution[a];
      }
      for (std::size_t a = 0; a < domain.dims(); ++a) {
        pt[a] = domain.lo[a] + (domain.hi[a] - domain.lo[a]) * (static_cast<double>(idx[a]) + 0.5) /
                                   static_cast<double>(resolution[a]);
      }
      vals[flat] = fn(pt);
    }
    return GridField(std::move(domain), std::move(resolution), std::move(vals), params);
  }

  const Box& domain() const { return domain_; }
  const std::vector<std::size_t>& resolution() const { return resolution_; }
  const std::vector<double>& values() const { return values_; }
  const GeometryParams& params() const { return params_; }
  std::size_t dims() const { return domain_.dims(); }
  std::size_t cell_count() const { return values_.size(); }

  double cell_width(std::size_t axis) const {
    return (domain_.hi[axis] - domain_.lo[axis]) / static_cast<double>(resolution_[axis]);
  }
  double cell_bound(std::size_t axis, std::size_t i) const {
    if (i == resolution_[axis]) return domain_.hi[axis];
    return domain_.lo[axis] +
           (domain_.hi[axis] - domain_.lo[axis]) * static_cast<double>(i) / static_cast<double>(resolution_[axis]);
  }

  std::size_t flat_index(std::span<const std::size_t> idx) const {
    std::size_t flat = 0;
    for (std::size_t a = 0; a < idx.size(); ++a) flat = flat * resolution_[a] + idx[a];
    return flat;
  }

  std::vector<std::size_t> unflatten(std::size_t flat) const {
    std::vector<std::size_t> idx(dims());
    for (std::size_t a = dims(); a-- > 0;) {
      idx[a] = flat % resolution_[a];
      flat /= resolution_[a];
    }
    return idx;
  }

  Box cell_box(std::size_t flat) const {
    auto idx = unflatten(flat);
    std::vector<double> lo(dims()), hi(dims());
    for (std::size_t a = 0; a < dims(); ++a) {
      lo[a] = cell_bound(a, idx[a]);
      hi[a] = cell_bound(a, idx[a] + 1);
    }
    return Box(std::move(lo), std::move(hi));
  }

  /// Value of the cell containing `pt` (half-open cells; the domain's upper
  /// faces are mapped to the last cell).
  double value_at(std::span<const double> pt) const {
    std::size_t flat = 0;
    for (std::size_t a = 0; a < dims(); ++a) {
      double u = (pt[a] - domain_.lo[a]) / cell_width(a);
      auto i = static_cast<long long>(std::floor(u));
      i = std::clamp<long long>(i, 0, static_cast<long long>(resolution_[a]) - 1);
      flat = flat * resolution_[a] + static_cast<std::size_t>(i);
    }
    return values_[flat];
  }

  bool inside(const Box& b) const { return contains(domain_, b); }

  void require_inside(const Box& b) const {
    if (b.dims() != dims()) throw RangeError("box dimension does not match field");
    if (!inside(b)) throw DomainError("box leaves the field domain");
    if (!(b.measure() > 0.0)) throw DegenerateInput("box has zero measure");
  }

  /// Visits every cell meeting `b` with the volume of the intersection.
  template <class Fn>
  void for_each_piece(const Box& b, Fn&& fn) const {
    const std::size_t d = dims();
    std::vector<std::vector<std::pair<std::size_t, double>>> axes(d);
    for (std::size_t a = 0; a < d; ++a) {
      const double w = cell_width(a);
      const auto r = static_cast<long long>(resolution_[a]);
      auto i0 = static_cast<long long>(std::floor((b.lo[a] - domain_.lo[a]) / w)) - 1;
      auto i1 = static_cast<long long>(std::ceil((b.hi[a] - domain_.lo[a]) / w)) + 1;
      i0 = std::clamp<long long>(i0, 0, r - 1);
      i1 = std::clamp<long long>(i1, 0, r);
      for (long long i = i0; i < i1; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        const double o = interval_overlap(cell_bound(a, ui), cell_bound(a, ui + 1), b.lo[a], b.hi[a]);
        if (o > 0.0) axes[a].emplace_back(ui, o);
      }
      if (axes[a].empty()) return;
    }
    std::vector<std::size_t> pos(d, 0);
    while (true) {
      std::size_t flat = 0;
      double vol = 1.0;
      for (std::size_t a = 0; a < d; ++a) {
        flat = flat * resolution_[a] + axes[a][pos[a]].first;
        vol *= axes[a][pos[a]].second;
      }
      fn(CellPiece{flat, vol});
      std::size_t a = d;
      while (a-- > 0) {
        if (++pos[a] < axes[a].size()) break;
        pos[a] = 0;
      }
      if (a == static_cast<std::size_t>(-1)) break;
    }
  }

  /// ∫_b f by partial-volume weighting.
  double integral(const Box& b) const {
    require_inside(b);
    double s = 0.0;
    for_each_piece(b, [&](CellPiece c) { s += values_[c.index] * c.volume; });
    return s;
  }

  /// Plain average of f over b; prefix sums when b is grid-aligned.
  double box_average(const Box& b) const {
    require_inside(b);
    if (auto idx = aligned_range(b)) return prefix_sum(sums_, *idx) * cell_volume() / b.measure();
    return integral(b) / b.measure();
  }

  /// Average of f^2 over a grid-aligned box, from the squared-value cache.
  double box_mean_square(const Box& b) const {
    require_inside(b);
    if (auto idx = aligned_range(b)) return prefix_sum(squares_, *idx) * cell_volume() / b.measure();
    double s = 0.0;
    for_each_piece(b, [&](CellPiece c) { s += values_[c.index] * values_[c.index] * c.volume; });
    return s / b.measure();
  }

  /// ⨍_b (f - c)_±^r, exact cellwise.
  double truncated_power_average(const Box& b, double c, double r, Sign s) const {
    require_inside(b);
    if (!(r > 0.0)) throw RangeError("exponent r must be positive");
    double acc = 0.0;
    double vol = 0.0;
    for_each_piece(b, [&](CellPiece piece) {
      const double d = truncated(values_[piece.index], c, s);
      vol += piece.volume;
      if (d > 0.0) acc += piece.volume * (r == 1.0 ? d : std::pow(d, r));
    });
    return acc / vol;
  }

  /// |b ∩ {(f - c)_± > lambda}|.
  double level_set_measure(const Box& b, double c, double lambda, Sign s) const {
    require_inside(b);
    if (!(lambda > 0.0)) throw RangeError("level lambda must be positive");
    double m = 0.0;
    for_each_piece(b, [&](CellPiece piece) {
      if (truncated(values_[piece.index], c, s) > lambda) m += piece.volume;
    });
    return m;
  }

  /// (value, volume) of every cell piece meeting b.
  std::vector<std::pair<double, double>> weighted_values(const Box& b) const {
    require_inside(b);
    std::vector<std::pair<double, double>> out;
    for_each_piece(b, [&](CellPiece c) { out.emplace_back(values_[c.index], c.volume); });
    return out;
  }

  /// Grid cell index range [first, last) per axis when b's faces sit on grid lines.
  std::optional<std::vector<std::pair<std::size_t, std::size_t>>> aligned_range(const Box& b) const {
    std::vector<std::pair<std::size_t, std::size_t>> out(dims());
    for (std::size_t a = 0; a < dims(); ++a) {
      const double w = cell_width(a);
      const double u0 = (b.lo[a] - domain_.lo[a]) / w;
      const double u1 = (b.hi[a] - domain_.lo[a]) / w;
      const double r0 = std::round(u0), r1 = std::round(u1);
      const double tol = 1e-9 * std::max(1.0, std::abs(u1));
      if (std::abs(u0 - r0) > tol || std::abs(u1 - r1) > tol) return std::nullopt;
      if (r0 < 0 || r1 > static_cast<double>(resolution_[a]) || r1 <= r0) return std::nullopt;
      out[a] = {static_cast<std::size_t>(r0), static_cast<std::size_t>(r1)};
    }
    return out;
  }

  /// Σ of cell values over an index range, from the prefix table.
  double prefix_cell_sum(const std::vector<std::pair<std::size_t, std::size_t>>& range) const {
    return prefix_sum(sums_, range);
  }

  double cell_volume() const {
    double v = 1.0;
    for (std::size_t a = 0; a < dims(); ++a) v *= cell_width(a);
    return v;
  }

  /// New field with values mapped through fn on the same grid.
  template <class Fn>
  GridField transformed(Fn&& fn) const {
    std::vector<double> vals(values_.size());
    std::transform(values_.begin(), values_.end(), vals.begin(), fn);
    return GridField(domain_, resolution_, std::move(vals), params_);
  }

 private:
  void build_prefix() {
    const std::size_t d = dims();
    std::vector<std::size_t> ext(d);
    std::size_t total = 1;
    for (std::size_t a = 0; a < d; ++a) {
      ext[a] = resolution_[a] + 1;
      total *= ext[a];
    }
    strides_.assign(d, 1);
    for (std::size_t a = d - 1; a-- > 0;) strides_[a] = strides_[a + 1] * ext[a + 1];
    sums_.assign(total, 0.0);
    squares_.assign(total, 0.0);
    for (std::size_t flat = 0; flat < values_.size(); ++flat) {
      auto idx = unflatten(flat);
      std::size_t pf = 0;
      for (std::size_t a = 0; a < d; ++a) pf += (idx[a] + 1) * strides_[a];
      sums_[pf] = values_[flat];
      squares_[pf] = values_[flat] * values_[flat];
    }
    // cumulative pass along each axis
    for (std::size_t a = 0; a < d; ++a) {
      for (std::size_t pf = 0; pf < total; ++pf) {
        const std::size_t coord = (pf / strides_[a]) % ext[a];
        if (coord == 0) continue;
        sums_[pf] += sums_[pf - strides_[a]];
        squares_[pf] += squares_[pf - strides_[a]];
      }
    }
  }

  double prefix_sum(const std::vector<double>& table, const std::vector<std::pair<std::size_t, std::size_t>>& range) const {
    const std::size_t d = dims();
    double s = 0.0;
    for (std::size_t corner = 0; corner < (std::size_t{1} << d); ++corner) {
      std::size_t pf = 0;
      int lows = 0;
      for (std::size_t a = 0; a < d; ++a) {
        const bool low = (corner >> a) & 1U;
        pf += (low ? range[a].first : range[a].second) * strides_[a];
        lows += low ? 1 : 0;
      }
      s += (lows % 2 == 0 ? 1.0 : -1.0) * table[pf];
    }
    return s;
  }

  Box domain_;
  std::vector<std::size_t> resolution_;
  std::vector<double> values_;
  GeometryParams params_;
  std::vector<std::size_t> strides_;
  std::vector<double> sums_;
  std::vector<double> squares_;
};

/// Reverses the time axis (t ↦ t_lo + t_hi - t), optionally negating values.
inline GridField reflect_time_field(const GridField& f, bool negate) {
  std::vector<double> vals(f.values().size());
  const std::size_t nt = f.resolution().back();
  for (std::size_t flat = 0; flat < vals.size(); ++flat) {
    const std::size_t it = flat % nt;
    const std::size_t src = flat - it + (nt - 1 - it);
    vals[flat] = negate ? -f.values()[src] : f.values()[src];
  }
  return GridField(f.domain(), f.resolution(), std::move(vals), f.params());
}

/// Pivot of the time reflection used by reflect_time_field.
inline double time_pivot(const GridField& f) { return 0.5 * (f.domain().t_lo() + f.domain().t_hi()); }

/// Pointwise combination of two fields on the same grid.
template <class Fn>
GridField combine(const GridField& f, const GridField& g, Fn&& fn) {
  if (f.resolution() != g.resolution() || !(f.domain() == g.domain()))
    throw RangeError("fields must share domain and resolution");
  std::vector<double> vals(f.values().size());
  for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = fn(f.values()[i], g.values()[i]);
  return GridField(f.domain(), f.resolution(), std::move(vals), f.params());
}

}  // namespace pjn
