#pragma once

// Parabolic rectangles, their lagged upper/lower parts and the half-open
// space-time boxes everything else is measured on. The time axis is always
// the last axis of a Box.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "pjn/error.hpp"

namespace pjn {

inline constexpr double kGeoRelTol = 1e-9;

struct GeometryParams {
  int n = 1;
  double p = 2.0;

  GeometryParams() = default;
  GeometryParams(int dim, double exponent) : n(dim), p(exponent) {
    detail::require(n >= 1, "spatial dimension n must be >= 1");
    detail::require(p > 1.0 && std::isfinite(p), "parabolic exponent p must satisfy 1 < p < inf");
  }

  friend bool operator==(const GeometryParams&, const GeometryParams&) = default;
};

/// Time lag, strictly inside (-1, 1).
class TimeLag {
 public:
  TimeLag() = default;
  explicit TimeLag(double g) : value_(g) {
    detail::require(g > -1.0 && g < 1.0, "time lag must satisfy -1 < lag < 1");
  }
  double value() const { return value_; }

 private:
  double value_ = 0.0;
};

/// Axis-aligned half-open box [lo, hi) in R^{n+1}; time is the last axis.
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  Box() = default;
  Box(std::vector<double> lower, std::vector<double> upper) : lo(std::move(lower)), hi(std::move(upper)) {
    if (lo.size() != hi.size() || lo.empty()) throw RangeError("box bounds must have equal, nonzero length");
    for (std::size_t a = 0; a < lo.size(); ++a) {
      if (!(hi[a] > lo[a])) throw DegenerateInput("box interval on axis " + std::to_string(a) + " is empty");
    }
  }

  std::size_t dims() const { return lo.size(); }
  std::size_t time_axis() const { return lo.size() - 1; }
  double length(std::size_t a) const { return hi[a] - lo[a]; }
  double t_lo() const { return lo.back(); }
  double t_hi() const { return hi.back(); }
  double time_length() const { return hi.back() - lo.back(); }

  double measure() const {
    double m = 1.0;
    for (std::size_t a = 0; a < lo.size(); ++a) m *= hi[a] - lo[a];
    return m;
  }

  double scale() const {
    double s = 1.0;
    for (std::size_t a = 0; a < lo.size(); ++a) s = std::max({s, std::abs(lo[a]), std::abs(hi[a])});
    return s;
  }

  bool contains_point(const std::vector<double>& pt) const {
    for (std::size_t a = 0; a < lo.size(); ++a) {
      if (pt[a] < lo[a] || pt[a] >= hi[a]) return false;
    }
    return true;
  }

  friend bool operator==(const Box&, const Box&) = default;
};

inline double geo_tolerance(const Box& a, const Box& b) {
  return kGeoRelTol * std::max(a.scale(), b.scale());
}

/// Length of the overlap of [a0,a1) and [b0,b1); zero when they are apart.
inline double interval_overlap(double a0, double a1, double b0, double b1) {
  return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
}

inline double intersection_measure(const Box& a, const Box& b) {
  double m = 1.0;
  for (std::size_t ax = 0; ax < a.dims(); ++ax) {
    double o = interval_overlap(a.lo[ax], a.hi[ax], b.lo[ax], b.hi[ax]);
    if (o <= 0.0) return 0.0;
    m *= o;
  }
  return m;
}

/// Boxes sharing at most a face (within tolerance) count as disjoint.
inline bool disjoint(const Box& a, const Box& b) {
  const double tol = geo_tolerance(a, b);
  for (std::size_t ax = 0; ax < a.dims(); ++ax) {
    if (interval_overlap(a.lo[ax], a.hi[ax], b.lo[ax], b.hi[ax]) <= tol) return true;
  }
  return false;
}

/// outer ⊇ inner, up to the geometric tolerance.
inline bool contains(const Box& outer, const Box& inner) {
  const double tol = geo_tolerance(outer, inner);
  for (std::size_t ax = 0; ax < outer.dims(); ++ax) {
    if (inner.lo[ax] < outer.lo[ax] - tol || inner.hi[ax] > outer.hi[ax] + tol) return false;
  }
  return true;
}

inline bool nearly_equal(const Box& a, const Box& b) { return contains(a, b) && contains(b, a); }

/// Intersection of two boxes; throws DegenerateInput when they are disjoint.
inline Box intersect(const Box& a, const Box& b) {
  std::vector<double> lo(a.dims()), hi(a.dims());
  for (std::size_t ax = 0; ax < a.dims(); ++ax) {
    lo[ax] = std::max(a.lo[ax], b.lo[ax]);
    hi[ax] = std::min(a.hi[ax], b.hi[ax]);
  }
  return Box(std::move(lo), std::move(hi));
}

enum class Relation { disjoint, contains, inside, overlaps };

inline const char* to_string(Relation r) {
  switch (r) {
    case Relation::disjoint: return "disjoint";
    case Relation::contains: return "contains";
    case Relation::inside: return "inside";
    case Relation::overlaps: return "overlaps";
  }
  return "?";
}

struct BoxRelation {
  Relation relation;
  double intersection_measure;
};

/// `contains` means a ⊇ b; `inside` means a ⊂ b strictly (b larger).
inline BoxRelation box_relations(const Box& a, const Box& b) {
  if (a.dims() != b.dims()) throw RangeError("box dimension mismatch");
  const double m = intersection_measure(a, b);
  if (disjoint(a, b)) return {Relation::disjoint, m};
  if (contains(a, b)) return {Relation::contains, m};
  if (contains(b, a)) return {Relation::inside, m};
  return {Relation::overlaps, m};
}

/// Mirrors the time interval about `pivot`; space is untouched.
inline Box reflect_time(const Box& b, double pivot) {
  Box r = b;
  r.lo.back() = 2.0 * pivot - b.hi.back();
  r.hi.back() = 2.0 * pivot - b.lo.back();
  return r;
}

/// Shifts a box in time by `dt`.
inline Box shift_time(const Box& b, double dt) {
  Box r = b;
  r.lo.back() += dt;
  r.hi.back() += dt;
  return r;
}

/// Q(center_x, L) x (center_t - L^p, center_t + L^p).
class ParabolicRectangle {
 public:
  ParabolicRectangle() = default;
  ParabolicRectangle(std::vector<double> center_x, double center_t, double edge, GeometryParams params)
      : center_x_(std::move(center_x)), center_t_(center_t), edge_(edge), params_(params) {
    if (!(edge_ > 0.0) || !std::isfinite(edge_)) throw RangeError("edge length must be positive");
    if (static_cast<int>(center_x_.size()) != params_.n) throw RangeError("center dimension does not match n");
  }

  /// The unique rectangle of edge `edge` whose top time slice is at `top`.
  static ParabolicRectangle with_top(std::vector<double> center_x, double top, double edge, GeometryParams params) {
    const double half = std::pow(edge, params.p);
    return ParabolicRectangle(std::move(center_x), top - half, edge, params);
  }

  const std::vector<double>& center_x() const { return center_x_; }
  double center_t() const { return center_t_; }
  double edge() const { return edge_; }
  const GeometryParams& params() const { return params_; }
  int n() const { return params_.n; }
  double p() const { return params_.p; }

  /// L^p, the half time length.
  double half_time() const { return std::pow(edge_, params_.p); }
  double l_x() const { return edge_; }
  double l_t() const { return 2.0 * half_time(); }
  double top() const { return center_t_ + half_time(); }
  double bottom() const { return center_t_ - half_time(); }

  Box box() const { return make_box(bottom(), top()); }
  double measure() const { return std::pow(2.0 * edge_, params_.n) * l_t(); }

  Box upper_part(TimeLag lag) const {
    const double h = half_time();
    return make_box(center_t_ + lag.value() * h, center_t_ + h);
  }
  Box lower_part(TimeLag lag) const {
    const double h = half_time();
    return make_box(center_t_ - h, center_t_ - lag.value() * h);
  }
  /// |R^+(lag)| = |R^-(lag)| = (1 - lag) L^p (2L)^n.
  double part_measure(TimeLag lag) const { return (1.0 - lag.value()) * half_time() * std::pow(2.0 * edge_, params_.n); }

  ParabolicRectangle dilate(double factor) const {
    if (!(factor > 0.0)) throw RangeError("dilation factor must be positive");
    return ParabolicRectangle(center_x_, center_t_, factor * edge_, params_);
  }

  ParabolicRectangle reflect_time(double pivot) const {
    return ParabolicRectangle(center_x_, 2.0 * pivot - center_t_, edge_, params_);
  }

  ParabolicRectangle shifted_time(double dt) const { return ParabolicRectangle(center_x_, center_t_ + dt, edge_, params_); }

 private:
  Box make_box(double t0, double t1) const {
    std::vector<double> lo(center_x_.size() + 1), hi(center_x_.size() + 1);
    for (std::size_t a = 0; a < center_x_.size(); ++a) {
      lo[a] = center_x_[a] - edge_;
      hi[a] = center_x_[a] + edge_;
    }
    lo.back() = t0;
    hi.back() = t1;
    return Box(std::move(lo), std::move(hi));
  }

  std::vector<double> center_x_;
  double center_t_ = 0.0;
  double edge_ = 1.0;
  GeometryParams params_;
};

/// pr_x(outer) ⊇ pr_x(inner).
inline bool spatial_contains(const Box& outer, const Box& inner) {
  const double tol = geo_tolerance(outer, inner);
  for (std::size_t ax = 0; ax + 1 < outer.dims(); ++ax) {
    if (inner.lo[ax] < outer.lo[ax] - tol || inner.hi[ax] > outer.hi[ax] + tol) return false;
  }
  return true;
}

/// pr_t(inner) ⊂ factor · pr_t(outer), dilation about the center of pr_t(outer).
inline bool time_projection_within_dilate(const Box& inner, const Box& outer, double factor) {
  const double mid = 0.5 * (outer.t_lo() + outer.t_hi());
  const double half = 0.5 * factor * outer.time_length();
  const double tol = geo_tolerance(outer, inner);
  return inner.t_lo() >= mid - half - tol && inner.t_hi() <= mid + half + tol;
}

}  // namespace pjn
