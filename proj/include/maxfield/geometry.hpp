#pragma once

// Spatial primitives: points in the unit cube [0,1]^k, observation grids with
// their mesh (fill distance), spatial norms, and interpolation kernels with an
// admissibility check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "maxfield/errors.hpp"
#include "maxfield/rng.hpp"

namespace maxfield {

class Point {
 public:
  explicit Point(std::vector<double> coords) : coords_(std::move(coords)) {
    validate();
  }
  Point(std::initializer_list<double> coords) : coords_(coords) { validate(); }

  std::size_t dim() const { return coords_.size(); }
  double operator[](std::size_t i) const { return coords_[i]; }
  const std::vector<double>& coords() const { return coords_; }

  bool operator==(const Point& o) const { return coords_ == o.coords_; }
  bool operator!=(const Point& o) const { return !(*this == o); }

 private:
  void validate() const {
    if (coords_.empty()) throw OutOfDomain("point needs at least one coordinate");
    for (double c : coords_) {
      if (!std::isfinite(c) || c < 0.0 || c > 1.0)
        throw OutOfDomain("coordinate " + std::to_string(c) +
                          " outside the unit cube [0,1]^k");
    }
  }
  std::vector<double> coords_;
};

enum class SpatialNorm { L1, L2, Linf };

inline const char* spatial_norm_name(SpatialNorm n) {
  switch (n) {
    case SpatialNorm::L1: return "l1";
    case SpatialNorm::L2: return "l2";
    case SpatialNorm::Linf: return "linf";
  }
  return "?";
}

inline double spatial_norm_of(SpatialNorm n, const double* v, std::size_t k) {
  double acc = 0.0;
  switch (n) {
    case SpatialNorm::L1:
      for (std::size_t i = 0; i < k; ++i) acc += std::abs(v[i]);
      return acc;
    case SpatialNorm::L2:
      for (std::size_t i = 0; i < k; ++i) acc += v[i] * v[i];
      return std::sqrt(acc);
    case SpatialNorm::Linf:
      for (std::size_t i = 0; i < k; ++i) acc = std::max(acc, std::abs(v[i]));
      return acc;
  }
  return acc;
}

inline double distance(SpatialNorm n, const Point& a, const Point& b) {
  if (a.dim() != b.dim())
    throw DomainError("distance: dimension mismatch");
  std::vector<double> d(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) d[i] = a[i] - b[i];
  return spatial_norm_of(n, d.data(), d.size());
}

// Tensor lattice {j/resolution : j = 0..resolution}^k, endpoints included.
inline std::vector<Point> lattice_points(std::size_t k, std::size_t resolution) {
  if (k == 0 || resolution == 0)
    throw DomainError("lattice_points: need k >= 1 and resolution >= 1");
  std::vector<Point> out;
  std::vector<std::size_t> idx(k, 0);
  for (;;) {
    std::vector<double> c(k);
    for (std::size_t i = 0; i < k; ++i)
      c[i] = static_cast<double>(idx[i]) / static_cast<double>(resolution);
    out.emplace_back(std::move(c));
    std::size_t i = 0;
    for (; i < k; ++i) {
      if (++idx[i] <= resolution) break;
      idx[i] = 0;
    }
    if (i == k) break;
  }
  return out;
}

// Monte Carlo probe points with a fixed internal stream so that derived grid
// properties (mesh) are reproducible library constants.
inline std::vector<Point> mc_probe_points(std::size_t k, std::size_t count,
                                          std::uint64_t salt = 0) {
  CounterRng rng(derive_stream(0xA05EEDF00Dull, {stream::kMeshProbe, salt, k}));
  std::vector<Point> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<double> c(k);
    for (std::size_t j = 0; j < k; ++j) c[j] = rng.uniform01();
    out.emplace_back(std::move(c));
  }
  return out;
}

// Default probe resolution per axis for the mesh computation; for k >= 3 the
// value is the number of Monte Carlo probes instead of a per-axis resolution.
inline std::size_t default_probe_resolution(std::size_t k) {
  if (k == 1) return 1024;
  if (k == 2) return 32;
  return 4096;
}

class Grid {
 public:
  std::size_t size() const { return points_.size(); }
  std::size_t dim() const { return points_.front().dim(); }
  const Point& point(std::size_t i) const { return points_[i]; }
  const std::vector<Point>& points() const { return points_; }
  SpatialNorm norm() const { return norm_; }
  double mesh() const { return mesh_; }

  friend Grid make_grid(std::vector<Point> points, SpatialNorm norm,
                        std::size_t probe_resolution);

 private:
  Grid(std::vector<Point> p, SpatialNorm n, double m)
      : points_(std::move(p)), norm_(n), mesh_(m) {}
  std::vector<Point> points_;
  SpatialNorm norm_;
  double mesh_;
};

// Indices of all grid points attaining min_i ||t - s_i|| (ties within 1e-12).
inline std::vector<std::size_t> nearest_cells(const Grid& g, const Point& t) {
  if (t.dim() != g.dim()) throw DomainError("nearest_cells: dimension mismatch");
  std::vector<double> dist(g.size());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < g.size(); ++i) {
    dist[i] = distance(g.norm(), t, g.point(i));
    best = std::min(best, dist[i]);
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (dist[i] <= best + 1e-12) out.push_back(i);
  return out;
}

// Builds a grid from distinct points and computes its mesh, the sup over the
// probe set of the distance to the nearest grid point.  probe_resolution 0
// selects the per-dimension default.
inline Grid make_grid(std::vector<Point> points, SpatialNorm norm,
                      std::size_t probe_resolution = 0) {
  if (points.empty()) throw BadGrid("grid needs at least one point");
  std::size_t k = points.front().dim();
  for (const auto& p : points)
    if (p.dim() != k) throw BadGrid("grid points have mixed dimensions");
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j)
      if (points[i] == points[j])
        throw DuplicatePoint("grid points " + std::to_string(i) + " and " +
                             std::to_string(j) + " coincide");
  if (probe_resolution == 0) probe_resolution = default_probe_resolution(k);
  std::vector<Point> probes = k <= 2
                                  ? lattice_points(k, probe_resolution)
                                  : mc_probe_points(k, probe_resolution);
  double mesh = 0.0;
  for (const auto& t : probes) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& s : points) best = std::min(best, distance(norm, t, s));
    mesh = std::max(mesh, best);
  }
  return Grid(std::move(points), norm, mesh);
}

// Equally spaced 1-D grid {j/(d-1) : j = 0..d-1}.
inline std::vector<Point> uniform_points_1d(std::size_t d) {
  if (d < 2) throw BadGrid("uniform 1-D grid needs at least two points");
  std::vector<Point> pts;
  pts.reserve(d);
  for (std::size_t j = 0; j < d; ++j)
    pts.push_back(Point{static_cast<double>(j) / static_cast<double>(d - 1)});
  return pts;
}

// ---------------------------------------------------------------------------
// Interpolation kernels.

class KernelFn {
 public:
  double operator()(double x) const { return f_(x); }
  bool has_log() const { return static_cast<bool>(logf_); }
  double log_value(double x) const { return logf_(x); }
  const std::string& name() const { return name_; }

  static KernelFn exponential() {
    return KernelFn("exponential", [](double x) { return std::exp(-x); },
                    [](double x) { return -x; });
  }
  static KernelFn gaussian() {
    return KernelFn("gaussian", [](double x) { return std::exp(-x * x); },
                    [](double x) { return -x * x; });
  }
  // Heavy-tailed control case; deliberately fails the admissibility ratio.
  static KernelFn power_law(double p) {
    if (!(p > 0.0)) throw DomainError("power_law kernel needs p > 0");
    return KernelFn("power_law",
                    [p](double x) { return std::pow(1.0 + x, -p); },
                    [p](double x) { return -p * std::log1p(x); });
  }
  // Piecewise-linear kernel through (x, K(x)) knots; 0 beyond the last knot.
  static KernelFn from_table(std::vector<std::pair<double, double>> knots) {
    if (knots.size() < 2) throw DomainError("kernel table needs >= 2 knots");
    std::sort(knots.begin(), knots.end());
    for (std::size_t i = 1; i < knots.size(); ++i)
      if (knots[i].first == knots[i - 1].first)
        throw DuplicatePoint("kernel table has repeated abscissa");
    auto eval = [knots](double x) {
      if (x <= knots.front().first) return knots.front().second;
      if (x >= knots.back().first) return 0.0;
      auto it = std::upper_bound(
          knots.begin(), knots.end(), std::make_pair(x, std::numeric_limits<double>::infinity()));
      auto lo = std::prev(it);
      double w = (x - lo->first) / (it->first - lo->first);
      return lo->second + w * (it->second - lo->second);
    };
    return KernelFn("table", eval, nullptr);
  }

 private:
  KernelFn(std::string name, std::function<double(double)> f,
           std::function<double(double)> logf)
      : name_(std::move(name)), f_(std::move(f)), logf_(std::move(logf)) {}
  std::string name_;
  std::function<double(double)> f_;
  std::function<double(double)> logf_;
};

struct KernelRatioCheck {
  double a = 0.0, b = 0.0;
  double ratio = 0.0;  // K(a x)/K(b x) at the top of the ladder
  bool ok = false;
};

struct KernelCheck {
  double k0 = 0.0;
  bool k0_ok = false;
  bool decreasing_ok = false;
  std::vector<KernelRatioCheck> ratios;
  bool pass() const {
    if (!k0_ok || !decreasing_ok) return false;
    for (const auto& r : ratios)
      if (!r.ok) return false;
    return true;
  }
};

// Numerical admissibility check: K(0) = 1, strict decrease along a ladder, and
// K(a x)/K(b x) -> 0 for each pair a > b > 0 (tested at the ladder top against
// `tol`).  Kernels exposing log values are compared in log space so that
// underflow at large arguments cannot mask a failure.
inline KernelCheck validate_kernel(
    const KernelFn& k,
    const std::vector<std::pair<double, double>>& ratio_pairs =
        {{2.0, 1.0}, {3.0, 1.0}, {3.0, 2.0}},
    const std::vector<double>& ladder = {1.0, 10.0, 100.0, 1000.0, 10000.0},
    double tol = 1e-6) {
  if (ladder.empty()) throw DomainError("validate_kernel: empty ladder");
  KernelCheck out;
  out.k0 = k(0.0);
  out.k0_ok = std::abs(out.k0 - 1.0) <= 1e-9;

  out.decreasing_ok = true;
  std::vector<double> decrease_points = {0.0, 0.25, 0.5};
  decrease_points.insert(decrease_points.end(), ladder.begin(), ladder.end());
  std::sort(decrease_points.begin(), decrease_points.end());
  for (std::size_t i = 1; i < decrease_points.size(); ++i) {
    double x0 = decrease_points[i - 1], x1 = decrease_points[i];
    if (k.has_log()) {
      if (!(k.log_value(x1) < k.log_value(x0))) out.decreasing_ok = false;
    } else {
      double v0 = k(x0), v1 = k(x1);
      if (v0 > 1e-300 || v1 > 1e-300) {
        if (!(v1 < v0)) out.decreasing_ok = false;
      }
    }
  }

  double top = ladder.back();
  for (const auto& [a, b] : ratio_pairs) {
    if (!(a > b && b > 0.0))
      throw DomainError("validate_kernel: ratio pairs need a > b > 0");
    KernelRatioCheck rc;
    rc.a = a;
    rc.b = b;
    if (k.has_log()) {
      double lr = k.log_value(a * top) - k.log_value(b * top);
      rc.ratio = std::exp(lr);
      rc.ok = lr <= std::log(tol);
    } else {
      double num = k(a * top), den = k(b * top);
      rc.ratio = den > 0.0 ? num / den
                           : std::numeric_limits<double>::quiet_NaN();
      rc.ok = den > 0.0 && rc.ratio <= tol;
    }
    out.ratios.push_back(rc);
  }
  return out;
}

}  // namespace maxfield
