#pragma once

// Weight systems g_1..g_d over an observation grid, standardized so that
// ||g(t)||_D = 1 for the joint D-norm of the observed field.  The discretized
// field they induce is eta_hat(t) = max_{i: g_i(t) > 0} eta(s_i) / g_i(t),
// which reproduces the observations at grid points whenever the weights
// interpolate (g_i(s_j) = delta_ij).
//
// Families:
//  * piecewise 1-D: adjacent-pair construction on a sorted grid covering
//    [0,1]; on [s_l, s_{l+1}] only sites l, l+1 are active with
//    g_l = (s_{l+1}-t)/N, g_{l+1} = (t-s_l)/N, N = ||(s_{l+1}-t, t-s_l)||
//    taken in the bivariate norm of the pair.  Interpolates by construction.
//  * min-distance: raw weight at site i is the distance to the nearest other
//    site, normalized by the joint norm over the grid.  Interpolates.
//  * kernel: raw weight K(||t-s_i||/h), normalized likewise.  Smooth but not
//    interpolating; all weights lie in [0,1] because the joint norm dominates
//    the sup-norm.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "maxfield/dnorm.hpp"
#include "maxfield/errors.hpp"
#include "maxfield/geometry.hpp"

namespace maxfield {

enum class WeightFamily { Piecewise1D, MinDistance, Kernel, Custom };

inline const char* weight_family_name(WeightFamily f) {
  switch (f) {
    case WeightFamily::Piecewise1D: return "piecewise1d";
    case WeightFamily::MinDistance: return "min_distance";
    case WeightFamily::Kernel: return "kernel";
    case WeightFamily::Custom: return "custom";
  }
  return "?";
}

class WeightSystem {
 public:
  static WeightSystem piecewise_1d(Grid grid, DNormModel bivariate) {
    if (grid.dim() != 1) throw BadGrid("piecewise weights need a 1-D grid");
    if (grid.size() < 2) throw BadGrid("piecewise weights need >= 2 sites");
    const auto& pts = grid.points();
    for (std::size_t i = 1; i < pts.size(); ++i)
      if (!(pts[i][0] > pts[i - 1][0]))
        throw BadGrid("piecewise weights need a strictly ascending grid");
    if (pts.front()[0] != 0.0 || pts.back()[0] != 1.0)
      throw BadGrid("piecewise weights need grid endpoints 0 and 1");

    auto impl = std::make_shared<Impl>();
    impl->grid = std::make_shared<Grid>(std::move(grid));
    impl->model = std::move(bivariate);
    impl->family = WeightFamily::Piecewise1D;
    impl->interpolating = true;
    auto g = impl->grid;
    auto model = impl->model;
    impl->eval = [g, model](const Point& t) {
      const auto& sites = g->points();
      std::size_t d = sites.size();
      double x = t[0];
      std::size_t l = 0;
      {
        std::size_t lo = 0, hi = d - 1;
        while (hi - lo > 1) {
          std::size_t mid = (lo + hi) / 2;
          if (sites[mid][0] <= x) lo = mid; else hi = mid;
        }
        l = lo;
      }
      double a = sites[l + 1][0] - x;   // slot of site l
      double b = x - sites[l][0];       // slot of site l+1
      const Point pair_locs[2] = {sites[l], sites[l + 1]};
      const double pair_x[2] = {a, b};
      double n = model->eval(pair_locs, pair_x);
      std::vector<double> w(d, 0.0);
      w[l] = a / n;
      w[l + 1] = b / n;
      return w;
    };
    return WeightSystem(std::move(impl));
  }

  static WeightSystem min_distance(Grid grid, DNormModel joint) {
    if (grid.size() < 2)
      throw NeedTwoPoints("min-distance weights need >= 2 sites");
    auto impl = std::make_shared<Impl>();
    impl->grid = std::make_shared<Grid>(std::move(grid));
    impl->model = std::move(joint);
    impl->family = WeightFamily::MinDistance;
    impl->interpolating = true;
    auto g = impl->grid;
    auto model = impl->model;
    impl->eval = [g, model](const Point& t) {
      const auto& sites = g->points();
      std::size_t d = sites.size();
      std::vector<double> w(d);
      for (std::size_t i = 0; i < d; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < d; ++j)
          if (j != i) best = std::min(best, distance(g->norm(), t, sites[j]));
        w[i] = best;
      }
      normalize(*model, sites, w);
      return w;
    };
    return WeightSystem(std::move(impl));
  }

  static WeightSystem kernel(Grid grid, KernelFn k, double h, DNormModel joint) {
    if (!(h > 0.0) || !std::isfinite(h))
      throw InvalidBandwidth("kernel bandwidth must lie in (0, inf)");
    auto impl = std::make_shared<Impl>();
    impl->grid = std::make_shared<Grid>(std::move(grid));
    impl->model = std::move(joint);
    impl->family = WeightFamily::Kernel;
    impl->interpolating = false;
    impl->kernel = std::move(k);
    impl->bandwidth = h;
    auto g = impl->grid;
    auto model = impl->model;
    auto kf = *impl->kernel;
    impl->eval = [g, model, kf, h](const Point& t) {
      const auto& sites = g->points();
      std::size_t d = sites.size();
      std::vector<double> w(d);
      for (std::size_t i = 0; i < d; ++i) {
        double v = kf(distance(g->norm(), t, sites[i]) / h);
        if (!(v >= 0.0))
          throw DomainError("kernel produced a negative weight");
        w[i] = v;
      }
      normalize(*model, sites, w);
      return w;
    };
    return WeightSystem(std::move(impl));
  }

  // Arbitrary final weights (already standardized or deliberately not, e.g.
  // corrupted controls in validation tests).
  static WeightSystem custom(Grid grid, DNormModel joint,
                             std::function<std::vector<double>(const Point&)> eval,
                             bool interpolating) {
    auto impl = std::make_shared<Impl>();
    impl->grid = std::make_shared<Grid>(std::move(grid));
    impl->model = std::move(joint);
    impl->family = WeightFamily::Custom;
    impl->interpolating = interpolating;
    impl->eval = [eval](const Point& t) { return eval(t); };
    return WeightSystem(std::move(impl));
  }

  const Grid& grid() const { return *impl_->grid; }
  const DNormModel& dnorm() const { return *impl_->model; }
  WeightFamily family() const { return impl_->family; }
  bool interpolating() const { return impl_->interpolating; }
  std::optional<double> bandwidth() const { return impl_->bandwidth; }
  const std::optional<KernelFn>& kernel_fn() const { return impl_->kernel; }

  std::vector<double> weights(const Point& t) const {
    if (t.dim() != impl_->grid->dim())
      throw DomainError("weights: point dimension does not match the grid");
    return impl_->eval(t);
  }

  double weight(std::size_t i, const Point& t) const {
    auto w = weights(t);
    if (i >= w.size()) throw DomainError("weight index out of range");
    return w[i];
  }

  std::string describe() const {
    std::string s = weight_family_name(impl_->family);
    if (impl_->bandwidth)
      s += "(" + impl_->kernel->name() + ", h=" + std::to_string(*impl_->bandwidth) + ")";
    return s + " over d=" + std::to_string(impl_->grid->size()) +
           " via " + impl_->model->describe();
  }

 private:
  struct Impl {
    std::shared_ptr<const Grid> grid;
    std::optional<DNormModel> model;
    WeightFamily family = WeightFamily::Custom;
    bool interpolating = false;
    std::function<std::vector<double>(const Point&)> eval;
    std::optional<KernelFn> kernel;
    std::optional<double> bandwidth;
  };

  static void normalize(const DNormModel& model, std::span<const Point> sites,
                        std::vector<double>& w) {
    bool any = false;
    for (double v : w)
      if (v > 0.0) any = true;
    if (!any)
      throw AllWeightsZero("all raw weights vanish at the requested point");
    double n = model.eval(sites, w);
    for (double& v : w) v /= n;
  }

  explicit WeightSystem(std::shared_ptr<const Impl> impl)
      : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

inline WeightSystem weights_1d(Grid grid, DNormModel bivariate) {
  return WeightSystem::piecewise_1d(std::move(grid), std::move(bivariate));
}
inline WeightSystem weights_mindist(Grid grid, DNormModel joint) {
  return WeightSystem::min_distance(std::move(grid), std::move(joint));
}
inline WeightSystem weights_kernel(Grid grid, KernelFn k, double h,
                                   DNormModel joint) {
  return WeightSystem::kernel(std::move(grid), std::move(k), h,
                              std::move(joint));
}

// Interpolated generator value Z_hat(t) = max_i g_i(t) z_i.
inline double generator_hat(const WeightSystem& ws, std::span<const double> z,
                            const Point& t) {
  auto w = ws.weights(t);
  if (z.size() != w.size())
    throw DomainError("generator_hat: need one generator value per site");
  double m = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i)
    m = std::max(m, w[i] * z[i]);
  return m;
}

// ---------------------------------------------------------------------------
// Discretized field: weights plus one observed replicate.

class DiscretizedField {
 public:
  DiscretizedField(WeightSystem ws, std::vector<double> observations)
      : ws_(std::move(ws)), obs_(std::move(observations)) {
    if (obs_.size() != ws_.grid().size())
      throw DomainError("need exactly one observation per grid site");
    for (double v : obs_) {
      if (!std::isfinite(v) || v >= 0.0)
        throw NonNegativeObservation(
            "observations must be negative (standard margins), got " +
            std::to_string(v));
    }
  }

  const WeightSystem& weights() const { return ws_; }
  const std::vector<double>& observations() const { return obs_; }

  // eta_hat(t) = max over sites with positive weight of eta(s_i)/g_i(t).
  double operator()(const Point& t) const {
    auto w = ws_.weights(t);
    double best = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (w[i] > 0.0) {
        any = true;
        best = std::max(best, obs_[i] / w[i]);
      }
    }
    if (!any) throw AllWeightsZero("no positive weight at the requested point");
    return best;
  }

 private:
  WeightSystem ws_;
  std::vector<double> obs_;
};

inline DiscretizedField discretize(WeightSystem ws,
                                   std::vector<double> observations) {
  return DiscretizedField(std::move(ws), std::move(observations));
}

// Spectral functions of the discretized max-linear field:
// f_hat_j(t) = max_i g_i(t) f_j(s_i).  If the source field is max-linear with
// spectral functions f_j, the discretized field is again max-linear with
// these, and sum_j f_hat_j(t) = ||g(t)||_D = 1.
inline std::vector<SpectralFn> discretized_spectral(
    const WeightSystem& ws, std::vector<SpectralFn> fs) {
  std::vector<double> site_values;
  std::vector<SpectralFn> out;
  const auto& sites = ws.grid().points();
  for (auto& f : fs) {
    std::vector<double> at_sites(sites.size());
    for (std::size_t i = 0; i < sites.size(); ++i) at_sites[i] = f(sites[i]);
    out.push_back({"hat(" + f.name + ")",
                   [ws, at_sites](const Point& t) {
                     auto w = ws.weights(t);
                     double m = 0.0;
                     for (std::size_t i = 0; i < w.size(); ++i)
                       m = std::max(m, w[i] * at_sites[i]);
                     return m;
                   }});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Weight validation: standardization over a probe set and the interpolation
// matrix against the identity.

struct WeightValidation {
  std::size_t probes = 0;
  double max_standardization_dev = 0.0;
  double max_delta_dev = 0.0;  // interpolation matrix vs identity
  double min_weight = 0.0;
  double max_weight = 0.0;
  bool standardization_ok = false;
  bool interpolation_ok = false;
  bool pass() const { return standardization_ok && interpolation_ok; }
};

inline WeightValidation validate_weights(const WeightSystem& ws,
                                         std::size_t resolution = 0,
                                         double tol = 1e-9) {
  const Grid& g = ws.grid();
  std::size_t k = g.dim();
  if (resolution == 0) resolution = default_probe_resolution(k);
  std::vector<Point> probes = k <= 2 ? lattice_points(k, resolution)
                                     : mc_probe_points(k, resolution);
  WeightValidation out;
  out.probes = probes.size();
  out.min_weight = std::numeric_limits<double>::infinity();
  out.max_weight = -std::numeric_limits<double>::infinity();
  for (const auto& t : probes) {
    auto w = ws.weights(t);
    for (double v : w) {
      out.min_weight = std::min(out.min_weight, v);
      out.max_weight = std::max(out.max_weight, v);
    }
    double n = ws.dnorm().eval(g.points(), w);
    out.max_standardization_dev =
        std::max(out.max_standardization_dev, std::abs(n - 1.0));
  }
  for (std::size_t j = 0; j < g.size(); ++j) {
    auto w = ws.weights(g.point(j));
    for (std::size_t i = 0; i < w.size(); ++i) {
      double want = i == j ? 1.0 : 0.0;
      out.max_delta_dev = std::max(out.max_delta_dev, std::abs(w[i] - want));
    }
  }
  out.standardization_ok = out.max_standardization_dev <= tol;
  out.interpolation_ok = !ws.interpolating() || out.max_delta_dev <= 1e-12;
  return out;
}

}  // namespace maxfield
