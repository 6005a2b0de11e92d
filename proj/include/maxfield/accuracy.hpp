#pragma once

// Reconstruction accuracy of discretized max-stable fields.
//
// For a weight system g over grid s_1..s_d and the joint D-norm of the source
// field, the pair (eta_t, eta_hat_t) is max-stable with bivariate norm
//   N_t(a, b) = || (a*alpha_i v b*beta_i)_i ||_D
// over the distinct locations {t} u {s_i}, where alpha is the indicator of t
// and beta carries the weights (componentwise max merges the slots when t
// coincides with a grid site).  Everything here reduces to N_t:
//
//   MSE(t)  = E (eta_t - eta_hat_t)^2 = 2 (2 - J_t),
//   J_t     = int_0^inf N_t(1, u)^{-2} du
//           = int_0^1 N_t(1, u)^{-2} du + int_0^1 N_t(v, 1)^{-2} dv,
//
// the second line by homogeneity (substitute u = 1/v), which keeps both
// integrands in [max(1,u)^{-2}, 1] on a bounded interval.  The sup/L1 bounds
// on N_t give 0 <= MSE <= 2 with the extremes attained at complete dependence
// and independence.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
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
#include "maxfield/fields.hpp"
#include "maxfield/geometry.hpp"
#include "maxfield/interp.hpp"
#include "maxfield/matrix.hpp"
#include "maxfield/parallel.hpp"
#include "maxfield/quadrature.hpp"
#include "maxfield/rng.hpp"
#include "maxfield/stats.hpp"

namespace maxfield {

// Deterministic salt derived from a point's coordinate bits; used to key
// per-location substreams and Monte Carlo blocks.
inline std::uint64_t point_salt(const Point& t) {
  std::uint64_t h = 0x51ED2701CAFEF00Dull;
  for (double c : t.coords())
    h = mix64(h ^ std::bit_cast<std::uint64_t>(c));
  return h;
}

// ---------------------------------------------------------------------------
// SectionNorm: N_t(a,b) with an O(log R) evaluator.
//
// All exact backends except Husler-Reiss/custom reduce to a finite sum
// sum_r max(a p_r, b q_r); the Monte Carlo backend reduces to the same form
// with one pair per replicate of its cached-block twin.  Sorting the pairs by
// q/p once gives each evaluation by binary search over prefix sums.

class SectionNorm {
 public:
  SectionNorm(const WeightSystem& ws, const DNormModel& joint, const Point& t)
      : weights_(ws.weights(t)) {
    const Grid& grid = ws.grid();
    if (t.dim() != grid.dim())
      throw DomainError("section norm: point dimension mismatch");

    // Distinct locations with coefficient columns (alpha, beta).
    std::vector<Point> locs;
    std::vector<double> alpha, beta;
    std::optional<std::size_t> collide;
    for (std::size_t i = 0; i < grid.size(); ++i)
      if (grid.point(i) == t) collide = i;
    if (collide) {
      for (std::size_t i = 0; i < grid.size(); ++i) {
        locs.push_back(grid.point(i));
        alpha.push_back(i == *collide ? 1.0 : 0.0);
        beta.push_back(weights_[i]);
      }
    } else {
      locs.push_back(t);
      alpha.push_back(1.0);
      beta.push_back(0.0);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        locs.push_back(grid.point(i));
        alpha.push_back(0.0);
        beta.push_back(weights_[i]);
      }
    }

    switch (joint.backend()) {
      case DNormModel::Backend::Independence:
        for (std::size_t i = 0; i < locs.size(); ++i)
          push_pair(alpha[i], beta[i]);
        finalize(1.0, 0);
        break;
      case DNormModel::Backend::CompleteDependence: {
        double pa = 0.0, pb = 0.0;
        for (std::size_t i = 0; i < locs.size(); ++i) {
          pa = std::max(pa, alpha[i]);
          pb = std::max(pb, beta[i]);
        }
        push_pair(pa, pb);
        finalize(1.0, 0);
        break;
      }
      case DNormModel::Backend::MaxLinearSpectral: {
        for (const auto& f : joint.spectral()) {
          double pa = 0.0, pb = 0.0;
          for (std::size_t i = 0; i < locs.size(); ++i) {
            double v = f(locs[i]);
            pa = std::max(pa, alpha[i] * v);
            pb = std::max(pb, beta[i] * v);
          }
          push_pair(pa, pb);
        }
        finalize(1.0, 0);
        break;
      }
      case DNormModel::Backend::GeneratorMc: {
        RowMatrix block = joint.build_block(locs);
        std::size_t m = locs.size();
        for (std::size_t r = 0; r < block.rows(); ++r) {
          const double* z = block.row(r);
          double pa = 0.0, pb = 0.0;
          for (std::size_t i = 0; i < m; ++i) {
            pa = std::max(pa, alpha[i] * z[i]);
            pb = std::max(pb, beta[i] * z[i]);
          }
          push_pair(pa, pb);
        }
        finalize(1.0 / static_cast<double>(block.rows()), block.rows());
        break;
      }
      case DNormModel::Backend::HuslerReiss:
      case DNormModel::Backend::CustomExact: {
        direct_ = [model = joint, locs, alpha, beta](double a, double b) {
          std::vector<double> v(locs.size());
          for (std::size_t i = 0; i < locs.size(); ++i)
            v[i] = std::max(a * alpha[i], b * beta[i]);
          return model.eval(locs, v);
        };
        break;
      }
    }
  }

  const std::vector<double>& weights_at_t() const { return weights_; }
  bool is_mc() const { return draws_ > 0; }

  double operator()(double a, double b) const {
    a = std::abs(a);
    b = std::abs(b);
    if (direct_) return direct_(a, b);
    if (a == 0.0 && b == 0.0) return 0.0;
    std::size_t split = split_index(a, b);
    return scale_ * (a * prefix_p_[split] +
                     b * (suffix_q_[split]));
  }

  // Standard error of the Monte Carlo estimate at (a, b); 0 for exact forms.
  double stderr_at(double a, double b) const {
    if (draws_ == 0) return 0.0;
    a = std::abs(a);
    b = std::abs(b);
    std::size_t split = split_index(a, b);
    double mean = scale_ * (a * prefix_p_[split] + b * suffix_q_[split]);
    double sum_sq =
        a * a * prefix_p2_[split] + b * b * suffix_q2_[split];
    double dn = static_cast<double>(draws_);
    double var = std::max(0.0, (sum_sq - dn * mean * mean) / (dn - 1.0));
    return std::sqrt(var / dn);
  }

 private:
  void push_pair(double p, double q) {
    if (p == 0.0 && q == 0.0) return;
    pairs_.emplace_back(p, q);
  }

  void finalize(double scale, std::size_t draws) {
    scale_ = scale;
    draws_ = draws;
    std::sort(pairs_.begin(), pairs_.end(),
              [](const std::pair<double, double>& x,
                 const std::pair<double, double>& y) {
                double rx = x.first > 0.0
                                ? x.second / x.first
                                : std::numeric_limits<double>::infinity();
                double ry = y.first > 0.0
                                ? y.second / y.first
                                : std::numeric_limits<double>::infinity();
                return rx < ry;
              });
    std::size_t n = pairs_.size();
    rho_.resize(n);
    prefix_p_.assign(n + 1, 0.0);
    suffix_q_.assign(n + 1, 0.0);
    prefix_p2_.assign(n + 1, 0.0);
    suffix_q2_.assign(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      rho_[i] = pairs_[i].first > 0.0
                    ? pairs_[i].second / pairs_[i].first
                    : std::numeric_limits<double>::infinity();
      prefix_p_[i + 1] = prefix_p_[i] + pairs_[i].first;
      prefix_p2_[i + 1] = prefix_p2_[i] + pairs_[i].first * pairs_[i].first;
    }
    for (std::size_t i = n; i-- > 0;) {
      suffix_q_[i] = suffix_q_[i + 1] + pairs_[i].second;
      suffix_q2_[i] = suffix_q2_[i + 1] + pairs_[i].second * pairs_[i].second;
    }
  }

  // Pairs with rho_r = q_r/p_r <= a/b take the a-branch.
  std::size_t split_index(double a, double b) const {
    double c = b > 0.0 ? a / b : std::numeric_limits<double>::infinity();
    return static_cast<std::size_t>(
        std::upper_bound(rho_.begin(), rho_.end(), c) - rho_.begin());
  }

  std::vector<double> weights_;
  std::vector<std::pair<double, double>> pairs_;
  std::vector<double> rho_, prefix_p_, suffix_q_, prefix_p2_, suffix_q2_;
  double scale_ = 1.0;
  std::size_t draws_ = 0;
  std::function<double(double, double)> direct_;
};

// One-shot evaluation of the bivariate norm of (eta_t, eta_hat_t).
inline double dnorm_Dt(const WeightSystem& ws, const DNormModel& joint,
                       const Point& t, double a, double b) {
  return SectionNorm(ws, joint, t)(a, b);
}

// ---------------------------------------------------------------------------
// Analytic mean squared error.

struct MseAnalytic {
  double value = 0.0;
  double integral = 0.0;          // J_t
  std::size_t quad_evaluations = 0;
  double max_integrand_stderr = 0.0;  // MC-backed joints only
};

inline MseAnalytic mse_analytic_detailed(const WeightSystem& ws,
                                         const DNormModel& joint,
                                         const Point& t,
                                         double quad_tol = 1e-8) {
  SectionNorm norm(ws, joint, t);
  MseAnalytic out;
  auto guarded = [&](double a, double b) {
    double n = norm(a, b);
    double se = norm.stderr_at(a, b);
    out.max_integrand_stderr = std::max(out.max_integrand_stderr, se);
    double lo = std::max(std::abs(a), std::abs(b));
    double hi = std::abs(a) + std::abs(b);
    // Exact backends only need rounding headroom.  Monte Carlo sections carry
    // two independent noise sources -- the block behind this estimate and the
    // block that standardized the weights -- and a lattice sweep evaluates
    // hundreds of such skewed means, so the gate is sized for extremes of
    // both: a wide multiple of the local stderr plus an absolute floor for
    // near-deterministic sections whose error lives entirely in the
    // normalization block.  Structural miscalibration sits far outside it.
    double slack = norm.is_mc() ? 8.0 * se + 2e-3 * hi : 1e-8 * hi;
    if (n < lo - slack || n > hi + slack)
      throw InvariantViolation(
          "section norm left the [sup, L1] band at (" + std::to_string(a) +
          ", " + std::to_string(b) + "): " + std::to_string(n));
    return 1.0 / (n * n);
  };
  auto head = adaptive_simpson([&](double u) { return guarded(1.0, u); }, 0.0,
                               1.0, 0.5 * quad_tol);
  auto tail = adaptive_simpson([&](double v) { return guarded(v, 1.0); }, 0.0,
                               1.0, 0.5 * quad_tol);
  out.integral = head.value + tail.value;
  out.quad_evaluations = head.evaluations + tail.evaluations;
  out.value = 2.0 * (2.0 - out.integral);
  double mc_slack = 30.0 * out.max_integrand_stderr;
  if (out.value < -1e-6 - mc_slack || out.value > 2.0 + 1e-6 + mc_slack)
    throw InvariantViolation("analytic MSE " + std::to_string(out.value) +
                             " escaped [0, 2]");
  return out;
}

inline double mse_analytic(const WeightSystem& ws, const DNormModel& joint,
                           const Point& t, double quad_tol = 1e-8) {
  return mse_analytic_detailed(ws, joint, t, quad_tol).value;
}

// ---------------------------------------------------------------------------
// Generator-level error bound MSE <= 6 E|Z_t - Z_hat_t|.

namespace detail {

// Joint generator draws at {t} u grid with the collision slot merged; returns
// per-replicate (z_t, z_hat_t).
template <typename Consume>
void generator_truth_hat(const GeneratorSampler& gen, const WeightSystem& ws,
                         const Point& t, std::size_t samples,
                         std::uint64_t seed, std::uint64_t tag,
                         unsigned threads, Consume&& consume) {
  const Grid& grid = ws.grid();
  auto w = ws.weights(t);
  std::optional<std::size_t> collide;
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (grid.point(i) == t) collide = i;
  std::vector<Point> locs;
  std::size_t t_slot = 0;
  if (collide) {
    locs = grid.points();
    t_slot = *collide;
  } else {
    locs.push_back(t);
    locs.insert(locs.end(), grid.points().begin(), grid.points().end());
  }
  auto plan = gen.prepare(locs);
  std::size_t offset = collide ? 0 : 1;
  RowMatrix vals(samples, 2);
  parallel_for(samples, threads, [&](std::size_t r) {
    CounterRng rng(derive_stream(seed, {tag, r}));
    std::vector<double> z(locs.size());
    plan->draw(rng, z.data());
    double hat = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i)
      hat = std::max(hat, w[i] * z[offset + i]);
    vals(r, 0) = z[t_slot];
    vals(r, 1) = hat;
  });
  for (std::size_t r = 0; r < samples; ++r)
    consume(vals(r, 0), vals(r, 1));
}

}  // namespace detail

inline MonteCarloEstimate mse_bound(const GeneratorSampler& gen,
                                    const WeightSystem& ws, const Point& t,
                                    std::size_t samples, std::uint64_t seed,
                                    unsigned threads = 1) {
  if (samples == 0) throw DomainError("mse_bound: need samples > 0");
  double sum = 0.0, sum_sq = 0.0;
  detail::generator_truth_hat(gen, ws, t, samples, seed, stream::kBound,
                              threads, [&](double z, double hat) {
                                double v = std::abs(z - hat);
                                sum += v;
                                sum_sq += v * v;
                              });
  auto est = estimate_from_sums(sum, sum_sq, samples);
  return {6.0 * est.estimate, 6.0 * est.stderr_};
}

struct BoundDecomposition {
  std::size_t nearest_index = 0;       // smallest index among nearest sites
  MonteCarloEstimate nearest_term;     // E|Z_t - Z_{s_j}|
  double weight_shift_term = 0.0;      // max_i |g_i(t)-g_i(s_j)| * ||1||_D
};

inline BoundDecomposition bound_decomposition(const GeneratorSampler& gen,
                                              const WeightSystem& ws,
                                              const Point& t,
                                              std::size_t samples,
                                              std::uint64_t seed,
                                              unsigned threads = 1) {
  const Grid& grid = ws.grid();
  auto cells = nearest_cells(grid, t);
  BoundDecomposition out;
  out.nearest_index = *std::min_element(cells.begin(), cells.end());
  const Point& sj = grid.point(out.nearest_index);

  std::vector<Point> locs;
  bool same = sj == t;
  if (same)
    locs = {t};
  else
    locs = {t, sj};
  auto plan = gen.prepare(locs);
  std::vector<double> vals(samples);
  parallel_for(samples, threads, [&](std::size_t r) {
    CounterRng rng(derive_stream(seed, {stream::kBound, r}));
    std::vector<double> z(locs.size());
    plan->draw(rng, z.data());
    vals[r] = same ? 0.0 : std::abs(z[0] - z[1]);
  });
  double sum = 0.0, sum_sq = 0.0;
  for (double v : vals) {
    sum += v;
    sum_sq += v * v;
  }
  out.nearest_term = estimate_from_sums(sum, sum_sq, samples);

  auto wt = ws.weights(t);
  auto wj = ws.weights(sj);
  double shift = 0.0;
  for (std::size_t i = 0; i < wt.size(); ++i)
    shift = std::max(shift, std::abs(wt[i] - wj[i]));
  std::vector<double> ones(grid.size(), 1.0);
  out.weight_shift_term = shift * ws.dnorm().eval(grid.points(), ones);
  return out;
}

// ---------------------------------------------------------------------------
// Empirical mean squared error from sampled fields.

inline MonteCarloEstimate mse_empirical(const FieldSampler& field,
                                        const WeightSystem& ws, const Point& t,
                                        std::size_t reps, std::uint64_t seed,
                                        unsigned threads = 1) {
  if (reps == 0) throw DomainError("mse_empirical: need reps > 0");
  const Grid& grid = ws.grid();
  auto w = ws.weights(t);
  std::optional<std::size_t> collide;
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (grid.point(i) == t) collide = i;
  std::vector<Point> locs;
  std::size_t t_slot = 0, offset = 0;
  if (collide) {
    locs = grid.points();
    t_slot = *collide;
  } else {
    locs.push_back(t);
    locs.insert(locs.end(), grid.points().begin(), grid.points().end());
    offset = 1;
  }
  auto sample = field.sample(locs, reps, seed, threads);
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t r = 0; r < reps; ++r) {
    const double* eta = sample.eta.row(r);
    double hat = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (w[i] > 0.0) {
        any = true;
        hat = std::max(hat, eta[offset + i] / w[i]);
      }
    }
    if (!any) throw AllWeightsZero("no positive weight at the probe point");
    double err = eta[t_slot] - hat;
    sum += err * err;
    sum_sq += err * err * err * err;
  }
  return estimate_from_sums(sum, sum_sq, reps);
}

// ---------------------------------------------------------------------------
// Integrated MSE over a region.

struct BoundingBox {
  std::vector<double> lo, hi;
  static BoundingBox unit(std::size_t k) {
    BoundingBox b;
    b.lo.assign(k, 0.0);
    b.hi.assign(k, 1.0);
    return b;
  }
  double volume() const {
    double v = 1.0;
    for (std::size_t i = 0; i < lo.size(); ++i) v *= hi[i] - lo[i];
    return v;
  }
};

enum class ImseRule { MidpointLattice, MonteCarloProbes };

struct ImseReport {
  double value = 0.0;
  ImseRule rule = ImseRule::MidpointLattice;
  std::size_t resolution = 0;
  std::vector<std::pair<Point, double>> node_mse;
  std::size_t max_quad_evaluations = 0;
  double max_integrand_stderr = 0.0;
};

using JointFactory = std::function<DNormModel(const Point&)>;

// Midpoint tensor rule for k <= 2 (exactly additive over box partitions),
// seeded Monte Carlo probes otherwise.
inline ImseReport imse(const WeightSystem& ws, const JointFactory& joint_for,
                       std::size_t resolution = 0, double quad_tol = 1e-8,
                       std::optional<BoundingBox> region = std::nullopt,
                       std::uint64_t probe_seed = 0) {
  std::size_t k = ws.grid().dim();
  BoundingBox box = region ? *region : BoundingBox::unit(k);
  if (box.lo.size() != k || box.hi.size() != k)
    throw DomainError("imse: region dimension mismatch");
  for (std::size_t i = 0; i < k; ++i)
    if (!(box.hi[i] > box.lo[i])) throw DomainError("imse: empty region");

  ImseReport out;
  std::vector<Point> nodes;
  double node_weight = 0.0;
  if (k <= 2) {
    if (resolution == 0) resolution = k == 1 ? 64 : 16;
    out.rule = ImseRule::MidpointLattice;
    std::vector<std::size_t> idx(k, 0);
    for (;;) {
      std::vector<double> c(k);
      for (std::size_t i = 0; i < k; ++i)
        c[i] = box.lo[i] + (static_cast<double>(idx[i]) + 0.5) *
                               (box.hi[i] - box.lo[i]) /
                               static_cast<double>(resolution);
      nodes.emplace_back(std::move(c));
      std::size_t i = 0;
      for (; i < k; ++i) {
        if (++idx[i] < resolution) break;
        idx[i] = 0;
      }
      if (i == k) break;
    }
    node_weight = box.volume() / static_cast<double>(nodes.size());
  } else {
    if (resolution == 0) resolution = 256;
    out.rule = ImseRule::MonteCarloProbes;
    CounterRng rng(derive_stream(probe_seed, {stream::kImseProbe, k}));
    for (std::size_t i = 0; i < resolution; ++i) {
      std::vector<double> c(k);
      for (std::size_t j = 0; j < k; ++j)
        c[j] = box.lo[j] + (box.hi[j] - box.lo[j]) * rng.uniform01();
      nodes.emplace_back(std::move(c));
    }
    node_weight = box.volume() / static_cast<double>(nodes.size());
  }
  out.resolution = resolution;

  double acc = 0.0;
  for (const auto& t : nodes) {
    auto r = mse_analytic_detailed(ws, joint_for(t), t, quad_tol);
    acc += r.value * node_weight;
    out.node_mse.emplace_back(t, r.value);
    out.max_quad_evaluations =
        std::max(out.max_quad_evaluations, r.quad_evaluations);
    out.max_integrand_stderr =
        std::max(out.max_integrand_stderr, r.max_integrand_stderr);
  }
  out.value = acc;
  return out;
}

// Factory producing per-location joint models for a field: exact for
// max-linear truths, Monte Carlo blocks keyed by the location otherwise
// (fresh block per node keeps memory flat across a lattice sweep).
inline JointFactory joint_factory_for(const FieldSampler& field,
                                      std::size_t mc_samples,
                                      std::uint64_t seed) {
  return [field, mc_samples, seed](const Point& t) {
    if (field.is_max_linear()) return field.joint_model(mc_samples, seed);
    return field.joint_model(mc_samples,
                             derive_stream(seed, {stream::kImseProbe, point_salt(t)}));
  };
}

// ---------------------------------------------------------------------------
// Convergence experiment over a grid ladder.

struct ConvergenceSettings {
  WeightFamily family = WeightFamily::Kernel;
  KernelFn kernel = KernelFn::exponential();
  // Bandwidth from the mesh; the default h = eps^2 satisfies eps/h -> inf.
  std::function<double(double)> bandwidth_rule =
      [](double eps) { return eps * eps; };
  std::size_t imse_resolution = 64;
  double quad_tol = 1e-8;
  std::size_t mc_samples = 20000;   // joint-model budget for MC-backed truths
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

struct ConvergenceRow {
  std::size_t index = 0;  // 1-based position in the ladder
  std::size_t d = 0;
  double eps = 0.0;
  double h = 0.0;  // NaN for interpolating families
  double imse = 0.0;
  std::vector<double> probe_mse;
};

struct ConvergenceTable {
  std::vector<Point> probes;
  std::vector<ConvergenceRow> rows;
};

inline ConvergenceTable convergence_experiment(
    const FieldSampler& truth, std::span<const Grid> grids,
    std::span<const Point> probes, const ConvergenceSettings& settings = {}) {
  if (grids.empty()) throw BadSequence("convergence needs at least one grid");
  for (std::size_t i = 1; i < grids.size(); ++i)
    if (!(grids[i].mesh() < grids[i - 1].mesh()))
      throw BadSequence("grid meshes must be strictly decreasing");
  if (settings.family == WeightFamily::Kernel) {
    double prev_ratio = 0.0;
    for (const auto& g : grids) {
      double h = settings.bandwidth_rule(g.mesh());
      if (!(h > 0.0)) throw InvalidBandwidth("bandwidth rule produced h <= 0");
      double ratio = g.mesh() / h;
      if (!(ratio > prev_ratio))
        throw BadSequence(
            "bandwidth rule must make mesh/h strictly increasing along the ladder");
      prev_ratio = ratio;
    }
  }

  ConvergenceTable table;
  table.probes.assign(probes.begin(), probes.end());
  for (std::size_t n = 0; n < grids.size(); ++n) {
    const Grid& grid = grids[n];
    std::uint64_t row_seed = derive_stream(settings.seed, {stream::kConvergence, n});
    DNormModel grid_model = truth.joint_model(settings.mc_samples, row_seed);
    ConvergenceRow row;
    row.index = n + 1;
    row.d = grid.size();
    row.eps = grid.mesh();
    row.h = std::numeric_limits<double>::quiet_NaN();

    WeightSystem ws = [&] {
      switch (settings.family) {
        case WeightFamily::Kernel: {
          double h = settings.bandwidth_rule(grid.mesh());
          row.h = h;
          return WeightSystem::kernel(grid, settings.kernel, h, grid_model);
        }
        case WeightFamily::Piecewise1D:
          return WeightSystem::piecewise_1d(grid, grid_model);
        case WeightFamily::MinDistance:
          return WeightSystem::min_distance(grid, grid_model);
        case WeightFamily::Custom:
          throw DomainError("convergence: custom weight family not supported");
      }
      throw ExecutionError("unreachable weight family");
    }();

    auto factory = joint_factory_for(truth, settings.mc_samples, row_seed);
    row.imse = imse(ws, factory, settings.imse_resolution, settings.quad_tol)
                   .value;
    for (const auto& t : probes)
      row.probe_mse.push_back(
          mse_analytic(ws, factory(t), t, settings.quad_tol));
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace maxfield
