#pragma once

// Max-stable field samplers in standard margins P(eta_t <= x) = e^x, x <= 0.
//
// Two constructions:
//  * max-linear fields  eta_t = -1/xi_t,  xi_t = max_j f_j(t) F_j  with unit
//    Frechet F_j and standardized spectral functions (sum_j f_j == 1): exact.
//  * spectral series over a generator (Brown-Resnick and friends):
//    xi_t = max_i Z^(i)_t / Gamma_i with unit-rate Poisson arrivals Gamma_i,
//    stopped once no future term can change the running maximum.  For
//    unbounded generators the stop rule uses a cutoff kappa and replicates
//    that exhaust max_terms are flagged as truncated.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "maxfield/dnorm.hpp"
#include "maxfield/errors.hpp"
#include "maxfield/geometry.hpp"
#include "maxfield/linalg.hpp"
#include "maxfield/matrix.hpp"
#include "maxfield/parallel.hpp"
#include "maxfield/rng.hpp"
#include "maxfield/stats.hpp"

namespace maxfield {

// ---------------------------------------------------------------------------
// Fractional-Brownian variogram sigma^2(t) = ||t||_2^alpha, alpha in (0, 2].

struct Variogram {
  double alpha = 1.0;

  explicit Variogram(double a) : alpha(a) {
    if (!(a > 0.0) || a > 2.0)
      throw DomainError("variogram exponent must lie in (0, 2]");
  }

  double sigma2(const Point& t) const {
    double s = 0.0;
    for (std::size_t i = 0; i < t.dim(); ++i) s += t[i] * t[i];
    return std::pow(std::sqrt(s), alpha);
  }

  double sigma2_of_lag(std::span<const double> lag) const {
    double s = 0.0;
    for (double v : lag) s += v * v;
    return std::pow(std::sqrt(s), alpha);
  }

  // Husler-Reiss dependence parameter between two locations.
  double hr_sigma(const Point& a, const Point& b) const {
    std::vector<double> lag(a.dim());
    for (std::size_t i = 0; i < a.dim(); ++i) lag[i] = a[i] - b[i];
    return std::sqrt(sigma2_of_lag(lag));
  }
};

// Joint draws of the centered Gaussian path X with stationary increments,
// X_origin = 0 and Var X_t = sigma^2(t):
//   Cov(X_s, X_t) = (sigma^2(s) + sigma^2(t) - sigma^2(s - t)) / 2.
// Locations with zero variance (the origin) are pinned to exactly 0 and
// excluded from the factorization.
class GaussianPathPlan {
 public:
  GaussianPathPlan(const Variogram& vg, std::span<const Point> locations)
      : m_(locations.size()), sigma2_(m_) {
    for (std::size_t i = 0; i < m_; ++i) {
      sigma2_[i] = vg.sigma2(locations[i]);
      if (sigma2_[i] > 0.0) active_.push_back(i);
    }
    std::size_t n = active_.size();
    if (n == 0) return;
    RowMatrix cov(n, n);
    std::vector<double> lag(locations[0].dim());
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b <= a; ++b) {
        const Point& s = locations[active_[a]];
        const Point& t = locations[active_[b]];
        for (std::size_t i = 0; i < lag.size(); ++i) lag[i] = s[i] - t[i];
        double c = 0.5 * (sigma2_[active_[a]] + sigma2_[active_[b]] -
                          vg.sigma2_of_lag(lag));
        cov(a, b) = c;
        cov(b, a) = c;
      }
    chol_ = cholesky_spd(cov);
  }

  std::size_t arity() const { return m_; }
  double sigma2_at(std::size_t i) const { return sigma2_[i]; }

  void draw(CounterRng& rng, double* out) const {
    std::fill(out, out + m_, 0.0);
    std::size_t n = active_.size();
    if (n == 0) return;
    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = rng.normal();
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k <= i; ++k) s += chol_(i, k) * z[k];
      out[active_[i]] = s;
    }
  }

 private:
  std::size_t m_;
  std::vector<double> sigma2_;
  std::vector<std::size_t> active_;
  RowMatrix chol_;
};

inline RowMatrix sample_gaussian_paths(const Variogram& vg,
                                       std::span<const Point> locations,
                                       std::size_t reps, std::uint64_t seed,
                                       unsigned threads = 1) {
  GaussianPathPlan plan(vg, locations);
  RowMatrix out(reps, locations.size());
  parallel_for(reps, threads, [&](std::size_t r) {
    CounterRng rng(derive_stream(seed, {stream::kFieldSample, r}));
    plan.draw(rng, out.row(r));
  });
  return out;
}

// Brown-Resnick generator Z_t = exp(X_t - sigma^2(t)/2); log-normal margins
// with unit mean.
class BrownResnickGenerator final : public GeneratorSampler {
 public:
  explicit BrownResnickGenerator(double alpha) : vg_(alpha) {}

  std::string name() const override {
    return "brown_resnick(alpha=" + std::to_string(vg_.alpha) + ")";
  }

  std::unique_ptr<GeneratorPlan> prepare(
      std::span<const Point> locations) const override {
    struct Plan final : GeneratorPlan {
      GaussianPathPlan path;
      explicit Plan(GaussianPathPlan p) : path(std::move(p)) {}
      std::size_t arity() const override { return path.arity(); }
      void draw(CounterRng& rng, double* out) const override {
        path.draw(rng, out);
        for (std::size_t i = 0; i < path.arity(); ++i)
          out[i] = std::exp(out[i] - 0.5 * path.sigma2_at(i));
      }
    };
    return std::make_unique<Plan>(GaussianPathPlan(vg_, locations));
  }

  const Variogram& variogram() const { return vg_; }

 private:
  Variogram vg_;
};

// Exact bivariate D-norm of the Brown-Resnick field: Husler-Reiss with
// sigma = sqrt(sigma^2(t1 - t2)).  Restricted to one or two locations
// (coincident locations collapse to the sup-norm); weight constructions that
// only consume adjacent-pair norms can use this instead of Monte Carlo.
inline DNormModel hr_from_variogram(double alpha) {
  Variogram vg(alpha);
  return DNormModel::custom_exact(
      "hr_variogram(alpha=" + std::to_string(alpha) + ")",
      [vg](std::span<const Point> locations, std::span<const double> x) {
        if (locations.size() == 1) return std::abs(x[0]);
        if (locations.size() != 2)
          throw BackendArity("hr_variogram evaluates at most two locations");
        double sigma = vg.hr_sigma(locations[0], locations[1]);
        if (sigma == 0.0) return std::max(std::abs(x[0]), std::abs(x[1]));
        return hr_bivariate(x[0], x[1], sigma);
      });
}

// ---------------------------------------------------------------------------
// Margin transforms.

enum class MarginKind { StandardNegExp, Frechet, Gumbel };

inline double margin_to_standard(double v, MarginKind from) {
  switch (from) {
    case MarginKind::StandardNegExp:
      if (!(v < 0.0)) throw DomainError("standard margin values must be < 0");
      return v;
    case MarginKind::Frechet:
      if (!(v > 0.0)) throw DomainError("Frechet margin values must be > 0");
      return -1.0 / v;
    case MarginKind::Gumbel:
      if (!std::isfinite(v)) throw DomainError("Gumbel margin values must be finite");
      return -std::exp(-v);
  }
  throw ExecutionError("unreachable margin kind");
}

inline double margin_from_standard(double eta, MarginKind to) {
  if (!(eta < 0.0)) throw DomainError("standard margin values must be < 0");
  switch (to) {
    case MarginKind::StandardNegExp: return eta;
    case MarginKind::Frechet: return -1.0 / eta;
    case MarginKind::Gumbel: return -std::log(-eta);
  }
  throw ExecutionError("unreachable margin kind");
}

inline void transform_margins(RowMatrix& values, MarginKind from,
                              MarginKind to) {
  for (double& v : values.data()) v = margin_from_standard(margin_to_standard(v, from), to);
}

// ---------------------------------------------------------------------------
// Field samplers.

struct TruncationPolicy {
  double kappa = 10.0;          // stop once Gamma > kappa / min_t xi_t
  std::size_t max_terms = 10000;
};

struct FieldSampleResult {
  RowMatrix eta;                     // reps x m, values < 0
  std::vector<std::uint8_t> truncated;  // per replicate; empty for exact samplers
  double mean_terms = 0.0;           // spectral series diagnostic
  std::size_t truncated_count = 0;
};

// Exact max-linear sampler; spectral functions must be standardized on the
// probe set (locations plus a lattice), tolerance 1e-9.
inline RowMatrix sample_maxlinear(std::span<const SpectralFn> fs,
                                  std::span<const Point> locations,
                                  std::size_t reps, std::uint64_t seed,
                                  unsigned threads = 1) {
  if (fs.empty()) throw DomainError("sample_maxlinear: no spectral functions");
  if (locations.empty()) throw DomainError("sample_maxlinear: no locations");
  std::size_t k = locations[0].dim();
  std::vector<Point> probes(locations.begin(), locations.end());
  auto extra = k <= 2 ? lattice_points(k, k == 1 ? 1000 : 32)
                      : mc_probe_points(k, 512);
  probes.insert(probes.end(), extra.begin(), extra.end());
  double dev = spectral_standardization_deviation(fs, probes);
  if (dev > 1e-9)
    throw NotStandardized("spectral functions sum to 1 +/- " +
                          std::to_string(dev) + " on the probe set");

  std::size_t m = locations.size(), q = fs.size();
  RowMatrix vals(q, m);
  for (std::size_t j = 0; j < q; ++j)
    for (std::size_t i = 0; i < m; ++i) vals(j, i) = fs[j](locations[i]);

  RowMatrix eta(reps, m);
  parallel_for(reps, threads, [&](std::size_t r) {
    CounterRng rng(derive_stream(seed, {stream::kFieldSample, r}));
    double* out = eta.row(r);
    std::fill(out, out + m, 0.0);
    for (std::size_t j = 0; j < q; ++j) {
      double frechet = 1.0 / rng.exponential();
      const double* row = vals.row(j);
      for (std::size_t i = 0; i < m; ++i)
        out[i] = std::max(out[i], row[i] * frechet);
    }
    for (std::size_t i = 0; i < m; ++i) out[i] = -1.0 / out[i];
  });
  return eta;
}

// Spectral series sampler xi_t = max_i Z^(i)_t / Gamma_i.  With a bounded
// generator the stop rule is exact; otherwise kappa acts as the cutoff and
// replicates that hit max_terms without satisfying it are flagged.
inline FieldSampleResult sample_spectral_series(
    const GeneratorSampler& gen, std::span<const Point> locations,
    std::size_t reps, std::uint64_t seed, TruncationPolicy policy = {},
    unsigned threads = 1) {
  if (locations.empty()) throw DomainError("sample_spectral_series: no locations");
  if (!(policy.kappa > 0.0)) throw DomainError("truncation cutoff must be > 0");
  if (policy.max_terms == 0) throw DomainError("max_terms must be > 0");
  auto plan = gen.prepare(locations);
  std::size_t m = locations.size();
  double cutoff = plan->upper_bound() ? *plan->upper_bound() : policy.kappa;

  FieldSampleResult res;
  res.eta = RowMatrix(reps, m);
  res.truncated.assign(reps, 0);
  std::vector<std::size_t> terms(reps, 0);
  parallel_for(reps, threads, [&](std::size_t r) {
    CounterRng rng(derive_stream(seed, {stream::kFieldSample, r}));
    std::vector<double> xi(m, 0.0), z(m);
    double gamma = 0.0;
    std::size_t used = 0;
    bool converged = false;
    while (used < policy.max_terms) {
      gamma += rng.exponential();
      plan->draw(rng, z.data());
      ++used;
      double lo = xi[0];
      for (std::size_t i = 0; i < m; ++i) {
        xi[i] = std::max(xi[i], z[i] / gamma);
        lo = std::min(lo, xi[i]);
      }
      if (lo > 0.0 && gamma > cutoff / lo) {
        converged = true;
        break;
      }
    }
    res.truncated[r] = converged ? 0 : 1;
    terms[r] = used;
    double* out = res.eta.row(r);
    for (std::size_t i = 0; i < m; ++i) out[i] = -1.0 / xi[i];
  });
  double total = 0.0;
  for (std::size_t r = 0; r < reps; ++r) {
    total += static_cast<double>(terms[r]);
    res.truncated_count += res.truncated[r];
  }
  res.mean_terms = total / static_cast<double>(reps ? reps : 1);
  return res;
}

class FieldSampler {
 public:
  static FieldSampler max_linear(std::vector<SpectralFn> fs) {
    FieldSampler s;
    s.spectral_ = std::move(fs);
    if (s.spectral_.empty())
      throw DomainError("max_linear field sampler needs spectral functions");
    return s;
  }

  static FieldSampler brown_resnick(double alpha, TruncationPolicy policy = {}) {
    FieldSampler s;
    s.generator_ = std::make_shared<BrownResnickGenerator>(alpha);
    s.policy_ = policy;
    return s;
  }

  static FieldSampler from_generator(
      std::shared_ptr<const GeneratorSampler> gen,
      TruncationPolicy policy = {}) {
    if (!gen) throw DomainError("field sampler needs a generator");
    FieldSampler s;
    s.generator_ = std::move(gen);
    s.policy_ = policy;
    return s;
  }

  bool is_max_linear() const { return !spectral_.empty(); }
  const std::vector<SpectralFn>& spectral() const { return spectral_; }
  const TruncationPolicy& policy() const { return policy_; }

  // The Z process driving this field, for generator-level diagnostics.
  std::shared_ptr<const GeneratorSampler> generator() const {
    if (generator_) return generator_;
    return std::make_shared<SpectralDiscreteGenerator>(spectral_);
  }

  // D-norm of the field over arbitrary location lists: exact for max-linear,
  // Monte Carlo with the given budget otherwise.
  DNormModel joint_model(std::size_t mc_samples, std::uint64_t seed) const {
    if (is_max_linear()) return DNormModel::max_linear(spectral_);
    return DNormModel::generator_mc(generator_, mc_samples, seed);
  }

  FieldSampleResult sample(std::span<const Point> locations, std::size_t reps,
                           std::uint64_t seed, unsigned threads = 1) const {
    if (is_max_linear()) {
      FieldSampleResult res;
      res.eta = sample_maxlinear(spectral_, locations, reps, seed, threads);
      return res;
    }
    return sample_spectral_series(*generator_, locations, reps, seed, policy_,
                                  threads);
  }

  std::string describe() const {
    if (is_max_linear())
      return "max_linear(m=" + std::to_string(spectral_.size()) + ")";
    return "series(" + generator_->name() + ")";
  }

 private:
  FieldSampler() = default;
  std::vector<SpectralFn> spectral_;
  std::shared_ptr<const GeneratorSampler> generator_;
  TruncationPolicy policy_;
};

inline FieldSampleResult sample_brown_resnick(double alpha,
                                              std::span<const Point> locations,
                                              std::size_t reps,
                                              std::uint64_t seed,
                                              TruncationPolicy policy = {},
                                              unsigned threads = 1) {
  BrownResnickGenerator gen(alpha);
  return sample_spectral_series(gen, locations, reps, seed, policy, threads);
}

// ---------------------------------------------------------------------------
// Sample continuity diagnostic: E max |Z_s - Z_t| over lattice pairs with
// ||s - t|| <= eps.  Shrinking eps keeps the pair set nested, so with a fixed
// seed the estimate is monotone in eps samplewise.
inline MonteCarloEstimate continuity_modulus(const GeneratorSampler& gen,
                                             double eps, std::size_t k,
                                             std::size_t resolution,
                                             SpatialNorm norm, std::size_t reps,
                                             std::uint64_t seed,
                                             unsigned threads = 1) {
  if (!(eps > 0.0)) throw DomainError("continuity_modulus: need eps > 0");
  auto pts = lattice_points(k, resolution);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      if (distance(norm, pts[i], pts[j]) <= eps) pairs.emplace_back(i, j);
  if (pairs.empty())
    throw DomainError("continuity_modulus: no lattice pairs within eps");
  auto plan = gen.prepare(pts);
  std::vector<double> vals(reps);
  parallel_for(reps, threads, [&](std::size_t r) {
    CounterRng rng(derive_stream(seed, {stream::kContinuity, r}));
    std::vector<double> z(pts.size());
    plan->draw(rng, z.data());
    double sup = 0.0;
    for (auto [i, j] : pairs) sup = std::max(sup, std::abs(z[i] - z[j]));
    vals[r] = sup;
  });
  double sum = 0.0, sum_sq = 0.0;
  for (double v : vals) {
    sum += v;
    sum_sq += v * v;
  }
  return estimate_from_sums(sum, sum_sq, reps);
}

}  // namespace maxfield
