#pragma once

// Block maxima on the copula scale.
//
// For a max-stable field eta in standard margins, U_t = exp(eta_t) has
// uniform (0,1] margins with the field's extreme-value copula.  The scaled
// block maximum of n independent copies,
//   Y^(n)_t = n (max_{c<=n} U^(c)_t - 1),
// has marginal CDF (1 + x/n)^n on [-n, 0] and converges to the standard
// negative exponential.  Because the field is max-stable, the block maximum
// over n copies equals exp(eta/n) in law *as a process*, so Y^(n) can be
// sampled exactly from a single base replicate: Y^(n) = n(exp(eta/n) - 1).
// The n-fold brute-force path is kept for cross-validation and for samplers
// whose max-stability one does not want to assume.
//
// Exact moments of the margin:  E (Y^(n))^2 = 2n^2 / ((n+1)(n+2)) and
// E (Y^(n))^4 = 24 n^4 / ((n+1)(n+2)(n+3)(n+4)) <= 24, the bound of the
// limiting margin; both follow from E(1 + Y/n)^k integrals of the polynomial
// density and reduce to these overflow-free rational forms.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "maxfield/accuracy.hpp"
#include "maxfield/errors.hpp"
#include "maxfield/fields.hpp"
#include "maxfield/geometry.hpp"
#include "maxfield/interp.hpp"
#include "maxfield/matrix.hpp"
#include "maxfield/stats.hpp"

namespace maxfield {

enum class BlockMaxMethod { Auto, ExactIdentity, BruteForce };

// Marginal CDF of Y^(n).
inline double yn_cdf(std::size_t n, double x) {
  if (n == 0) throw DomainError("yn_cdf: need n >= 1");
  double dn = static_cast<double>(n);
  if (x <= -dn) return 0.0;
  if (x >= 0.0) return 1.0;
  return std::pow(1.0 + x / dn, dn);
}

inline double y2_moment(std::size_t n) {
  if (n == 0) throw DomainError("y2_moment: need n >= 1");
  double dn = static_cast<double>(n);
  return 2.0 * dn * dn / ((dn + 1.0) * (dn + 2.0));
}

inline double y4_moment(std::size_t n) {
  if (n == 0) throw DomainError("y4_moment: need n >= 1");
  double dn = static_cast<double>(n);
  return 24.0 * dn * dn * dn * dn /
         ((dn + 1.0) * (dn + 2.0) * (dn + 3.0) * (dn + 4.0));
}

class CopulaSampler {
 public:
  explicit CopulaSampler(FieldSampler base) : base_(std::move(base)) {}

  const FieldSampler& base() const { return base_; }

  // Joint draws of U = exp(eta) at the given locations.
  RowMatrix sample_u(std::span<const Point> locations, std::size_t reps,
                     std::uint64_t seed, unsigned threads = 1) const {
    auto res = base_.sample(locations, reps, seed, threads);
    for (double& v : res.eta.data()) v = std::exp(v);
    return std::move(res.eta);
  }

  // Joint draws of Y^(n).
  RowMatrix sample_yn(std::span<const Point> locations, std::size_t n,
                      std::size_t reps, std::uint64_t seed,
                      BlockMaxMethod method = BlockMaxMethod::Auto,
                      unsigned threads = 1) const {
    if (n == 0) throw DomainError("sample_yn: need n >= 1");
    if (method == BlockMaxMethod::Auto) method = BlockMaxMethod::ExactIdentity;
    double dn = static_cast<double>(n);
    if (method == BlockMaxMethod::ExactIdentity) {
      auto res = base_.sample(locations, reps, seed, threads);
      for (double& v : res.eta.data()) v = dn * std::expm1(v / dn);
      return std::move(res.eta);
    }
    // Brute force: n independent copies per replicate; the copy maxima of eta
    // feed the same transform since u -> exp(u) is monotone.
    auto res = base_.sample(locations, reps * n, seed, threads);
    std::size_t m = locations.size();
    RowMatrix out(reps, m);
    for (std::size_t r = 0; r < reps; ++r) {
      double* y = out.row(r);
      std::fill(y, y + m, -std::numeric_limits<double>::infinity());
      for (std::size_t c = 0; c < n; ++c) {
        const double* eta = res.eta.row(r * n + c);
        for (std::size_t i = 0; i < m; ++i) y[i] = std::max(y[i], eta[i]);
      }
      for (std::size_t i = 0; i < m; ++i) y[i] = dn * std::expm1(y[i]);
    }
    return out;
  }

 private:
  FieldSampler base_;
};

inline RowMatrix sample_copula(const FieldSampler& field,
                               std::span<const Point> locations,
                               std::size_t reps, std::uint64_t seed,
                               unsigned threads = 1) {
  return CopulaSampler(field).sample_u(locations, reps, seed, threads);
}

inline RowMatrix sample_Yn(const FieldSampler& field,
                           std::span<const Point> locations, std::size_t n,
                           std::size_t reps, std::uint64_t seed,
                           BlockMaxMethod method = BlockMaxMethod::Auto,
                           unsigned threads = 1) {
  return CopulaSampler(field).sample_yn(locations, n, reps, seed, method,
                                        threads);
}

// ---------------------------------------------------------------------------
// Reconstruction error on the block-maximum scale.

struct YnMseRow {
  std::size_t n = 0;
  MonteCarloEstimate mse;
};

// E (Y^(n)_t - Y_hat^(n)_t)^2 for each n, with Y_hat the weight-system
// reconstruction max_{g_i>0} Y_{s_i}/g_i.  All n share base replicates
// (common random numbers), so the estimates are directly comparable along the
// n-ladder.  Every estimate must respect the domination bound
// 2 E(Y^2) (1 + 1/c^2) with c the smallest positive weight at t.
inline std::vector<YnMseRow> mse_Yn(const FieldSampler& field,
                                    const WeightSystem& ws, const Point& t,
                                    std::span<const std::size_t> ns,
                                    std::size_t reps, std::uint64_t seed,
                                    BlockMaxMethod method = BlockMaxMethod::Auto,
                                    unsigned threads = 1) {
  if (ns.empty()) throw DomainError("mse_Yn: need at least one n");
  for (std::size_t n : ns)
    if (n == 0) throw DomainError("mse_Yn: need n >= 1");
  if (reps == 0) throw DomainError("mse_Yn: need reps > 0");
  if (method == BlockMaxMethod::Auto) method = BlockMaxMethod::ExactIdentity;

  const Grid& grid = ws.grid();
  auto w = ws.weights(t);
  double c = std::numeric_limits<double>::infinity();
  bool any = false;
  for (double v : w)
    if (v > 0.0) {
      any = true;
      c = std::min(c, v);
    }
  if (!any) throw AllWeightsZero("no positive weight at the probe point");

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

  std::size_t n_max = *std::max_element(ns.begin(), ns.end());
  std::size_t copies = method == BlockMaxMethod::BruteForce ? n_max : 1;
  auto base = field.sample(locs, reps * copies, seed, threads);

  std::vector<YnMseRow> rows;
  for (std::size_t n : ns) {
    double dn = static_cast<double>(n);
    double sum = 0.0, sum_sq = 0.0;
    std::vector<double> m_eta(locs.size());
    for (std::size_t r = 0; r < reps; ++r) {
      if (method == BlockMaxMethod::BruteForce) {
        std::fill(m_eta.begin(), m_eta.end(),
                  -std::numeric_limits<double>::infinity());
        for (std::size_t cpy = 0; cpy < n; ++cpy) {
          const double* eta = base.eta.row(r * copies + cpy);
          for (std::size_t i = 0; i < locs.size(); ++i)
            m_eta[i] = std::max(m_eta[i], eta[i]);
        }
      } else {
        const double* eta = base.eta.row(r);
        for (std::size_t i = 0; i < locs.size(); ++i) m_eta[i] = eta[i] / dn;
      }
      double yt = dn * std::expm1(m_eta[t_slot]);
      double hat = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < w.size(); ++i)
        if (w[i] > 0.0)
          hat = std::max(hat, dn * std::expm1(m_eta[offset + i]) / w[i]);
      double err = yt - hat;
      sum += err * err;
      sum_sq += err * err * err * err;
    }
    YnMseRow row;
    row.n = n;
    row.mse = estimate_from_sums(sum, sum_sq, reps);
    double cap = 2.0 * y2_moment(n) * (1.0 + 1.0 / (c * c));
    if (row.mse.estimate > cap + 3.0 * row.mse.stderr_ + 1e-9)
      throw InvariantViolation(
          "block-maximum MSE " + std::to_string(row.mse.estimate) +
          " exceeds the domination bound " + std::to_string(cap));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace maxfield
