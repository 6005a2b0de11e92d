#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "maxfield/fields.hpp"
#include "maxfield/stats.hpp"

using namespace maxfield;

namespace {

double marginal_ks(const RowMatrix& eta, std::size_t col) {
  std::vector<double> xs(eta.rows());
  for (std::size_t r = 0; r < eta.rows(); ++r) xs[r] = eta(r, col);
  return ks_statistic(xs, [](double x) { return x >= 0.0 ? 1.0 : std::exp(x); });
}

}  // namespace

TEST_CASE("variogram and its pairwise dependence scale", "[fields]") {
  Variogram vg(1.0);
  REQUIRE(vg.sigma2(Point{1.0}) == Catch::Approx(1.0));
  REQUIRE(vg.sigma2(Point{0.25}) == Catch::Approx(0.25));
  REQUIRE(vg.hr_sigma(Point{0.0}, Point{1.0}) == Catch::Approx(1.0));
  Variogram vg2(2.0);
  REQUIRE(vg2.sigma2(Point{0.5}) == Catch::Approx(0.25));
  REQUIRE_THROWS_AS(Variogram(0.0), DomainError);
  REQUIRE_THROWS_AS(Variogram(2.5), DomainError);
}

TEST_CASE("gaussian paths pin the origin and match the variogram",
          "[fields]") {
  Variogram vg(1.0);
  std::vector<Point> locs{Point{0.0}, Point{0.4}, Point{1.0}};
  std::size_t reps = 100000;
  auto x = sample_gaussian_paths(vg, locs, reps, 2024);

  RunningStat var1, incr;
  for (std::size_t r = 0; r < reps; ++r) {
    REQUIRE(x(r, 0) == 0.0);  // origin pinned in every draw
    var1.add(x(r, 2) * x(r, 2));
    double d = x(r, 2) - x(r, 1);
    incr.add(d * d);
  }
  // Var X_1 = sigma^2(1) = 1; the variance estimator's spread is ~ sqrt(2/n).
  REQUIRE(std::abs(var1.mean() - 1.0) < 4.0 * std::sqrt(2.0 / reps));
  // Stationary increments: E(X_1 - X_0.4)^2 = sigma^2(0.6).
  REQUIRE(std::abs(incr.mean() - 0.6) < 4.0 * std::sqrt(2.0 / reps));
}

TEST_CASE("max-linear sampler has standard margins and is nonpositive",
          "[fields]") {
  auto fs = hat_spectral_functions({0.0, 0.5, 1.0});
  std::vector<Point> locs{Point{0.25}, Point{0.5}, Point{0.9}};
  auto eta = sample_maxlinear(fs, locs, 100000, 7);
  for (std::size_t r = 0; r < eta.rows(); ++r)
    for (std::size_t c = 0; c < eta.cols(); ++c) REQUIRE(eta(r, c) < 0.0);
  for (std::size_t c = 0; c < locs.size(); ++c)
    REQUIRE(marginal_ks(eta, c) < ks_critical(eta.rows(), 0.01));
}

TEST_CASE("single constant spectral function gives complete dependence",
          "[fields]") {
  std::vector<SpectralFn> one{{"const1", [](const Point&) { return 1.0; }}};
  std::vector<Point> locs{Point{0.1}, Point{0.7}};
  auto eta = sample_maxlinear(one, locs, 200, 3);
  for (std::size_t r = 0; r < eta.rows(); ++r)
    REQUIRE(eta(r, 0) == eta(r, 1));
}

TEST_CASE("max-linear sampler rejects non-standardized spectral sets",
          "[fields]") {
  std::vector<SpectralFn> bad{{"half", [](const Point&) { return 0.5; }}};
  std::vector<Point> locs{Point{0.5}};
  REQUIRE_THROWS_AS(sample_maxlinear(bad, locs, 10, 1), NotStandardized);
}

TEST_CASE("max-linear joint law matches the exact D-norm", "[fields]") {
  // -log P(eta <= x) = ||x||_D; check the empirical log-CDF at probe vectors.
  auto fs = hat_spectral_functions({0.0, 0.5, 1.0});
  auto model = DNormModel::max_linear(fs);
  std::vector<Point> locs{Point{0.2}, Point{0.8}};
  std::size_t reps = 100000;
  auto eta = sample_maxlinear(fs, locs, reps, 11);
  CounterRng rng(5);
  for (int probe = 0; probe < 5; ++probe) {
    std::vector<double> x{-0.5 - rng.uniform01(), -0.5 - rng.uniform01()};
    std::size_t hits = 0;
    for (std::size_t r = 0; r < reps; ++r)
      if (eta(r, 0) <= x[0] && eta(r, 1) <= x[1]) ++hits;
    double p = static_cast<double>(hits) / reps;
    std::vector<double> ax{-x[0], -x[1]};
    double target = std::exp(-model.eval(locs, ax));
    double se = std::sqrt(target * (1.0 - target) / reps);
    REQUIRE(std::abs(p - target) <= 3.0 * se + 1e-12);
  }
}

TEST_CASE("margin transforms round-trip and preserve order", "[fields]") {
  CounterRng rng(17);
  for (int i = 0; i < 1000; ++i) {
    double eta = -rng.exponential();
    for (auto kind : {MarginKind::Frechet, MarginKind::Gumbel}) {
      double v = margin_from_standard(eta, kind);
      double back = margin_to_standard(v, kind);
      REQUIRE(back == Catch::Approx(eta).epsilon(1e-14));
    }
  }
  REQUIRE(margin_to_standard(1.0, MarginKind::Frechet) == -1.0);
  REQUIRE(margin_to_standard(0.0, MarginKind::Gumbel) == -1.0);
  REQUIRE_THROWS_AS(margin_to_standard(-2.0, MarginKind::Frechet),
                    DomainError);
  REQUIRE_THROWS_AS(margin_to_standard(0.5, MarginKind::StandardNegExp),
                    DomainError);
  // Monotone: order preserved through both directions.
  REQUIRE(margin_from_standard(-2.0, MarginKind::Gumbel) <
          margin_from_standard(-1.0, MarginKind::Gumbel));
  REQUIRE(margin_from_standard(-2.0, MarginKind::Frechet) <
          margin_from_standard(-1.0, MarginKind::Frechet));
}

TEST_CASE("spectral series with bounded generator stops exactly and matches "
          "the max-linear law",
          "[fields]") {
  auto fs = hat_spectral_functions({0.0, 0.5, 1.0});
  SpectralDiscreteGenerator gen(fs);
  std::vector<Point> locs{Point{0.2}, Point{0.6}};
  std::size_t reps = 50000;
  auto series = sample_spectral_series(gen, locs, reps, 21);
  REQUIRE(series.truncated_count == 0);  // bounded generator: exact stop rule
  for (std::size_t c = 0; c < locs.size(); ++c)
    REQUIRE(marginal_ks(series.eta, c) < ks_critical(reps, 0.01));
}

TEST_CASE("brown-resnick margins pass a KS test", "[fields]") {
  std::vector<Point> locs{Point{0.0}, Point{0.5}, Point{1.0}};
  std::size_t reps = 10000;
  auto res = sample_brown_resnick(1.0, locs, reps, 2);
  REQUIRE(res.truncated_count < reps / 100);
  REQUIRE(res.mean_terms > 2.0);
  for (std::size_t c = 0; c < locs.size(); ++c)
    REQUIRE(marginal_ks(res.eta, c) < ks_critical(reps, 0.01));
}

TEST_CASE("brown-resnick bivariate law matches the closed-form norm",
          "[fields]") {
  // At locations 0 and 1 with alpha = 1 the dependence scale is sigma = 1.
  std::vector<Point> locs{Point{0.0}, Point{1.0}};
  std::size_t reps = 100000;
  auto res = sample_brown_resnick(1.0, locs, reps, 13);
  for (auto [x, y] : {std::pair{-1.0, -1.0}, {-0.7, -1.5}, {-2.0, -0.5}}) {
    std::size_t hits = 0;
    for (std::size_t r = 0; r < reps; ++r)
      if (res.eta(r, 0) <= x && res.eta(r, 1) <= y) ++hits;
    double p = static_cast<double>(hits) / reps;
    double target = std::exp(-hr_bivariate(-x, -y, 1.0));
    double se = std::sqrt(target * (1.0 - target) / reps);
    REQUIRE(std::abs(p - target) <= 3.0 * se + 2e-3);  // KS-scale series slack
  }
}

TEST_CASE("truncation policy flags exhausted replicates", "[fields]") {
  TruncationPolicy tight;
  tight.max_terms = 1;
  std::vector<Point> locs{Point{0.0}, Point{1.0}};
  auto res = sample_brown_resnick(1.0, locs, 500, 3, tight);
  REQUIRE(res.truncated_count > 450);  // one term almost never satisfies the rule
  REQUIRE(res.mean_terms == 1.0);
}

TEST_CASE("generator means are one for brown-resnick draws", "[fields]") {
  BrownResnickGenerator gen(1.0);
  std::vector<Point> locs{Point{0.1}, Point{0.6}, Point{1.0}};
  auto plan = gen.prepare(locs);
  std::size_t reps = 100000;
  std::vector<RunningStat> stats(locs.size());
  for (std::size_t r = 0; r < reps; ++r) {
    CounterRng rng(derive_stream(99, {stream::kFieldSample, r}));
    std::vector<double> z(locs.size());
    plan->draw(rng, z.data());
    for (std::size_t i = 0; i < locs.size(); ++i) {
      REQUIRE(z[i] >= 0.0);
      stats[i].add(z[i]);
    }
  }
  for (auto& s : stats)
    REQUIRE(std::abs(s.mean() - 1.0) <=
            4.0 * std::sqrt(s.variance() / reps));
}

TEST_CASE("exact bivariate model from the variogram", "[fields]") {
  auto model = hr_from_variogram(1.0);
  std::vector<Point> pair{Point{0.0}, Point{1.0}};
  std::vector<double> ones{1.0, 1.0};
  REQUIRE(model.eval(pair, ones) ==
          Catch::Approx(2.0 * normal_cdf(0.5)).epsilon(1e-12));
  std::vector<Point> single{Point{0.3}};
  std::vector<double> x1{-2.0};
  REQUIRE(model.eval(single, x1) == 2.0);
  std::vector<Point> coincident{Point{0.3}, Point{0.3}};
  std::vector<double> xy{1.0, 3.0};
  REQUIRE(model.eval(coincident, xy) == 3.0);
  std::vector<Point> triple{Point{0.0}, Point{0.5}, Point{1.0}};
  std::vector<double> x3{1.0, 1.0, 1.0};
  REQUIRE_THROWS_AS(model.eval(triple, x3), BackendArity);
}

TEST_CASE("field sampler facade dispatches per backend", "[fields]") {
  auto ml = FieldSampler::max_linear(hat_spectral_functions({0.0, 1.0}));
  REQUIRE(ml.is_max_linear());
  auto res = ml.sample(std::vector<Point>{Point{0.0}, Point{1.0}}, 100, 1);
  REQUIRE(res.truncated.empty());
  REQUIRE(res.eta.rows() == 100);

  auto br = FieldSampler::brown_resnick(1.0);
  REQUIRE(!br.is_max_linear());
  auto joint = br.joint_model(1000, 7);
  REQUIRE(joint.backend() == DNormModel::Backend::GeneratorMc);
  REQUIRE(ml.joint_model(1000, 7).backend() ==
          DNormModel::Backend::MaxLinearSpectral);
}

TEST_CASE("continuity modulus is zero for constant generators and monotone "
          "for brown-resnick",
          "[fields]") {
  ConstantGenerator constant;
  auto zero = continuity_modulus(constant, 0.25, 1, 16, SpatialNorm::L2, 200, 1);
  REQUIRE(zero.estimate == 0.0);

  BrownResnickGenerator br(1.0);
  // Same seed and lattice: shrinking eps keeps the pair set nested, so the
  // estimates are monotone samplewise, not just in expectation.
  auto wide = continuity_modulus(br, 0.25, 1, 40, SpatialNorm::L2, 2000, 9);
  auto mid = continuity_modulus(br, 0.1, 1, 40, SpatialNorm::L2, 2000, 9);
  auto narrow = continuity_modulus(br, 0.025, 1, 40, SpatialNorm::L2, 2000, 9);
  REQUIRE(wide.estimate >= mid.estimate);
  REQUIRE(mid.estimate >= narrow.estimate);
  REQUIRE(wide.estimate / narrow.estimate > 1.0);
}
