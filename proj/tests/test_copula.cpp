#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "maxfield/copula.hpp"

using namespace maxfield;

namespace {

Grid unit_pair() { return make_grid({Point{0.0}, Point{1.0}}, SpatialNorm::L2); }

std::vector<double> column(const RowMatrix& m, std::size_t c) {
  std::vector<double> out(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) out[r] = m(r, c);
  return out;
}

}  // namespace

TEST_CASE("block-maximum margin cdf: worked values", "[copula]") {
  REQUIRE(yn_cdf(1, -0.3) == Catch::Approx(0.7));
  REQUIRE(yn_cdf(2, -1.0) == Catch::Approx(0.25));
  REQUIRE(yn_cdf(5, -5.0) == 0.0);
  REQUIRE(yn_cdf(5, -7.3) == 0.0);
  REQUIRE(yn_cdf(5, 0.0) == 1.0);
  REQUIRE(yn_cdf(3, -1.5) == Catch::Approx(0.125));
  REQUIRE_THROWS_AS(yn_cdf(0, -0.5), DomainError);
}

TEST_CASE("block-maximum moments: rational closed forms", "[copula]") {
  REQUIRE(y2_moment(1) == Catch::Approx(1.0 / 3.0));
  REQUIRE(y4_moment(1) == 0.2);  // 24/120, exact in floating point
  double prev2 = 0.0, prev4 = 0.0;
  for (std::size_t n = 1; n <= 1000000; n *= 10) {
    double m2 = y2_moment(n), m4 = y4_moment(n);
    REQUIRE(m2 <= 2.0);
    REQUIRE(m4 <= 24.0);  // the limiting fourth moment caps the family
    REQUIRE(m2 > prev2);
    REQUIRE(m4 > prev4);
    prev2 = m2;
    prev4 = m4;
  }
  REQUIRE(y4_moment(1000000) > 23.9);
  REQUIRE_THROWS_AS(y2_moment(0), DomainError);
  REQUIRE_THROWS_AS(y4_moment(0), DomainError);
}

TEST_CASE("copula scale has uniform margins", "[copula]") {
  auto field = FieldSampler::brown_resnick(1.0);
  std::vector<Point> locs{Point{0.0}, Point{1.0}};
  auto u = sample_copula(field, locs, 20000, 3);
  for (std::size_t c = 0; c < locs.size(); ++c) {
    auto xs = column(u, c);
    for (double v : xs) {
      REQUIRE(v > 0.0);
      REQUIRE(v <= 1.0);
    }
    REQUIRE(ks_statistic(xs, [](double x) {
              return std::clamp(x, 0.0, 1.0);
            }) < ks_critical(xs.size(), 0.01));
  }
}

TEST_CASE("scaled block maxima match their margin law", "[copula]") {
  auto field =
      FieldSampler::max_linear(hat_spectral_functions({0.0, 0.5, 1.0}));
  std::vector<Point> locs{Point{0.3}};
  for (std::size_t n : {std::size_t{1}, std::size_t{10}, std::size_t{100}}) {
    auto y = sample_Yn(field, locs, n, 20000, 7);
    auto xs = column(y, 0);
    for (double v : xs) {
      REQUIRE(v > -static_cast<double>(n));
      REQUIRE(v <= 0.0);
    }
    REQUIRE(ks_statistic(xs, [n](double x) { return yn_cdf(n, x); }) <
            ks_critical(xs.size(), 0.01));
  }
}

TEST_CASE("sampled moments agree with the closed forms", "[copula]") {
  auto field = FieldSampler::max_linear(hat_spectral_functions({0.0, 1.0}));
  std::vector<Point> locs{Point{0.6}};
  std::size_t reps = 40000;
  for (std::size_t n : {std::size_t{1}, std::size_t{10}, std::size_t{100}}) {
    auto y = sample_Yn(field, locs, n, reps, 11);
    RunningStat m2, m4;
    for (std::size_t r = 0; r < reps; ++r) {
      double v = y(r, 0);
      m2.add(v * v);
      m4.add(v * v * v * v);
    }
    REQUIRE(std::abs(m2.mean() - y2_moment(n)) <=
            4.0 * std::sqrt(m2.variance() / reps));
    REQUIRE(std::abs(m4.mean() - y4_moment(n)) <=
            4.0 * std::sqrt(m4.variance() / reps));
  }
}

TEST_CASE("single-replicate identity agrees with the brute-force block "
          "maximum",
          "[copula]") {
  auto field = FieldSampler::brown_resnick(1.0);
  std::vector<Point> locs{Point{0.2}, Point{0.8}};
  std::size_t n = 5;

  auto exact = sample_Yn(field, locs, n, 8000, 13, BlockMaxMethod::ExactIdentity);
  auto brute = sample_Yn(field, locs, n, 8000, 14, BlockMaxMethod::BruteForce);
  for (const auto& y : {std::cref(exact), std::cref(brute)}) {
    auto xs = column(y.get(), 0);
    REQUIRE(ks_statistic(xs, [n](double x) { return yn_cdf(n, x); }) <
            ks_critical(xs.size(), 0.01));
  }

  // Same joint law: empirical P(Y <= y at both sites) agrees between methods.
  for (auto [qa, qb] : {std::pair{-0.5, -0.5}, {-1.0, -0.3}}) {
    auto joint_prob = [&](const RowMatrix& y) {
      std::size_t hits = 0;
      for (std::size_t r = 0; r < y.rows(); ++r)
        if (y(r, 0) <= qa && y(r, 1) <= qb) ++hits;
      return static_cast<double>(hits) / static_cast<double>(y.rows());
    };
    double pe = joint_prob(exact), pb = joint_prob(brute);
    double se = std::sqrt(0.25 / 8000.0);
    REQUIRE(std::abs(pe - pb) <= 3.0 * (se + se));
  }
}

TEST_CASE("complete dependence reconstructs block maxima exactly", "[copula]") {
  auto dep = DNormModel::complete_dependence();
  auto ws = WeightSystem::piecewise_1d(unit_pair(), dep);
  auto field = FieldSampler::max_linear(
      {{SpectralFn{"one", [](const Point&) { return 1.0; }}}});
  std::vector<std::size_t> ns{1, 10, 100};
  auto rows = mse_Yn(field, ws, Point{0.3}, ns, 2000, 5);
  REQUIRE(rows.size() == ns.size());
  for (const auto& row : rows) {
    REQUIRE(row.mse.estimate == 0.0);
    REQUIRE(row.mse.stderr_ == 0.0);
  }
}

TEST_CASE("block-maximum mse fades as blocks grow for matched weights",
          "[copula]") {
  auto fs = hat_spectral_functions({0.0, 0.5, 1.0});
  auto joint = DNormModel::max_linear(fs);
  auto sites = std::vector<Point>{Point{0.0}, Point{0.5}, Point{1.0}};
  auto ws = WeightSystem::piecewise_1d(make_grid(sites, SpatialNorm::L2),
                                       joint);
  auto field = FieldSampler::max_linear(fs);
  std::vector<std::size_t> ns{1, 10, 100};
  auto rows = mse_Yn(field, ws, Point{0.25}, ns, 20000, 9);
  // Reconstruction is exact on the field scale, so the only error is the
  // finite-block curvature, which shrinks as n grows.
  for (std::size_t i = 1; i < rows.size(); ++i)
    REQUIRE(rows[i].mse.estimate < rows[i - 1].mse.estimate);
  REQUIRE(rows.back().mse.estimate < 1e-3);
}

TEST_CASE("block-maximum mse reruns identically and validates input",
          "[copula]") {
  auto fs = hat_spectral_functions({0.0, 1.0});
  auto joint = DNormModel::max_linear(fs);
  auto ws = WeightSystem::piecewise_1d(unit_pair(), joint);
  auto field = FieldSampler::max_linear(fs);
  std::vector<std::size_t> ns{2, 20};
  auto a = mse_Yn(field, ws, Point{0.4}, ns, 3000, 21);
  auto b = mse_Yn(field, ws, Point{0.4}, ns, 3000, 21);
  for (std::size_t i = 0; i < ns.size(); ++i) {
    REQUIRE(a[i].n == ns[i]);
    REQUIRE(a[i].mse.estimate == b[i].mse.estimate);
    REQUIRE(a[i].mse.stderr_ == b[i].mse.stderr_);
  }

  std::vector<std::size_t> with_zero{1, 0};
  REQUIRE_THROWS_AS(mse_Yn(field, ws, Point{0.4}, with_zero, 10, 1),
                    DomainError);
  std::vector<std::size_t> empty;
  REQUIRE_THROWS_AS(mse_Yn(field, ws, Point{0.4}, empty, 10, 1), DomainError);
  REQUIRE_THROWS_AS(mse_Yn(field, ws, Point{0.4}, ns, 0, 1), DomainError);
  REQUIRE_THROWS_AS(sample_Yn(field, std::vector<Point>{Point{0.4}}, 0, 10, 1),
                    DomainError);
}
