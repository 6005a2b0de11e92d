#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <memory>
#include <vector>

#include "maxfield/dnorm.hpp"
#include "maxfield/quadrature.hpp"

using namespace maxfield;

namespace {
const std::vector<Point> kPair = {Point{0.0}, Point{1.0}};
const std::vector<Point> kTriple = {Point{0.0}, Point{0.5}, Point{1.0}};
}  // namespace

TEST_CASE("closed-form backends evaluate textbook values", "[dnorm]") {
  auto ind = DNormModel::independence();
  auto dep = DNormModel::complete_dependence();
  std::vector<double> x{1.0, 1.0, 1.0};
  REQUIRE(ind.eval(kTriple, x) == 3.0);
  REQUIRE(dep.eval(kTriple, x) == 1.0);
  std::vector<double> y{2.0, -3.0};
  REQUIRE(ind.eval(kPair, y) == 5.0);
  REQUIRE(dep.eval(kPair, y) == 3.0);
}

TEST_CASE("max-linear backend separates endpoint hats", "[dnorm]") {
  // f_1(t) = 1-t, f_2(t) = t carried by locations 0 and 1: the supports meet
  // only at the endpoints where the other hat vanishes, so the norm is L1.
  auto model = DNormModel::max_linear(hat_spectral_functions({0.0, 1.0}));
  std::vector<double> x{0.7, 2.5};
  REQUIRE(model.eval(kPair, x) == Catch::Approx(3.2).margin(1e-15));
  std::vector<double> e1{1.0, 0.0};
  REQUIRE(model.eval(kPair, e1) == 1.0);
}

TEST_CASE("hat spectral functions partition unity", "[dnorm]") {
  auto fs = hat_spectral_functions({0.0, 0.3, 0.7, 1.0});
  REQUIRE(fs.size() == 4);
  auto probes = lattice_points(1, 500);
  REQUIRE(spectral_standardization_deviation(fs, probes) < 1e-12);
  // Kronecker property at the nodes.
  REQUIRE(fs[1](Point{0.3}) == 1.0);
  REQUIRE(fs[0](Point{0.3}) == 0.0);

  REQUIRE_THROWS_AS(hat_spectral_functions({0.1, 1.0}), BadGrid);
  REQUIRE_THROWS_AS(hat_spectral_functions({0.0, 0.5, 0.4, 1.0}), BadGrid);
  REQUIRE_THROWS_AS(hat_spectral_functions({0.0}), BadGrid);
}

TEST_CASE("hr_bivariate matches its closed form and limits", "[dnorm]") {
  // ||(1,1)|| = 2 Phi(sigma/2); Phi(1) pinned from the normal-CDF oracle.
  REQUIRE(hr_bivariate(1.0, 1.0, 2.0) ==
          Catch::Approx(2.0 * 0.8413447460685429).epsilon(1e-12));
  REQUIRE(hr_bivariate(1.0, 0.0, 0.7) == 1.0);
  REQUIRE(hr_bivariate(0.0, 2.5, 0.7) == 2.5);
  REQUIRE(hr_bivariate(0.0, 0.0, 1.0) == 0.0);
  // Complete-dependence and independence limits.
  REQUIRE(hr_bivariate(1.0, 1.0, 1e-8) == Catch::Approx(1.0).margin(1e-7));
  REQUIRE(hr_bivariate(1.0, 1.0, 60.0) == Catch::Approx(2.0).margin(1e-12));
  REQUIRE_THROWS_AS(hr_bivariate(1.0, 1.0, 0.0), InvalidSigma);
  REQUIRE_THROWS_AS(DNormModel::husler_reiss(-1.0), InvalidSigma);
}

TEST_CASE("husler-reiss backend is bivariate only", "[dnorm]") {
  auto hr = DNormModel::husler_reiss(1.0);
  std::vector<double> x3{1.0, 1.0, 1.0};
  REQUIRE_THROWS_AS(hr.eval(kTriple, x3), BackendArity);
  std::vector<double> x2{1.0, 1.0};
  REQUIRE(hr.eval(kPair, x2) ==
          Catch::Approx(2.0 * normal_cdf(0.5)).epsilon(1e-12));
}

TEST_CASE("constant generator gives exact sup-norm estimates", "[dnorm]") {
  ConstantGenerator gen;
  std::vector<double> x{2.0, 3.0};
  auto est = eval_mc(gen, kPair, x, 500, 7);
  REQUIRE(est.estimate == 3.0);
  REQUIRE(est.stderr_ == 0.0);
}

TEST_CASE("discrete independence generator gives exact L1 on equal weights",
          "[dnorm]") {
  DiscreteIndependenceGenerator gen;
  std::vector<double> x{1.0, 1.0};
  auto est = eval_mc(gen, kPair, x, 2000, 11);
  REQUIRE(est.estimate == 2.0);  // max is 2 in both branches
  REQUIRE(est.stderr_ == 0.0);
}

TEST_CASE("spectral discrete generator reproduces the exact max-linear norm",
          "[dnorm]") {
  CounterRng rng(2211);
  for (int trial = 0; trial < 5; ++trial) {
    // Random interior nodes -> random hat system.
    std::vector<double> nodes{0.0, 1.0};
    int extra = 1 + static_cast<int>(rng.next_u64() % 3);
    for (int i = 0; i < extra; ++i) nodes.push_back(0.1 + 0.8 * rng.uniform01());
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    auto fs = hat_spectral_functions(nodes);
    auto exact = DNormModel::max_linear(fs);

    std::vector<Point> locs;
    for (int i = 0; i < 3; ++i) locs.push_back(Point{rng.uniform01()});
    std::vector<double> x;
    for (int i = 0; i < 3; ++i) x.push_back(3.0 * rng.uniform01());

    SpectralDiscreteGenerator gen(fs);
    auto est = eval_mc(gen, locs, x, 200000, derive_stream(5, {(std::uint64_t)trial}));
    double truth = exact.eval(locs, x);
    INFO("trial " << trial << " truth " << truth << " est " << est.estimate
                  << " se " << est.stderr_);
    REQUIRE(std::abs(est.estimate - truth) <= 3.0 * est.stderr_ + 1e-12);
  }
}

TEST_CASE("hr pair generator matches the closed form", "[dnorm]") {
  for (double sigma : {0.5, 1.0, 2.0}) {
    HrPairGenerator gen(sigma);
    std::vector<double> x{1.3, 0.8};
    auto est = eval_mc(gen, kPair, x, 200000, 99);
    double truth = hr_bivariate(x[0], x[1], sigma);
    REQUIRE(std::abs(est.estimate - truth) <= 3.0 * est.stderr_);
  }
  REQUIRE_THROWS_AS(HrPairGenerator(0.0), InvalidSigma);
  HrPairGenerator gen(1.0);
  REQUIRE_THROWS_AS(gen.prepare(kTriple), BackendArity);
}

TEST_CASE("generator mc backend caches a common block", "[dnorm]") {
  auto model = DNormModel::generator_mc(
      std::make_shared<DiscreteIndependenceGenerator>(), 5000, 31);
  std::vector<double> x{1.0, 2.0};
  double first = model.eval(kPair, x);
  REQUIRE(model.eval(kPair, x) == first);  // cached block, bit-identical
  // Exact homogeneity through common random numbers.
  std::vector<double> x2{2.0, 4.0};
  REQUIRE(model.eval(kPair, x2) == Catch::Approx(2.0 * first).epsilon(1e-15));
  // One-coordinate vectors short-circuit to the exact unit-mean identity.
  std::vector<double> e2{0.0, 5.0};
  REQUIRE(model.eval(kPair, e2) == 5.0);
}

TEST_CASE("expected_abs_diff closed forms", "[dnorm]") {
  REQUIRE(expected_abs_diff(DNormModel::complete_dependence(), kPair) == 0.0);
  REQUIRE(expected_abs_diff(DNormModel::independence(), kPair) == 2.0);
  double hr2 = expected_abs_diff(DNormModel::husler_reiss(2.0), kPair);
  REQUIRE(hr2 == Catch::Approx(2.0 * (2.0 * 0.8413447460685429 - 1.0))
                     .epsilon(1e-12));
  REQUIRE_THROWS_AS(expected_abs_diff(DNormModel::independence(), kTriple),
                    BackendArity);
}

TEST_CASE("axiom audit passes exact backends with zero violations",
          "[dnorm]") {
  for (auto model : {DNormModel::independence(),
                     DNormModel::complete_dependence(),
                     DNormModel::max_linear(
                         hat_spectral_functions({0.0, 0.4, 1.0}))}) {
    auto report = check_norm_axioms(model, kTriple, 1000, 17);
    INFO(model.describe());
    REQUIRE(report.trials == 1000);
    REQUIRE(report.pass());
  }
  auto hr = check_norm_axioms(DNormModel::husler_reiss(1.3), kPair, 1000, 17);
  REQUIRE(hr.pass());
}

TEST_CASE("axiom audit passes the mc backend samplewise", "[dnorm]") {
  auto model = DNormModel::generator_mc(
      std::make_shared<DiscreteIndependenceGenerator>(), 20000, 5);
  auto report = check_norm_axioms(model, kTriple, 200, 23);
  REQUIRE(report.pass());
}

TEST_CASE("axiom audit flags a corrupted norm", "[dnorm]") {
  // Scaling a valid norm by 1.1 breaks the unit-vector condition.
  auto bad = DNormModel::custom_exact(
      "scaled_l1", [](std::span<const Point>, std::span<const double> x) {
        double s = 0.0;
        for (double v : x) s += std::abs(v);
        return 1.1 * s;
      });
  auto report = check_norm_axioms(bad, kPair, 50, 3);
  REQUIRE(!report.pass());
}

TEST_CASE("eval validates its arguments", "[dnorm]") {
  auto ind = DNormModel::independence();
  std::vector<double> x{1.0};
  REQUIRE_THROWS_AS(ind.eval(kPair, x), BackendArity);
  REQUIRE_THROWS_AS(ind.eval({}, {}), BackendArity);
  std::vector<double> bad{std::numeric_limits<double>::infinity(), 1.0};
  REQUIRE_THROWS_AS(ind.eval(kPair, bad), DomainError);
}

TEST_CASE("mc norms respect the sup and L1 envelope statistically",
          "[dnorm]") {
  auto model = DNormModel::generator_mc(std::make_shared<HrPairGenerator>(1.0),
                                        50000, 77);
  CounterRng rng(123);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x{2.0 * rng.uniform01(), 2.0 * rng.uniform01()};
    auto est = model.eval_detailed(kPair, x);
    double sup = std::max(x[0], x[1]), l1 = x[0] + x[1];
    REQUIRE(est.estimate >= sup - 3.0 * est.stderr_ - 1e-12);
    REQUIRE(est.estimate <= l1 + 3.0 * est.stderr_ + 1e-12);
  }
}
