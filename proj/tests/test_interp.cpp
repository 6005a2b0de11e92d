#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "maxfield/fields.hpp"
#include "maxfield/interp.hpp"
#include "maxfield/stats.hpp"

using namespace maxfield;

namespace {

Grid unit_pair() { return make_grid({Point{0.0}, Point{1.0}}, SpatialNorm::L2); }

Grid unit_square_corners() {
  return make_grid({Point{0.0, 0.0}, Point{1.0, 0.0}, Point{0.0, 1.0},
                    Point{1.0, 1.0}},
                   SpatialNorm::L2);
}

}  // namespace

TEST_CASE("piecewise weights: worked values under independence", "[interp]") {
  auto ws = WeightSystem::piecewise_1d(unit_pair(), DNormModel::independence());
  auto w = ws.weights(Point{0.5});
  REQUIRE(w[0] == Catch::Approx(0.5).margin(1e-15));
  REQUIRE(w[1] == Catch::Approx(0.5).margin(1e-15));
  w = ws.weights(Point{0.25});
  REQUIRE(w[0] == Catch::Approx(0.75).margin(1e-15));
  REQUIRE(w[1] == Catch::Approx(0.25).margin(1e-15));
  REQUIRE(ws.interpolating());
  REQUIRE(ws.weights(Point{0.0})[0] == 1.0);
  REQUIRE(ws.weights(Point{1.0})[1] == 1.0);
}

TEST_CASE("piecewise weights: worked values under complete dependence",
          "[interp]") {
  auto ws = WeightSystem::piecewise_1d(unit_pair(),
                                       DNormModel::complete_dependence());
  auto w = ws.weights(Point{0.25});
  REQUIRE(w[0] == Catch::Approx(1.0).margin(1e-15));          // 0.75 / max
  REQUIRE(w[1] == Catch::Approx(1.0 / 3.0).margin(1e-15));    // 0.25 / 0.75
}

TEST_CASE("min-distance weights on the unit square corners", "[interp]") {
  auto grid = unit_square_corners();
  Point center{0.5, 0.5};

  auto dep = WeightSystem::min_distance(grid, DNormModel::complete_dependence());
  for (double v : dep.weights(center)) REQUIRE(v == Catch::Approx(1.0));

  auto ind = WeightSystem::min_distance(grid, DNormModel::independence());
  for (double v : ind.weights(center)) REQUIRE(v == Catch::Approx(0.25));
}

TEST_CASE("interpolating families reproduce the identity at the sites",
          "[interp]") {
  auto grid1 = make_grid(uniform_points_1d(5), SpatialNorm::L2);
  auto fs = hat_spectral_functions({0.0, 0.25, 0.5, 0.75, 1.0});
  std::vector<WeightSystem> systems{
      WeightSystem::piecewise_1d(grid1, DNormModel::max_linear(fs)),
      WeightSystem::min_distance(grid1, DNormModel::max_linear(fs)),
      WeightSystem::min_distance(unit_square_corners(),
                                 DNormModel::independence()),
  };
  for (const auto& ws : systems) {
    auto v = validate_weights(ws, 200);
    REQUIRE(v.max_delta_dev <= 1e-12);
    REQUIRE(v.interpolation_ok);
    REQUIRE(v.standardization_ok);
    REQUIRE(v.pass());
  }
}

TEST_CASE("monte-carlo joint models still give exact delta weights",
          "[interp]") {
  // At a site the raw vector has one nonzero entry, and the sampler evaluates
  // such vectors exactly, so interpolation survives an MC-backed norm.
  auto grid = make_grid(uniform_points_1d(4), SpatialNorm::L2);
  auto gen = std::make_shared<BrownResnickGenerator>(1.0);
  auto model = DNormModel::generator_mc(gen, 4000, 5);
  auto ws = WeightSystem::min_distance(grid, model);
  auto v = validate_weights(ws, 100);
  REQUIRE(v.max_delta_dev <= 1e-12);
  REQUIRE(v.standardization_ok);
}

TEST_CASE("kernel weights are bounded by one and sharpen onto the sites",
          "[interp]") {
  auto grid = make_grid(uniform_points_1d(5), SpatialNorm::L2);
  double prev_dev = 2.0;
  for (double h : {1e-1, 1e-2, 1e-3}) {
    auto ws = WeightSystem::kernel(grid, KernelFn::exponential(), h,
                                   DNormModel::independence());
    REQUIRE(!ws.interpolating());
    auto v = validate_weights(ws, 500);
    REQUIRE(v.standardization_ok);
    REQUIRE(v.max_weight <= 1.0 + 1e-9);
    REQUIRE(v.min_weight >= 0.0);
    double dev = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i)
      dev = std::max(dev, std::abs(ws.weights(grid.point(i))[i] - 1.0));
    REQUIRE(dev < prev_dev);  // self-weight at each site climbs toward 1
    prev_dev = dev;
  }
  REQUIRE(prev_dev < 1e-3);
}

TEST_CASE("huge bandwidth under complete dependence flattens the weights",
          "[interp]") {
  auto ws = WeightSystem::kernel(unit_pair(), KernelFn::exponential(), 1e3,
                                 DNormModel::complete_dependence());
  for (double v : ws.weights(Point{0.3}))
    REQUIRE(v == Catch::Approx(1.0).margin(1e-3));
}

TEST_CASE("corrupted custom weights fail standardization", "[interp]") {
  auto base = WeightSystem::piecewise_1d(unit_pair(),
                                         DNormModel::independence());
  auto bad = WeightSystem::custom(
      unit_pair(), DNormModel::independence(),
      [base](const Point& t) {
        auto w = base.weights(t);
        for (double& v : w) v *= 1.1;
        return w;
      },
      true);
  auto v = validate_weights(bad, 100);
  REQUIRE(!v.standardization_ok);
  REQUIRE(!v.pass());
  REQUIRE(v.max_standardization_dev == Catch::Approx(0.1).margin(1e-9));
}

TEST_CASE("weight construction rejects bad input", "[interp]") {
  REQUIRE_THROWS_AS(
      WeightSystem::min_distance(make_grid({Point{0.5}}, SpatialNorm::L2),
                                 DNormModel::independence()),
      NeedTwoPoints);
  REQUIRE_THROWS_AS(WeightSystem::kernel(unit_pair(), KernelFn::exponential(),
                                         0.0, DNormModel::independence()),
                    InvalidBandwidth);
  REQUIRE_THROWS_AS(WeightSystem::kernel(unit_pair(), KernelFn::exponential(),
                                         -1.0, DNormModel::independence()),
                    InvalidBandwidth);
  auto interior = make_grid({Point{0.2}, Point{0.8}}, SpatialNorm::L2);
  REQUIRE_THROWS_AS(
      WeightSystem::piecewise_1d(interior, DNormModel::independence()),
      BadGrid);
  REQUIRE_THROWS_AS(WeightSystem::piecewise_1d(unit_square_corners(),
                                               DNormModel::independence()),
                    BadGrid);
  auto ws = WeightSystem::piecewise_1d(unit_pair(), DNormModel::independence());
  REQUIRE_THROWS_AS(ws.weights(Point{0.5, 0.5}), DomainError);
}

TEST_CASE("compactly supported kernels can zero out every weight", "[interp]") {
  auto bump = KernelFn::from_table({{0.0, 1.0}, {0.1, 0.0}});
  auto ws = WeightSystem::kernel(unit_pair(), bump, 1.0,
                                 DNormModel::independence());
  REQUIRE_THROWS_AS(ws.weights(Point{0.5}), AllWeightsZero);
}

TEST_CASE("discretized field: worked values and invariances", "[interp]") {
  auto ws = WeightSystem::piecewise_1d(unit_pair(), DNormModel::independence());
  auto f = discretize(ws, {-1.0, -1.0});
  REQUIRE(f(Point{0.5}) == Catch::Approx(-2.0).margin(1e-15));

  // Zero-weight sites are skipped, not divided by.
  auto g = discretize(ws, {-0.5, -3.0});
  REQUIRE(g(Point{0.0}) == -0.5);
  REQUIRE(g(Point{1.0}) == -3.0);

  // Interpolating weights reproduce observations at the sites exactly.
  auto grid = make_grid(uniform_points_1d(5), SpatialNorm::L2);
  auto ws5 = WeightSystem::min_distance(grid, DNormModel::independence());
  std::vector<double> obs{-0.3, -1.5, -0.7, -2.2, -0.9};
  auto h = discretize(ws5, obs);
  for (std::size_t i = 0; i < grid.size(); ++i)
    REQUIRE(h(grid.point(i)) == obs[i]);

  // Positive homogeneity and monotonicity in the observations.
  std::vector<double> scaled, larger;
  for (double v : obs) scaled.push_back(2.5 * v);
  for (double v : obs) larger.push_back(v * 0.5);
  auto hs = discretize(ws5, scaled);
  auto hl = discretize(ws5, larger);
  for (double t : {0.1, 0.37, 0.62, 0.93}) {
    REQUIRE(hs(Point{t}) == Catch::Approx(2.5 * h(Point{t})).epsilon(1e-14));
    REQUIRE(hl(Point{t}) >= h(Point{t}));
  }
}

TEST_CASE("discretize validates its observations", "[interp]") {
  auto ws = WeightSystem::piecewise_1d(unit_pair(), DNormModel::independence());
  REQUIRE_THROWS_AS(discretize(ws, {-1.0}), DomainError);
  REQUIRE_THROWS_AS(discretize(ws, {-1.0, 0.5}), NonNegativeObservation);
  REQUIRE_THROWS_AS(discretize(ws, {-1.0, 0.0}), NonNegativeObservation);
}

TEST_CASE("interpolated generator has unit mean under the joint law",
          "[interp]") {
  auto nodes = std::vector<double>{0.0, 0.5, 1.0};
  auto fs = hat_spectral_functions(nodes);
  auto grid = make_grid({Point{0.0}, Point{0.5}, Point{1.0}}, SpatialNorm::L2);
  auto joint = DNormModel::max_linear(fs);
  auto ws = WeightSystem::min_distance(grid, joint);

  SpectralDiscreteGenerator gen(fs);
  auto plan = gen.prepare(grid.points());
  std::size_t reps = 100000;
  for (double t : {0.2, 0.5, 0.77}) {
    RunningStat stat;
    std::vector<double> z(grid.size());
    for (std::size_t r = 0; r < reps; ++r) {
      CounterRng rng(derive_stream(31, {stream::kFieldSample, r}));
      plan->draw(rng, z.data());
      stat.add(generator_hat(ws, z, Point{t}));
    }
    REQUIRE(std::abs(stat.mean() - 1.0) <=
            4.0 * std::sqrt(stat.variance() / reps));
  }
  // At a site the interpolated generator is the site value itself.
  std::vector<double> z{0.4, 1.7, 0.2};
  REQUIRE(generator_hat(ws, z, Point{0.5}) == 1.7);
  std::vector<double> wrong{1.0};
  REQUIRE_THROWS_AS(generator_hat(ws, wrong, Point{0.5}), DomainError);
}

TEST_CASE("discretized spectral functions stay standardized and sampleable",
          "[interp]") {
  auto fs = hat_spectral_functions({0.0, 0.5, 1.0});
  auto grid = make_grid({Point{0.0}, Point{0.5}, Point{1.0}}, SpatialNorm::L2);
  auto ws = WeightSystem::piecewise_1d(grid, DNormModel::max_linear(fs));
  auto hat_fs = discretized_spectral(ws, fs);
  REQUIRE(hat_fs.size() == fs.size());

  auto probes = lattice_points(1, 500);
  REQUIRE(spectral_standardization_deviation(hat_fs, probes) < 1e-9);

  // The discretized system is itself a valid max-linear field.
  std::vector<Point> locs{Point{0.3}, Point{0.8}};
  auto eta = sample_maxlinear(hat_fs, locs, 20000, 4);
  std::vector<double> xs(eta.rows());
  for (std::size_t r = 0; r < eta.rows(); ++r) xs[r] = eta(r, 0);
  REQUIRE(ks_statistic(xs, [](double x) {
            return x >= 0.0 ? 1.0 : std::exp(x);
          }) < ks_critical(eta.rows(), 0.01));
}
