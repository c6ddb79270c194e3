#include <doctest.h>

#include <cmath>

#include "goursat/grid.hpp"

using namespace goursat;

TEST_SUITE_BEGIN("grid");

TEST_CASE("build_grid derives steps and lattice size") {
  const auto a = build_grid(2.0, 2.0, Eigen::Index(100), Eigen::Index(100));
  CHECK(a.dx == doctest::Approx(0.02).epsilon(1e-14));
  CHECK(a.dt == doctest::Approx(0.02).epsilon(1e-14));

  const auto b = build_grid(1.0, 1.0, Eigen::Index(1), Eigen::Index(1));
  CHECK(b.dx == 1.0);
  CHECK(b.dt == 1.0);
  CHECK(b.points_x() * b.points_t() == 4);

  const auto c = build_grid(2.0, 3.0, Eigen::Index(1000), Eigen::Index(1200));
  CHECK(c.dx == doctest::Approx(0.002).epsilon(1e-14));
  CHECK(c.dt == doctest::Approx(0.0025).epsilon(1e-14));
}

TEST_CASE("build_grid step-extent identity holds to relative 1e-12") {
  for (const auto& [xf, tf, nx, nt] : {std::tuple{2.0, 2.0, 100LL, 100LL},
                                      std::tuple{1.7, 0.3, 7LL, 13LL},
                                      std::tuple{40.0, 40.0, 2000LL, 2000LL}}) {
    const auto spec = build_grid(xf, tf, Eigen::Index(nx), Eigen::Index(nt));
    CHECK(std::abs(spec.dx * static_cast<double>(spec.n_x) - spec.x_f) <= 1e-12 * spec.x_f);
    CHECK(std::abs(spec.dt * static_cast<double>(spec.n_t) - spec.t_f) <= 1e-12 * spec.t_f);
  }
}

TEST_CASE("index -> coordinate -> index round-trip is exact on the lattice") {
  const auto spec = build_grid(2.0, 3.0, Eigen::Index(997), Eigen::Index(1201));
  for (Eigen::Index i = 0; i <= spec.n_x; ++i) CHECK(nearest_x_index(spec, spec.x(i)) == i);
  for (Eigen::Index j = 0; j <= spec.n_t; ++j) CHECK(nearest_t_index(spec, spec.t(j)) == j);
}

TEST_CASE("build_grid rejects bad parameters") {
  CHECK_THROWS_AS(build_grid(0.0, 1.0, Eigen::Index(10), Eigen::Index(10)), std::invalid_argument);
  CHECK_THROWS_AS(build_grid(1.0, -2.0, Eigen::Index(10), Eigen::Index(10)),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_grid(1.0, 1.0, Eigen::Index(0), Eigen::Index(10)), std::invalid_argument);
  CHECK_THROWS_AS(build_grid(1.0, 1.0, Eigen::Index(10), Eigen::Index(-1)), std::invalid_argument);
}

TEST_CASE("sample_boundary samples and checks the corner") {
  const auto spec = build_grid(2.0, 2.0, Eigen::Index(10), Eigen::Index(10));

  SUBCASE("constant data") {
    const auto bc = sample_boundary(
        spec, [](double) { return 1.0; }, [](double) { return 1.0; });
    CHECK(bc.f.minCoeff() == 1.0);
    CHECK(bc.f.maxCoeff() == 1.0);
    CHECK(bc.g.minCoeff() == 1.0);
    CHECK(bc.corner() == 1.0);
  }

  SUBCASE("exponential data shares the corner") {
    const auto bc = sample_boundary(
        spec, [](double x) { return std::exp(x); }, [](double t) { return std::exp(t); });
    CHECK(bc.f[0] == 1.0);
    CHECK(bc.g[0] == 1.0);
    CHECK(bc.f[spec.n_x] == doctest::Approx(std::exp(2.0)));
  }

  SUBCASE("inconsistent corner is rejected") {
    CHECK_THROWS_AS(sample_boundary(
                        spec, [](double) { return 0.0; }, [](double) { return 0.5; }),
                    std::invalid_argument);
  }

  SUBCASE("non-finite data is rejected") {
    CHECK_THROWS_AS(sample_boundary(
                        spec, [](double x) { return 1.0 / (x - 1.0); },
                        [](double) { return -1.0; }),
                    std::invalid_argument);
  }
}

TEST_CASE("tabulated_boundary validates shape and corner") {
  const auto spec = build_grid(1.0, 1.0, Eigen::Index(4), Eigen::Index(3));
  Eigen::VectorXd f = Eigen::VectorXd::LinSpaced(5, 1.0, 2.0);
  Eigen::VectorXd g = Eigen::VectorXd::LinSpaced(4, 1.0, 0.0);
  const auto bc = tabulated_boundary(spec, f, g);
  CHECK(bc.corner() == 1.0);

  Eigen::VectorXd bad = Eigen::VectorXd::Zero(3);
  CHECK_THROWS_AS(tabulated_boundary(spec, bad, g), std::invalid_argument);
  g[0] = 0.7;
  CHECK_THROWS_AS(tabulated_boundary(spec, f, g), std::invalid_argument);
}

TEST_CASE("finite_extrema skips NaN sentinels") {
  Eigen::MatrixXd m(2, 3);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  m << 1.0, nan, -3.0, 0.5, 2.0, nan;
  const auto [lo, hi] = finite_extrema(m);
  CHECK(lo == -3.0);
  CHECK(hi == 2.0);
}

TEST_SUITE_END();
