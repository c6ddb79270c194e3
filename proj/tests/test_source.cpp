#include <doctest.h>

#include <cmath>
#include <limits>

#include "goursat/rng.hpp"
#include "goursat/source.hpp"

using namespace goursat;

TEST_SUITE_BEGIN("source");

TEST_CASE("variant formulas at pinned points") {
  CHECK(evaluate<double>(AffineSource<double>{1.0, 0.0}, 2.0) == 2.0);
  CHECK(evaluate<double>(SineGordonSource<double>{+1}, 0.0) == 0.0);
  CHECK(evaluate<double>(CubicSource<double>{4.0, 0.5}, 1.0) == 0.0);
  CHECK(evaluate<double>(QuadraticSource<double>{1.0}, 0.5) == 0.25);
  CHECK(evaluate<double>(ZeroSource<double>{}, 123.0) == 0.0);
  CHECK(evaluate<double>(ExponentialSource<double>{}, 0.0) == 1.0);
  CHECK(evaluate<double>(SineGordonSource<double>{-1}, 1.0) == doctest::Approx(-std::sin(1.0)));
}

TEST_CASE("roots are exact for randomly drawn parameters") {
  for (int it = 0; it < 200; ++it) {
    const double k = 10.0 * rng::standard_normal_at(11, 0, static_cast<std::uint64_t>(it));
    const double y1 = rng::standard_normal_at(11, 1, static_cast<std::uint64_t>(it));
    CHECK(evaluate<double>(CubicSource<double>{k, y1}, 0.0) == 0.0);
    CHECK(evaluate<double>(CubicSource<double>{k, y1}, 1.0) == 0.0);
    CHECK(evaluate<double>(CubicSource<double>{k, y1}, y1) == 0.0);
    CHECK(evaluate<double>(QuadraticSource<double>{k}, 0.0) == 0.0);
    CHECK(evaluate<double>(QuadraticSource<double>{k}, 1.0) == 0.0);
  }
}

TEST_CASE("sine-gordon drift is bounded by one") {
  for (int it = 0; it < 500; ++it) {
    const double y = 50.0 * rng::standard_normal_at(12, 0, static_cast<std::uint64_t>(it));
    CHECK(std::abs(evaluate<double>(SineGordonSource<double>{+1}, y)) <= 1.0);
    CHECK(std::abs(evaluate<double>(SineGordonSource<double>{-1}, y)) <= 1.0);
  }
}

TEST_CASE("homogeneous affine drift is linear") {
  const SourceSpec<double> src = AffineSource<double>{-1.7, 0.0};
  for (int it = 0; it < 100; ++it) {
    const double y = rng::standard_normal_at(13, 0, static_cast<std::uint64_t>(it));
    const double a = rng::standard_normal_at(13, 1, static_cast<std::uint64_t>(it));
    CHECK(evaluate(src, a * y) == doctest::Approx(a * evaluate(src, y)).epsilon(1e-14));
  }
}

TEST_CASE("non-finite input is a domain error") {
  const SourceSpec<double> src = QuadraticSource<double>{1.0};
  CHECK_THROWS_AS(evaluate(src, std::numeric_limits<double>::quiet_NaN()), std::domain_error);
  CHECK_THROWS_AS(evaluate(src, std::numeric_limits<double>::infinity()), std::domain_error);
}

TEST_CASE("textual names") {
  CHECK(source_name<double>(ZeroSource<double>{}) == "zero");
  CHECK(source_name<double>(AffineSource<double>{}) == "affine");
  CHECK(source_name<double>(QuadraticSource<double>{}) == "quadratic");
  CHECK(source_name<double>(CubicSource<double>{}) == "cubic");
  CHECK(source_name<double>(SineGordonSource<double>{+1}) == "sine-gordon");
  CHECK(source_name<double>(SineGordonSource<double>{-1}) == "neg-sine-gordon");
  CHECK(source_name<double>(ExponentialSource<double>{}) == "exponential");
}

TEST_SUITE_END();
