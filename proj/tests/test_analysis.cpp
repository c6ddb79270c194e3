#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "goursat/analysis.hpp"
#include "goursat/grid.hpp"

using namespace goursat;

TEST_SUITE_BEGIN("analysis");

TEST_CASE("relative error of identical fields is zero") {
  const auto spec = build_grid(1.0, 1.0, Eigen::Index(10), Eigen::Index(10));
  auto a = make_field(spec, 2.0);
  const auto rep = relative_error(a, a);
  CHECK(rep.max_abs_rel_error == 0.0);
}

TEST_CASE("relative error locates the worst point") {
  const auto spec = build_grid(1.0, 1.0, Eigen::Index(4), Eigen::Index(4));
  auto exact = make_field(spec, 2.0);
  auto numeric = exact;
  numeric(3, 1) = 2.1;  // 5% off
  numeric(1, 2) = 2.02;
  const auto rep = relative_error(numeric, exact, true);
  CHECK(rep.max_abs_rel_error == doctest::Approx(0.05));
  CHECK(rep.argmax == LatticeIndex{3, 1});
  CHECK(rep.x == doctest::Approx(0.75));
  REQUIRE(rep.error_field.has_value());
  CHECK((*rep.error_field)(1, 2) == doctest::Approx(0.01));
}

TEST_CASE("relative error floors the denominator near zero") {
  const auto spec = build_grid(1.0, 1.0, Eigen::Index(2), Eigen::Index(2));
  auto exact = make_field(spec, 0.0);
  auto numeric = make_field(spec, 0.0);
  numeric(1, 1) = 1e-15;
  const auto rep = relative_error(numeric, exact);
  CHECK(rep.max_abs_rel_error == doctest::Approx(1e-3));  // 1e-15 / 1e-12
}

TEST_CASE("relative error requires matching grids") {
  const auto a = make_field(build_grid(1.0, 1.0, Eigen::Index(4), Eigen::Index(4)));
  const auto b = make_field(build_grid(1.0, 1.0, Eigen::Index(5), Eigen::Index(4)));
  CHECK_THROWS_AS(relative_error(a, b), std::invalid_argument);
}

TEST_CASE("monotone slices have no peaks") {
  std::vector<double> s;
  for (int k = 0; k < 50; ++k) s.push_back(0.1 * k);
  CHECK(count_peaks<double>(s, 0.0) == 0);
}

TEST_CASE("sampled sinusoid has exactly the brute-force number of peaks") {
  const double pi = std::numbers::pi;
  std::vector<double> s;
  for (int k = 0; k <= 100; ++k) s.push_back(std::sin(2.0 * pi * k / 20.0));

  // independent brute count of strict local maxima (each has prominence 2
  // here, far above the 0.5 threshold)
  int brute = 0;
  for (std::size_t k = 1; k + 1 < s.size(); ++k)
    if (s[k] > s[k - 1] && s[k] > s[k + 1]) ++brute;
  CHECK(brute == 5);
  CHECK(count_peaks<double>(s, 0.5) == 5);
}

TEST_CASE("prominence filters shallow ripples") {
  // two big peaks with shallow wiggles between them; by hand, the maxima at
  // 1.0, 0.35, 0.45 and 1.0 have prominences 1.0, 0.05, 0.25 and 1.0
  const std::vector<double> s{0.0, 1.0, 0.2, 0.35, 0.3, 0.45, 0.2, 1.0, 0.0};
  CHECK(peak_prominence<double>(s, 3) == doctest::Approx(0.05));
  CHECK(peak_prominence<double>(s, 5) == doctest::Approx(0.25));
  CHECK(count_peaks<double>(s, 0.5) == 2);
  CHECK(count_peaks<double>(s, 0.10) == 3);
  CHECK(count_peaks<double>(s, 0.04) == 4);
}

TEST_CASE("peak count is invariant under shift and positive scaling") {
  std::vector<double> s;
  for (int k = 0; k <= 200; ++k)
    s.push_back(std::sin(0.3 * k) + 0.4 * std::sin(0.05 * k + 1.0));
  std::vector<double> scaled(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) scaled[k] = 13.0 + 2.5 * s[k];

  const std::span<const double> sv(s), tv(scaled);
  CHECK(count_peaks(sv, default_prominence(sv)) == count_peaks(tv, default_prominence(tv)));
}

TEST_CASE("threshold indicator saturates and partitions") {
  const auto spec = build_grid(1.0, 1.0, Eigen::Index(8), Eigen::Index(8));
  auto field = make_field(spec);
  for (Eigen::Index j = 0; j <= 8; ++j)
    for (Eigen::Index i = 0; i <= 8; ++i) field(i, j) = std::sin(0.9 * i) * std::cos(0.7 * j);

  CHECK(threshold_indicator(field, -2.0).values.minCoeff() == 1.0);
  CHECK(threshold_indicator(field, 2.0).values.maxCoeff() == 0.0);

  const double a = 0.25;
  const auto mask = threshold_indicator(field, a);
  for (Eigen::Index j = 0; j <= 8; ++j)
    for (Eigen::Index i = 0; i <= 8; ++i) {
      const double complement = field(i, j) < a ? 1.0 : 0.0;
      CHECK(mask(i, j) + complement == 1.0);
    }
}

TEST_CASE("sheet covariance basics") {
  const std::vector<double> a{1.0, 2.0, 3.0};
  CHECK(sheet_covariance<double>(a, a) == doctest::Approx(1.0));
  const std::vector<double> b{2.0, 4.0, 6.0};
  CHECK(sheet_covariance<double>(a, b) == doctest::Approx(2.0));

  const std::vector<double> one{1.0};
  CHECK_THROWS_AS(sheet_covariance<double>(one, one), std::invalid_argument);
  const std::vector<double> two{1.0, 2.0};
  CHECK_THROWS_AS(sheet_covariance<double>(a, two), std::invalid_argument);
}

TEST_SUITE_END();
