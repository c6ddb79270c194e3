#include <doctest.h>

#include <cmath>
#include <vector>

#include "goursat/analysis.hpp"
#include "goursat/noise.hpp"
#include "goursat/rng.hpp"
#include "goursat/solver.hpp"

using namespace goursat;

TEST_SUITE_BEGIN("noise");

TEST_CASE("philox4x64 known-answer vectors") {
  // Cross-checked against an independent implementation of the same generator.
  using A4 = std::array<std::uint64_t, 4>;
  using A2 = std::array<std::uint64_t, 2>;

  CHECK(rng::philox4x64(A4{0, 0, 0, 0}, A2{0, 0}) ==
        A4{0x16554d9eca36314cull, 0xdb20fe9d672d0fdcull, 0xd7e772cee186176bull,
           0x7e68b68aec7ba23bull});
  CHECK(rng::philox4x64(A4{1, 0, 0, 0}, A2{0, 0}) ==
        A4{0x02f4ba6408e4d89bull, 0x3dd62b0b9ca8c5b2ull, 0x1c8667a55d902e79ull,
           0x907d7a052fd5b4dcull});
  CHECK(rng::philox4x64(A4{1, 0, 0, 0}, A2{0xdeadbeefull, 42}) ==
        A4{0xc034e4902491f0c5ull, 0xdbc01b80a7a86cceull, 0xf1c050f03ce74ac6ull,
           0xc5cfa6d22bfbbfa2ull});
  CHECK(rng::philox4x64(A4{0xffffffffffffffffull, 0, 0, 0},
                        A2{0x123456789abcdef0ull, 0xfedcba9876543210ull}) ==
        A4{0xb0329b8cc3a0d024ull, 0xa9207929c3382139ull, 0xe977dc8c3c004c2bull,
           0xd48fad0a32744cadull});
}

TEST_CASE("unit mapping stays inside the open interval") {
  CHECK(rng::to_unit_open(0) > 0.0);
  CHECK(rng::to_unit_open(0xffffffffffffffffull) < 1.0);
}

TEST_CASE("same (seed, trial) reproduces bit-identical increments") {
  const auto spec = build_grid(1.0, 1.0, Eigen::Index(40), Eigen::Index(30));
  const NoiseConfig<double> cfg{1.0, 20240917, 3};
  const auto a = sample_increments(spec, cfg);
  const auto b = sample_increments(spec, cfg);
  CHECK(a.values == b.values);
  CHECK(a.values.rows() == spec.n_x);
  CHECK(a.values.cols() == spec.n_t);
}

TEST_CASE("neighboring trials are uncorrelated") {
  const auto spec = build_grid(1.0, 1.0, Eigen::Index(100), Eigen::Index(100));
  const auto a = sample_increments(spec, {1.0, 555, 0});
  const auto b = sample_increments(spec, {1.0, 555, 1});
  CHECK(a.values != b.values);
  const double n = static_cast<double>(a.values.size());
  const double ma = a.values.mean(), mb = b.values.mean();
  const double cov = ((a.values.array() - ma) * (b.values.array() - mb)).sum() / (n - 1);
  const double sa = std::sqrt(((a.values.array() - ma).square()).sum() / (n - 1));
  const double sb = std::sqrt(((b.values.array() - mb).square()).sum() / (n - 1));
  CHECK(std::abs(cov / (sa * sb)) < 0.05);
}

TEST_CASE("pooled draws look standard normal") {
  const auto spec = build_grid(1.0, 1.0, Eigen::Index(100), Eigen::Index(100));
  const auto inc = sample_increments(spec, {1.0, 90210, 0});
  const double n = static_cast<double>(inc.values.size());
  const double mean = inc.values.mean();
  const double var = (inc.values.array() - mean).square().sum() / (n - 1);
  CHECK(std::abs(mean) <= 0.05);
  CHECK(var >= 0.9);
  CHECK(var <= 1.1);
}

TEST_CASE("sheet with sigma = 0 is identically zero") {
  const auto spec = build_grid(1.0, 1.0, Eigen::Index(16), Eigen::Index(8));
  const auto sheet = brownian_sheet(spec, {0.0, 42, 0});
  CHECK(sheet.values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sheet equals the zero-drift solve bit for bit") {
  const auto spec = build_grid(2.0, 1.0, Eigen::Index(32), Eigen::Index(24));
  const NoiseConfig<double> cfg{0.7, 1234, 5};
  const auto sheet = brownian_sheet(spec, cfg);

  const auto inc = sample_increments(spec, cfg);
  const auto bc = constant_boundary(spec, 0.0);
  const SourceSpec<double> zero = ZeroSource<double>{};
  const auto run = solve(spec, bc, zero, cfg.sigma, &inc,
                         std::numeric_limits<double>::infinity());
  CHECK(sheet.values == run.field.values);

  // direct cumulative-sum oracle, independent of the marching code path
  Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(spec.points_x(), spec.points_t());
  const double s = cfg.sigma * std::sqrt(spec.dx * spec.dt);
  for (Eigen::Index j = 1; j <= spec.n_t; ++j)
    for (Eigen::Index i = 1; i <= spec.n_x; ++i)
      expect(i, j) = expect(i - 1, j) + expect(i, j - 1) - expect(i - 1, j - 1) +
                     s * inc.values(i - 1, j - 1);
  CHECK((sheet.values - expect).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("sheet standard deviation at the far corner tracks sigma sqrt(xf tf)") {
  const auto spec = build_grid(1.0, 1.0, Eigen::Index(50), Eigen::Index(50));
  Welford<double> corner;
  for (int trial = 0; trial < 400; ++trial) {
    const auto sheet = brownian_sheet(spec, {3.0, 321, static_cast<std::uint64_t>(trial)});
    corner.add(sheet(spec.n_x, spec.n_t));
  }
  CHECK(std::abs(corner.mean) <= 1.96 * 3.0 / std::sqrt(400.0));
  CHECK(corner.sd() >= 2.6);
  CHECK(corner.sd() <= 3.4);
}

TEST_CASE("sheet covariance matches min(x,y) min(s,t)") {
  const auto spec = build_grid(1.0, 1.0, Eigen::Index(50), Eigen::Index(50));
  const int trials = 2000;
  std::vector<double> at_p(trials), at_q(trials);
  const Eigen::Index ip = nearest_x_index(spec, 0.5), jp = nearest_t_index(spec, 0.5);
  const Eigen::Index iq = nearest_x_index(spec, 1.0), jq = nearest_t_index(spec, 0.75);
  for (int k = 0; k < trials; ++k) {
    const auto sheet = brownian_sheet(spec, {1.0, 5150, static_cast<std::uint64_t>(k)});
    at_p[static_cast<std::size_t>(k)] = sheet(ip, jp);
    at_q[static_cast<std::size_t>(k)] = sheet(iq, jq);
  }
  const double cov = sheet_covariance<double>(at_p, at_q);
  CHECK(cov == doctest::Approx(0.25).epsilon(0.12));
}

TEST_CASE("sheet increments over disjoint rectangles are uncorrelated") {
  const auto spec = build_grid(1.0, 1.0, Eigen::Index(20), Eigen::Index(20));
  const int trials = 2000;
  std::vector<double> lower(trials), upper(trials);
  const Eigen::Index h = 10;
  for (int k = 0; k < trials; ++k) {
    const auto w = brownian_sheet(spec, {1.0, 808, static_cast<std::uint64_t>(k)});
    lower[static_cast<std::size_t>(k)] = w(h, h);
    upper[static_cast<std::size_t>(k)] =
        w(spec.n_x, spec.n_t) - w(spec.n_x, h) - w(h, spec.n_t) + w(h, h);
  }
  const double cov = sheet_covariance<double>(lower, upper);
  const double v1 = sheet_covariance<double>(lower, lower);
  const double v2 = sheet_covariance<double>(upper, upper);
  CHECK(std::abs(cov / std::sqrt(v1 * v2)) < 0.05);
}

TEST_CASE("shape checks") {
  const auto spec = build_grid(1.0, 1.0, Eigen::Index(4), Eigen::Index(4));
  auto inc = sample_increments(spec, {1.0, 1, 0});
  CHECK_NOTHROW(require_matching_increments(spec, inc));
  inc.values.resize(3, 4);
  CHECK_THROWS_AS(require_matching_increments(spec, inc), std::invalid_argument);
}

TEST_SUITE_END();
