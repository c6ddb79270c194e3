#include <doctest.h>

#include <cmath>
#include <vector>

#include "goursat/ensemble.hpp"
#include "goursat/oracle.hpp"

using namespace goursat;

TEST_SUITE_BEGIN("ensemble");

TEST_CASE("zero sigma: mean equals the deterministic solve, sd is zero") {
  const auto spec = build_grid(1.0, 1.0, Eigen::Index(20), Eigen::Index(20));
  const auto bc = constant_boundary(spec, 1.0);
  const SourceSpec<double> src = AffineSource<double>{-1.0, 0.0};

  EnsembleSpec<double> es;
  es.n_trials = 7;
  es.master_seed = 5;
  es.record.points = {{1.0, 1.0}};
  const auto stats = run_ensemble(spec, bc, src, 0.0, es, 2);
  const auto det = solve(spec, bc, src, 0.0, nullptr);

  REQUIRE(stats.mean.has_value());
  CHECK(stats.mean->values == det.field.values);
  CHECK(stats.sd->values.cwiseAbs().maxCoeff() == 0.0);
  CHECK(stats.n_completed == 7);
  CHECK(stats.n_singular == 0);
  CHECK(stats.points[0].sd == 0.0);
  CHECK(stats.points[0].ci95_halfwidth == 0.0);
  CHECK(stats.points[0].mean == det.field(spec.n_x, spec.n_t));
}

TEST_CASE("statistics are identical at every thread count") {
  const auto spec = build_grid(2.0, 2.0, Eigen::Index(50), Eigen::Index(50));
  const auto bc = constant_boundary(spec, 0.1);
  const SourceSpec<double> src = QuadraticSource<double>{1.0};

  EnsembleSpec<double> es;
  es.n_trials = 16;
  es.master_seed = 404;
  es.record.points = {{2.0, 2.0}, {1.0, 0.5}};

  const auto a = run_ensemble(spec, bc, src, 0.08, es, 1);
  const auto b = run_ensemble(spec, bc, src, 0.08, es, 4);
  const auto c = run_ensemble(spec, bc, src, 0.08, es, 8);

  CHECK(a.mean->values == b.mean->values);
  CHECK(a.mean->values == c.mean->values);
  CHECK(a.sd->values == b.sd->values);
  CHECK(a.sd->values == c.sd->values);
  CHECK(a.n_singular == b.n_singular);
  for (std::size_t p = 0; p < a.points.size(); ++p) {
    CHECK(a.points[p].mean == b.points[p].mean);
    CHECK(a.points[p].sd == c.points[p].sd);
  }
}

TEST_CASE("slice recording agrees with the full-field statistics") {
  const auto spec = build_grid(2.0, 2.0, Eigen::Index(30), Eigen::Index(30));
  const auto bc = constant_boundary(spec, 1.0);
  const SourceSpec<double> src = SineGordonSource<double>{+1};

  EnsembleSpec<double> full;
  full.n_trials = 10;
  full.master_seed = 1001;
  EnsembleSpec<double> sliced = full;
  sliced.record.mode = RecordMode::slices;
  sliced.record.t_slices = {2.0};
  sliced.record.x_slices = {1.0};

  const auto a = run_ensemble(spec, bc, src, 0.2, full, 3);
  const auto b = run_ensemble(spec, bc, src, 0.2, sliced, 3);

  REQUIRE(b.slices.size() == 2);
  const auto& st = b.slices[0];  // t = 2 line over x
  const auto& sx = b.slices[1];  // x = 1 line over t
  CHECK(st.axis == 't');
  CHECK(sx.axis == 'x');
  for (Eigen::Index i = 0; i <= spec.n_x; ++i) {
    CHECK(st.mean[i] == a.mean->values(i, st.index));
    CHECK(st.sd[i] == a.sd->values(i, st.index));
  }
  for (Eigen::Index j = 0; j <= spec.n_t; ++j)
    CHECK(sx.mean[j] == a.mean->values(sx.index, j));
}

TEST_CASE("point snapping reports the snap distance") {
  const auto spec = build_grid(1.0, 1.0, Eigen::Index(100), Eigen::Index(100));
  const auto bc = constant_boundary(spec, 0.0);
  const SourceSpec<double> src = ZeroSource<double>{};
  EnsembleSpec<double> es;
  es.n_trials = 2;
  es.record.points = {{0.5012, 0.4996}};
  const auto stats = run_ensemble(spec, bc, src, 0.1, es, 1);
  CHECK(stats.points[0].index.i == 50);
  CHECK(stats.points[0].index.j == 50);
  CHECK(stats.points[0].x == 0.5);
  CHECK(stats.points[0].snap_distance == doctest::Approx(0.0012));
}

TEST_CASE("ci95 half-width follows 1.96 sd / sqrt(n)") {
  const auto spec = build_grid(1.0, 1.0, Eigen::Index(30), Eigen::Index(30));
  const auto bc = constant_boundary(spec, 0.0);
  const SourceSpec<double> src = ZeroSource<double>{};
  EnsembleSpec<double> es;
  es.n_trials = 50;
  es.master_seed = 7;
  es.record.mode = RecordMode::points;
  es.record.points = {{1.0, 1.0}};
  const auto stats = run_ensemble(spec, bc, src, 2.0, es, 4);
  const auto& p = stats.points[0];
  CHECK(p.count == 50);
  CHECK(p.ci95_halfwidth == 1.96 * p.sd / std::sqrt(50.0));

  // the half-widths quoted for exact sheet SDs: 1.96*3/sqrt(500) and
  // 1.96*6/sqrt(200)
  CHECK(std::abs(1.96 * 3.0 / std::sqrt(500.0) - 0.263) <= 5e-4);
  CHECK(std::abs(1.96 * 6.0 / std::sqrt(200.0) - 0.832) <= 5e-4);
}

TEST_CASE("singular bookkeeping and participation") {
  const auto spec = build_grid(10.0, 10.0, Eigen::Index(100), Eigen::Index(100));
  const auto bc = constant_boundary(spec, 0.1);
  const SourceSpec<double> src = QuadraticSource<double>{1.0};

  EnsembleSpec<double> es;
  es.n_trials = 24;
  es.master_seed = 31901;
  const auto stats = run_ensemble(spec, bc, src, 0.15, es, 4);
  CHECK(stats.n_completed + stats.n_singular == es.n_trials);
  CHECK(stats.n_singular > 0);
  CHECK(stats.n_completed > 0);
  CHECK(static_cast<long long>(stats.singular_trials.size()) == stats.n_singular);
  REQUIRE(stats.counts.has_value());
  // near the origin every trial participates; deep in the domain only the
  // completed ones are guaranteed
  CHECK((*stats.counts)(1, 1) == es.n_trials);
  CHECK((*stats.counts)(spec.n_x, spec.n_t) >= stats.n_completed);
  CHECK((*stats.counts)(spec.n_x, spec.n_t) < es.n_trials);
}

TEST_CASE("an ensemble with every trial singular is an error") {
  const auto spec = build_grid(3.0, 3.0, Eigen::Index(20), Eigen::Index(20));
  const auto bc = constant_boundary(spec, 1.0);
  const SourceSpec<double> src = ExponentialSource<double>{};
  EnsembleSpec<double> es;
  es.n_trials = 3;
  es.guard = 50.0;
  CHECK_THROWS_AS(run_ensemble(spec, bc, src, 0.0, es, 2), std::runtime_error);
}

TEST_CASE("ensemble mean stays within Monte Carlo error of the deterministic run") {
  const auto spec = build_grid(2.0, 2.0, Eigen::Index(60), Eigen::Index(60));
  const auto bc = constant_boundary(spec, 1.0);
  const SourceSpec<double> src = AffineSource<double>{-1.0, 0.0};
  EnsembleSpec<double> es;
  es.n_trials = 60;
  es.master_seed = 8080;
  const auto stats = run_ensemble(spec, bc, src, 0.1, es, 4);
  const auto det = solve(spec, bc, src, 0.0, nullptr);
  long long within = 0, total = 0;
  for (Eigen::Index j = 0; j <= spec.n_t; ++j)
    for (Eigen::Index i = 0; i <= spec.n_x; ++i) {
      ++total;
      const double se = stats.sd->values(i, j) / std::sqrt(60.0);
      if (std::abs(stats.mean->values(i, j) - det.field(i, j)) <= 4.0 * se) ++within;
    }
  CHECK(static_cast<double>(within) / static_cast<double>(total) >= 0.99);
}

TEST_CASE("sd of the zero-drift ensemble matches the analytic sheet law") {
  const auto spec = build_grid(1.0, 1.0, Eigen::Index(40), Eigen::Index(40));
  const auto bc = constant_boundary(spec, 0.0);
  const SourceSpec<double> src = ZeroSource<double>{};
  const double sigma = 1.5;
  EnsembleSpec<double> es;
  es.n_trials = 300;
  es.master_seed = 60601;
  const auto stats = run_ensemble(spec, bc, src, sigma, es, 4);
  for (const auto& [x, t] : {std::pair{0.5, 0.5}, std::pair{1.0, 1.0}, std::pair{0.25, 0.75}}) {
    const auto i = nearest_x_index(spec, x);
    const auto j = nearest_t_index(spec, t);
    const double expected = sigma * std::sqrt(x * t);
    const double tol = 3.0 * expected / std::sqrt(2.0 * (300.0 - 1.0));
    CHECK(std::abs(stats.sd->values(i, j) - expected) <= tol);
  }
}

TEST_CASE("sd growth fit") {
  const std::vector<double> sigmas{0.5, 1.0, 2.0};
  const std::vector<double> sds{3.0, 6.0, 12.0};
  CHECK(sd_growth_fit<double>(sigmas, sds) == doctest::Approx(6.0));

  const std::vector<double> two_s{0.5, 1.0}, two_d{3.0, 6.0};
  CHECK_THROWS_AS(sd_growth_fit<double>(two_s, two_d), std::invalid_argument);
  const std::vector<double> zeros{0.0, 0.0, 0.0};
  CHECK_THROWS_AS(sd_growth_fit<double>(zeros, sds), std::invalid_argument);
  const std::vector<double> mismatched{0.5, 1.0, 2.0, 3.0};
  CHECK_THROWS_AS(sd_growth_fit<double>(mismatched, sds), std::invalid_argument);
}

TEST_SUITE_END();
