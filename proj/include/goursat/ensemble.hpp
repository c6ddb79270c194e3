#pragma once

#include <array>
#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

#include "goursat/grid.hpp"
#include "goursat/solver.hpp"
#include "goursat/stats.hpp"

namespace goursat {

// Monte Carlo ensembles: N independent trials of the stochastic solve, with
// pointwise mean/SD accumulation, 95% confidence half-widths and
// singular-path bookkeeping. Trial k always uses noise stream
// (master_seed, k), and trials are folded into the accumulators in trial
// order regardless of how many threads computed them, so the statistics are
// bit-identical at every concurrency level.

enum class RecordMode { full_fields, slices, points };

template <class Scalar = double>
struct RecordSpec {
  RecordMode mode{RecordMode::full_fields};
  std::vector<Scalar> x_slices;  ///< fixed-x lines over t (slices mode)
  std::vector<Scalar> t_slices;  ///< fixed-t lines over x (slices mode)
  std::vector<std::array<Scalar, 2>> points;  ///< (x, t) pairs, honored in every mode
};

template <class Scalar = double>
struct EnsembleSpec {
  long long n_trials{1};
  std::uint64_t master_seed{0};
  RecordSpec<Scalar> record{};
  Scalar guard{Scalar(default_guard)};
};

template <class Scalar = double>
struct PointStats {
  Scalar x_requested{}, t_requested{};
  LatticeIndex index{};
  Scalar x{}, t{};  ///< snapped lattice coordinates
  Scalar snap_distance{};
  long long count{0};
  Scalar mean{std::numeric_limits<Scalar>::quiet_NaN()};
  Scalar sd{0};
  Scalar ci95_halfwidth{0};
};

template <class Scalar = double>
struct SliceStats {
  char axis{'t'};  ///< 't': fixed t, values over x; 'x': fixed x, values over t
  Scalar requested{};
  Eigen::Index index{};
  Scalar coordinate{};  ///< snapped
  Scalar snap_distance{};
  Eigen::VectorX<Scalar> mean;
  Eigen::VectorX<Scalar> sd;
  Eigen::Matrix<long long, Eigen::Dynamic, 1> counts;
};

template <class Scalar = double>
struct EnsembleStats {
  long long n_trials{0};
  long long n_completed{0};
  long long n_singular{0};
  std::vector<long long> singular_trials;

  // full_fields mode
  std::optional<ScalarField<Scalar>> mean;
  std::optional<ScalarField<Scalar>> sd;
  std::optional<Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>> counts;

  std::vector<SliceStats<Scalar>> slices;
  std::vector<PointStats<Scalar>> points;

  /// Extrema of the mean over the recorded participating points.
  Scalar mean_min{std::numeric_limits<Scalar>::quiet_NaN()};
  Scalar mean_max{std::numeric_limits<Scalar>::quiet_NaN()};
};

namespace detail {

/// Per-point streaming moments with per-point participation counts.
template <class Scalar>
struct WelfordArray {
  Eigen::VectorX<Scalar> mean;
  Eigen::VectorX<Scalar> m2;
  Eigen::Matrix<long long, Eigen::Dynamic, 1> count;

  void init(Eigen::Index n) {
    mean.setZero(n);
    m2.setZero(n);
    count.setZero(n);
  }

  void add(Eigen::Index k, Scalar v) {
    if (std::isnan(v)) return;  // non-participating sentinel
    auto& n = count[k];
    ++n;
    const Scalar delta = v - mean[k];
    mean[k] += delta / static_cast<Scalar>(n);
    m2[k] += delta * (v - mean[k]);
  }

  Scalar sd_at(Eigen::Index k) const {
    return count[k] > 1 ? std::sqrt(m2[k] / static_cast<Scalar>(count[k] - 1)) : Scalar(0);
  }
};

/// Runs fn(trial) for trial = 0..n-1 on the given number of threads and calls
/// merge(trial, result) strictly in trial order.
template <class Result, class Fn, class Merge>
void ordered_trial_loop(long long n_trials, int n_threads, Fn&& fn, Merge&& merge) {
  if (n_threads <= 1) {
    for (long long t = 0; t < n_trials; ++t) merge(t, fn(t));
    return;
  }

  std::atomic<long long> claim{0};
  std::mutex m;
  std::condition_variable cv;
  long long next_merge = 0;
  std::exception_ptr error;

  const auto worker = [&] {
    for (;;) {
      const long long t = claim.fetch_add(1);
      if (t >= n_trials) return;
      Result r;
      try {
        r = fn(t);
      } catch (...) {
        std::lock_guard lk(m);
        if (!error) error = std::current_exception();
        next_merge = n_trials;  // release everyone
        cv.notify_all();
        return;
      }
      std::unique_lock lk(m);
      cv.wait(lk, [&] { return next_merge == t || next_merge >= n_trials; });
      if (next_merge >= n_trials) return;  // aborted
      merge(t, std::move(r));
      ++next_merge;
      cv.notify_all();
    }
  };

  std::vector<std::thread> pool;
  const int count = std::min<long long>(n_threads, n_trials);
  pool.reserve(count);
  for (int k = 0; k < count; ++k) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace detail

/// Snaps a physical coordinate to the lattice; returns (index, coordinate,
/// absolute snap distance).
template <class Scalar>
std::tuple<Eigen::Index, Scalar, Scalar> snap_x(const GridSpec<Scalar>& spec, Scalar x) {
  const Eigen::Index i = nearest_x_index(spec, x);
  using std::abs;
  return {i, spec.x(i), abs(spec.x(i) - x)};
}

template <class Scalar>
std::tuple<Eigen::Index, Scalar, Scalar> snap_t(const GridSpec<Scalar>& spec, Scalar t) {
  const Eigen::Index j = nearest_t_index(spec, t);
  using std::abs;
  return {j, spec.t(j), abs(spec.t(j) - t)};
}

/// Runs es.n_trials independent trials and accumulates the requested
/// statistics. Reproducible in (inputs, master_seed); n_threads = 0 picks the
/// hardware concurrency. Throws if every trial is singular.
template <class Scalar>
EnsembleStats<Scalar> run_ensemble(const GridSpec<Scalar>& spec, const BoundaryData<Scalar>& bc,
                                   const SourceSpec<Scalar>& src, Scalar sigma,
                                   const EnsembleSpec<Scalar>& es, int n_threads = 0) {
  if (es.n_trials < 1) throw std::invalid_argument("run_ensemble: need at least one trial");
  detail::validate_solve_inputs(spec, bc, sigma, es.guard);
  if (n_threads <= 0) {
    const auto hw = std::thread::hardware_concurrency();
    n_threads = hw > 0 ? static_cast<int>(hw) : 1;
  }

  EnsembleStats<Scalar> stats;
  stats.n_trials = es.n_trials;

  // Snap the recorded coordinates.
  RecordRequest<Scalar> req;
  for (const auto& p : es.record.points) {
    PointStats<Scalar> ps;
    ps.x_requested = p[0];
    ps.t_requested = p[1];
    const auto [i, xs, dxs] = snap_x(spec, p[0]);
    const auto [j, ts, dts] = snap_t(spec, p[1]);
    ps.index = {i, j};
    ps.x = xs;
    ps.t = ts;
    ps.snap_distance = std::max(dxs, dts);
    stats.points.push_back(ps);
    req.points.push_back(ps.index);
  }
  const bool full = es.record.mode == RecordMode::full_fields;
  if (es.record.mode == RecordMode::slices) {
    for (Scalar t : es.record.t_slices) {
      SliceStats<Scalar> ss;
      ss.axis = 't';
      ss.requested = t;
      const auto [j, ts, d] = snap_t(spec, t);
      ss.index = j;
      ss.coordinate = ts;
      ss.snap_distance = d;
      stats.slices.push_back(ss);
      req.t_slices.push_back(j);
    }
    for (Scalar x : es.record.x_slices) {
      SliceStats<Scalar> ss;
      ss.axis = 'x';
      ss.requested = x;
      const auto [i, xs, d] = snap_x(spec, x);
      ss.index = i;
      ss.coordinate = xs;
      ss.snap_distance = d;
      stats.slices.push_back(ss);
      req.x_slices.push_back(i);
    }
  }

  // Accumulators.
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Matrix mean_acc, m2_acc;
  Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic> cnt_acc;
  if (full) {
    mean_acc = Matrix::Zero(spec.points_x(), spec.points_t());
    m2_acc = Matrix::Zero(spec.points_x(), spec.points_t());
    cnt_acc.setZero(spec.points_x(), spec.points_t());
  }
  std::vector<detail::WelfordArray<Scalar>> slice_acc(stats.slices.size());
  for (std::size_t s = 0; s < stats.slices.size(); ++s)
    slice_acc[s].init(stats.slices[s].axis == 't' ? spec.points_x() : spec.points_t());
  std::vector<Welford<Scalar>> point_acc(stats.points.size());

  const auto note_status = [&](long long trial, SolveStatus status) {
    if (status == SolveStatus::singular) {
      ++stats.n_singular;
      stats.singular_trials.push_back(trial);
    } else {
      ++stats.n_completed;
    }
  };

  if (full) {
    const auto compute = [&](long long trial) {
      const NoiseConfig<Scalar> cfg{sigma, es.master_seed, static_cast<std::uint64_t>(trial)};
      return solve(spec, bc, src, cfg, es.guard);
    };
    const auto merge = [&](long long trial, SolveResult<Scalar>&& r) {
      note_status(trial, r.status);
      for (Eigen::Index j = 0; j <= spec.n_t; ++j)
        for (Eigen::Index i = 0; i <= spec.n_x; ++i) {
          const Scalar v = r.field(i, j);
          if (std::isnan(v)) continue;
          auto& n = cnt_acc(i, j);
          ++n;
          const Scalar delta = v - mean_acc(i, j);
          mean_acc(i, j) += delta / static_cast<Scalar>(n);
          m2_acc(i, j) += delta * (v - mean_acc(i, j));
        }
      for (std::size_t p = 0; p < stats.points.size(); ++p) {
        const Scalar v = r.field(stats.points[p].index.i, stats.points[p].index.j);
        if (!std::isnan(v)) point_acc[p].add(v);
      }
    };
    detail::ordered_trial_loop<SolveResult<Scalar>>(es.n_trials, n_threads, compute, merge);
  } else {
    const auto compute = [&](long long trial) {
      const NoiseConfig<Scalar> cfg{sigma, es.master_seed, static_cast<std::uint64_t>(trial)};
      return solve_streamed(spec, bc, src, cfg, req, es.guard);
    };
    const auto merge = [&](long long trial, StreamedSolveResult<Scalar>&& r) {
      note_status(trial, r.status);
      std::size_t st = 0, sx = 0;
      for (std::size_t s = 0; s < stats.slices.size(); ++s) {
        const auto& line =
            stats.slices[s].axis == 't' ? r.t_slices[st++] : r.x_slices[sx++];
        for (Eigen::Index k = 0; k < line.size(); ++k) slice_acc[s].add(k, line[k]);
      }
      for (std::size_t p = 0; p < stats.points.size(); ++p) {
        const Scalar v = r.point_values[p];
        if (!std::isnan(v)) point_acc[p].add(v);
      }
    };
    detail::ordered_trial_loop<StreamedSolveResult<Scalar>>(es.n_trials, n_threads, compute,
                                                            merge);
  }

  if (stats.n_completed == 0)
    throw std::runtime_error("run_ensemble: empty ensemble, every trial was singular");

  // Finalize.
  const Scalar nan = std::numeric_limits<Scalar>::quiet_NaN();
  bool seen = false;
  const auto track = [&](Scalar v) {
    if (std::isnan(v)) return;
    if (!seen) {
      stats.mean_min = stats.mean_max = v;
      seen = true;
    } else {
      stats.mean_min = std::min(stats.mean_min, v);
      stats.mean_max = std::max(stats.mean_max, v);
    }
  };

  if (full) {
    stats.mean = make_field(spec);
    stats.sd = make_field(spec);
    for (Eigen::Index j = 0; j <= spec.n_t; ++j)
      for (Eigen::Index i = 0; i <= spec.n_x; ++i) {
        const auto n = cnt_acc(i, j);
        (*stats.mean)(i, j) = n > 0 ? mean_acc(i, j) : nan;
        (*stats.sd)(i, j) = n > 1 ? std::sqrt(m2_acc(i, j) / static_cast<Scalar>(n - 1))
                                  : (n == 1 ? Scalar(0) : nan);
        track((*stats.mean)(i, j));
      }
    stats.counts = std::move(cnt_acc);
  }
  for (std::size_t s = 0; s < stats.slices.size(); ++s) {
    auto& out = stats.slices[s];
    const auto& acc = slice_acc[s];
    const Eigen::Index n = acc.mean.size();
    out.mean.setConstant(n, nan);
    out.sd.setConstant(n, nan);
    out.counts = acc.count;
    for (Eigen::Index k = 0; k < n; ++k) {
      if (acc.count[k] > 0) out.mean[k] = acc.mean[k];
      out.sd[k] = acc.count[k] > 1 ? acc.sd_at(k) : (acc.count[k] == 1 ? Scalar(0) : nan);
      track(out.mean[k]);
    }
  }
  for (std::size_t p = 0; p < stats.points.size(); ++p) {
    auto& out = stats.points[p];
    const auto& acc = point_acc[p];
    out.count = acc.n;
    if (acc.n > 0) out.mean = acc.mean;
    out.sd = acc.sd();
    out.ci95_halfwidth =
        Scalar(1.96) * out.sd / std::sqrt(static_cast<Scalar>(stats.n_completed));
    track(out.mean);
  }
  return stats;
}

/// Least-squares slope through the origin of SD against sigma. Needs at least
/// three sigma values and a non-degenerate sigma list.
template <class Scalar>
Scalar sd_growth_fit(std::span<const Scalar> sigmas, std::span<const Scalar> sds) {
  if (sigmas.size() != sds.size())
    throw std::invalid_argument("sd_growth_fit: sigma and SD lists differ in length");
  if (sigmas.size() < 3)
    throw std::invalid_argument("sd_growth_fit: need at least three sigma values");
  Scalar num = 0, den = 0;
  for (std::size_t k = 0; k < sigmas.size(); ++k) {
    num += sigmas[k] * sds[k];
    den += sigmas[k] * sigmas[k];
  }
  if (!(den > Scalar(0))) throw std::invalid_argument("sd_growth_fit: degenerate sigma list");
  return num / den;
}

}  // namespace goursat
