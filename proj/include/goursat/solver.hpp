#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <type_traits>
#include <variant>
#include <vector>

#include "goursat/grid.hpp"
#include "goursat/noise.hpp"
#include "goursat/source.hpp"
#include "goursat/stats.hpp"

namespace goursat {

// Explicit marching scheme for Y_xt = F(Y) + sigma * W_xt with data f on the
// x axis and g on the t axis:
//
//   Y[i,j] = Y[i-1,j] + Y[i,j-1] - Y[i-1,j-1]
//          + dx*dt * F(Y[i-1,j-1]) + sigma*sqrt(dx*dt) * N[i-1,j-1]
//
// Each value depends only on its west/south/southwest neighbors, so a single
// row-major sweep (t outer, x inner) fills the lattice. The first value whose
// magnitude exceeds the guard (or goes non-finite) marks the trial singular;
// everything on and beyond that anti-diagonal i + j is stored as NaN and
// excluded from statistics, because the anti-diagonals are the causal fronts
// of the recurrence.

inline constexpr double default_guard = 1e6;

enum class SolveStatus { completed, singular };

template <class Scalar = double>
struct SolveResult {
  ScalarField<Scalar> field;
  SolveStatus status{SolveStatus::completed};
  std::optional<LatticeIndex> singular_site;
  Scalar guard{};
};

namespace detail {

/// Advances one t-row. cur[0] must be preset to the boundary value; prev is
/// the previous row. noise_cells (nullable) holds the increments of the cells
/// under this row. The arithmetic here is the single canonical update used by
/// every solve path, so full, streamed and materialized-noise runs agree
/// bit for bit.
template <class Scalar, class Drift>
inline void advance_row(const Scalar* prev, Scalar* cur, Eigen::Index n_x, Scalar dxdt,
                        const Drift& drift, Scalar snoise, const Scalar* noise_cells) {
  if (noise_cells) {
    for (Eigen::Index i = 1; i <= n_x; ++i) {
      const Scalar sw = prev[i - 1];
      Scalar v = (cur[i - 1] + prev[i]) - sw + dxdt * drift(sw);
      v += snoise * noise_cells[i - 1];
      cur[i] = v;
    }
  } else {
    for (Eigen::Index i = 1; i <= n_x; ++i) {
      const Scalar sw = prev[i - 1];
      cur[i] = (cur[i - 1] + prev[i]) - sw + dxdt * drift(sw);
    }
  }
}

/// Tracks the guard violation with the smallest anti-diagonal i + j (ties
/// resolved to the earlier row, i.e. sweep order).
template <class Scalar>
struct GuardTracker {
  Scalar guard;
  Eigen::Index best_s{-1};
  LatticeIndex site{};

  void scan_row(const Scalar* cur, Eigen::Index n_x, Eigen::Index j) {
    using std::abs;
    for (Eigen::Index i = 1; i <= n_x; ++i) {
      if (!(abs(cur[i]) <= guard)) {  // non-finite values fail the comparison too
        if (best_s < 0 || i + j < best_s) {
          best_s = i + j;
          site = {i, j};
        }
        return;  // later entries of this row cannot have a smaller i + j
      }
    }
  }

  bool tripped() const { return best_s >= 0; }
};

// Row-noise policies. row_ptr returns the increments of the cells below row j
// (cell index l = j - 1), either as a view into a materialized field or
// regenerated on the fly from the counter-based stream.

struct NoNoise {
  static constexpr bool active = false;
  template <class Scalar>
  const Scalar* row_ptr(Eigen::Index, std::vector<Scalar>&) const {
    return nullptr;
  }
};

template <class Scalar>
struct MaterializedNoise {
  static constexpr bool active = true;
  const IncrementField<Scalar>* inc;

  const Scalar* row_ptr(Eigen::Index l, std::vector<Scalar>&) const {
    return inc->values.data() + l * inc->values.rows();
  }
};

template <class Scalar>
struct StreamedNoise {
  static constexpr bool active = true;
  GridSpec<Scalar> spec;
  NoiseConfig<Scalar> cfg;

  const Scalar* row_ptr(Eigen::Index l, std::vector<Scalar>& scratch) const {
    for (Eigen::Index k = 0; k < spec.n_x; ++k) scratch[k] = increment_at(spec, cfg, k, l);
    return scratch.data();
  }
};

template <class Scalar>
void validate_solve_inputs(const GridSpec<Scalar>& spec, const BoundaryData<Scalar>& bc,
                           Scalar sigma, Scalar guard) {
  if (bc.f.size() != spec.points_x() || bc.g.size() != spec.points_t())
    throw std::invalid_argument("solve: boundary data does not match the grid");
  if (!(sigma >= Scalar(0))) throw std::invalid_argument("solve: sigma must be nonnegative");
  if (!(guard > Scalar(0))) throw std::invalid_argument("solve: guard must be positive");
}

template <class Scalar, class NoisePolicy>
SolveResult<Scalar> solve_impl(const GridSpec<Scalar>& spec, const BoundaryData<Scalar>& bc,
                               const SourceSpec<Scalar>& src, Scalar sigma,
                               const NoisePolicy& noise, Scalar guard) {
  validate_solve_inputs(spec, bc, sigma, guard);

  SolveResult<Scalar> out;
  out.guard = guard;
  out.field.spec = spec;
  auto& Y = out.field.values;
  Y.resize(spec.points_x(), spec.points_t());
  Y.col(0) = bc.f;
  Y.row(0) = bc.g.transpose();
  Y(0, 0) = bc.f[0];

  const Scalar dxdt = spec.dx * spec.dt;
  const Scalar snoise = sigma * static_cast<Scalar>(std::sqrt(static_cast<double>(dxdt)));
  GuardTracker<Scalar> tracker{guard};
  std::vector<Scalar> scratch(NoisePolicy::active ? static_cast<std::size_t>(spec.n_x) : 0);

  std::visit(
      [&](const auto& s) {
        const auto drift = [&s](Scalar y) { return eval_drift(s, y); };
        for (Eigen::Index j = 1; j <= spec.n_t; ++j) {
          const Scalar* prev = Y.data() + (j - 1) * spec.points_x();
          Scalar* cur = Y.data() + j * spec.points_x();
          const Scalar* cells = noise.row_ptr(j - 1, scratch);
          advance_row(prev, cur, spec.n_x, dxdt, drift, snoise, cells);
          tracker.scan_row(cur, spec.n_x, j);
        }
      },
      src);

  if (tracker.tripped()) {
    out.status = SolveStatus::singular;
    out.singular_site = tracker.site;
    const Scalar nan = std::numeric_limits<Scalar>::quiet_NaN();
    for (Eigen::Index j = 0; j <= spec.n_t; ++j) {
      const Eigen::Index istart = std::max<Eigen::Index>(0, tracker.best_s - j);
      if (istart <= spec.n_x) Y.col(j).tail(spec.n_x + 1 - istart).setConstant(nan);
    }
  }
  return out;
}

}  // namespace detail

/// Marches the scheme with a materialized increment field (required when
/// sigma > 0, ignored when sigma = 0).
template <class Scalar>
SolveResult<Scalar> solve(const GridSpec<Scalar>& spec, const BoundaryData<Scalar>& bc,
                          const SourceSpec<Scalar>& src, Scalar sigma,
                          std::type_identity_t<const IncrementField<Scalar>*> increments,
                          Scalar guard = Scalar(default_guard)) {
  if (sigma > Scalar(0)) {
    if (increments == nullptr)
      throw std::invalid_argument("solve: sigma > 0 requires an increment field");
    require_matching_increments(spec, *increments);
    return detail::solve_impl(spec, bc, src, sigma, detail::MaterializedNoise<Scalar>{increments},
                              guard);
  }
  return detail::solve_impl(spec, bc, src, sigma, detail::NoNoise{}, guard);
}

/// Marches the scheme with noise regenerated on the fly from the stream of
/// cfg. Bit-identical to the materialized overload fed sample_increments(cfg).
template <class Scalar>
SolveResult<Scalar> solve(const GridSpec<Scalar>& spec, const BoundaryData<Scalar>& bc,
                          const SourceSpec<Scalar>& src, const NoiseConfig<Scalar>& cfg,
                          Scalar guard = Scalar(default_guard)) {
  if (cfg.sigma > Scalar(0))
    return detail::solve_impl(spec, bc, src, cfg.sigma,
                              detail::StreamedNoise<Scalar>{spec, cfg}, guard);
  return detail::solve_impl(spec, bc, src, cfg.sigma, detail::NoNoise{}, guard);
}

/// Sample path of the two-parameter Wiener process (Brownian sheet), scaled by
/// cfg.sigma: W = 0 on both axes and W(x_i, t_j) = sigma * sqrt(dx*dt) *
/// sum of the increments in [0,x_i) x [0,t_j). Runs the marching scheme with
/// zero drift and zero boundaries, so the two agree bit for bit.
template <class Scalar>
ScalarField<Scalar> brownian_sheet(const GridSpec<Scalar>& spec, const NoiseConfig<Scalar>& cfg) {
  const auto bc = constant_boundary(spec, Scalar(0));
  const SourceSpec<Scalar> zero = ZeroSource<Scalar>{};
  auto result = solve(spec, bc, zero, cfg, std::numeric_limits<Scalar>::infinity());
  return std::move(result.field);
}

// ---------------------------------------------------------------------------
// Streamed solve: two-row storage for grids too large to keep per trial,
// recording only requested slices and points.

template <class Scalar = double>
struct RecordRequest {
  std::vector<Eigen::Index> t_slices;  ///< record the full x-line Y(:, j) at these j
  std::vector<Eigen::Index> x_slices;  ///< record the full t-line Y(i, :) at these i
  std::vector<LatticeIndex> points;
};

template <class Scalar = double>
struct StreamedSolveResult {
  SolveStatus status{SolveStatus::completed};
  std::optional<LatticeIndex> singular_site;
  Scalar guard{};
  Scalar min_value{std::numeric_limits<Scalar>::quiet_NaN()};
  Scalar max_value{std::numeric_limits<Scalar>::quiet_NaN()};
  std::vector<Eigen::VectorX<Scalar>> t_slices;  ///< aligned with the request
  std::vector<Eigen::VectorX<Scalar>> x_slices;
  std::vector<Scalar> point_values;
};

namespace detail {

template <class Scalar>
void validate_record_request(const GridSpec<Scalar>& spec, const RecordRequest<Scalar>& req) {
  for (auto j : req.t_slices)
    if (j < 0 || j > spec.n_t) throw std::invalid_argument("record request: t index out of range");
  for (auto i : req.x_slices)
    if (i < 0 || i > spec.n_x) throw std::invalid_argument("record request: x index out of range");
  for (auto p : req.points)
    if (p.i < 0 || p.i > spec.n_x || p.j < 0 || p.j > spec.n_t)
      throw std::invalid_argument("record request: point out of range");
}

template <class Scalar, class NoisePolicy>
StreamedSolveResult<Scalar> solve_streamed_impl(const GridSpec<Scalar>& spec,
                                                const BoundaryData<Scalar>& bc,
                                                const SourceSpec<Scalar>& src, Scalar sigma,
                                                const NoisePolicy& noise, Scalar guard,
                                                const RecordRequest<Scalar>& req) {
  validate_solve_inputs(spec, bc, sigma, guard);
  validate_record_request(spec, req);

  const Scalar dxdt = spec.dx * spec.dt;
  const Scalar snoise = sigma * static_cast<Scalar>(std::sqrt(static_cast<double>(dxdt)));
  const Scalar nan = std::numeric_limits<Scalar>::quiet_NaN();
  std::vector<Scalar> scratch(NoisePolicy::active ? static_cast<std::size_t>(spec.n_x) : 0);

  // One sweep. With a sentinel anti-diagonal set, entries at i + j >= mask are
  // written as NaN and the guard is not consulted (the masked rerun below).
  const auto run_pass = [&](Eigen::Index mask, GuardTracker<Scalar>* tracker) {
    StreamedSolveResult<Scalar> res;
    res.guard = guard;
    res.t_slices.assign(req.t_slices.size(), Eigen::VectorX<Scalar>());
    res.x_slices.assign(req.x_slices.size(), Eigen::VectorX<Scalar>());
    res.point_values.assign(req.points.size(), nan);
    for (auto& v : res.x_slices) v.setConstant(spec.points_t(), nan);

    Eigen::VectorX<Scalar> prev = bc.f;
    Eigen::VectorX<Scalar> cur(spec.points_x());

    bool seen = false;
    const auto track_extrema = [&](const Scalar v) {
      if (std::isnan(v)) return;
      if (!seen) {
        res.min_value = res.max_value = v;
        seen = true;
      } else {
        res.min_value = std::min(res.min_value, v);
        res.max_value = std::max(res.max_value, v);
      }
    };

    const auto mask_row = [&](Eigen::VectorX<Scalar>& row, Eigen::Index j) {
      if (mask < 0) return;
      const Eigen::Index istart = std::max<Eigen::Index>(0, mask - j);
      if (istart <= spec.n_x) row.tail(spec.n_x + 1 - istart).setConstant(nan);
    };

    const auto record_row = [&](const Eigen::VectorX<Scalar>& row, Eigen::Index j) {
      for (std::size_t s = 0; s < req.t_slices.size(); ++s)
        if (req.t_slices[s] == j) res.t_slices[s] = row;
      for (std::size_t s = 0; s < req.x_slices.size(); ++s) res.x_slices[s][j] = row[req.x_slices[s]];
      for (std::size_t p = 0; p < req.points.size(); ++p)
        if (req.points[p].j == j) res.point_values[p] = row[req.points[p].i];
      for (Eigen::Index i = 0; i <= spec.n_x; ++i) track_extrema(row[i]);
    };

    mask_row(prev, 0);
    record_row(prev, 0);

    std::visit(
        [&](const auto& s) {
          const auto drift = [&s](Scalar y) { return eval_drift(s, y); };
          for (Eigen::Index j = 1; j <= spec.n_t; ++j) {
            cur[0] = bc.g[j];
            const Scalar* cells = noise.row_ptr(j - 1, scratch);
            advance_row(prev.data(), cur.data(), spec.n_x, dxdt, drift, snoise, cells);
            if (tracker) tracker->scan_row(cur.data(), spec.n_x, j);
            mask_row(cur, j);
            record_row(cur, j);
            prev.swap(cur);
          }
        },
        src);
    return res;
  };

  GuardTracker<Scalar> tracker{guard};
  auto res = run_pass(-1, &tracker);
  if (!tracker.tripped()) return res;

  // Singular: rerun with the sentinel mask so records and extrema only see
  // values ahead of the singular front. The counter-based noise regenerates
  // identically.
  auto masked = run_pass(tracker.best_s, nullptr);
  masked.status = SolveStatus::singular;
  masked.singular_site = tracker.site;
  return masked;
}

}  // namespace detail

template <class Scalar>
StreamedSolveResult<Scalar> solve_streamed(const GridSpec<Scalar>& spec,
                                           const BoundaryData<Scalar>& bc,
                                           const SourceSpec<Scalar>& src,
                                           const NoiseConfig<Scalar>& cfg,
                                           const RecordRequest<Scalar>& req,
                                           Scalar guard = Scalar(default_guard)) {
  if (cfg.sigma > Scalar(0))
    return detail::solve_streamed_impl(spec, bc, src, cfg.sigma,
                                       detail::StreamedNoise<Scalar>{spec, cfg}, guard, req);
  return detail::solve_streamed_impl(spec, bc, src, cfg.sigma, detail::NoNoise{}, guard, req);
}

// ---------------------------------------------------------------------------

/// Report of the ensemble-mean vs deterministic-solution comparison. For
/// affine drift and additive noise the expectation of the scheme satisfies the
/// deterministic recurrence exactly, so the discrepancy is pure Monte Carlo
/// error.
template <class Scalar = double>
struct MeanCheckReport {
  Scalar max_abs_diff{};
  LatticeIndex argmax{};
  Scalar se_at_argmax{};
  Scalar fraction_within_3se{};
  Scalar fraction_within_4se{};
  long long n_points{};
  long long n_trials{};
  long long n_singular{};
};

/// Compares the ensemble mean of n_trials stochastic runs against the
/// deterministic solution on the same grid. Exact (up to Monte Carlo error)
/// only for affine drift; other sources are rejected.
template <class Scalar>
MeanCheckReport<Scalar> mean_matches_deterministic_check(
    const GridSpec<Scalar>& spec, const BoundaryData<Scalar>& bc, const SourceSpec<Scalar>& src,
    Scalar sigma, long long n_trials, std::uint64_t master_seed,
    Scalar guard = Scalar(default_guard)) {
  if (!std::holds_alternative<AffineSource<Scalar>>(src) &&
      !std::holds_alternative<ZeroSource<Scalar>>(src))
    throw std::invalid_argument(
        "mean_matches_deterministic_check: the mean equals the deterministic solution only for "
        "affine drift");
  if (n_trials < 1) throw std::invalid_argument("mean_matches_deterministic_check: need trials");

  const auto det = solve(spec, bc, src, Scalar(0), nullptr, guard);

  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Matrix mean = Matrix::Zero(spec.points_x(), spec.points_t());
  Matrix m2 = Matrix::Zero(spec.points_x(), spec.points_t());
  Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic> cnt =
      Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>::Zero(spec.points_x(),
                                                                     spec.points_t());

  MeanCheckReport<Scalar> rep;
  rep.n_trials = n_trials;
  for (long long trial = 0; trial < n_trials; ++trial) {
    const NoiseConfig<Scalar> cfg{sigma, master_seed, static_cast<std::uint64_t>(trial)};
    const auto run = solve(spec, bc, src, cfg, guard);
    if (run.status == SolveStatus::singular) ++rep.n_singular;
    for (Eigen::Index j = 0; j <= spec.n_t; ++j)
      for (Eigen::Index i = 0; i <= spec.n_x; ++i) {
        const Scalar v = run.field(i, j);
        if (std::isnan(v)) continue;
        auto& n = cnt(i, j);
        ++n;
        const Scalar delta = v - mean(i, j);
        mean(i, j) += delta / static_cast<Scalar>(n);
        m2(i, j) += delta * (v - mean(i, j));
      }
  }

  long long within3 = 0, within4 = 0, n_points = 0;
  for (Eigen::Index j = 0; j <= spec.n_t; ++j)
    for (Eigen::Index i = 0; i <= spec.n_x; ++i) {
      if (cnt(i, j) < 1) continue;
      ++n_points;
      using std::abs;
      using std::sqrt;
      const Scalar diff = abs(mean(i, j) - det.field(i, j));
      const auto n = cnt(i, j);
      const Scalar sd = n > 1 ? sqrt(m2(i, j) / static_cast<Scalar>(n - 1)) : Scalar(0);
      const Scalar se = sd / sqrt(static_cast<Scalar>(n));
      if (diff <= Scalar(3) * se) ++within3;
      if (diff <= Scalar(4) * se) ++within4;
      if (diff > rep.max_abs_diff) {
        rep.max_abs_diff = diff;
        rep.argmax = {i, j};
        rep.se_at_argmax = se;
      }
    }
  rep.n_points = n_points;
  rep.fraction_within_3se =
      n_points > 0 ? static_cast<Scalar>(within3) / static_cast<Scalar>(n_points) : Scalar(1);
  rep.fraction_within_4se =
      n_points > 0 ? static_cast<Scalar>(within4) / static_cast<Scalar>(n_points) : Scalar(1);
  return rep;
}

}  // namespace goursat
