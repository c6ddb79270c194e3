#pragma once

#include <cstdint>
#include <stdexcept>

#include "goursat/grid.hpp"
#include "goursat/rng.hpp"

namespace goursat {

/// Noise amplitude plus the seeding discipline for reproducible per-trial
/// streams. (master_seed, trial_index) keys a dedicated counter-based stream,
/// so trials can be generated in any order or concurrently with identical
/// results. sigma = 0 yields the deterministic path regardless of seed.
template <class Scalar = double>
struct NoiseConfig {
  Scalar sigma{0};
  std::uint64_t master_seed{0};
  std::uint64_t trial_index{0};
};

/// Standard-normal increments N, one per lattice cell: entry (k, l) drives the
/// interior update of lattice point (k+1, l+1). Shape n_x x n_t.
template <class Scalar = double>
struct IncrementField {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  GridSpec<Scalar> spec;
  Matrix values;
};

namespace detail {

/// Draw index of cell (k, l): cells are numbered along x first, matching the
/// order the marching sweep consumes them.
inline std::uint64_t cell_draw_index(Eigen::Index k, Eigen::Index l, Eigen::Index n_x) {
  return static_cast<std::uint64_t>(l) * static_cast<std::uint64_t>(n_x) +
         static_cast<std::uint64_t>(k);
}

}  // namespace detail

/// The cell increment N(k, l) for a given stream, independent of storage.
template <class Scalar>
Scalar increment_at(const GridSpec<Scalar>& spec, const NoiseConfig<Scalar>& cfg, Eigen::Index k,
                    Eigen::Index l) {
  return static_cast<Scalar>(rng::standard_normal_at(cfg.master_seed, cfg.trial_index,
                                                     detail::cell_draw_index(k, l, spec.n_x)));
}

/// Materializes the full increment matrix for one trial. Deterministic in
/// (grid dims, master_seed, trial_index).
template <class Scalar>
IncrementField<Scalar> sample_increments(const GridSpec<Scalar>& spec,
                                         const NoiseConfig<Scalar>& cfg) {
  IncrementField<Scalar> field;
  field.spec = spec;
  field.values.resize(spec.n_x, spec.n_t);
  for (Eigen::Index l = 0; l < spec.n_t; ++l)
    for (Eigen::Index k = 0; k < spec.n_x; ++k) field.values(k, l) = increment_at(spec, cfg, k, l);
  return field;
}

template <class Scalar>
void require_matching_increments(const GridSpec<Scalar>& spec, const IncrementField<Scalar>& inc) {
  if (inc.values.rows() != spec.n_x || inc.values.cols() != spec.n_t)
    throw std::invalid_argument("increment field shape does not match the grid");
}

// brownian_sheet lives in solver.hpp: it is, by definition, the marching
// scheme with zero drift and zero boundaries, and shares its code path so the
// two agree bit for bit.

}  // namespace goursat
