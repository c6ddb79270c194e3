#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>

#include "goursat/grid.hpp"

namespace goursat {

// Post-processing of solved fields: error maps against reference solutions,
// slice peak counting, threshold plan views and pointwise covariance.

template <class Scalar = double>
struct ErrorReport {
  Scalar max_abs_rel_error{0};
  LatticeIndex argmax{};
  Scalar x{0}, t{0};
  std::optional<ScalarField<Scalar>> error_field;
};

/// Pointwise relative error |numeric - exact| / max(|exact|, floor). The exact
/// field is always the denominator; the floor guards near-zero exact values.
template <class Scalar>
ErrorReport<Scalar> relative_error(const ScalarField<Scalar>& numeric,
                                   const ScalarField<Scalar>& exact, bool keep_field = false,
                                   Scalar floor = Scalar(1e-12)) {
  if (!same_lattice(numeric.spec, exact.spec))
    throw std::invalid_argument("relative_error: fields live on different grids");
  ErrorReport<Scalar> rep;
  if (keep_field) rep.error_field = make_field(numeric.spec);
  using std::abs;
  for (Eigen::Index j = 0; j <= numeric.spec.n_t; ++j)
    for (Eigen::Index i = 0; i <= numeric.spec.n_x; ++i) {
      const Scalar denom = std::max(abs(exact(i, j)), floor);
      const Scalar e = abs(numeric(i, j) - exact(i, j)) / denom;
      if (keep_field) (*rep.error_field)(i, j) = e;
      if (e > rep.max_abs_rel_error) {
        rep.max_abs_rel_error = e;
        rep.argmax = {i, j};
      }
    }
  rep.x = numeric.spec.x(rep.argmax.i);
  rep.t = numeric.spec.t(rep.argmax.j);
  return rep;
}

/// Topographic prominence of the strict local maximum at position p: height
/// above the higher of the two flanking minima, where each flank extends to
/// the nearest strictly higher value (or the end of the sequence).
template <class Scalar>
Scalar peak_prominence(std::span<const Scalar> s, std::size_t p) {
  Scalar left_min = s[p];
  for (std::size_t i = p; i-- > 0;) {
    if (s[i] > s[p]) break;
    left_min = std::min(left_min, s[i]);
  }
  Scalar right_min = s[p];
  for (std::size_t i = p + 1; i < s.size(); ++i) {
    if (s[i] > s[p]) break;
    right_min = std::min(right_min, s[i]);
  }
  return s[p] - std::max(left_min, right_min);
}

/// Counts strict local maxima with prominence >= min_prominence.
template <class Scalar>
int count_peaks(std::span<const Scalar> slice, Scalar min_prominence) {
  if (slice.size() < 3) return 0;
  int count = 0;
  for (std::size_t k = 1; k + 1 < slice.size(); ++k) {
    if (!(slice[k] > slice[k - 1] && slice[k] > slice[k + 1])) continue;
    if (peak_prominence(slice, k) >= min_prominence) ++count;
  }
  return count;
}

/// 10% of the slice range: the default prominence threshold. Invariant under
/// shifting and positive scaling of the data.
template <class Scalar>
Scalar default_prominence(std::span<const Scalar> slice) {
  const auto [lo, hi] = std::minmax_element(slice.begin(), slice.end());
  return Scalar(0.10) * (*hi - *lo);
}

/// Indicator of {field >= a}: 1 where the field reaches the level, else 0.
template <class Scalar>
ScalarField<Scalar> threshold_indicator(const ScalarField<Scalar>& field, Scalar a) {
  auto mask = make_field(field.spec);
  mask.values = (field.values.array() >= a).template cast<Scalar>().matrix();
  return mask;
}

/// Sample covariance (n - 1 denominator) of per-trial values at two points.
template <class Scalar>
Scalar sheet_covariance(std::span<const Scalar> trials_p, std::span<const Scalar> trials_q) {
  if (trials_p.size() != trials_q.size())
    throw std::invalid_argument("sheet_covariance: trial lists differ in length");
  const auto n = trials_p.size();
  if (n < 2) throw std::invalid_argument("sheet_covariance: need at least two trials");
  Scalar mp = 0, mq = 0;
  for (std::size_t k = 0; k < n; ++k) {
    mp += trials_p[k];
    mq += trials_q[k];
  }
  mp /= static_cast<Scalar>(n);
  mq /= static_cast<Scalar>(n);
  Scalar acc = 0;
  for (std::size_t k = 0; k < n; ++k) acc += (trials_p[k] - mp) * (trials_q[k] - mq);
  return acc / static_cast<Scalar>(n - 1);
}

}  // namespace goursat
