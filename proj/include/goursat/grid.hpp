#pragma once

#include <Eigen/Core>

#include <cmath>
#include <stdexcept>
#include <utility>

namespace goursat {

/// Uniform lattice over the quarter-plane rectangle [0, x_f] x [0, t_f].
///
/// The lattice has (n_x + 1) * (n_t + 1) points; point (i, j) sits at
/// (i * dx, j * dt), 0-based in both axes. Immutable after construction.
template <class Scalar = double>
struct GridSpec {
  Scalar x_f{1};
  Scalar t_f{1};
  Eigen::Index n_x{1};  ///< cells along x (lattice points: n_x + 1)
  Eigen::Index n_t{1};  ///< cells along t (lattice points: n_t + 1)
  Scalar dx{1};
  Scalar dt{1};

  Scalar x(Eigen::Index i) const { return static_cast<Scalar>(i) * dx; }
  Scalar t(Eigen::Index j) const { return static_cast<Scalar>(j) * dt; }
  Eigen::Index points_x() const { return n_x + 1; }
  Eigen::Index points_t() const { return n_t + 1; }
};

template <class Scalar>
bool same_lattice(const GridSpec<Scalar>& a, const GridSpec<Scalar>& b) {
  return a.n_x == b.n_x && a.n_t == b.n_t && a.x_f == b.x_f && a.t_f == b.t_f;
}

template <class Scalar>
GridSpec<Scalar> build_grid(Scalar x_f, Scalar t_f, Eigen::Index n_x, Eigen::Index n_t) {
  if (!(x_f > Scalar(0)) || !(t_f > Scalar(0)))
    throw std::invalid_argument("build_grid: extents must be positive");
  if (n_x < 1 || n_t < 1)
    throw std::invalid_argument("build_grid: need at least one cell per axis");
  GridSpec<Scalar> spec;
  spec.x_f = x_f;
  spec.t_f = t_f;
  spec.n_x = n_x;
  spec.n_t = n_t;
  spec.dx = x_f / static_cast<Scalar>(n_x);
  spec.dt = t_f / static_cast<Scalar>(n_t);
  return spec;
}

/// Nearest lattice index along x, clamped to [0, n_x].
template <class Scalar>
Eigen::Index nearest_x_index(const GridSpec<Scalar>& spec, Scalar x) {
  const auto i = static_cast<Eigen::Index>(std::llround(static_cast<double>(x / spec.dx)));
  return std::max<Eigen::Index>(0, std::min(spec.n_x, i));
}

/// Nearest lattice index along t, clamped to [0, n_t].
template <class Scalar>
Eigen::Index nearest_t_index(const GridSpec<Scalar>& spec, Scalar t) {
  const auto j = static_cast<Eigen::Index>(std::llround(static_cast<double>(t / spec.dt)));
  return std::max<Eigen::Index>(0, std::min(spec.n_t, j));
}

/// A 0-based lattice location (i along x, j along t).
struct LatticeIndex {
  Eigen::Index i{0};
  Eigen::Index j{0};
  friend bool operator==(const LatticeIndex&, const LatticeIndex&) = default;
};

/// Dense values on the full lattice of a GridSpec: entry (i, j) is the value
/// at (x_i, t_j). Rows follow x, columns follow t (column-major storage, so a
/// fixed-t line is contiguous). Reused for solutions, noise sheets and
/// ensemble statistics.
template <class Scalar = double>
struct ScalarField {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  GridSpec<Scalar> spec;
  Matrix values;

  Scalar operator()(Eigen::Index i, Eigen::Index j) const { return values(i, j); }
  Scalar& operator()(Eigen::Index i, Eigen::Index j) { return values(i, j); }
};

template <class Scalar>
ScalarField<Scalar> make_field(const GridSpec<Scalar>& spec, Scalar fill = Scalar(0)) {
  ScalarField<Scalar> field;
  field.spec = spec;
  field.values.setConstant(spec.points_x(), spec.points_t(), fill);
  return field;
}

/// Min/max over the finite entries of a matrix; NaN entries (non-participating
/// sentinels) are skipped. Returns (NaN, NaN) if nothing is finite.
template <class Derived>
std::pair<typename Derived::Scalar, typename Derived::Scalar> finite_extrema(
    const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  Scalar lo = std::numeric_limits<Scalar>::quiet_NaN();
  Scalar hi = std::numeric_limits<Scalar>::quiet_NaN();
  bool seen = false;
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const Scalar v = m(i, j);
      if (std::isnan(v)) continue;
      if (!seen) {
        lo = hi = v;
        seen = true;
      } else {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
  return {lo, hi};
}

/// Goursat data: initial values f along t = 0, boundary values g along x = 0.
/// Stored as sampled sequences so a run is fully replayable. The shared corner
/// value is taken from f; sample_boundary normalizes g[0] to it after the
/// consistency check.
template <class Scalar = double>
struct BoundaryData {
  Eigen::VectorX<Scalar> f;  ///< length n_x + 1, f[i] = Y(x_i, 0)
  Eigen::VectorX<Scalar> g;  ///< length n_t + 1, g[j] = Y(0, t_j)

  Scalar corner() const { return f[0]; }
};

namespace detail {

template <class Scalar>
void check_boundary_finite(const BoundaryData<Scalar>& bc) {
  if (!bc.f.allFinite() || !bc.g.allFinite())
    throw std::invalid_argument("boundary data must be finite");
}

}  // namespace detail

/// Samples f on the x axis and g on the t axis and checks the corner
/// consistency f(0) = g(0) to a relative 1e-12.
template <class Scalar, class FFn, class GFn>
BoundaryData<Scalar> sample_boundary(const GridSpec<Scalar>& spec, FFn&& f, GFn&& g) {
  BoundaryData<Scalar> bc;
  bc.f.resize(spec.points_x());
  bc.g.resize(spec.points_t());
  for (Eigen::Index i = 0; i <= spec.n_x; ++i) bc.f[i] = static_cast<Scalar>(f(spec.x(i)));
  for (Eigen::Index j = 0; j <= spec.n_t; ++j) bc.g[j] = static_cast<Scalar>(g(spec.t(j)));
  using std::abs;
  const Scalar tol = Scalar(1e-12) * std::max(Scalar(1), abs(bc.f[0]));
  if (!(abs(bc.f[0] - bc.g[0]) <= tol))
    throw std::invalid_argument("sample_boundary: inconsistent corner, f(0) != g(0)");
  bc.g[0] = bc.f[0];
  detail::check_boundary_finite(bc);
  return bc;
}

template <class Scalar>
BoundaryData<Scalar> constant_boundary(const GridSpec<Scalar>& spec, Scalar value) {
  BoundaryData<Scalar> bc;
  bc.f.setConstant(spec.points_x(), value);
  bc.g.setConstant(spec.points_t(), value);
  detail::check_boundary_finite(bc);
  return bc;
}

/// Wraps already-sampled sequences; applies the same corner check as
/// sample_boundary.
template <class Scalar>
BoundaryData<Scalar> tabulated_boundary(const GridSpec<Scalar>& spec, Eigen::VectorX<Scalar> f,
                                        Eigen::VectorX<Scalar> g) {
  if (f.size() != spec.points_x() || g.size() != spec.points_t())
    throw std::invalid_argument("tabulated_boundary: sequence lengths do not match the lattice");
  using std::abs;
  const Scalar tol = Scalar(1e-12) * std::max(Scalar(1), abs(f[0]));
  if (!(abs(f[0] - g[0]) <= tol))
    throw std::invalid_argument("tabulated_boundary: inconsistent corner, f(0) != g(0)");
  g[0] = f[0];
  BoundaryData<Scalar> bc{std::move(f), std::move(g)};
  detail::check_boundary_finite(bc);
  return bc;
}

}  // namespace goursat
