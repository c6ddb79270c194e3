#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>

#include "goursat/grid.hpp"
#include "goursat/noise.hpp"
#include "goursat/solver.hpp"
#include "goursat/source.hpp"

namespace goursat {

// Closed-form reference solutions and an independent fixed-point solver used
// to cross-check the marching scheme.

/// Parameters of the exact solution family of Y_xt = alpha * Y:
/// Y(x,t) = c1 * exp(alpha x) exp(t) + c2 * exp(x) exp(alpha t).
template <class Scalar = double>
struct LinearExactParams {
  Scalar c1{1};
  Scalar c2{0};
  Scalar alpha{1};
};

template <class Scalar>
Scalar linear_exact(const LinearExactParams<Scalar>& p, Scalar x, Scalar t) {
  using std::exp;
  return p.c1 * exp(p.alpha * x) * exp(t) + p.c2 * exp(x) * exp(p.alpha * t);
}

template <class Scalar>
ScalarField<Scalar> linear_exact_field(const GridSpec<Scalar>& spec,
                                       const LinearExactParams<Scalar>& p) {
  auto field = make_field(spec);
  for (Eigen::Index j = 0; j <= spec.n_t; ++j)
    for (Eigen::Index i = 0; i <= spec.n_x; ++i)
      field(i, j) = linear_exact(p, spec.x(i), spec.t(j));
  return field;
}

/// Goursat data consistent with the exact linear solution: f(x) = Y(x, 0),
/// g(t) = Y(0, t).
template <class Scalar>
BoundaryData<Scalar> boundary_from_linear_exact(const GridSpec<Scalar>& spec,
                                                const LinearExactParams<Scalar>& p) {
  return sample_boundary(
      spec, [&](Scalar x) { return linear_exact(p, x, Scalar(0)); },
      [&](Scalar t) { return linear_exact(p, Scalar(0), t); });
}

/// Kink / anti-kink soliton of phi_tt - phi_xx = -sin(phi):
/// phi(x,t) = 4 atan(exp(sign (x - x0 - u t) / sqrt(1 - u^2))), values in (0, 2 pi).
template <class Scalar = double>
struct KinkParams {
  Scalar u{0};   ///< speed, |u| < 1
  Scalar x0{0};  ///< offset
  int sign{+1};  ///< +1 kink, -1 anti-kink
};

template <class Scalar>
Scalar kink(const KinkParams<Scalar>& p, Scalar x, Scalar t) {
  using std::abs;
  using std::atan;
  using std::exp;
  using std::sqrt;
  if (!(abs(p.u) < Scalar(1)))
    throw std::invalid_argument("kink: speed must satisfy |u| < 1");
  const Scalar gamma = Scalar(1) / sqrt(Scalar(1) - p.u * p.u);
  const Scalar arg = (p.sign >= 0 ? Scalar(1) : Scalar(-1)) * (x - p.x0 - p.u * t) * gamma;
  return Scalar(4) * atan(exp(arg));
}

/// Stationary breather of phi_tt - phi_xx = -sin(phi) with frequency omega:
/// phi(x,t) = 4 atan(sqrt(1-w^2) sin(w t) / (w cosh(x sqrt(1-w^2)))).
template <class Scalar = double>
struct BreatherParams {
  Scalar omega{Scalar(0.5)};  ///< 0 < omega < 1
};

template <class Scalar>
Scalar breather(const BreatherParams<Scalar>& p, Scalar x, Scalar t) {
  using std::atan;
  using std::cosh;
  using std::sin;
  using std::sqrt;
  if (!(p.omega > Scalar(0) && p.omega < Scalar(1)))
    throw std::invalid_argument("breather: frequency must lie in (0, 1)");
  const Scalar root = sqrt(Scalar(1) - p.omega * p.omega);
  return Scalar(4) * atan(root * sin(p.omega * t) / (p.omega * cosh(x * root)));
}

/// Light-cone (x, t) to Euclidean wave-equation coordinates: xi = x + t,
/// eta = x - t.
template <class Scalar>
std::pair<Scalar, Scalar> lightcone_to_euclidean(Scalar x, Scalar t) {
  return {x + t, x - t};
}

/// Inverse map: x = (xi + eta) / 2, t = (xi - eta) / 2.
template <class Scalar>
std::pair<Scalar, Scalar> euclidean_to_lightcone(Scalar xi, Scalar eta) {
  return {(xi + eta) / Scalar(2), (xi - eta) / Scalar(2)};
}

/// Solves the Goursat integral equation Y = f + g - c + integral of F(Y) (plus
/// the accumulated noise) by fixed-point iteration, with the cell integrals
/// taken at the lower-left corner so the fixed point coincides with the
/// marching scheme. Because the discrete dependency is strictly
/// lower-triangular, the iteration becomes stationary after about
/// min(n_x, n_t) sweeps; tol = 0 therefore terminates. Intended for modest
/// grids (<= 100 x 100).
template <class Scalar>
ScalarField<Scalar> picard_solve(const GridSpec<Scalar>& spec, const BoundaryData<Scalar>& bc,
                                 const SourceSpec<Scalar>& src, Scalar sigma,
                                 std::type_identity_t<const IncrementField<Scalar>*> increments,
                                 long long max_iter, Scalar tol) {
  detail::validate_solve_inputs(spec, bc, sigma, Scalar(1));
  if (max_iter < 1) throw std::invalid_argument("picard_solve: max_iter must be >= 1");
  if (sigma > Scalar(0)) {
    if (increments == nullptr)
      throw std::invalid_argument("picard_solve: sigma > 0 requires an increment field");
    require_matching_increments(spec, *increments);
  }

  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index px = spec.points_x(), pt = spec.points_t();
  const Scalar c = bc.corner();
  const Scalar dxdt = spec.dx * spec.dt;
  const Scalar snoise = sigma * static_cast<Scalar>(std::sqrt(static_cast<double>(dxdt)));

  // Accumulated noise: noise_sum(i, j) = sum of increments over cells
  // [0, i) x [0, j).
  Matrix noise_sum;
  if (sigma > Scalar(0)) {
    noise_sum = Matrix::Zero(px, pt);
    for (Eigen::Index j = 1; j <= spec.n_t; ++j) {
      Scalar row_acc = Scalar(0);
      for (Eigen::Index i = 1; i <= spec.n_x; ++i) {
        row_acc += increments->values(i - 1, j - 1);
        noise_sum(i, j) = noise_sum(i, j - 1) + row_acc;
      }
    }
  }

  ScalarField<Scalar> out;
  out.spec = spec;
  Matrix& y = out.values;
  y.resize(px, pt);
  y.col(0) = bc.f;
  y.row(0) = bc.g.transpose();
  y(0, 0) = bc.f[0];
  for (Eigen::Index j = 1; j <= spec.n_t; ++j)
    for (Eigen::Index i = 1; i <= spec.n_x; ++i) y(i, j) = bc.f[i] + bc.g[j] - c;

  Matrix next = y;
  Matrix drift_sum(px, pt);  // running double prefix sum of F over cells
  for (long long iter = 0; iter < max_iter; ++iter) {
    std::visit(
        [&](const auto& s) {
          drift_sum.col(0).setZero();
          for (Eigen::Index j = 1; j <= spec.n_t; ++j) {
            Scalar row_acc = Scalar(0);
            drift_sum(0, j) = Scalar(0);
            for (Eigen::Index i = 1; i <= spec.n_x; ++i) {
              row_acc += detail::eval_drift(s, y(i - 1, j - 1));
              drift_sum(i, j) = drift_sum(i, j - 1) + row_acc;
            }
          }
        },
        src);

    Scalar change = Scalar(0);
    for (Eigen::Index j = 1; j <= spec.n_t; ++j)
      for (Eigen::Index i = 1; i <= spec.n_x; ++i) {
        Scalar v = bc.f[i] + bc.g[j] - c + dxdt * drift_sum(i, j);
        if (sigma > Scalar(0)) v += snoise * noise_sum(i, j);
        using std::abs;
        change = std::max(change, abs(v - y(i, j)));
        next(i, j) = v;
      }
    y.swap(next);
    if (change <= tol) return out;
  }
  throw std::runtime_error("picard_solve: no convergence within max_iter iterations");
}

/// Defaulted iteration budget: stationarity is reached after min(n_x, n_t)
/// sweeps, so that many plus slack always suffices.
template <class Scalar>
ScalarField<Scalar> picard_solve(const GridSpec<Scalar>& spec, const BoundaryData<Scalar>& bc,
                                 const SourceSpec<Scalar>& src, Scalar sigma,
                                 std::type_identity_t<const IncrementField<Scalar>*> increments =
                                     nullptr) {
  return picard_solve(spec, bc, src, sigma, increments, std::min(spec.n_x, spec.n_t) + 2,
                      Scalar(0));
}

/// Centered-difference residual of phi_tt - phi_xx = -sin(phi) on a uniform
/// lattice with step h in both axes (rows follow x, columns follow t).
/// Returns the (rows-2) x (cols-2) interior residual phi_tt - phi_xx + sin(phi);
/// for exact soliton samples it vanishes at rate O(h^2).
template <class Derived, class Scalar = typename Derived::Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> euclidean_residual(
    const Eigen::MatrixBase<Derived>& phi, Scalar h) {
  const Eigen::Index nr = phi.rows(), nc = phi.cols();
  if (nr < 3 || nc < 3)
    throw std::invalid_argument("euclidean_residual: lattice must be at least 3 x 3");
  if (!(h > Scalar(0))) throw std::invalid_argument("euclidean_residual: step must be positive");
  const Scalar inv_h2 = Scalar(1) / (h * h);
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> res(nr - 2, nc - 2);
  using std::sin;
  for (Eigen::Index j = 1; j + 1 < nc; ++j)
    for (Eigen::Index i = 1; i + 1 < nr; ++i) {
      const Scalar ptt = (phi(i, j + 1) - Scalar(2) * phi(i, j) + phi(i, j - 1)) * inv_h2;
      const Scalar pxx = (phi(i + 1, j) - Scalar(2) * phi(i, j) + phi(i - 1, j)) * inv_h2;
      res(i - 1, j - 1) = ptt - pxx + sin(phi(i, j));
    }
  return res;
}

}  // namespace goursat
