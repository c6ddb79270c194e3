#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <variant>

namespace goursat {

// Closed set of drift terms F(Y). Each variant is a plain value type; the
// solver dispatches on the variant once per run, not per lattice cell.

template <class Scalar = double>
struct ZeroSource {};

/// F(Y) = alpha * Y + beta
template <class Scalar = double>
struct AffineSource {
  Scalar alpha{0};
  Scalar beta{0};
};

/// F(Y) = k * Y * (1 - Y)
template <class Scalar = double>
struct QuadraticSource {
  Scalar k{1};
};

/// F(Y) = k * Y * (1 - Y) * (Y - y1)
template <class Scalar = double>
struct CubicSource {
  Scalar k{1};
  Scalar y1{Scalar(0.5)};
};

/// F(Y) = sin(Y) when sign >= 0, -sin(Y) otherwise.
template <class Scalar = double>
struct SineGordonSource {
  int sign{+1};
};

/// F(Y) = exp(Y). Solutions typically blow up; rely on the solver guard.
template <class Scalar = double>
struct ExponentialSource {};

template <class Scalar = double>
using SourceSpec = std::variant<ZeroSource<Scalar>, AffineSource<Scalar>, QuadraticSource<Scalar>,
                                CubicSource<Scalar>, SineGordonSource<Scalar>,
                                ExponentialSource<Scalar>>;

namespace detail {

template <class Scalar>
inline Scalar eval_drift(const ZeroSource<Scalar>&, Scalar) {
  return Scalar(0);
}
template <class Scalar>
inline Scalar eval_drift(const AffineSource<Scalar>& s, Scalar y) {
  return s.alpha * y + s.beta;
}
template <class Scalar>
inline Scalar eval_drift(const QuadraticSource<Scalar>& s, Scalar y) {
  return s.k * y * (Scalar(1) - y);
}
template <class Scalar>
inline Scalar eval_drift(const CubicSource<Scalar>& s, Scalar y) {
  return s.k * y * (Scalar(1) - y) * (y - s.y1);
}
template <class Scalar>
inline Scalar eval_drift(const SineGordonSource<Scalar>& s, Scalar y) {
  using std::sin;
  return s.sign >= 0 ? sin(y) : -sin(y);
}
template <class Scalar>
inline Scalar eval_drift(const ExponentialSource<Scalar>&, Scalar y) {
  using std::exp;
  return exp(y);
}

}  // namespace detail

/// Evaluates F at y. Pure; throws std::domain_error for non-finite y.
template <class Scalar>
Scalar evaluate(const SourceSpec<Scalar>& src, Scalar y) {
  if (!std::isfinite(static_cast<double>(y)))
    throw std::domain_error("source evaluate: y must be finite");
  return std::visit([y](const auto& s) { return detail::eval_drift(s, y); }, src);
}

/// Textual tag used in CLI flags, config files and output metadata.
template <class Scalar>
std::string source_name(const SourceSpec<Scalar>& src) {
  struct Namer {
    std::string operator()(const ZeroSource<Scalar>&) const { return "zero"; }
    std::string operator()(const AffineSource<Scalar>&) const { return "affine"; }
    std::string operator()(const QuadraticSource<Scalar>&) const { return "quadratic"; }
    std::string operator()(const CubicSource<Scalar>&) const { return "cubic"; }
    std::string operator()(const SineGordonSource<Scalar>& s) const {
      return s.sign >= 0 ? "sine-gordon" : "neg-sine-gordon";
    }
    std::string operator()(const ExponentialSource<Scalar>&) const { return "exponential"; }
  };
  return std::visit(Namer{}, src);
}

}  // namespace goursat
