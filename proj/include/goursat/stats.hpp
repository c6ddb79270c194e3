#pragma once

#include <cmath>
#include <cstdint>

namespace goursat {

/// Streaming mean/variance accumulator (Welford). Sample variance uses the
/// n - 1 denominator; with fewer than two samples sd() is 0.
template <class Scalar = double>
struct Welford {
  long long n{0};
  Scalar mean{0};
  Scalar m2{0};

  void add(Scalar x) {
    ++n;
    const Scalar delta = x - mean;
    mean += delta / static_cast<Scalar>(n);
    m2 += delta * (x - mean);
  }

  Scalar variance() const { return n > 1 ? m2 / static_cast<Scalar>(n - 1) : Scalar(0); }
  Scalar sd() const {
    using std::sqrt;
    return sqrt(variance());
  }
};

}  // namespace goursat
