#include <cmath>
#include <fmt/format.h>

#include "anyact/error.hpp"
#include "anyact/extremum.hpp"
#include "anyact/gadgets.hpp"

namespace anyact {

namespace {

constexpr double kRange = 200.0;
constexpr std::size_t kPoints = 400001;  // step 1e-3

}  // namespace

GapConstants estimate_gap_constants(const Classification& cls) {
  if (!cls.has(ActivationClass::A2Tilde)) {
    throw Error(ErrorKind::NotA2Tilde, fmt::format("{} is not in A2tilde", cls.spec->name));
  }
  const NormalizedDecomposition n = s_shape_normalize(cls);
  const ScalarFn h = n.h_hat;
  auto gap = [&h](double y) { return y * ((y > 0 ? 1.0 : 0.0) - h(y)); };

  const Extremum hi = maximize(gap, -kRange, kRange, kPoints);
  const Extremum lo = minimize(gap, -kRange, kRange, kPoints);
  GapConstants out;
  out.M_sup = hi.value;
  out.argmax = hi.x;
  out.m = lo.value;
  out.argmin = lo.x;

  if (cls.gap_tails) {
    const auto [left, right] = *cls.gap_tails;
    for (double t : {left, right}) {
      if (t > out.M_sup) {
        out.M_sup = t;
        out.argmax = t == left ? -INFINITY : INFINITY;
      }
      if (t < out.m) {
        out.m = t;
        out.argmin = t == left ? -INFINITY : INFINITY;
      }
    }
  } else {
    out.tail_verified = false;
    for (double side : {-1.0, 1.0}) {
      const double far = gap(side * kRange);
      const double mid = gap(side * kRange / 2);
      if (std::fabs(far) >= 1.5 * std::fabs(mid) && std::fabs(far) > 1e-6) {
        throw Error(ErrorKind::Unbounded,
                    fmt::format("{}: gap function still growing at y = {} ({} vs {} at half range)", cls.spec->name,
                                side * kRange, far, mid));
      }
    }
  }
  return out;
}

}  // namespace anyact
