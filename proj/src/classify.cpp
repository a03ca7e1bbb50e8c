#include <algorithm>
#include <cmath>
#include <fmt/format.h>

#include "anyact/classification.hpp"
#include "anyact/error.hpp"
#include "anyact/extremum.hpp"

namespace anyact {

namespace {

constexpr double kSearchLo = -10.0;
constexpr double kSearchHi = 10.0;
constexpr std::size_t kSearchPoints = 20001;
constexpr double kKinkExclusion = 0.5;

double derivative_or_nan(const ActivationSpec& spec, int order, double x) {
  try {
    return eval_derivative(spec, order, x).value;
  } catch (const Error&) {
    return std::nan("");
  }
}

SkipFn kink_skip(const ActivationSpec& spec, double radius) {
  if (spec.smoothness.smooth) return {};
  const double k = spec.smoothness.kink_x;
  return [k, radius](double x) { return std::fabs(x - k) < radius; };
}

// Maximizer of |rho^(order)| on [-10, 10]; a mirror point with the same
// magnitude is replaced by its positive counterpart.
Extremum derivative_peak(const ActivationSpec& spec, int order) {
  auto mag = [&](double x) { return std::fabs(derivative_or_nan(spec, order, x)); };
  Extremum e = maximize(mag, kSearchLo, kSearchHi, kSearchPoints, kink_skip(spec, kKinkExclusion));
  if (e.x < 0) {
    const double mirrored = mag(-e.x);
    if (mirrored >= e.value * (1.0 - 1e-12)) e.x = -e.x;
  }
  return e;
}

void attach_a3_witnesses(Classification& c) {
  const ActivationSpec& spec = *c.spec;
  Extremum curv = derivative_peak(spec, 2);
  if (!(curv.value > 1e-12)) {
    throw Error(ErrorKind::NoCurvaturePoint, fmt::format("{}: no x in [-10, 10] with rho''(x) != 0", spec.name));
  }
  c.curvature_point = CurvaturePoint{curv.x, eval_derivative(spec, 2, curv.x).value};
  Extremum slope = derivative_peak(spec, 1);
  if (!(slope.value > 1e-12)) {
    throw Error(ErrorKind::NoSlopePoint, fmt::format("{}: no x in [-10, 10] with rho'(x) != 0", spec.name));
  }
  c.slope_point = SlopePoint{slope.x, eval_derivative(spec, 1, slope.x).value};
}

// A point with rho'(x1) != 0 near a kink of order >= 1, away from the kink.
void attach_kink_slope(Classification& c) {
  const ActivationSpec& spec = *c.spec;
  const double x0 = c.kink->x0;
  auto mag = [&](double x) { return std::fabs(derivative_or_nan(spec, 1, x)); };
  auto skip = [x0](double x) { return std::fabs(x - x0) < 0.25; };
  Extremum e = grid_argmax(mag, x0 - 1.0, x0 + 1.0, 2001, skip);
  if (!(e.value > 1e-12)) {
    throw Error(ErrorKind::NoSlopePoint,
                fmt::format("{}: no x near the kink at {} with rho'(x) != 0", spec.name, x0));
  }
  c.slope_point = SlopePoint{e.x, eval_derivative(spec, 1, e.x).value};
}

bool converged(double a, double b) {
  return std::isfinite(a) && std::isfinite(b) && std::fabs(a - b) <= 1e-3 * std::max(1.0, std::fabs(b));
}

double snap_zero(double v) { return std::fabs(v) < 1e-6 ? 0.0 : v; }

std::optional<KinkWitness> probe_kink(const ActivationSpec& spec) {
  const auto& f = spec.eval;
  for (int i = 0; i <= 1000; ++i) {
    const double x = (i - 500) / 100.0;
    const double h = 1e-6;
    const double dl = (f(x) - f(x - h)) / h;
    const double dr = (f(x + h) - f(x)) / h;
    if (std::fabs(dr - dl) > 1e-3 * std::max({1.0, std::fabs(dl), std::fabs(dr)})) {
      return KinkWitness{x, 0, dl, dr};
    }
  }
  for (int i = 0; i <= 1000; ++i) {
    const double x = (i - 500) / 100.0;
    const double h = 1e-4;
    const double l = (f(x) - 2.0 * f(x - h) + f(x - 2.0 * h)) / (h * h);
    const double r = (f(x + 2.0 * h) - 2.0 * f(x + h) + f(x)) / (h * h);
    if (std::fabs(r - l) > 1e-2 * std::max({1.0, std::fabs(l), std::fabs(r)})) {
      return KinkWitness{x, 1, l, r};
    }
  }
  return std::nullopt;
}

Classification probe(const ActivationPtr& spec) {
  Classification c;
  c.spec = spec;
  c.source = "probed";
  c.warnings.push_back("classification obtained by numeric probing");
  const auto& f = spec->eval;

  const double lo4 = f(-1e4), lo5 = f(-1e5), hi4 = f(1e4), hi5 = f(1e5);
  const bool s_shaped = converged(lo4, lo5) && converged(hi4, hi5) && std::fabs(hi5 - lo5) > 1e-6;

  if (auto kink = probe_kink(*spec)) {
    c.kink = kink;
    c.memberships.push_back({ActivationClass::A1k, kink->order});
  }

  if (!s_shaped) {
    const double b1 = f(0.0);
    const double slope0 = central_difference(f, 1, 0.0);
    auto h = [f, b1, slope0](double x) { return x == 0.0 ? slope0 : (f(x) - b1) / x; };
    const double l4 = h(-1e4), l5 = h(-1e5), u4 = h(1e4), u5 = h(1e5);
    if (converged(l4, l5) && converged(u4, u5) && std::fabs(u5 - l5) > 1e-6) {
      const double L1 = snap_zero(l5);
      const double L2 = snap_zero(u5);
      c.s_decomp = SDecomposition{0.0, b1, L1, L2, h};
      c.memberships.push_back({L1 * L2 == 0.0 ? ActivationClass::A2Tilde : ActivationClass::A2, 0});
      c.warnings.push_back("tail-unverified");
    }
  } else {
    c.asymptotes = std::make_pair(lo5, hi5);
    try {
      attach_a3_witnesses(c);
      c.memberships.push_back({ActivationClass::A3, 0});
    } catch (const Error&) {
      c.asymptotes.reset();
      c.curvature_point.reset();
      c.slope_point.reset();
    }
  }
  if (c.memberships.empty()) {
    throw Error(ErrorKind::NotInA, fmt::format("{}: no kink, S-shaped factor or bounded S-shape found", spec->name));
  }
  if (c.kink && c.kink->order >= 1) attach_kink_slope(c);
  return c;
}

void check_witnesses(const Classification& c) {
  if (c.kink && c.kink->L1 == c.kink->L2) {
    throw Error(ErrorKind::NotInA, fmt::format("{}: kink slopes coincide", c.spec->name));
  }
  if (c.s_decomp) {
    if (c.s_decomp->L1 == c.s_decomp->L2) {
      throw Error(ErrorKind::NotInA, fmt::format("{}: S-shaped factor has equal limits", c.spec->name));
    }
    if (c.has(ActivationClass::A2Tilde) && c.s_decomp->L1 * c.s_decomp->L2 != 0.0) {
      throw Error(ErrorKind::NotA2Tilde, fmt::format("{}: A2tilde requires L1*L2 = 0", c.spec->name));
    }
  }
}

}  // namespace

bool Classification::has(ActivationClass c) const { return find(c).has_value(); }

std::optional<Membership> Classification::find(ActivationClass c) const {
  for (const Membership& m : memberships) {
    if (m.cls == c) return m;
  }
  return std::nullopt;
}

Classification classify(const ActivationPtr& spec) {
  if (!spec) throw Error(ErrorKind::UnknownActivation, "null activation");
  if (!spec->declared) {
    Classification c = probe(spec);
    check_witnesses(c);
    return c;
  }
  const DeclaredClass& d = *spec->declared;
  Classification c;
  c.spec = spec;
  c.source = Registry::builtin().contains(spec->name) ? "table" : "declared";
  c.memberships = d.memberships;
  c.kink = d.kink;
  c.s_decomp = d.s_decomp;
  c.asymptotes = d.asymptotes;
  c.gap_tails = d.gap_tails;
  if (c.memberships.empty()) throw Error(ErrorKind::NotInA, fmt::format("{}: no memberships declared", spec->name));
  check_witnesses(c);
  if (c.has(ActivationClass::A3)) attach_a3_witnesses(c);
  if (c.kink && c.kink->order >= 1) attach_kink_slope(c);
  return c;
}

NormalizedDecomposition s_shape_normalize(const Classification& cls, bool force_general) {
  if (!cls.s_decomp) {
    throw Error(ErrorKind::NotA2Tilde, fmt::format("{}: no S-shaped decomposition", cls.spec->name));
  }
  const SDecomposition& s = *cls.s_decomp;
  NormalizedDecomposition n;
  n.L1 = s.L1;
  n.L2 = s.L2;
  n.b1 = s.b1;
  n.tilde = !force_general && (s.L1 == 0.0 || s.L2 == 0.0);
  const ScalarFn h = s.h;
  if (n.tilde) {
    n.w0 = s.L1 + s.L2;
    n.w1 = s.L1 == 0.0 ? 1.0 : -1.0;
    n.b0 = n.w0 * s.b0;
    n.in_scale = n.w1 / std::fabs(n.w0);
    n.in_shift = -s.b0;
    n.out_sign = (n.w0 * n.w1 > 0) ? 1.0 : -1.0;
    const double scale = n.in_scale, shift = n.in_shift, w0 = n.w0;
    n.h_hat = [h, scale, shift, w0](double y) { return h(scale * y + shift) / w0; };
  } else {
    n.b0 = s.b0;
    n.in_shift = -s.b0;
    const double b0 = s.b0, L1 = s.L1, L2 = s.L2;
    n.h_hat = [h, b0, L1, L2](double y) { return (h(y - b0) - L1) / (L2 - L1); };
  }
  n.tail_lo = std::fabs(n.h_hat(-1e6));
  n.tail_hi = std::fabs(n.h_hat(1e6) - 1.0);
  if (!(n.tail_lo <= 1e-4) || !(n.tail_hi <= 1e-4)) {
    throw Error(ErrorKind::LimitMismatch,
                fmt::format("{}: normalized factor has |h(-1e6)| = {}, |h(1e6) - 1| = {}", cls.spec->name, n.tail_lo,
                            n.tail_hi));
  }
  return n;
}

}  // namespace anyact
