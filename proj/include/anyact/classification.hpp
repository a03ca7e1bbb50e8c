#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "anyact/activations.hpp"

namespace anyact {

struct Classification {
  ActivationPtr spec;
  std::vector<Membership> memberships;
  std::optional<KinkWitness> kink;
  std::optional<SDecomposition> s_decomp;
  std::optional<CurvaturePoint> curvature_point;
  std::optional<SlopePoint> slope_point;
  std::optional<std::pair<double, double>> asymptotes;
  std::optional<std::pair<double, double>> gap_tails;
  // "table", "declared" or "probed".
  std::string source = "table";
  std::vector<std::string> warnings;

  bool has(ActivationClass c) const;
  std::optional<Membership> find(ActivationClass c) const;
};

Classification classify(const ActivationPtr& spec);

// Affine normalization that turns the S-shaped factor into h_hat with limits
// 0 at -inf and 1 at +inf.
//
// tilde path: rho(in_scale*y + in_shift) - b1 = out_sign * y * h_hat(y)
// general path: rho(y + in_shift) - b1 = y * ((L2 - L1) * h_hat(y) + L1)
struct NormalizedDecomposition {
  bool tilde = true;
  double w0 = 1.0;
  double w1 = 1.0;
  double b0 = 0.0;
  double b1 = 0.0;
  double L1 = 0.0;
  double L2 = 1.0;
  double in_scale = 1.0;
  double in_shift = 0.0;
  double out_sign = 1.0;
  ScalarFn h_hat;
  double tail_lo = 0.0;  // |h_hat(-1e6)|
  double tail_hi = 0.0;  // |h_hat(1e6) - 1|
};

NormalizedDecomposition s_shape_normalize(const Classification& cls, bool force_general = false);

}  // namespace anyact
