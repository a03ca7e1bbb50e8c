#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "anyact/gadgets.hpp"
#include "anyact/net_ir.hpp"

namespace anyact {

struct LayerRanges {
  std::vector<double> M;  // one bound per hidden layer
};

// M_l = max(1, 1.5 * sampled max |pre-activation of layer l|) + 1.
LayerRanges estimate_layer_ranges(const Network& net, const Box& box, std::size_t n_samples, std::uint64_t seed);

// Replaces hidden layer `layer` by the gadgets (one per neuron): each
// gadget's first affine map folds into the layer's rows, deeper gadget
// layers become block-diagonal layers, and the output combination folds into
// the next layer's columns.
Network substitute(const Network& net, std::size_t layer, const std::vector<Gadget>& gadgets,
                   const ActivationTag& target);

struct TranspileOptions {
  std::size_t n_samples = 10000;  // verification uses 10x this many lattice points
  std::optional<Route> route;     // overrides the class priority
  int max_rounds = 8;
};

struct LayerReport {
  double M = 0.0;
  double gadget_scale = 0.0;
  double gadget_error = 0.0;
  ParamMap gadget_params;
};

struct TranspileReport {
  std::string target;
  std::string route;
  double eps_requested = 0.0;
  double sup_error_sampled = 0.0;
  std::array<double, 2> factors{1.0, 1.0};
  int rounds = 0;
  std::vector<LayerReport> per_layer;
  std::uint64_t seed = 0;
  std::size_t width_in = 0;
  std::size_t depth_in = 0;
  std::size_t width_out = 0;
  std::size_t depth_out = 0;
  std::size_t n_samples_verify = 0;
  double tau = 0.0;  // per-neuron tolerance of the final round
  bool ok = false;   // sampled error < eps
};

struct TranspileResult {
  Network net;
  TranspileReport report;
};

TranspileResult transpile(const Network& net, const ActivationPtr& target, const Box& box, double eps,
                          std::uint64_t seed, const TranspileOptions& options = {});

}  // namespace anyact
