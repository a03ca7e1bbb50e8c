#include "anyact/transpiler.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <map>

#include "anyact/error.hpp"
#include "anyact/sampling.hpp"

namespace anyact {

LayerRanges estimate_layer_ranges(const Network& net, const Box& box, std::size_t n_samples, std::uint64_t seed) {
  validate_network(net);
  if (box.dim != net.input_dim) {
    throw Error(ErrorKind::DimensionMismatch,
                fmt::format("box dimension {} does not match input_dim {}", box.dim, net.input_dim));
  }
  const std::size_t hidden = net.hidden_count();
  const SampleSet samples = sample_box(box, n_samples, seed);
  const std::size_t n = samples.size();
  std::vector<std::vector<double>> worst(worker_count(n), std::vector<double>(hidden, 0.0));
  parallel_for(n, [&](std::size_t w, std::size_t begin, std::size_t end) {
    Evaluator ev(net);
    for (std::size_t i = begin; i < end; ++i) {
      ev(std::span<const double>(samples.point(i), samples.dim));
      for (std::size_t l = 0; l < hidden; ++l) {
        for (double v : ev.pre_activation(l)) worst[w][l] = std::max(worst[w][l], std::fabs(v));
      }
    }
  });
  LayerRanges r;
  for (std::size_t l = 0; l < hidden; ++l) {
    double m = 0.0;
    for (const auto& w : worst) m = std::max(m, w[l]);
    r.M.push_back(std::max(1.0, 1.5 * m) + 1.0);
  }
  return r;
}

Network substitute(const Network& net, std::size_t layer, const std::vector<Gadget>& gadgets,
                   const ActivationTag& target) {
  if (layer + 1 >= net.layers.size()) {
    throw Error(ErrorKind::DimensionMismatch, fmt::format("layer {} is not a hidden layer", layer), {layer, {}, {}});
  }
  const Layer& host = net.layers[layer];
  const Layer& next = net.layers[layer + 1];
  const std::size_t n = host.fan_out();
  if (gadgets.size() != n) {
    throw Error(ErrorKind::DimensionMismatch,
                fmt::format("layer {} has {} neurons but {} gadgets were given", layer, n, gadgets.size()),
                {layer, {}, {}});
  }
  std::size_t depth = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const Network& g = gadgets[j].net;
    validate_network(g);
    if (g.input_dim != 1 || g.output_dim() != 1) {
      throw Error(ErrorKind::UnfusableGadget, fmt::format("gadget {} is not scalar", j));
    }
    if (j == 0) depth = g.hidden_count();
    if (g.hidden_count() != depth || depth == 0) {
      throw Error(ErrorKind::UnfusableGadget, fmt::format("gadget {} has {} hidden layers, expected {}", j,
                                                          g.hidden_count(), depth));
    }
    for (std::size_t t = 0; t < depth; ++t) {
      if (!(g.layers[t].activation == target)) {
        throw Error(ErrorKind::UnfusableGadget, fmt::format("gadget {} uses activation {}, expected {}", j,
                                                            g.layers[t].activation.name(), target.name()));
      }
    }
  }

  std::vector<Layer> inserted(depth);
  // First gadget layer fused with the host affine map.
  {
    std::size_t rows = 0;
    for (const Gadget& g : gadgets) rows += g.net.layers[0].fan_out();
    Layer& out = inserted[0];
    out.weights = Matrix(rows, host.fan_in());
    out.bias.resize(rows);
    out.activation = gadgets[0].net.layers[0].activation;
    std::size_t r = 0;
    for (std::size_t j = 0; j < n; ++j) {
      const Layer& g0 = gadgets[j].net.layers[0];
      for (std::size_t q = 0; q < g0.fan_out(); ++q, ++r) {
        const double a = g0.weights(q, 0);
        for (std::size_t c = 0; c < host.fan_in(); ++c) out.weights(r, c) = a * host.weights(j, c);
        out.bias[r] = a * host.bias[j] + g0.bias[q];
      }
    }
  }
  // Deeper gadget layers side by side.
  for (std::size_t t = 1; t < depth; ++t) {
    std::size_t rows = 0, cols = 0;
    for (const Gadget& g : gadgets) {
      rows += g.net.layers[t].fan_out();
      cols += g.net.layers[t].fan_in();
    }
    Layer& out = inserted[t];
    out.weights = Matrix(rows, cols);
    out.bias.resize(rows);
    out.activation = gadgets[0].net.layers[t].activation;
    std::size_t r0 = 0, c0 = 0;
    for (const Gadget& g : gadgets) {
      const Layer& gl = g.net.layers[t];
      for (std::size_t q = 0; q < gl.fan_out(); ++q) {
        for (std::size_t c = 0; c < gl.fan_in(); ++c) out.weights(r0 + q, c0 + c) = gl.weights(q, c);
        out.bias[r0 + q] = gl.bias[q];
      }
      r0 += gl.fan_out();
      c0 += gl.fan_in();
    }
  }
  // Output combinations folded into the next layer.
  Layer fused;
  {
    std::size_t cols = 0;
    for (const Gadget& g : gadgets) cols += g.net.layers[depth].fan_in();
    fused.weights = Matrix(next.fan_out(), cols);
    fused.bias = next.bias;
    fused.activation = next.activation;
    for (std::size_t i = 0; i < next.fan_out(); ++i) {
      std::size_t c = 0;
      for (std::size_t j = 0; j < n; ++j) {
        const Layer& go = gadgets[j].net.layers[depth];
        const double w = next.weights(i, j);
        for (std::size_t q = 0; q < go.fan_in(); ++q, ++c) fused.weights(i, c) = w * go.weights(0, q);
        fused.bias[i] += w * go.bias[0];
      }
    }
  }

  Network out;
  out.input_dim = net.input_dim;
  out.layers.assign(net.layers.begin(), net.layers.begin() + static_cast<std::ptrdiff_t>(layer));
  for (Layer& l : inserted) out.layers.push_back(std::move(l));
  out.layers.push_back(std::move(fused));
  out.layers.insert(out.layers.end(), net.layers.begin() + static_cast<std::ptrdiff_t>(layer + 2), net.layers.end());
  return out;
}

namespace {

void fill_shape(TranspileReport& rep, const ShapeReport& in, const ShapeReport& out) {
  rep.width_in = in.width;
  rep.depth_in = in.depth;
  rep.width_out = out.width;
  rep.depth_out = out.depth;
  rep.factors = {in.width == 0 ? 1.0 : static_cast<double>(out.width) / static_cast<double>(in.width),
                 in.depth == 0 ? 1.0 : static_cast<double>(out.depth) / static_cast<double>(in.depth)};
}

}  // namespace

TranspileResult transpile(const Network& net, const ActivationPtr& target, const Box& box, double eps,
                          std::uint64_t seed, const TranspileOptions& options) {
  const ShapeReport host_shape = validate_network(net);
  for (std::size_t l = 0; l + 1 < net.layers.size(); ++l) {
    if (!net.layers[l].activation.is_relu()) {
      throw Error(ErrorKind::NotReLUHost,
                  fmt::format("hidden layer {} uses {}, expected relu", l, net.layers[l].activation.name()),
                  {l, {}, {}});
    }
  }
  if (box.dim != net.input_dim) {
    throw Error(ErrorKind::DimensionMismatch,
                fmt::format("box dimension {} does not match input_dim {}", box.dim, net.input_dim));
  }
  if (!(eps > 0.0) || !std::isfinite(eps)) throw Error(ErrorKind::InvalidParameter, "eps must be positive");
  if (!(box.half_width > 0.0)) throw Error(ErrorKind::InvalidParameter, "box half_width must be positive");
  if (options.n_samples == 0) throw Error(ErrorKind::InvalidParameter, "n_samples must be positive");

  TranspileResult result;
  TranspileReport& rep = result.report;
  rep.target = target->name;
  rep.eps_requested = eps;
  rep.seed = seed;
  rep.n_samples_verify = 10 * options.n_samples;

  const std::size_t hidden = net.hidden_count();
  std::size_t neurons = 0;
  for (std::size_t l = 0; l < hidden; ++l) neurons += net.layers[l].fan_out();

  if (target->name == "relu" || hidden == 0) {
    result.net = net;
    rep.route = "identity";
    rep.ok = true;
    rep.sup_error_sampled = 0.0;
    fill_shape(rep, host_shape, host_shape);
    return result;
  }

  const Classification cls = classify(target);
  const Route route = options.route ? *options.route : best_route(cls);
  rep.route = to_string(route);
  const ActivationTag tag = ActivationTag::named(target);
  const LayerRanges ranges = estimate_layer_ranges(net, box, options.n_samples, seed);
  const double tau0 = eps / (2.0 * static_cast<double>(neurons));

  bool have_best = false;
  for (int round = 1; round <= options.max_rounds; ++round) {
    const double tau = tau0 / std::pow(2.0, round - 1);
    std::vector<LayerReport> layers;
    Network current = net;
    std::size_t at = 0;
    std::map<double, Gadget> cache;
    try {
      for (std::size_t l = 0; l < hidden; ++l) {
        const double M = ranges.M[l];
        auto it = cache.find(M);
        if (it == cache.end()) it = cache.emplace(M, relu_gadget(cls, M, tau, route)).first;
        const Gadget& g = it->second;
        layers.push_back({M, g.scale_param, g.reported_error, g.aux});
        const std::size_t width = current.layers[at].fan_out();
        current = substitute(current, at, std::vector<Gadget>(width, g), tag);
        at += g.net.hidden_count();
      }
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::CalibrationFailed || !have_best) throw;
      break;
    }
    const double err = sup_distance(net, current, box, 10 * options.n_samples, seed);
    const bool better = !have_best || err < rep.sup_error_sampled;
    if (better) {
      result.net = std::move(current);
      rep.sup_error_sampled = err;
      rep.per_layer = std::move(layers);
      rep.tau = tau;
      have_best = true;
    }
    rep.rounds = round;
    if (err < eps) break;
  }
  rep.ok = rep.sup_error_sampled < eps;
  fill_shape(rep, host_shape, validate_network(result.net));
  return result;
}

}  // namespace anyact
