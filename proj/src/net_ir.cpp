#include "anyact/net_ir.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

#include "anyact/activations.hpp"
#include "anyact/error.hpp"
#include "anyact/sampling.hpp"

namespace anyact {

ActivationTag ActivationTag::relu() {
  ActivationTag t;
  t.kind_ = Kind::Relu;
  return t;
}

ActivationTag ActivationTag::identity() { return ActivationTag{}; }

ActivationTag ActivationTag::named(ActivationPtr spec) {
  if (!spec) throw Error(ErrorKind::UnknownActivation, "null activation reference");
  ActivationTag t;
  t.kind_ = Kind::Named;
  t.spec_ = std::move(spec);
  return t;
}

bool ActivationTag::is_relu() const noexcept {
  return kind_ == Kind::Relu || (kind_ == Kind::Named && spec_->name == "relu");
}

std::string ActivationTag::name() const {
  switch (kind_) {
    case Kind::Relu: return "relu";
    case Kind::Identity: return "identity";
    case Kind::Named: return spec_->name;
  }
  return {};
}

double ActivationTag::apply(double x) const {
  switch (kind_) {
    case Kind::Relu: return x > 0.0 ? x : 0.0;
    case Kind::Identity: return x;
    case Kind::Named: return spec_->eval(x);
  }
  return x;
}

bool operator==(const ActivationTag& a, const ActivationTag& b) {
  if (a.kind_ != b.kind_) return false;
  if (a.kind_ != ActivationTag::Kind::Named) return true;
  return a.spec_->name == b.spec_->name && a.spec_->params == b.spec_->params;
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  Matrix m(rows.size(), rows.empty() ? 0 : rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != m.cols) {
      throw Error(ErrorKind::DimensionMismatch, fmt::format("ragged matrix: row {} has {} entries, expected {}", r,
                                                            rows[r].size(), m.cols));
    }
    std::copy(rows[r].begin(), rows[r].end(), m.data.begin() + static_cast<std::ptrdiff_t>(r * m.cols));
  }
  return m;
}

ShapeReport validate_network(const Network& net) {
  if (net.input_dim == 0) throw Error(ErrorKind::DimensionMismatch, "input_dim must be positive", {0, {}, {}});
  if (net.layers.empty()) throw Error(ErrorKind::DimensionMismatch, "network has no layers", {0, {}, {}});
  ShapeReport rep;
  rep.dims.push_back(net.input_dim);
  std::size_t fan_in = net.input_dim;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const Layer& layer = net.layers[l];
    if (layer.weights.cols != fan_in || layer.weights.data.size() != layer.weights.rows * layer.weights.cols ||
        layer.bias.size() != layer.weights.rows || layer.weights.rows == 0) {
      throw Error(ErrorKind::DimensionMismatch,
                  fmt::format("layer {}: weights {}x{}, bias {}, expected fan-in {}", l, layer.weights.rows,
                              layer.weights.cols, layer.bias.size(), fan_in),
                  {l, {}, {}});
    }
    for (std::size_t i = 0; i < layer.weights.data.size(); ++i) {
      if (!std::isfinite(layer.weights.data[i])) {
        throw Error(ErrorKind::NonFiniteParameter, fmt::format("layer {}: weight {} is not finite", l, i), {l, i, {}});
      }
    }
    for (std::size_t i = 0; i < layer.bias.size(); ++i) {
      if (!std::isfinite(layer.bias[i])) {
        throw Error(ErrorKind::NonFiniteParameter, fmt::format("layer {}: bias {} is not finite", l, i),
                    {l, layer.weights.data.size() + i, {}});
      }
    }
    if (l + 1 == net.layers.size()) {
      if (!layer.activation.is_identity()) {
        throw Error(ErrorKind::SchemaError, fmt::format("final layer activation must be identity, got {}",
                                                        layer.activation.name()),
                    {l, {}, {}});
      }
    } else {
      rep.width = std::max(rep.width, layer.fan_out());
    }
    rep.dims.push_back(layer.fan_out());
    fan_in = layer.fan_out();
  }
  rep.depth = net.layers.size() - 1;
  return rep;
}

double affine_row(const double* w, const double* a, std::size_t n, double bias, double* scratch) {
  for (std::size_t j = 0; j < n; ++j) scratch[j] = w[j] * a[j];
  scratch[n] = bias;
  std::size_t m = n + 1;
  while (m > 1) {
    const std::size_t half = m / 2;
    for (std::size_t j = 0; j < half; ++j) scratch[j] = scratch[2 * j] + scratch[2 * j + 1];
    if (m % 2 == 1) scratch[half] = scratch[m - 1];
    m = (m + 1) / 2;
  }
  return scratch[0];
}

Evaluator::Evaluator(const Network& net) : net_(&net) {
  std::size_t widest = net.input_dim;
  for (const Layer& l : net.layers) {
    pre_.emplace_back(l.fan_out());
    post_.emplace_back(l.fan_out());
    widest = std::max({widest, l.fan_in(), l.fan_out()});
  }
  scratch_.resize(widest + 1);
}

std::span<const double> Evaluator::operator()(std::span<const double> x) {
  if (x.size() != net_->input_dim) {
    throw Error(ErrorKind::DimensionMismatch,
                fmt::format("input has {} components, network expects {}", x.size(), net_->input_dim), {0, {}, {}});
  }
  const double* in = x.data();
  for (std::size_t l = 0; l < net_->layers.size(); ++l) {
    const Layer& layer = net_->layers[l];
    std::vector<double>& pre = pre_[l];
    std::vector<double>& post = post_[l];
    const std::size_t n = layer.fan_in();
    for (std::size_t r = 0; r < layer.fan_out(); ++r) {
      pre[r] = affine_row(layer.weights.data.data() + r * n, in, n, layer.bias[r], scratch_.data());
    }
    const ActivationTag& act = layer.activation;
    switch (act.kind()) {
      case ActivationTag::Kind::Identity: std::copy(pre.begin(), pre.end(), post.begin()); break;
      case ActivationTag::Kind::Relu:
        for (std::size_t r = 0; r < pre.size(); ++r) post[r] = pre[r] > 0.0 ? pre[r] : 0.0;
        break;
      case ActivationTag::Kind::Named:
        for (std::size_t r = 0; r < pre.size(); ++r) post[r] = act.spec()->eval(pre[r]);
        break;
    }
    in = post.data();
  }
  return post_.back();
}

std::span<const double> Evaluator::pre_activation(std::size_t l) const { return pre_.at(l); }

std::vector<double> eval_network(const Network& net, std::span<const double> x) {
  validate_network(net);
  Evaluator ev(net);
  auto out = ev(x);
  return {out.begin(), out.end()};
}

double eval_scalar(const Network& net, double x) {
  Evaluator ev(net);
  return ev(std::span<const double>(&x, 1))[0];
}

SupEstimate sup_distance_detailed(const Network& a, const Network& b, const Box& box, std::size_t n_samples,
                                  std::uint64_t seed) {
  validate_network(a);
  validate_network(b);
  if (a.input_dim != b.input_dim || a.output_dim() != b.output_dim()) {
    throw Error(ErrorKind::DimensionMismatch,
                fmt::format("networks map R^{} -> R^{} and R^{} -> R^{}", a.input_dim, a.output_dim(), b.input_dim,
                            b.output_dim()));
  }
  if (box.dim != a.input_dim) {
    throw Error(ErrorKind::DimensionMismatch,
                fmt::format("box dimension {} does not match input_dim {}", box.dim, a.input_dim));
  }
  if (!(box.half_width > 0.0)) throw Error(ErrorKind::InvalidParameter, "box half_width must be positive");
  const SampleSet samples = sample_box(box, n_samples, seed);
  const std::size_t n = samples.size();
  std::vector<double> worst(worker_count(n), 0.0);
  parallel_for(n, [&](std::size_t w, std::size_t begin, std::size_t end) {
    Evaluator ea(a);
    Evaluator eb(b);
    double m = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      std::span<const double> x(samples.point(i), samples.dim);
      auto ya = ea(x);
      auto yb = eb(x);
      for (std::size_t k = 0; k < ya.size(); ++k) {
        const double diff = std::fabs(ya[k] - yb[k]);
        if (!(diff <= m)) m = diff;  // propagates NaN
      }
    }
    worst[w] = m;
  });
  SupEstimate est;
  for (double w : worst) {
    if (!(w <= est.value)) est.value = w;
  }
  est.lattice = samples.lattice;
  est.corners = samples.corners;
  est.random = samples.random;
  return est;
}

double sup_distance(const Network& a, const Network& b, const Box& box, std::size_t n_samples, std::uint64_t seed) {
  return sup_distance_detailed(a, b, box, n_samples, seed).value;
}

}  // namespace anyact
