#include "oracles.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace oracle {

using anyact::ActivationTag;
using anyact::Layer;
using anyact::Matrix;
using anyact::Network;

std::vector<double> naive_eval(const Network& net, const std::vector<double>& x) {
  std::vector<double> a = x;
  for (const Layer& layer : net.layers) {
    std::vector<double> next(layer.weights.rows);
    for (std::size_t r = 0; r < layer.weights.rows; ++r) {
      double s = layer.bias[r];
      for (std::size_t c = 0; c < layer.weights.cols; ++c) s += layer.weights(r, c) * a[c];
      next[r] = layer.activation.is_identity() ? s : layer.activation.apply(s);
    }
    a = std::move(next);
  }
  return a;
}

Network random_relu_net(std::size_t d, std::size_t width, std::size_t depth, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Network net;
  net.input_dim = d;
  std::size_t fan_in = d;
  for (std::size_t l = 0; l <= depth; ++l) {
    const bool last = l == depth;
    const std::size_t fan_out = last ? 1 : width;
    Layer layer;
    layer.weights = Matrix(fan_out, fan_in);
    for (double& w : layer.weights.data) w = u(gen);
    layer.bias.resize(fan_out);
    for (double& b : layer.bias) b = u(gen);
    layer.activation = last ? ActivationTag::identity() : ActivationTag::relu();
    net.layers.push_back(std::move(layer));
    fan_in = fan_out;
  }
  return net;
}

Network abs_net() {
  Network net;
  net.input_dim = 1;
  net.layers.push_back({Matrix::from_rows({{1.0}, {-1.0}}), {0.0, 0.0}, ActivationTag::relu()});
  net.layers.push_back({Matrix::from_rows({{1.0, 1.0}}), {0.0}, ActivationTag::identity()});
  return net;
}

Network constant_net(std::size_t d, double c) {
  Network net;
  net.input_dim = d;
  net.layers.push_back({Matrix(1, d), {c}, ActivationTag::identity()});
  return net;
}

double relu(double x) { return x > 0.0 ? x : 0.0; }

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double sigmoid_d1(double x) {
  const double s = sigmoid(x);
  return s * (1.0 - s);
}

double sigmoid_d2(double x) {
  const double s = sigmoid(x);
  return s * (1.0 - s) * (1.0 - 2.0 * s);
}

long double sigmoid_l(long double x) { return 1.0L / (1.0L + std::exp(-x)); }

long double second_difference_l(const std::function<long double(long double)>& f, long double x, long double h) {
  return (f(x + h) - 2.0L * f(x) + f(x - h)) / (h * h);
}

double grid_sup(const std::function<double(double)>& f, const std::function<double(double)>& g, double lo, double hi,
                std::size_t n) {
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    worst = std::max(worst, std::fabs(f(x) - g(x)));
  }
  return worst;
}

double four_term_product(const std::function<double(double)>& rho, double x0, double rho_pp, double e, double x,
                         double y) {
  const double num = rho(x0 + e * x + e * y) - rho(x0 + e * y) - rho(x0 + e * x) + rho(x0);
  return num / (e * e * rho_pp);
}

std::vector<std::vector<double>> uniform_points(std::size_t d, double A, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(-A, A);
  std::vector<std::vector<double>> pts(n, std::vector<double>(d));
  for (auto& p : pts)
    for (double& v : p) v = u(gen);
  return pts;
}

std::uint64_t ulp_distance(double a, double b) {
  if (a == b) return 0;
  auto key = [](double v) {
    const auto bits = std::bit_cast<std::int64_t>(v);
    return bits < 0 ? std::numeric_limits<std::int64_t>::min() - bits : bits;
  };
  const std::int64_t ka = key(a), kb = key(b);
  return ka > kb ? static_cast<std::uint64_t>(ka) - static_cast<std::uint64_t>(kb)
                 : static_cast<std::uint64_t>(kb) - static_cast<std::uint64_t>(ka);
}

}  // namespace oracle
