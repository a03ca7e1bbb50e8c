#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace anyact {

struct ActivationSpec;
using ActivationPtr = std::shared_ptr<const ActivationSpec>;

// Either the literal relu, the literal identity, or a registry activation.
class ActivationTag {
 public:
  enum class Kind { Relu, Identity, Named };

  ActivationTag() = default;
  static ActivationTag relu();
  static ActivationTag identity();
  static ActivationTag named(ActivationPtr spec);

  Kind kind() const noexcept { return kind_; }
  const ActivationPtr& spec() const noexcept { return spec_; }
  bool is_identity() const noexcept { return kind_ == Kind::Identity; }
  // True for the literal and for a registry "relu" reference.
  bool is_relu() const noexcept;
  std::string name() const;

  double apply(double x) const;

  friend bool operator==(const ActivationTag& a, const ActivationTag& b);

 private:
  Kind kind_ = Kind::Identity;
  ActivationPtr spec_;
};

struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;  // row-major

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}
  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

struct Layer {
  Matrix weights;  // rows = fan-out, cols = fan-in
  std::vector<double> bias;
  ActivationTag activation;

  std::size_t fan_in() const noexcept { return weights.cols; }
  std::size_t fan_out() const noexcept { return weights.rows; }

  friend bool operator==(const Layer&, const Layer&) = default;
};

struct Network {
  std::size_t input_dim = 0;
  std::vector<Layer> layers;

  std::size_t output_dim() const noexcept { return layers.empty() ? input_dim : layers.back().fan_out(); }
  std::size_t hidden_count() const noexcept { return layers.empty() ? 0 : layers.size() - 1; }

  friend bool operator==(const Network&, const Network&) = default;
};

struct Box {
  double half_width = 1.0;
  std::size_t dim = 1;
};

struct ShapeReport {
  std::size_t width = 0;
  std::size_t depth = 0;
  std::vector<std::size_t> dims;  // input_dim, then fan-out of every layer
};

ShapeReport validate_network(const Network& net);

// Forward pass with reusable scratch storage. Each affine row is summed
// pairwise over the products w_j*a_j followed by the bias, so the result is
// a fixed function of the stored parameters.
class Evaluator {
 public:
  explicit Evaluator(const Network& net);
  std::span<const double> operator()(std::span<const double> x);
  // Pre-activation values of hidden layer l from the most recent call.
  std::span<const double> pre_activation(std::size_t l) const;

 private:
  const Network* net_;
  std::vector<std::vector<double>> pre_;
  std::vector<std::vector<double>> post_;
  std::vector<double> scratch_;
};

std::vector<double> eval_network(const Network& net, std::span<const double> x);
double eval_scalar(const Network& net, double x);

// Pairwise sum of w[j]*a[j] for j < n followed by bias.
double affine_row(const double* w, const double* a, std::size_t n, double bias, double* scratch);

struct SupEstimate {
  double value = 0.0;
  std::size_t lattice = 0;
  std::size_t corners = 0;
  std::size_t random = 0;
  std::size_t total() const noexcept { return lattice + corners + random; }
};

// Sampled (lower) estimate of sup over the box of the max-abs output difference.
double sup_distance(const Network& a, const Network& b, const Box& box, std::size_t n_samples, std::uint64_t seed);
SupEstimate sup_distance_detailed(const Network& a, const Network& b, const Box& box, std::size_t n_samples,
                                  std::uint64_t seed);

}  // namespace anyact
