#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "anyact/net_ir.hpp"

namespace anyact {

using ParamMap = std::map<std::string, double>;
using ScalarFn = std::function<double(double)>;

struct Smoothness {
  // Piecewise smooth functions carry the kink point and the highest order
  // of derivative that is still continuous there.
  bool smooth = true;
  int order = 0;
  double kink_x = 0.0;
};

enum class ActivationClass { A1k, A2, A2Tilde, A3 };

struct Membership {
  ActivationClass cls = ActivationClass::A3;
  int k = 0;  // kink order, A1k only
  friend bool operator==(const Membership&, const Membership&) = default;
};

std::string to_string(const Membership& m);
std::optional<Membership> parse_membership(std::string_view s);

struct KinkWitness {
  double x0 = 0.0;
  int order = 0;
  double L1 = 0.0;  // left slope of the order-th derivative
  double L2 = 0.0;  // right slope
};

// rho(x) = (x + b0) * h(x) + b1 with h bounded, h -> L1 at -inf, L2 at +inf.
struct SDecomposition {
  double b0 = 0.0;
  double b1 = 0.0;
  double L1 = 0.0;
  double L2 = 0.0;
  ScalarFn h;
};

struct CurvaturePoint {
  double x0 = 0.0;
  double rho_pp = 0.0;
};

struct SlopePoint {
  double x1 = 0.0;
  double rho_p = 0.0;
};

// Class facts known in closed form. Built-ins carry these; user specs may
// declare them, otherwise classify() probes numerically.
struct DeclaredClass {
  std::vector<Membership> memberships;
  std::optional<KinkWitness> kink;
  std::optional<SDecomposition> s_decomp;
  std::optional<std::pair<double, double>> asymptotes;
  // Limits of y*(1{y>0} - h_hat(y)) at -inf and +inf for the normalized h_hat.
  std::optional<std::pair<double, double>> gap_tails;
};

struct ActivationSpec {
  std::string name;
  ParamMap params;
  ScalarFn eval;
  ScalarFn d1;  // empty when no closed form is registered
  ScalarFn d2;
  Smoothness smoothness;
  std::optional<DeclaredClass> declared;

  double operator()(double x) const { return eval(x); }
};

class Registry {
 public:
  using Factory = std::function<ActivationSpec(const ParamMap&)>;

  static const Registry& builtin();

  void add(const std::string& name, Factory factory);
  bool contains(std::string_view name) const;
  std::vector<std::string> names() const;
  // Validates parameter keys and domains, fills in defaults.
  ActivationPtr make(std::string_view name, const ParamMap& params = {}) const;

 private:
  std::map<std::string, Factory, std::less<>> factories_;
};

// Names of the twenty registered activations in registry order.
const std::vector<std::string>& builtin_names();

double eval_activation(const ActivationSpec& spec, double x);

enum class DerivativeMethod { Analytic, FiniteDifference };

struct DerivativeValue {
  double value = 0.0;
  DerivativeMethod method = DerivativeMethod::Analytic;
};

DerivativeValue eval_derivative(const ActivationSpec& spec, int order, double x);
double central_difference(const ScalarFn& f, int order, double x);

// Numerical helpers shared by the activation formulas.
double sigmoid(double x);
double softplus(double x);

}  // namespace anyact
