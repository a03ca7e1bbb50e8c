#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "anyact/classification.hpp"
#include "anyact/net_ir.hpp"

namespace anyact {

enum class GadgetTarget { Relu, Derivative, Identity, Product };

std::string to_string(GadgetTarget t);

// Construction used for a ReLU gadget, in Table 1 order of preference.
enum class Route { A2Tilde, A2, A1k, A3 };

std::string to_string(Route r);
std::optional<Route> parse_route(std::string_view s);

struct Gadget {
  Network net;
  GadgetTarget target = GadgetTarget::Relu;
  int order = 0;  // k for Derivative targets
  std::optional<Route> route;
  double scale_param = 0.0;
  double domain_half_width = 1.0;
  double reported_error = 0.0;
  ParamMap aux;  // secondary scale parameters (eta, delta, x0, ...)

  double operator()(double x) const;
  double operator()(double x, double y) const;
};

// Sum_{l=0}^{n} (-1)^l C(n, l) l^i in exact integer arithmetic, n <= 20.
std::int64_t binom_alternating_sum(int n, int i);
std::int64_t binomial(int n, int k);

// psi(x) = sum_l (-1)^l C(k,l) rho(x + l*eta) / (-eta)^k. reported_error is
// the grid sup against rho^(k) over [-M, M] (k <= 2; larger k compare
// against the same gadget at eta/2).
Gadget derivative_gadget(const ActivationPtr& spec, int k, double eta, double M = 1.0);

// g(x) = (rho(x1 + eta*x) - rho(x1)) / (eta * rho'(x1)).
Gadget identity_gadget(const Classification& cls, double eta, double M = 1.0);
Gadget identity_gadget(const ActivationPtr& spec, double x1, double eta, double M = 1.0);

// Gamma(x, y) = [rho(x0 + e x + e y) - rho(x0 + e y) - rho(x0 + e x) + rho(x0)] / (e^2 rho''(x0)).
Gadget product_gadget(const Classification& cls, double eps, double A = 1.0);
Gadget product_gadget(const ActivationPtr& spec, double x0, double eps, double A = 1.0);

// Routes available for a classification, best first.
std::vector<Route> available_routes(const Classification& cls);
Route best_route(const Classification& cls);
std::size_t route_width(Route r, const Classification& cls);
std::size_t route_depth(Route r);

struct ReluGadgetParams {
  double K = 1.0;      // input scale of the S-shaped constructions
  double eps = 1.0;    // kink zoom
  double eta = 1.0;    // finite-difference / product step
  double delta = 1.0;  // identity step inside the A3 construction
};

// ReLU gadget with explicit parameters; reported_error on a 4096 grid over [-M, M].
Gadget build_relu_gadget(const Classification& cls, Route route, double M, const ReluGadgetParams& p);

// Calibrated ReLU gadget with reported_error <= tol on the 4096 grid.
Gadget relu_gadget(const Classification& cls, double M, double tol, std::optional<Route> route = std::nullopt);

// Sup over an n-point uniform grid on [-M, M] of |approx - target|.
double grid_sup_error(const std::function<double(double)>& approx, const std::function<double(double)>& target,
                      double M, std::size_t n = 4096);

struct ScaleSearch {
  double param = 0.0;
  double error = 0.0;
  bool met = false;
  int evaluations = 0;
};

enum class SearchDirection { Grow, Shrink };

// Geometric search from `start` (x2 or /2 per step, at most 60 steps) for a
// parameter whose error is <= tol, then 20 bisection steps in log scale
// towards the last failing value. `limit` bounds the parameter (a floor
// when shrinking, a ceiling when growing).
ScaleSearch calibrate_scale(const std::function<double(double)>& error_at, double start, SearchDirection dir,
                            double tol, double limit);

struct GapConstants {
  double m = 0.0;
  double M_sup = 0.0;
  double argmin = 0.0;
  double argmax = 0.0;
  bool tail_verified = true;
};

GapConstants estimate_gap_constants(const Classification& cls);

}  // namespace anyact
