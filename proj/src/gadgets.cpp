#include "anyact/gadgets.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fmt/format.h>
#include <limits>

#include "anyact/error.hpp"

namespace anyact {

namespace {

const double kMachineEps = std::numeric_limits<double>::epsilon();
constexpr std::size_t kGrid = 4096;

double relu(double x) { return x > 0 ? x : 0.0; }

// One hidden layer of `act` neurons rho(w_in[r] * x + b_in[r]) followed by
// the output combination sum_r w_out[r] * h_r + b_out.
Network scalar_net(const std::vector<double>& w_in, const std::vector<double>& b_in, const ActivationTag& act,
                   const std::vector<double>& w_out, double b_out) {
  Network net;
  net.input_dim = 1;
  Layer hidden;
  hidden.weights = Matrix(w_in.size(), 1);
  hidden.weights.data = w_in;
  hidden.bias = b_in;
  hidden.activation = act;
  Layer out;
  out.weights = Matrix(1, w_out.size());
  out.weights.data = w_out;
  out.bias = {b_out};
  out.activation = ActivationTag::identity();
  net.layers = {std::move(hidden), std::move(out)};
  return net;
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw Error(ErrorKind::InvalidParameter, fmt::format("{} must be positive and finite, got {}", what, v));
  }
}

double gadget_grid_error(const Network& net, const std::function<double(double)>& target, double M) {
  Evaluator ev(net);
  return grid_sup_error([&](double x) { return ev(std::span<const double>(&x, 1))[0]; }, target, M, kGrid);
}

double derivative_or_nan(const ActivationSpec& spec, int order, double x) {
  if (order == 0) return spec.eval(x);
  try {
    return eval_derivative(spec, order, x).value;
  } catch (const Error&) {
    return std::nan("");
  }
}

struct KinkData {
  KinkWitness kink;
  SlopePoint slope;
};

KinkData kink_data(const Classification& cls) {
  if (!cls.kink) throw Error(ErrorKind::NotInA, fmt::format("{}: no kink witness", cls.spec->name));
  KinkData d{*cls.kink, {}};
  if (d.kink.order >= 1) {
    if (!cls.slope_point) throw Error(ErrorKind::NoSlopePoint, fmt::format("{}: no slope point", cls.spec->name));
    d.slope = *cls.slope_point;
  }
  return d;
}

}  // namespace

std::string to_string(GadgetTarget t) {
  switch (t) {
    case GadgetTarget::Relu: return "relu";
    case GadgetTarget::Derivative: return "derivative";
    case GadgetTarget::Identity: return "identity";
    case GadgetTarget::Product: return "product";
  }
  return "?";
}

std::string to_string(Route r) {
  switch (r) {
    case Route::A2Tilde: return "A2tilde";
    case Route::A2: return "A2";
    case Route::A1k: return "A1k";
    case Route::A3: return "A3";
  }
  return "?";
}

std::optional<Route> parse_route(std::string_view s) {
  if (s == "A2tilde") return Route::A2Tilde;
  if (s == "A2") return Route::A2;
  if (s == "A1k" || s.starts_with("A1k(")) return Route::A1k;
  if (s == "A3") return Route::A3;
  return std::nullopt;
}

double Gadget::operator()(double x) const { return eval_scalar(net, x); }

double Gadget::operator()(double x, double y) const {
  const std::array<double, 2> in{x, y};
  Evaluator ev(net);
  return ev(in)[0];
}

std::int64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::int64_t c = 1;
  for (int j = 1; j <= k; ++j) c = c * (n - k + j) / j;
  return c;
}

std::int64_t binom_alternating_sum(int n, int i) {
  if (n < 0 || i < 0 || i > n) {
    throw Error(ErrorKind::InvalidParameter, fmt::format("need 0 <= i <= n, got n = {}, i = {}", n, i));
  }
  if (n > 20) throw Error(ErrorKind::Overflow, fmt::format("n = {} exceeds 20", n));
  __int128 sum = 0;
  for (int l = 0; l <= n; ++l) {
    __int128 power = 1;
    for (int j = 0; j < i; ++j) power *= l;  // 0^0 = 1
    const __int128 term = static_cast<__int128>(binomial(n, l)) * power;
    sum += (l % 2 == 0) ? term : -term;
  }
  return static_cast<std::int64_t>(sum);
}

namespace {

Network difference_net(const ActivationPtr& spec, int k, double eta) {
  std::vector<double> w_in(k + 1, 1.0), b_in(k + 1), w_out(k + 1);
  const double denom = std::pow(-eta, k);
  for (int l = 0; l <= k; ++l) {
    b_in[l] = l * eta;
    w_out[l] = ((l % 2 == 0) ? 1.0 : -1.0) * static_cast<double>(binomial(k, l)) / denom;
  }
  return scalar_net(w_in, b_in, ActivationTag::named(spec), w_out, 0.0);
}

}  // namespace

Gadget derivative_gadget(const ActivationPtr& spec, int k, double eta, double M) {
  if (k < 0) throw Error(ErrorKind::InvalidParameter, "derivative order must be non-negative");
  if (k > 20) throw Error(ErrorKind::Overflow, fmt::format("derivative order {} exceeds 20", k));
  require_positive(eta, "eta");
  require_positive(M, "M");
  const double floor = std::pow(kMachineEps, 1.0 / (k + 2));
  if (k >= 1 && eta < floor) {
    throw Error(ErrorKind::EtaTooSmall, fmt::format("eta = {} below the cancellation floor {} for k = {}", eta, floor, k),
                {{}, {}, floor});
  }
  Gadget g;
  g.net = difference_net(spec, k, eta);
  g.target = GadgetTarget::Derivative;
  g.order = k;
  g.scale_param = eta;
  g.domain_half_width = M;
  g.aux = {{"eta", eta}};
  if (k <= 2) {
    g.reported_error = gadget_grid_error(g.net, [&](double x) { return derivative_or_nan(*spec, k, x); }, M);
  } else {
    const Network finer = difference_net(spec, k, std::max(eta / 2.0, floor));
    g.reported_error = gadget_grid_error(g.net, [&](double x) { return eval_scalar(finer, x); }, M);
  }
  return g;
}

Gadget identity_gadget(const ActivationPtr& spec, double x1, double eta, double M) {
  require_positive(eta, "eta");
  require_positive(M, "M");
  const double slope = eval_derivative(*spec, 1, x1).value;
  if (slope == 0.0 || !std::isfinite(slope)) {
    throw Error(ErrorKind::NoSlopePoint, fmt::format("{}: rho'({}) = {}", spec->name, x1, slope));
  }
  const double c = 1.0 / (eta * slope);
  Gadget g;
  g.net = scalar_net({eta}, {x1}, ActivationTag::named(spec), {c}, -(c * spec->eval(x1)));
  g.target = GadgetTarget::Identity;
  g.scale_param = eta;
  g.domain_half_width = M;
  g.aux = {{"eta", eta}, {"x1", x1}};
  g.reported_error = gadget_grid_error(g.net, [](double x) { return x; }, M);
  return g;
}

Gadget identity_gadget(const Classification& cls, double eta, double M) {
  if (!cls.slope_point) throw Error(ErrorKind::NoSlopePoint, fmt::format("{}: no slope point", cls.spec->name));
  return identity_gadget(cls.spec, cls.slope_point->x1, eta, M);
}

Gadget product_gadget(const ActivationPtr& spec, double x0, double eps, double A) {
  require_positive(eps, "eps");
  require_positive(A, "A");
  const double floor = std::sqrt(std::sqrt(kMachineEps));
  if (eps < floor) {
    throw Error(ErrorKind::EpsTooSmall, fmt::format("eps = {} below the cancellation floor {}", eps, floor),
                {{}, {}, floor});
  }
  const double curv = eval_derivative(*spec, 2, x0).value;
  if (curv == 0.0 || !std::isfinite(curv)) {
    throw Error(ErrorKind::NoCurvaturePoint, fmt::format("{}: rho''({}) = {}", spec->name, x0, curv));
  }
  const double c = 1.0 / (eps * eps * curv);
  Network net;
  net.input_dim = 2;
  Layer hidden;
  // Neuron order (y term, x term, x + y term) keeps Gamma(x, 0), Gamma(0, y)
  // and Gamma(x, y) - Gamma(y, x) exactly zero under pairwise summation.
  hidden.weights = Matrix::from_rows({{0.0, eps}, {eps, 0.0}, {eps, eps}});
  hidden.bias = {x0, x0, x0};
  hidden.activation = ActivationTag::named(spec);
  Layer out;
  out.weights = Matrix::from_rows({{-c, -c, c}});
  out.bias = {c * spec->eval(x0)};
  out.activation = ActivationTag::identity();
  net.layers = {std::move(hidden), std::move(out)};

  Gadget g;
  g.net = std::move(net);
  g.target = GadgetTarget::Product;
  g.scale_param = eps;
  g.domain_half_width = A;
  g.aux = {{"eps", eps}, {"x0", x0}};
  Evaluator ev(g.net);
  double worst = 0.0;
  constexpr int n = 64;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const std::array<double, 2> p{-A + 2.0 * A * i / (n - 1), -A + 2.0 * A * j / (n - 1)};
      const double e = std::fabs(ev(p)[0] - p[0] * p[1]);
      if (!(e <= worst)) worst = e;
    }
  }
  g.reported_error = worst;
  return g;
}

Gadget product_gadget(const Classification& cls, double eps, double A) {
  if (!cls.curvature_point) {
    throw Error(ErrorKind::NoCurvaturePoint, fmt::format("{}: no curvature point", cls.spec->name));
  }
  return product_gadget(cls.spec, cls.curvature_point->x0, eps, A);
}

std::vector<Route> available_routes(const Classification& cls) {
  std::vector<Route> r;
  if (cls.has(ActivationClass::A2Tilde)) r.push_back(Route::A2Tilde);
  if (cls.s_decomp && (cls.has(ActivationClass::A2Tilde) || cls.has(ActivationClass::A2))) r.push_back(Route::A2);
  if (cls.has(ActivationClass::A1k) && cls.kink) r.push_back(Route::A1k);
  if (cls.has(ActivationClass::A3)) r.push_back(Route::A3);
  return r;
}

Route best_route(const Classification& cls) {
  auto r = available_routes(cls);
  if (r.empty()) throw Error(ErrorKind::NotInA, fmt::format("{}: no usable class", cls.spec->name));
  return r.front();
}

std::size_t route_width(Route r, const Classification& cls) {
  switch (r) {
    case Route::A2Tilde: return 1;
    case Route::A2: return 2;
    case Route::A1k: return static_cast<std::size_t>(cls.kink ? cls.kink->order + 2 : 2);
    case Route::A3: return 3;
  }
  return 0;
}

std::size_t route_depth(Route r) { return r == Route::A3 ? 2 : 1; }

Gadget build_relu_gadget(const Classification& cls, Route route, double M, const ReluGadgetParams& p) {
  require_positive(M, "M");
  const ActivationPtr& spec = cls.spec;
  const ActivationTag act = ActivationTag::named(spec);
  Gadget g;
  g.target = GadgetTarget::Relu;
  g.route = route;
  g.domain_half_width = M;

  switch (route) {
    case Route::A2Tilde: {
      require_positive(p.K, "K");
      const NormalizedDecomposition n = s_shape_normalize(cls);
      if (!n.tilde) throw Error(ErrorKind::NotA2Tilde, fmt::format("{}: L1*L2 != 0", spec->name));
      const double s = n.out_sign / p.K;
      g.net = scalar_net({n.in_scale * p.K}, {n.in_shift}, act, {s}, -(s * n.b1));
      g.scale_param = p.K;
      g.aux = {{"K", p.K}};
      break;
    }
    case Route::A2: {
      require_positive(p.K, "K");
      const NormalizedDecomposition n = s_shape_normalize(cls, true);
      const double c = 1.0 / (p.K * (n.L2 - n.L1));
      g.net = scalar_net({p.K, p.K}, {n.in_shift, -p.K * M + n.in_shift}, act, {c, -c}, -n.L1 * M / (n.L2 - n.L1));
      g.scale_param = p.K;
      g.aux = {{"K", p.K}};
      break;
    }
    case Route::A1k: {
      require_positive(p.eps, "eps");
      const KinkData kd = kink_data(cls);
      const KinkWitness& kw = kd.kink;
      const double span = kw.L2 - kw.L1;
      if (kw.order == 0) {
        const double c = 1.0 / (p.eps * span);
        g.net = scalar_net({p.eps, p.eps}, {kw.x0, kw.x0 - p.eps * M}, act, {c, -c}, -kw.L1 * M / span);
        g.aux = {{"eps", p.eps}};
      } else {
        require_positive(p.eta, "eta");
        const int k = kw.order;
        std::vector<double> w_in, b_in, w_out;
        const double denom = std::pow(-p.eta, k) * span * p.eps;
        for (int i = 0; i <= k; ++i) {
          w_in.push_back(p.eps);
          b_in.push_back(kw.x0 + i * p.eta);
          w_out.push_back(((i % 2 == 0) ? 1.0 : -1.0) * static_cast<double>(binomial(k, i)) / denom);
        }
        w_in.push_back(p.eta);
        b_in.push_back(kd.slope.x1);
        w_out.push_back(-kw.L1 / (span * p.eta * kd.slope.rho_p));
        // Output bias cancels every neuron's value at x = 0, so phi(0) = 0 up to
        // rounding; the finite-difference constant replaces rho^(k)(x0).
        double bias = 0.0;
        for (std::size_t r = 0; r < w_out.size(); ++r) bias -= w_out[r] * spec->eval(b_in[r]);
        g.net = scalar_net(w_in, b_in, act, w_out, bias);
        g.aux = {{"eps", p.eps}, {"eta", p.eta}, {"x1", kd.slope.x1}};
      }
      g.scale_param = p.eps;
      break;
    }
    case Route::A3: {
      require_positive(p.K, "K");
      require_positive(p.delta, "delta");
      require_positive(p.eta, "eta");
      if (!cls.asymptotes || !cls.slope_point || !cls.curvature_point) {
        throw Error(ErrorKind::NoCurvaturePoint, fmt::format("{}: missing A3 witnesses", spec->name));
      }
      const auto [L1, L2] = *cls.asymptotes;
      const double x1 = cls.slope_point->x1;
      const double x0 = cls.curvature_point->x0;
      const double ua = 1.0 / (L2 - L1);
      const double ub = -L1 * ua;
      const double va = 1.0 / (p.delta * cls.slope_point->rho_p * M);
      const double vb = -spec->eval(x1) * va;
      const double e = p.eta;
      const double c = M / (e * e * cls.curvature_point->rho_pp);

      Network net;
      net.input_dim = 1;
      Layer first;
      first.weights = Matrix::from_rows({{p.K}, {p.delta}});
      first.bias = {0.0, x1};
      first.activation = act;
      Layer second;
      second.weights = Matrix::from_rows({{0.0, e * va}, {e * ua, 0.0}, {e * ua, e * va}});
      second.bias = {e * vb + x0, e * ub + x0, (e * ub + e * vb) + x0};
      second.activation = act;
      Layer out;
      out.weights = Matrix::from_rows({{-c, -c, c}});
      out.bias = {c * spec->eval(x0)};
      out.activation = ActivationTag::identity();
      net.layers = {std::move(first), std::move(second), std::move(out)};
      g.net = std::move(net);
      g.scale_param = p.K;
      g.aux = {{"K", p.K}, {"delta", p.delta}, {"eta", p.eta}, {"x0", x0}, {"x1", x1}};
      break;
    }
  }
  g.reported_error = gadget_grid_error(g.net, relu, M);
  return g;
}

namespace {

[[noreturn]] void calibration_failed(const Classification& cls, Route route, const char* stage, const ScaleSearch& s,
                                     double tol) {
  throw Error(ErrorKind::CalibrationFailed,
              fmt::format("{} ({} route): {} search reached error {} > {} (best parameter {})", cls.spec->name,
                          to_string(route), stage, s.error, tol, s.param),
              {{}, {}, s.error});
}

constexpr double kMaxScale = 1e15;

}  // namespace

Gadget relu_gadget(const Classification& cls, double M, double tol, std::optional<Route> route) {
  require_positive(M, "M");
  require_positive(tol, "tol");
  const auto routes = available_routes(cls);
  const Route r = route ? *route : best_route(cls);
  if (std::find(routes.begin(), routes.end(), r) == routes.end()) {
    throw Error(ErrorKind::NotInA, fmt::format("{}: route {} not available", cls.spec->name, to_string(r)));
  }
  const ActivationSpec& spec = *cls.spec;
  ReluGadgetParams p;

  switch (r) {
    case Route::A2Tilde: {
      auto err = [&](double K) { return build_relu_gadget(cls, r, M, {K, 1, 1, 1}).reported_error; };
      const ScaleSearch s = calibrate_scale(err, 1.0, SearchDirection::Grow, tol, kMaxScale);
      if (!s.met) calibration_failed(cls, r, "K", s, tol);
      p.K = s.param;
      break;
    }
    case Route::A2: {
      const NormalizedDecomposition n = s_shape_normalize(cls, true);
      // psi_K(x) = (rho(Kx - b0) - b1) / (K (L2 - L1)) against L1/(L2-L1) x + ReLU(x) on [-2M, 2M].
      auto err = [&](double K) {
        const double composite = build_relu_gadget(cls, r, M, {K, 1, 1, 1}).reported_error;
        auto psi = [&](double x) { return (spec.eval(K * x + n.in_shift) - n.b1) / (K * (n.L2 - n.L1)); };
        auto target = [&](double x) { return n.L1 / (n.L2 - n.L1) * x + relu(x); };
        return std::max(composite, 2.0 * grid_sup_error(psi, target, 2.0 * M, kGrid));
      };
      const ScaleSearch s = calibrate_scale(err, 1.0, SearchDirection::Grow, tol, kMaxScale);
      if (!s.met) calibration_failed(cls, r, "K", s, tol);
      p.K = s.param;
      break;
    }
    case Route::A1k: {
      const KinkData kd = kink_data(cls);
      const KinkWitness& kw = kd.kink;
      const double span = kw.L2 - kw.L1;
      auto kink_target = [&](double x) { return (x < 0 ? kw.L1 : kw.L2) * x / span; };
      if (kw.order == 0) {
        auto err = [&](double eps) {
          const double composite = build_relu_gadget(cls, r, M, {1, eps, 1, 1}).reported_error;
          const double r0 = spec.eval(kw.x0);
          auto psi = [&](double x) { return (spec.eval(kw.x0 + eps * x) - r0) / eps / span; };
          return std::max(composite, 2.0 * grid_sup_error(psi, kink_target, 2.0 * M, kGrid));
        };
        const ScaleSearch s = calibrate_scale(err, 1.0, SearchDirection::Shrink, tol, std::sqrt(kMachineEps));
        if (!s.met) calibration_failed(cls, r, "eps", s, tol);
        p.eps = s.param;
      } else {
        if (kw.order > 2) {
          throw Error(ErrorKind::InvalidParameter, fmt::format("{}: kink order {} above 2", spec.name, kw.order));
        }
        const double dk0 = eval_derivative(spec, kw.order, kw.x0).value;
        auto stage1 = [&](double eps) {
          auto phi = [&](double x) {
            const double d = derivative_or_nan(spec, kw.order, kw.x0 + eps * x);
            return (d - dk0) / (eps * span) - kw.L1 / span * x;
          };
          return grid_sup_error(phi, relu, M, kGrid);
        };
        const ScaleSearch s1 = calibrate_scale(stage1, 1.0, SearchDirection::Shrink, tol / 2, std::sqrt(kMachineEps));
        if (!s1.met) calibration_failed(cls, r, "eps", s1, tol / 2);
        p.eps = s1.param;
        auto stage2 = [&](double eta) { return build_relu_gadget(cls, r, M, {1, p.eps, eta, 1}).reported_error; };
        const double floor = std::pow(kMachineEps, 1.0 / (kw.order + 2));
        const ScaleSearch s2 = calibrate_scale(stage2, 1.0, SearchDirection::Shrink, tol, floor);
        if (!s2.met) calibration_failed(cls, r, "eta", s2, tol);
        p.eta = s2.param;
      }
      break;
    }
    case Route::A3: {
      if (!cls.asymptotes || !cls.slope_point || !cls.curvature_point) {
        throw Error(ErrorKind::NoCurvaturePoint, fmt::format("{}: missing A3 witnesses", spec.name));
      }
      const auto [L1, L2] = *cls.asymptotes;
      auto g1 = [&](double K, double x) { return (spec.eval(K * x) - L1) / (L2 - L1); };
      const double x1 = cls.slope_point->x1;
      const double r1 = spec.eval(x1);
      const double s1 = cls.slope_point->rho_p;
      auto g2 = [&](double delta, double x) { return (spec.eval(x1 + delta * x) - r1) / (delta * s1); };

      auto stage_k = [&](double K) { return grid_sup_error([&](double x) { return g1(K, x) * x; }, relu, M, kGrid); };
      const ScaleSearch sk = calibrate_scale(stage_k, 1.0, SearchDirection::Grow, tol / 3, kMaxScale);
      if (!sk.met) calibration_failed(cls, r, "K", sk, tol / 3);
      p.K = sk.param;

      auto stage_d = [&](double delta) {
        return grid_sup_error([&](double x) { return g1(p.K, x) * g2(delta, x); }, relu, M, kGrid);
      };
      const ScaleSearch sd =
          calibrate_scale(stage_d, 1.0, SearchDirection::Shrink, 2 * tol / 3, std::sqrt(kMachineEps));
      if (!sd.met) calibration_failed(cls, r, "delta", sd, 2 * tol / 3);
      p.delta = sd.param;

      auto stage_e = [&](double eta) { return build_relu_gadget(cls, r, M, {p.K, 1, eta, p.delta}).reported_error; };
      const ScaleSearch se =
          calibrate_scale(stage_e, 1.0, SearchDirection::Shrink, tol, std::sqrt(std::sqrt(kMachineEps)));
      if (!se.met) calibration_failed(cls, r, "eta", se, tol);
      p.eta = se.param;
      break;
    }
  }
  return build_relu_gadget(cls, r, M, p);
}

}  // namespace anyact
