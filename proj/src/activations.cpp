#include "anyact/activations.hpp"

#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <numbers>

#include "anyact/error.hpp"

namespace anyact {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kLn2 = std::numbers::ln2;
const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * kPi);

double sig1(double x) { return sigmoid(x) * sigmoid(-x); }
double sig2(double x) { return sig1(x) * (1.0 - 2.0 * sigmoid(x)); }
double sig3(double x) {
  const double s1 = sig1(x);
  const double c = 1.0 - 2.0 * sigmoid(x);
  return s1 * c * c - 2.0 * s1 * s1;
}

double dsilu(double x) { return sigmoid(x) + x * sig1(x); }
double dsilu1(double x) { return 2.0 * sig1(x) + x * sig2(x); }
double dsilu2(double x) { return 3.0 * sig2(x) + x * sig3(x); }

double softsign(double x) { return x / (1.0 + std::fabs(x)); }
double softsign1(double x) {
  const double d = 1.0 + std::fabs(x);
  return 1.0 / (d * d);
}
double softsign2(double x) {
  const double d = 1.0 + std::fabs(x);
  return (x > 0 ? -2.0 : 2.0) / (d * d * d);
}

// (softplus(x) - ln 2) / x, continuous at 0 with value 1/2.
double softplus_h(double x) {
  if (x == 0.0) return 0.5;
  if (std::fabs(x) < 1.0) return std::log1p(std::expm1(x) / 2.0) / x;
  return (softplus(x) - kLn2) / x;
}

// expm1(x)/x, continuous at 0 with value 1.
double expm1_over_x(double x) { return x == 0.0 ? 1.0 : std::expm1(x) / x; }

class ParamReader {
 public:
  ParamReader(std::string_view name, const ParamMap& given, ParamMap defaults)
      : name_(name), merged_(std::move(defaults)) {
    for (const auto& [k, v] : given) {
      auto it = merged_.find(k);
      if (it == merged_.end()) {
        throw Error(ErrorKind::InvalidParameter, fmt::format("{} has no parameter '{}'", name_, k));
      }
      if (!std::isfinite(v)) {
        throw Error(ErrorKind::InvalidParameter, fmt::format("{}: parameter '{}' must be finite", name_, k));
      }
      it->second = v;
    }
  }

  double operator[](const std::string& key) const { return merged_.at(key); }

  void require(bool ok, std::string_view what) const {
    if (!ok) throw Error(ErrorKind::InvalidParameter, fmt::format("{}: {} required", name_, what));
  }

  const ParamMap& params() const { return merged_; }

 private:
  std::string_view name_;
  ParamMap merged_;
};

Membership a1k(int k) { return {ActivationClass::A1k, k}; }
Membership a2t() { return {ActivationClass::A2Tilde, 0}; }
Membership a3() { return {ActivationClass::A3, 0}; }

Smoothness kinked(int order, double x = 0.0) { return {false, order, x}; }

ActivationSpec base(std::string name, ParamMap params, ScalarFn f, ScalarFn d1, ScalarFn d2,
                    Smoothness smooth = {}) {
  ActivationSpec s;
  s.name = std::move(name);
  s.params = std::move(params);
  s.eval = std::move(f);
  s.d1 = std::move(d1);
  s.d2 = std::move(d2);
  s.smoothness = smooth;
  return s;
}

DeclaredClass tilde_class(double b0, double b1, double L1, double L2, ScalarFn h, std::pair<double, double> tails) {
  DeclaredClass c;
  c.memberships = {a2t()};
  c.s_decomp = SDecomposition{b0, b1, L1, L2, std::move(h)};
  c.gap_tails = tails;
  return c;
}

DeclaredClass s_shaped_class(double lo, double hi) {
  DeclaredClass c;
  c.memberships = {a3()};
  c.asymptotes = std::make_pair(lo, hi);
  return c;
}

ActivationSpec make_relu(const ParamMap& given) {
  ParamReader p("relu", given, {});
  auto s = base(
      "relu", p.params(), [](double x) { return x > 0 ? x : 0.0; }, [](double x) { return x > 0 ? 1.0 : 0.0; },
      [](double) { return 0.0; }, kinked(0));
  s.declared = DeclaredClass{{a1k(0)}, KinkWitness{0.0, 0, 0.0, 1.0}, {}, {}, {}};
  return s;
}

ActivationSpec make_leaky_relu(const ParamMap& given) {
  ParamReader p("leaky_relu", given, {{"alpha", 0.01}});
  const double a = p["alpha"];
  p.require(a != 1.0, "alpha != 1 (alpha = 1 is linear)");
  auto s = base(
      "leaky_relu", p.params(), [a](double x) { return x > 0 ? x : a * x; },
      [a](double x) { return x > 0 ? 1.0 : a; }, [](double) { return 0.0; }, kinked(0));
  s.declared = DeclaredClass{{a1k(0)}, KinkWitness{0.0, 0, a, 1.0}, {}, {}, {}};
  return s;
}

ActivationSpec make_relu2(const ParamMap& given) {
  ParamReader p("relu2", given, {});
  auto s = base(
      "relu2", p.params(), [](double x) { return x > 0 ? x * x : 0.0; },
      [](double x) { return x > 0 ? 2.0 * x : 0.0; }, [](double x) { return x > 0 ? 2.0 : 0.0; }, kinked(1));
  s.declared = DeclaredClass{{a1k(1)}, KinkWitness{0.0, 1, 0.0, 2.0}, {}, {}, {}};
  return s;
}

// lambda * (x for x > 0, alpha*(exp(x/c) - 1) for x <= 0); ELU, CELU and SELU
// differ only in (lambda, alpha, c).
ActivationSpec make_exp_linear(const std::string& name, ParamMap params, double lambda, double alpha, double c) {
  auto f = [=](double x) { return x > 0 ? lambda * x : lambda * alpha * std::expm1(x / c); };
  auto d1 = [=](double x) { return x > 0 ? lambda : lambda * alpha / c * std::exp(x / c); };
  auto d2 = [=](double x) { return x > 0 ? 0.0 : lambda * alpha / (c * c) * std::exp(x / c); };
  const bool c1 = alpha == c;  // first derivative continuous at 0
  auto s = base(name, std::move(params), f, d1, d2, kinked(c1 ? 1 : 0));
  KinkWitness kink = c1 ? KinkWitness{0.0, 1, lambda * alpha / (c * c), 0.0} : KinkWitness{0.0, 0, lambda * alpha / c, lambda};
  auto h = [=](double x) { return x > 0 ? lambda : lambda * alpha / c * expm1_over_x(x / c); };
  DeclaredClass d = tilde_class(0.0, 0.0, 0.0, lambda, h, {alpha * lambda, 0.0});
  d.memberships = {a1k(kink.order), a2t()};
  d.kink = kink;
  s.declared = d;
  return s;
}

ActivationSpec make_elu(const ParamMap& given) {
  ParamReader p("elu", given, {{"alpha", 1.0}});
  return make_exp_linear("elu", p.params(), 1.0, p["alpha"], 1.0);
}

ActivationSpec make_celu(const ParamMap& given) {
  ParamReader p("celu", given, {{"alpha", 1.0}});
  p.require(p["alpha"] > 0, "alpha > 0");
  return make_exp_linear("celu", p.params(), 1.0, p["alpha"], p["alpha"]);
}

ActivationSpec make_selu(const ParamMap& given) {
  ParamReader p("selu", given, {{"lambda", 1.0507009873554805}, {"alpha", 1.6732632423543772}});
  p.require(p["lambda"] > 0, "lambda > 0");
  return make_exp_linear("selu", p.params(), p["lambda"], p["alpha"], 1.0);
}

ActivationSpec make_softplus(const ParamMap& given) {
  ParamReader p("softplus", given, {});
  auto s = base("softplus", p.params(), softplus, sigmoid, sig1);
  s.declared = tilde_class(0.0, kLn2, 0.0, 1.0, softplus_h, {kLn2, kLn2});
  return s;
}

ActivationSpec make_gelu(const ParamMap& given) {
  ParamReader p("gelu", given, {{"mu", 0.0}, {"sigma", 1.0}});
  const double mu = p["mu"];
  const double sg = p["sigma"];
  p.require(sg > 0, "sigma > 0");
  auto cdf = [=](double x) { return 0.5 * std::erfc(-(x - mu) / (sg * std::numbers::sqrt2)); };
  auto pdf = [=](double x) {
    const double z = (x - mu) / sg;
    return kInvSqrt2Pi * std::exp(-0.5 * z * z);
  };
  auto s = base(
      "gelu", p.params(), [=](double x) { return x * cdf(x); },
      [=](double x) { return cdf(x) + x * pdf(x) / sg; },
      [=](double x) {
        const double z = (x - mu) / sg;
        return (2.0 * pdf(x) - x * z * pdf(x) / sg) / sg;
      });
  s.declared = tilde_class(0.0, 0.0, 0.0, 1.0, cdf, {0.0, 0.0});
  return s;
}

ActivationSpec make_swish_like(const std::string& name, ParamMap params, double beta) {
  auto s = base(
      name, std::move(params), [=](double x) { return x * sigmoid(beta * x); },
      [=](double x) { return sigmoid(beta * x) + beta * x * sig1(beta * x); },
      [=](double x) { return 2.0 * beta * sig1(beta * x) + beta * beta * x * sig2(beta * x); });
  s.declared = tilde_class(0.0, 0.0, 0.0, 1.0, [=](double x) { return sigmoid(beta * x); }, {0.0, 0.0});
  return s;
}

ActivationSpec make_silu(const ParamMap& given) {
  ParamReader p("silu", given, {});
  return make_swish_like("silu", p.params(), 1.0);
}

ActivationSpec make_swish(const ParamMap& given) {
  ParamReader p("swish", given, {{"beta", 1.0}});
  p.require(p["beta"] > 0, "beta > 0");
  return make_swish_like("swish", p.params(), p["beta"]);
}

ActivationSpec make_mish(const ParamMap& given) {
  ParamReader p("mish", given, {});
  auto t = [](double x) { return std::tanh(softplus(x)); };
  auto t1 = [t](double x) {
    const double v = t(x);
    return (1.0 - v * v) * sigmoid(x);
  };
  auto t2 = [t, t1](double x) {
    const double v = t(x);
    return -2.0 * v * t1(x) * sigmoid(x) + (1.0 - v * v) * sig1(x);
  };
  auto s = base(
      "mish", p.params(), [t](double x) { return x * t(x); }, [t, t1](double x) { return t(x) + x * t1(x); },
      [t1, t2](double x) { return 2.0 * t1(x) + x * t2(x); });
  s.declared = tilde_class(0.0, 0.0, 0.0, 1.0, t, {0.0, 0.0});
  return s;
}

ActivationSpec make_sigmoid(const ParamMap& given) {
  ParamReader p("sigmoid", given, {});
  auto s = base("sigmoid", p.params(), sigmoid, sig1, sig2);
  s.declared = s_shaped_class(0.0, 1.0);
  return s;
}

ActivationSpec make_tanh(const ParamMap& given) {
  ParamReader p("tanh", given, {});
  auto s = base(
      "tanh", p.params(), [](double x) { return std::tanh(x); },
      [](double x) {
        const double t = std::tanh(x);
        return 1.0 - t * t;
      },
      [](double x) {
        const double t = std::tanh(x);
        return -2.0 * t * (1.0 - t * t);
      });
  s.declared = s_shaped_class(-1.0, 1.0);
  return s;
}

ActivationSpec make_arctan(const ParamMap& given) {
  ParamReader p("arctan", given, {});
  auto s = base(
      "arctan", p.params(), [](double x) { return std::atan(x); }, [](double x) { return 1.0 / (1.0 + x * x); },
      [](double x) {
        const double d = 1.0 + x * x;
        return -2.0 * x / (d * d);
      });
  s.declared = s_shaped_class(-kPi / 2, kPi / 2);
  return s;
}

ActivationSpec make_softsign(const ParamMap& given) {
  ParamReader p("softsign", given, {});
  auto s = base("softsign", p.params(), softsign, softsign1, softsign2, kinked(1));
  s.declared = s_shaped_class(-1.0, 1.0);
  return s;
}

ActivationSpec make_dsilu(const ParamMap& given) {
  ParamReader p("dsilu", given, {});
  auto s = base("dsilu", p.params(), dsilu, dsilu1, dsilu2);
  s.declared = s_shaped_class(0.0, 1.0);
  return s;
}

ActivationSpec make_srs(const ParamMap& given) {
  ParamReader p("srs", given, {{"alpha", 2.0}, {"beta", 3.0}});
  const double a = p["alpha"];
  const double b = p["beta"];
  p.require(a > 0 && b > 0, "alpha > 0 and beta > 0");
  // The denominator x/alpha + exp(-x/beta) has minimum (b/a)(1 - ln(b/a)).
  p.require(b < std::numbers::e * a, "beta < e*alpha (otherwise the denominator vanishes)");
  // For x < 0 the form alpha*q/(q + alpha) with q = x*exp(x/beta) avoids
  // overflow of exp(-x/beta).
  auto f = [=](double x) {
    if (x >= 0) return x / (x / a + std::exp(-x / b));
    const double q = x * std::exp(x / b);
    return a * q / (q + a);
  };
  auto d1 = [=](double x) {
    if (x >= 0) {
      const double e = std::exp(-x / b);
      const double D = x / a + e;
      const double D1 = 1.0 / a - e / b;
      return (D - x * D1) / (D * D);
    }
    const double E = std::exp(x / b);
    const double q = x * E;
    const double q1 = E * (1.0 + x / b);
    const double r = q + a;
    return a * a * q1 / (r * r);
  };
  auto d2 = [=](double x) {
    if (x >= 0) {
      const double e = std::exp(-x / b);
      const double D = x / a + e;
      const double D1 = 1.0 / a - e / b;
      const double D2 = e / (b * b);
      return (-2.0 * D1 - x * D2) / (D * D) + 2.0 * x * D1 * D1 / (D * D * D);
    }
    const double E = std::exp(x / b);
    const double q = x * E;
    const double q1 = E * (1.0 + x / b);
    const double q2 = E * (2.0 / b + x / (b * b));
    const double r = q + a;
    return a * a * (q2 / (r * r) - 2.0 * q1 * q1 / (r * r * r));
  };
  auto s = base("srs", p.params(), f, d1, d2);
  s.declared = s_shaped_class(0.0, a);
  return s;
}

ActivationSpec make_x_dsilu(const ParamMap& given) {
  ParamReader p("x_dsilu", given, {});
  auto s = base(
      "x_dsilu", p.params(), [](double x) { return x * dsilu(x); },
      [](double x) { return dsilu(x) + x * dsilu1(x); }, [](double x) { return 2.0 * dsilu1(x) + x * dsilu2(x); });
  s.declared = tilde_class(0.0, 0.0, 0.0, 1.0, dsilu, {0.0, 0.0});
  return s;
}

ActivationSpec make_x_softsign_shift(const ParamMap& given) {
  ParamReader p("x_softsign_shift", given, {});
  auto h = [](double x) { return softsign(x) / 2.0 + 0.5; };
  auto s = base(
      "x_softsign_shift", p.params(), [h](double x) { return x * h(x); },
      [h](double x) { return h(x) + x * softsign1(x) / 2.0; },
      [](double x) { return softsign1(x) + x * softsign2(x) / 2.0; }, kinked(2));
  s.declared = tilde_class(0.0, 0.0, 0.0, 1.0, h, {0.5, 0.5});
  return s;
}

ActivationSpec make_x_arctan_shift(const ParamMap& given) {
  ParamReader p("x_arctan_shift", given, {});
  auto h = [](double x) { return std::atan(x) / kPi + 0.5; };
  auto s = base(
      "x_arctan_shift", p.params(), [h](double x) { return x * h(x); },
      [h](double x) { return h(x) + x / (kPi * (1.0 + x * x)); },
      [](double x) {
        const double d = 1.0 + x * x;
        return 2.0 / (kPi * d * d);
      });
  s.declared = tilde_class(0.0, 0.0, 0.0, 1.0, h, {1.0 / kPi, 1.0 / kPi});
  return s;
}

}  // namespace

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) {
  if (x > 0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

std::string to_string(const Membership& m) {
  switch (m.cls) {
    case ActivationClass::A1k: return fmt::format("A1k({})", m.k);
    case ActivationClass::A2: return "A2";
    case ActivationClass::A2Tilde: return "A2tilde";
    case ActivationClass::A3: return "A3";
  }
  return "?";
}

std::optional<Membership> parse_membership(std::string_view s) {
  if (s == "A2") return Membership{ActivationClass::A2, 0};
  if (s == "A2tilde") return Membership{ActivationClass::A2Tilde, 0};
  if (s == "A3") return Membership{ActivationClass::A3, 0};
  if (s.starts_with("A1k(") && s.ends_with(")") && s.size() > 5) {
    int k = 0;
    for (char c : s.substr(4, s.size() - 5)) {
      if (c < '0' || c > '9') return std::nullopt;
      k = k * 10 + (c - '0');
    }
    return Membership{ActivationClass::A1k, k};
  }
  return std::nullopt;
}

const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names = {
      "relu",    "leaky_relu", "relu2",   "elu",    "celu",     "selu",  "softplus",
      "gelu",    "silu",       "swish",   "mish",   "sigmoid",  "tanh",  "arctan",
      "softsign", "dsilu",     "srs",     "x_dsilu", "x_softsign_shift", "x_arctan_shift"};
  return names;
}

const Registry& Registry::builtin() {
  static const Registry reg = [] {
    Registry r;
    r.add("relu", make_relu);
    r.add("leaky_relu", make_leaky_relu);
    r.add("relu2", make_relu2);
    r.add("elu", make_elu);
    r.add("celu", make_celu);
    r.add("selu", make_selu);
    r.add("softplus", make_softplus);
    r.add("gelu", make_gelu);
    r.add("silu", make_silu);
    r.add("swish", make_swish);
    r.add("mish", make_mish);
    r.add("sigmoid", make_sigmoid);
    r.add("tanh", make_tanh);
    r.add("arctan", make_arctan);
    r.add("softsign", make_softsign);
    r.add("dsilu", make_dsilu);
    r.add("srs", make_srs);
    r.add("x_dsilu", make_x_dsilu);
    r.add("x_softsign_shift", make_x_softsign_shift);
    r.add("x_arctan_shift", make_x_arctan_shift);
    return r;
  }();
  return reg;
}

void Registry::add(const std::string& name, Factory factory) { factories_[name] = std::move(factory); }

bool Registry::contains(std::string_view name) const { return factories_.find(name) != factories_.end(); }

std::vector<std::string> Registry::names() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : factories_) out.push_back(k);
  return out;
}

ActivationPtr Registry::make(std::string_view name, const ParamMap& params) const {
  auto it = factories_.find(name);
  if (it == factories_.end()) {
    throw Error(ErrorKind::UnknownActivation, fmt::format("no activation named '{}'", name));
  }
  ActivationSpec spec = it->second(params);
  if (spec.name.empty()) spec.name = std::string(name);
  if (!spec.eval) throw Error(ErrorKind::InvalidParameter, fmt::format("activation '{}' has no evaluator", name));
  return std::make_shared<const ActivationSpec>(std::move(spec));
}

double eval_activation(const ActivationSpec& spec, double x) { return spec.eval(x); }

double central_difference(const ScalarFn& f, int order, double x) {
  const double scale = std::max(1.0, std::fabs(x));
  const double eps = std::numeric_limits<double>::epsilon();
  if (order == 1) {
    const double h = std::cbrt(eps) * scale;
    return (f(x + h) - f(x - h)) / (2.0 * h);
  }
  const double h = std::sqrt(std::sqrt(eps)) * scale;
  return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

DerivativeValue eval_derivative(const ActivationSpec& spec, int order, double x) {
  if (order != 1 && order != 2) {
    throw Error(ErrorKind::InvalidParameter, fmt::format("derivative order {} not supported", order));
  }
  if (!spec.smoothness.smooth && x == spec.smoothness.kink_x && order > spec.smoothness.order) {
    throw Error(ErrorKind::AtKink,
                fmt::format("{}: derivative of order {} undefined at x = {}", spec.name, order, x), {{}, {}, x});
  }
  const ScalarFn& d = order == 1 ? spec.d1 : spec.d2;
  if (d) return {d(x), DerivativeMethod::Analytic};
  return {central_difference(spec.eval, order, x), DerivativeMethod::FiniteDifference};
}

}  // namespace anyact
