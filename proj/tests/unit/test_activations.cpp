#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "anyact/activations.hpp"
#include "anyact/classification.hpp"
#include "anyact/error.hpp"
#include "oracles.hpp"

using namespace anyact;

namespace {

const Registry& reg() { return Registry::builtin(); }

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::ParseError;
}

std::vector<std::string> membership_names(const Classification& c) {
  std::vector<std::string> out;
  for (const auto& m : c.memberships) out.push_back(to_string(m));
  return out;
}

// Central differences with steps cbrt(eps)*max(1,|x|) and eps^(1/4)*max(1,|x|).
double fd(const ActivationSpec& s, int order, double x) {
  const double eps = std::numeric_limits<double>::epsilon();
  if (order == 1) {
    const double h = std::cbrt(eps) * std::max(1.0, std::fabs(x));
    return (s.eval(x + h) - s.eval(x - h)) / (2.0 * h);
  }
  const double h = std::sqrt(std::sqrt(eps)) * std::max(1.0, std::fabs(x));
  return (s.eval(x + h) - 2.0 * s.eval(x) + s.eval(x - h)) / (h * h);
}

}  // namespace

TEST_CASE("registry lists the twenty activations") {
  CHECK(builtin_names().size() == 20);
  for (const auto& n : builtin_names()) CHECK(reg().contains(n));
  CHECK_FALSE(reg().contains("polynomial"));
  CHECK(kind_of([] { reg().make("polynomial"); }) == ErrorKind::UnknownActivation);
  CHECK(kind_of([] { reg().make("gelu", {{"tau", 1.0}}); }) == ErrorKind::InvalidParameter);
}

TEST_CASE("parameter domains are enforced") {
  CHECK(kind_of([] { reg().make("gelu", {{"sigma", -1.0}}); }) == ErrorKind::InvalidParameter);
  CHECK(kind_of([] { reg().make("gelu", {{"sigma", 0.0}}); }) == ErrorKind::InvalidParameter);
  CHECK(kind_of([] { reg().make("celu", {{"alpha", 0.0}}); }) == ErrorKind::InvalidParameter);
  CHECK(kind_of([] { reg().make("selu", {{"lambda", -2.0}}); }) == ErrorKind::InvalidParameter);
  CHECK(kind_of([] { reg().make("srs", {{"alpha", -1.0}}); }) == ErrorKind::InvalidParameter);
  CHECK(kind_of([] { reg().make("srs", {{"beta", 0.0}}); }) == ErrorKind::InvalidParameter);
  CHECK(kind_of([] { reg().make("swish", {{"beta", 0.0}}); }) == ErrorKind::InvalidParameter);
  CHECK(kind_of([] { reg().make("leaky_relu", {{"alpha", 1.0}}); }) == ErrorKind::InvalidParameter);
  CHECK(kind_of([] { reg().make("elu", {{"alpha", NAN}}); }) == ErrorKind::InvalidParameter);
  CHECK(reg().make("gelu", {{"sigma", 0.5}})->params.at("sigma") == 0.5);
  CHECK(reg().make("selu")->params.at("lambda") == 1.0507009873554805);
}

TEST_CASE("closed-form values") {
  CHECK(reg().make("softplus")->eval(0.0) == std::numbers::ln2);
  CHECK(reg().make("gelu")->eval(0.0) == 0.0);
  CHECK(reg().make("mish")->eval(0.0) == 0.0);
  CHECK(reg().make("relu2")->eval(-3.0) == 0.0);
  CHECK(reg().make("relu2")->eval(3.0) == 9.0);
  CHECK(reg().make("leaky_relu")->eval(-2.0) == -0.02);
  CHECK(reg().make("sigmoid")->eval(0.0) == 0.5);
  CHECK(reg().make("softsign")->eval(1.0) == 0.5);
  CHECK(reg().make("x_softsign_shift")->eval(1.0) == 0.75);
  CHECK(reg().make("dsilu")->eval(0.0) == 0.5);
}

TEST_CASE("evaluation stays finite on [-1e6, 1e6]") {
  for (const auto& n : builtin_names()) {
    const ActivationPtr s = reg().make(n);
    for (int i = -1000; i <= 1000; ++i) {
      const double x = 1e3 * i;
      INFO(n << " at " << x);
      CHECK(std::isfinite(s->eval(x)));
    }
    for (double x : {-1e6, -745.5, -710.0, 710.0, 745.5, 1e6}) CHECK(std::isfinite(s->eval(x)));
  }
}

TEST_CASE("monotone formulas are within 4 ulp of a long double reference on [-50, 50]") {
  using L = long double;
  const std::vector<std::pair<std::string, std::function<L(L)>>> refs = {
      {"softplus", [](L x) { return std::log1p(std::exp(x)); }},
      {"sigmoid", [](L x) { return 1.0L / (1.0L + std::exp(-x)); }},
      {"tanh", [](L x) { return std::tanh(x); }},
      {"arctan", [](L x) { return std::atan(x); }},
      {"softsign", [](L x) { return x / (1.0L + std::fabs(x)); }},
      {"elu", [](L x) { return x > 0 ? x : std::expm1(x); }},
      {"silu", [](L x) { return x / (1.0L + std::exp(-x)); }},
  };
  for (const auto& [name, ref] : refs) {
    const ActivationPtr s = reg().make(name);
    std::uint64_t worst = 0;
    for (int i = 0; i <= 20000; ++i) {
      const double x = -50.0 + 100.0 * i / 20000.0;
      worst = std::max(worst, oracle::ulp_distance(s->eval(x), static_cast<double>(ref(x))));
    }
    INFO(name);
    CHECK(worst <= 4);
  }
}

TEST_CASE("sigmoid derivatives") {
  const ActivationPtr s = reg().make("sigmoid");
  CHECK(eval_derivative(*s, 1, 0.0).value == 0.25);
  CHECK(eval_derivative(*s, 2, 0.0).value == 0.0);
  const double d2 = eval_derivative(*s, 2, 1.0).value;
  // Frozen from sigma(1)(1 - sigma(1))(1 - 2 sigma(1)).
  CHECK(d2 == doctest::Approx(-0.09085774767294841).epsilon(1e-14));
  CHECK(d2 == doctest::Approx(oracle::sigmoid_d2(1.0)).epsilon(1e-14));
  const long double fd2 = oracle::second_difference_l(oracle::sigmoid_l, 1.0L, 1e-4L);
  CHECK(std::fabs(d2 - static_cast<double>(fd2)) < 1e-8);
  CHECK(eval_derivative(*s, 1, 1.0).method == DerivativeMethod::Analytic);
}

TEST_CASE("user specs without closed-form derivatives fall back to finite differences") {
  auto s = std::make_shared<ActivationSpec>();
  s->name = "cube";
  s->eval = [](double x) { return x * x * x; };
  const DerivativeValue d1 = eval_derivative(*s, 1, 2.0);
  CHECK(d1.method == DerivativeMethod::FiniteDifference);
  CHECK(d1.value == doctest::Approx(12.0).epsilon(1e-9));
  CHECK(eval_derivative(*s, 2, 2.0).value == doctest::Approx(12.0).epsilon(1e-6));
}

TEST_CASE("derivatives at a kink of insufficient smoothness") {
  CHECK(kind_of([] { eval_derivative(*reg().make("relu"), 1, 0.0); }) == ErrorKind::AtKink);
  CHECK(kind_of([] { eval_derivative(*reg().make("relu2"), 2, 0.0); }) == ErrorKind::AtKink);
  CHECK(eval_derivative(*reg().make("relu2"), 1, 0.0).value == 0.0);
  CHECK(kind_of([] { eval_derivative(*reg().make("leaky_relu"), 1, 0.0); }) == ErrorKind::AtKink);
  CHECK(eval_derivative(*reg().make("relu"), 1, 0.5).value == 1.0);
}

TEST_CASE("analytic derivatives agree with central differences") {
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> u(-30.0, 30.0);
  std::vector<double> xs(1000);
  for (double& x : xs) x = u(gen);
  for (const auto& n : builtin_names()) {
    const ActivationPtr s = reg().make(n);
    for (double x : xs) {
      if (!s->smoothness.smooth && std::fabs(x - s->smoothness.kink_x) < 1e-3) continue;
      for (int order : {1, 2}) {
        const double a = eval_derivative(*s, order, x).value;
        const double tol = order == 1 ? 1e-6 : 1e-4;
        INFO(n << " order " << order << " at " << x);
        CHECK(std::fabs(a - fd(*s, order, x)) <= tol * std::max(1.0, std::fabs(a)));
      }
    }
  }
}

TEST_CASE("table classifications") {
  const std::vector<std::pair<std::string, std::vector<std::string>>> table = {
      {"relu", {"A1k(0)"}},
      {"leaky_relu", {"A1k(0)"}},
      {"relu2", {"A1k(1)"}},
      {"elu", {"A1k(1)", "A2tilde"}},
      {"celu", {"A1k(1)", "A2tilde"}},
      {"selu", {"A1k(0)", "A2tilde"}},
      {"softplus", {"A2tilde"}},
      {"gelu", {"A2tilde"}},
      {"silu", {"A2tilde"}},
      {"swish", {"A2tilde"}},
      {"mish", {"A2tilde"}},
      {"sigmoid", {"A3"}},
      {"tanh", {"A3"}},
      {"arctan", {"A3"}},
      {"softsign", {"A3"}},
      {"dsilu", {"A3"}},
      {"srs", {"A3"}},
      {"x_dsilu", {"A2tilde"}},
      {"x_softsign_shift", {"A2tilde"}},
      {"x_arctan_shift", {"A2tilde"}},
  };
  for (const auto& [name, expect] : table) {
    INFO(name);
    const Classification c = classify(reg().make(name));
    CHECK(membership_names(c) == expect);
    CHECK(c.source == "table");
  }
  const Classification elu0 = classify(reg().make("elu", {{"alpha", 0.5}}));
  CHECK(membership_names(elu0) == std::vector<std::string>{"A1k(0)", "A2tilde"});
  CHECK(elu0.kink->L1 == 0.5);
  CHECK(elu0.kink->L2 == 1.0);
}

TEST_CASE("classification witnesses") {
  const Classification relu = classify(reg().make("relu"));
  REQUIRE(relu.kink);
  CHECK(relu.kink->x0 == 0.0);
  CHECK(relu.kink->order == 0);
  CHECK(relu.kink->L1 == 0.0);
  CHECK(relu.kink->L2 == 1.0);

  const Classification sp = classify(reg().make("softplus"));
  REQUIRE(sp.s_decomp);
  CHECK(sp.s_decomp->b0 == 0.0);
  CHECK(sp.s_decomp->b1 == std::numbers::ln2);
  CHECK(sp.s_decomp->L1 == 0.0);
  CHECK(sp.s_decomp->L2 == 1.0);

  const Classification sig = classify(reg().make("sigmoid"));
  REQUIRE(sig.asymptotes);
  CHECK(sig.asymptotes->first == 0.0);
  CHECK(sig.asymptotes->second == 1.0);
  REQUIRE(sig.curvature_point);
  // |sigma''| peaks where sigma''' = 0, i.e. |x| = ln(2 + sqrt 3).
  CHECK(std::fabs(sig.curvature_point->x0) == doctest::Approx(std::log(2.0 + std::sqrt(3.0))).epsilon(1e-7));
  double best = 0.0, arg = 0.0;
  for (int i = 0; i <= 200000; ++i) {
    const double x = -10.0 + 20.0 * i / 200000.0;
    if (std::fabs(oracle::sigmoid_d2(x)) > best) {
      best = std::fabs(oracle::sigmoid_d2(x));
      arg = x;
    }
  }
  CHECK(std::fabs(sig.curvature_point->x0) == doctest::Approx(std::fabs(arg)).epsilon(1e-4));
  CHECK(sig.curvature_point->rho_pp == doctest::Approx(oracle::sigmoid_d2(sig.curvature_point->x0)).epsilon(1e-12));
  REQUIRE(sig.slope_point);
  CHECK(sig.slope_point->x1 == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(sig.slope_point->rho_p == doctest::Approx(0.25));

  const Classification r2 = classify(reg().make("relu2"));
  REQUIRE(r2.kink);
  CHECK(r2.kink->order == 1);
  REQUIRE(r2.slope_point);
  CHECK(r2.slope_point->rho_p != 0.0);
}

TEST_CASE("witness invariants hold for every built-in") {
  for (const auto& n : builtin_names()) {
    INFO(n);
    const Classification c = classify(reg().make(n));
    if (c.kink) CHECK(c.kink->L1 != c.kink->L2);
    if (c.s_decomp) {
      CHECK(c.s_decomp->L1 != c.s_decomp->L2);
      for (int i = -100; i <= 100; ++i) CHECK(std::isfinite(c.s_decomp->h(1e4 * i)));
    }
    if (c.has(ActivationClass::A2Tilde)) CHECK(c.s_decomp->L1 * c.s_decomp->L2 == 0.0);
    if (c.has(ActivationClass::A3)) {
      REQUIRE(c.asymptotes);
      CHECK(c.asymptotes->first != c.asymptotes->second);
      REQUIRE(c.curvature_point);
      CHECK(c.curvature_point->rho_pp != 0.0);
    }
  }
}

TEST_CASE("decomposition identity for A2tilde members") {
  for (const auto& n : builtin_names()) {
    const Classification c = classify(reg().make(n));
    if (!c.has(ActivationClass::A2Tilde)) continue;
    const SDecomposition& d = *c.s_decomp;
    double worst = 0.0;
    for (int i = 0; i <= 40000; ++i) {
      const double x = -20.0 + 40.0 * i / 40000.0;
      worst = std::max(worst, std::fabs(c.spec->eval(x) - (x + d.b0) * d.h(x) - d.b1));
    }
    INFO(n);
    CHECK(worst <= 1e-12);
  }
}

TEST_CASE("A3 asymptotes and boundedness") {
  // softsign and arctan approach their limits like 1/x; every other A3
  // member has exponential tails.
  const std::map<std::string, double> algebraic_tail = {{"softsign", 1.0}, {"arctan", 1.0}};
  for (const auto& n : builtin_names()) {
    const Classification c = classify(reg().make(n));
    if (!c.has(ActivationClass::A3)) continue;
    INFO(n);
    const auto [L1, L2] = *c.asymptotes;
    const ActivationPtr& s = c.spec;
    const bool slow = algebraic_tail.count(n) > 0;
    const double far = slow ? 1e7 : 1e4;
    CHECK(std::fabs(s->eval(-far) - L1) <= 1e-6);
    CHECK(std::fabs(s->eval(far) - L2) <= 1e-6);
    if (slow) {
      // At 1e4 the gap is the 1/x tail itself, about 1e-4.
      CHECK(std::fabs(s->eval(1e4) - L2) == doctest::Approx(algebraic_tail.at(n) / 1e4).epsilon(1e-3));
    }
    const double bound = std::max(std::fabs(L1), std::fabs(L2)) + 1.0;
    for (int i = -100000; i <= 100000; ++i) CHECK_LE(std::fabs(s->eval(10.0 * i)), bound);
  }
}

TEST_CASE("classify is deterministic and idempotent") {
  for (const auto& n : builtin_names()) {
    const ActivationPtr s = reg().make(n);
    const Classification a = classify(s);
    const Classification b = classify(s);
    CHECK(membership_names(a) == membership_names(b));
    if (a.curvature_point) CHECK(a.curvature_point->x0 == b.curvature_point->x0);
    if (a.slope_point) CHECK(a.slope_point->x1 == b.slope_point->x1);
  }
}

TEST_CASE("probing user specs") {
  auto poly = std::make_shared<ActivationSpec>();
  poly->name = "square";
  poly->eval = [](double x) { return x * x; };
  CHECK(kind_of([&] { classify(poly); }) == ErrorKind::NotInA);

  auto shifted = std::make_shared<ActivationSpec>();
  shifted->name = "shifted_sigmoid";
  shifted->eval = [](double x) { return 2.0 * oracle::sigmoid(x) - 0.5; };
  const Classification c = classify(shifted);
  CHECK(c.source == "probed");
  CHECK(c.has(ActivationClass::A3));
  CHECK_FALSE(c.warnings.empty());
  CHECK(c.asymptotes->first == doctest::Approx(-0.5).epsilon(1e-9));
  CHECK(c.asymptotes->second == doctest::Approx(1.5).epsilon(1e-9));
}

TEST_CASE("s_shape_normalize") {
  const NormalizedDecomposition silu = s_shape_normalize(classify(reg().make("silu")));
  CHECK(silu.tilde);
  CHECK(silu.in_scale == 1.0);
  CHECK(silu.in_shift == 0.0);
  CHECK(silu.out_sign == 1.0);
  CHECK(silu.h_hat(0.3) == oracle::sigmoid(0.3));

  // rho(x) = SiLU(-x) = x * (-sigmoid(-x)): h has limits -1 and 0.
  auto mirrored = std::make_shared<ActivationSpec>();
  mirrored->name = "mirrored_silu";
  mirrored->eval = [](double x) { return -x * oracle::sigmoid(-x); };
  DeclaredClass d;
  d.memberships = {{ActivationClass::A2Tilde, 0}};
  d.s_decomp = SDecomposition{0.0, 0.0, -1.0, 0.0, [](double x) { return -oracle::sigmoid(-x); }};
  mirrored->declared = d;
  const Classification mc = classify(mirrored);
  const NormalizedDecomposition mn = s_shape_normalize(mc);
  CHECK(mn.w1 == -1.0);
  CHECK(std::fabs(mn.h_hat(-1e6)) <= 1e-6);
  CHECK(std::fabs(mn.h_hat(1e6) - 1.0) <= 1e-6);
  CHECK(oracle::grid_sup(mn.h_hat, oracle::sigmoid, -30.0, 30.0, 6001) <= 1e-15);

  const NormalizedDecomposition sp = s_shape_normalize(classify(reg().make("softplus")));
  CHECK(sp.h_hat(0.0) == 0.5);
  for (double x : {-3.0, -0.5, 1e-3, 0.7, 4.0}) {
    CHECK(sp.h_hat(x) == doctest::Approx((std::log1p(std::exp(x)) - std::numbers::ln2) / x).epsilon(1e-12));
  }

  for (const auto& n : builtin_names()) {
    const Classification c = classify(reg().make(n));
    if (!c.has(ActivationClass::A2Tilde)) continue;
    const NormalizedDecomposition nd = s_shape_normalize(c);
    INFO(n);
    if (n == "selu") {
      // h_hat(y) = h(y/lambda)/lambda = alpha*expm1(y/lambda)/y decays like
      // lambda*alpha/|y|, and lambda*alpha > 1 here.
      const double la = c.spec->params.at("lambda") * c.spec->params.at("alpha");
      CHECK(nd.tail_lo == doctest::Approx(la / 1e6).epsilon(1e-9));
    } else {
      CHECK(nd.tail_lo <= 1e-6);
    }
    CHECK(nd.tail_hi <= 1e-6);
  }

  auto wrong = std::make_shared<ActivationSpec>(*mirrored);
  wrong->declared->s_decomp->L1 = -2.0;
  CHECK(kind_of([&] { s_shape_normalize(classify(wrong)); }) == ErrorKind::LimitMismatch);
}
