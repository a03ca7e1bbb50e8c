#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <locale>
#include <numbers>
#include <sstream>

#include "anyact/harness.hpp"
#include "anyact/json_io.hpp"
#include "oracles.hpp"

using namespace anyact;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

template <class Args>
Run run(int (*cmd)(const Args&, std::ostream&, std::ostream&), const Args& args) {
  std::ostringstream out, err;
  const int code = cmd(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "anyact_harness_tests";
  fs::create_directories(dir);
  return dir / name;
}

std::string write_net(const std::string& name, const Network& net) {
  const fs::path p = scratch(name);
  write_text_file(p.string(), serialize(net));
  return p.string();
}

struct CommaDecimal : std::numpunct<char> {
  char do_decimal_point() const override { return ','; }
  char do_thousands_sep() const override { return '.'; }
  std::string do_grouping() const override { return "\3"; }
};

// Parses the CSV and returns max |phi - relu| plus the row count.
std::pair<double, std::size_t> csv_gap(const std::string& csv, bool relu_column_exact = false) {
  std::istringstream in(csv);
  in.imbue(std::locale::classic());
  std::string line;
  std::getline(in, line);
  REQUIRE(line == "x,phi,relu");
  double worst = 0.0;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    row.imbue(std::locale::classic());
    double x, phi, r;
    char c1, c2;
    row >> x >> c1 >> phi >> c2 >> r;
    REQUIRE(c1 == ',');
    REQUIRE(c2 == ',');
    if (relu_column_exact) CHECK(r == oracle::relu(x));
    worst = std::max(worst, std::fabs(phi - r));
    ++rows;
  }
  return {worst, rows};
}

}  // namespace

TEST_CASE("exit code mapping and parameter parsing") {
  CHECK(exit_code_for(ErrorKind::CalibrationFailed) == kExitTolerance);
  CHECK(exit_code_for(ErrorKind::DimensionMismatch) == kExitUsage);
  CHECK(exit_code_for(ErrorKind::NotReLUHost) == kExitUsage);
  const ParamMap p = parse_params({"sigma=0.5", "mu=-1e-3"});
  CHECK(p.at("sigma") == 0.5);
  CHECK(p.at("mu") == -1e-3);
  CHECK_THROWS_AS(parse_params({"sigma"}), Error);
  CHECK_THROWS_AS(parse_params({"sigma=abc"}), Error);
}

TEST_CASE("classify command") {
  const Run sp = run(cmd_classify, ClassifyArgs{"softplus", {}, true});
  CHECK(sp.code == 0);
  const Json j = Json::parse(sp.out);
  CHECK(j["memberships"] == Json::array({"A2tilde"}));
  CHECK(j["s_decomp"]["b1"].get<double>() == std::numbers::ln2);

  const Json r2 = Json::parse(run(cmd_classify, ClassifyArgs{"relu2", {}, true}).out);
  CHECK(r2["memberships"] == Json::array({"A1k(1)"}));

  const Run bad = run(cmd_classify, ClassifyArgs{"gelu", {{"sigma", -1.0}}, true});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("sigma") != std::string::npos);
  CHECK(Json::parse(bad.out)["error"]["kind"] == "InvalidParameter");
}

TEST_CASE("constants command") {
  const Run all = run(cmd_constants, ConstantsArgs{{}, true});
  CHECK(all.code == 0);
  const Json j = Json::parse(all.out);
  CHECK(j["pass"] == true);
  CHECK(j["constants"].size() == table2_names().size());

  const Json sub = Json::parse(run(cmd_constants, ConstantsArgs{{"softplus", "mish", "x_arctan_shift"}, true}).out);
  CHECK(sub["constants"][0]["M_sup"].get<double>() == doctest::Approx(0.6931).epsilon(1e-4));
  CHECK(sub["constants"][1]["M_sup"].get<double>() == doctest::Approx(0.309).epsilon(1e-3));
  CHECK(sub["constants"][2]["M_sup"].get<double>() == doctest::Approx(0.3183).epsilon(1e-4));
  CHECK(sub["constants"][2]["pass"] == true);

  const Run sig = run(cmd_constants, ConstantsArgs{{"sigmoid"}, false});
  CHECK(sig.code == 2);
  CHECK(sig.err.find("NotA2tilde") != std::string::npos);

  const Run text = run(cmd_constants, ConstantsArgs{{"elu", "celu"}, false});
  CHECK(text.code == 0);
  CHECK(text.out.find("pass") != std::string::npos);
}

TEST_CASE("curve command") {
  CurveArgs a;
  a.act = "softplus";
  a.K = 10.0;
  a.M = 2.0;
  a.out_path = "-";
  const Run sp = run(cmd_curve, a);
  CHECK(sp.code == 0);
  const auto [gap, rows] = csv_gap(sp.out, true);
  CHECK(rows == 2001);
  CHECK(gap <= 0.0694);
  CHECK(gap == doctest::Approx(std::numbers::ln2 / 10.0).epsilon(1e-9));
  CHECK(sp.out.find('\r') == std::string::npos);

  CurveArgs r;
  r.act = "relu";
  r.M = 3.0;
  r.out_path = "-";
  const Run rr = run(cmd_curve, r);
  CHECK(csv_gap(rr.out).first == 0.0);

  CurveArgs s;
  s.act = "silu";
  s.K = 100.0;
  s.M = 5.0;
  s.out_path = "-";
  CHECK(csv_gap(run(cmd_curve, s).out).first <= 0.00278);

  CurveArgs bad = a;
  bad.M = -1.0;
  CHECK(run(cmd_curve, bad).code == 2);
}

TEST_CASE("curve output ignores the global locale") {
  CurveArgs a;
  a.act = "softplus";
  a.K = 10.0;
  a.M = 1234.5;
  a.out_path = "-";
  const std::string plain = run(cmd_curve, a).out;
  const std::locale saved = std::locale::global(std::locale(std::locale::classic(), new CommaDecimal));
  const std::string under_comma = run(cmd_curve, a).out;
  std::locale::global(saved);
  CHECK(under_comma == plain);
  CHECK(plain.find("-1234.5,") != std::string::npos);
}

TEST_CASE("gadget command") {
  GadgetArgs g;
  g.act = "sigmoid";
  g.M = 3.0;
  g.tol = 5e-2;
  g.out_path = "-";
  const Run r = run(cmd_gadget, g);
  CHECK(r.code == 0);
  const Json j = Json::parse(r.out);
  CHECK(j["metadata"]["reported_error"].get<double>() <= 5e-2);
  CHECK(j["metadata"]["route"] == "A3");

  GadgetArgs d;
  d.act = "softplus";
  d.target = "derivative";
  d.k = 1;
  d.eta = 1e-9;
  d.out_path = "-";
  d.json = true;
  const Run e = run(cmd_gadget, d);
  CHECK(e.code == 2);
  CHECK(Json::parse(e.out)["error"]["kind"] == "EtaTooSmall");

  GadgetArgs f;
  f.act = "sigmoid";
  f.M = 3.0;
  f.tol = 1e-14;
  f.out_path = "-";
  CHECK(run(cmd_gadget, f).code == 1);
}

TEST_CASE("transpile and verify commands") {
  const std::string host = write_net("abs.json", oracle::abs_net());
  TranspileArgs t;
  t.in_path = host;
  t.act = "gelu";
  t.out_path = scratch("abs_gelu.json").string();
  t.report_path = scratch("abs_gelu_report.json").string();
  t.seed = 4;
  const Run g = run(cmd_transpile, t);
  CHECK(g.code == 0);
  const Json report = Json::parse(read_text_file(t.report_path));
  CHECK(report["factors"] == Json::array({1.0, 1.0}));
  CHECK(report["seed"] == 4);
  CHECK(report["sup_error_sampled"].get<double>() < 1e-2);

  VerifyArgs v;
  v.a_path = host;
  v.b_path = t.out_path;
  v.samples = report["n_samples_verify"].get<std::size_t>();
  v.seed = 4;
  v.json = true;
  const Run vr = run(cmd_verify, v);
  CHECK(vr.code == 0);
  CHECK(Json::parse(vr.out)["sup_distance_sampled"].get<double>() == report["sup_error_sampled"].get<double>());

  VerifyArgs same = v;
  same.b_path = host;
  CHECK(Json::parse(run(cmd_verify, same).out)["sup_distance_sampled"].get<double>() == 0.0);

  VerifyArgs mismatch = v;
  mismatch.b_path = write_net("d2.json", oracle::random_relu_net(2, 3, 1, 0));
  CHECK(run(cmd_verify, mismatch).code == 2);

  TranspileArgs s = t;
  s.act = "sigmoid";
  s.report_path = scratch("abs_sigmoid_report.json").string();
  CHECK(run(cmd_transpile, s).code == 0);
  const Json sr = Json::parse(read_text_file(s.report_path));
  CHECK(sr["factors"][0].get<double>() <= 3.0);
  CHECK(sr["factors"][1].get<double>() <= 2.0);

  Network tanh_host = oracle::abs_net();
  tanh_host.layers[0].activation = ActivationTag::named(Registry::builtin().make("tanh"));
  TranspileArgs bad = t;
  bad.in_path = write_net("tanh_host.json", tanh_host);
  bad.json = true;
  const Run br = run(cmd_transpile, bad);
  CHECK(br.code == 2);
  CHECK(Json::parse(br.out)["error"]["kind"] == "NotReLUHost");
  CHECK(br.err.find("error:") == 0);
}

TEST_CASE("commands are deterministic given the seed") {
  const std::string host = write_net("rand.json", oracle::random_relu_net(2, 4, 2, 8));
  TranspileArgs t;
  t.in_path = host;
  t.act = "softplus";
  t.samples = 500;
  t.seed = 9;
  t.json = true;
  t.out_path = scratch("r1.json").string();
  const Run a = run(cmd_transpile, t);
  const std::string net_a = read_text_file(t.out_path);
  t.out_path = scratch("r2.json").string();
  const Run b = run(cmd_transpile, t);
  CHECK(a.out == b.out);
  CHECK(net_a == read_text_file(t.out_path));
}
