#include <CLI11.hpp>
#include <iostream>

#include "anyact/harness.hpp"

using namespace anyact;

namespace {

// Parameters arrive as repeated --param key=value.
struct ActOptions {
  std::string act;
  std::vector<std::string> params;
};

void add_act(CLI::App* cmd, ActOptions& o, bool required = true) {
  auto* opt = cmd->add_option("--act", o.act, "activation name");
  if (required) opt->required();
  cmd->add_option("--param", o.params, "activation parameter key=value (repeatable)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rewrite ReLU networks into networks with other activations"};
  app.require_subcommand(1, 1);
  bool json = false;
  app.add_flag("--json", json, "machine-readable output");

  ActOptions classify_act;
  auto* classify = app.add_subcommand("classify", "print the activation's class memberships and witnesses");
  add_act(classify, classify_act);
  classify->add_flag("--json", json, "machine-readable output");

  ConstantsArgs constants;
  auto* cmd_const = app.add_subcommand("constants", "estimate single-neuron gap constants (m, M_sup)");
  cmd_const->add_option("names", constants.names, "activations, optionally name:key=value,...");
  cmd_const->add_flag("--json", json, "machine-readable output");

  GadgetArgs gadget;
  ActOptions gadget_act;
  std::optional<double> gadget_K;
  std::string gadget_route;
  auto* gadget_cmd = app.add_subcommand("gadget", "build one gadget and print it as JSON");
  add_act(gadget_cmd, gadget_act);
  gadget_cmd->add_option("--target", gadget.target, "relu | derivative | identity | product")
      ->check(CLI::IsMember({"relu", "derivative", "identity", "product"}));
  gadget_cmd->add_option("--M", gadget.M, "domain half-width");
  gadget_cmd->add_option("--tol", gadget.tol, "target sup error for relu gadgets");
  gadget_cmd->add_option("--K", gadget_K, "explicit scale instead of calibration");
  gadget_cmd->add_option("--route", gadget_route, "A2tilde | A2 | A1k | A3");
  gadget_cmd->add_option("--k", gadget.k, "derivative order");
  gadget_cmd->add_option("--eta", gadget.eta, "step for derivative/identity gadgets");
  gadget_cmd->add_option("--eps", gadget.eps, "step for product gadgets");
  gadget_cmd->add_option("--out", gadget.out_path, "output file");
  gadget_cmd->add_flag("--json", json, "machine-readable output");

  CurveArgs curve;
  ActOptions curve_act;
  std::optional<double> curve_K, curve_tol;
  std::string curve_route;
  auto* curve_cmd = app.add_subcommand("curve", "emit x,phi,relu samples of a ReLU gadget");
  add_act(curve_cmd, curve_act);
  curve_cmd->add_option("--M", curve.M, "domain half-width");
  curve_cmd->add_option("--K", curve_K, "explicit scale");
  curve_cmd->add_option("--tol", curve_tol, "calibrate to this sup error instead");
  curve_cmd->add_option("--route", curve_route, "A2tilde | A2 | A1k | A3");
  curve_cmd->add_option("--out", curve.out_path, "CSV file (default: standard output)");
  curve_cmd->add_flag("--json", json, "machine-readable output");

  TranspileArgs tr;
  ActOptions tr_act;
  std::string tr_route;
  auto* cmd_tr = app.add_subcommand("transpile", "replace every ReLU neuron of a network by a gadget");
  cmd_tr->add_option("--in", tr.in_path, "host network JSON")->required();
  add_act(cmd_tr, tr_act);
  cmd_tr->add_option("--A", tr.A, "box half-width");
  cmd_tr->add_option("--eps", tr.eps, "target sup error");
  cmd_tr->add_option("--seed", tr.seed, "sampler seed");
  cmd_tr->add_option("--samples", tr.samples, "range-estimation samples (verification uses 10x)");
  cmd_tr->add_option("--route", tr_route, "force A2tilde | A2 | A1k | A3");
  cmd_tr->add_option("--out", tr.out_path, "output network JSON");
  cmd_tr->add_option("--report", tr.report_path, "report JSON");
  cmd_tr->add_flag("--json", json, "machine-readable output");

  VerifyArgs vf;
  auto* cmd_vf = app.add_subcommand("verify", "sampled sup distance between two networks");
  cmd_vf->add_option("--a", vf.a_path, "first network")->required();
  cmd_vf->add_option("--b", vf.b_path, "second network")->required();
  cmd_vf->add_option("--A", vf.A, "box half-width");
  cmd_vf->add_option("--samples", vf.samples, "lattice points");
  cmd_vf->add_option("--seed", vf.seed, "sampler seed");
  cmd_vf->add_flag("--json", json, "machine-readable output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  auto params_of = [](const ActOptions& o, ParamMap& dst) {
    try {
      dst = parse_params(o.params);
      return true;
    } catch (const Error& e) {
      std::cerr << "error: " << e.what() << '\n';
      return false;
    }
  };

  if (*classify) {
    ClassifyArgs a{classify_act.act, {}, json};
    if (!params_of(classify_act, a.params)) return kExitUsage;
    return cmd_classify(a, std::cout, std::cerr);
  }
  if (*cmd_const) {
    constants.json = json;
    return cmd_constants(constants, std::cout, std::cerr);
  }
  if (*gadget_cmd) {
    gadget.act = gadget_act.act;
    gadget.K = gadget_K;
    if (!gadget_route.empty()) gadget.route = gadget_route;
    gadget.json = json;
    if (!params_of(gadget_act, gadget.params)) return kExitUsage;
    return cmd_gadget(gadget, std::cout, std::cerr);
  }
  if (*curve_cmd) {
    curve.act = curve_act.act;
    curve.K = curve_K;
    curve.tol = curve_tol;
    if (!curve_route.empty()) curve.route = curve_route;
    curve.json = json;
    if (!params_of(curve_act, curve.params)) return kExitUsage;
    return cmd_curve(curve, std::cout, std::cerr);
  }
  if (*cmd_tr) {
    tr.act = tr_act.act;
    if (!tr_route.empty()) tr.route = tr_route;
    tr.json = json;
    if (!params_of(tr_act, tr.params)) return kExitUsage;
    return cmd_transpile(tr, std::cout, std::cerr);
  }
  if (*cmd_vf) {
    vf.json = json;
    return cmd_verify(vf, std::cout, std::cerr);
  }
  return kExitUsage;
}
