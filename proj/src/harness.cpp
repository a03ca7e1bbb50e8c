#include "anyact/harness.hpp"

#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <numbers>
#include <sstream>

#include "anyact/classification.hpp"
#include "anyact/gadgets.hpp"
#include "anyact/json_io.hpp"
#include "anyact/transpiler.hpp"

namespace anyact {

namespace {

int report_error(const Error& e, bool json, std::ostream& out, std::ostream& err, int code) {
  err << "error: " << e.what() << '\n';
  if (json) {
    Json j{{"error", {{"kind", to_string(e.kind())}, {"message", e.what()}}}, {"exit_code", code}};
    const ErrorContext& c = e.context();
    if (c.index) j["error"]["index"] = *c.index;
    if (c.position) j["error"]["position"] = *c.position;
    if (c.value && std::isfinite(*c.value)) j["error"]["value"] = *c.value;
    out << j.dump() << '\n';
  }
  return code;
}

template <class Fn>
int guarded(bool json, std::ostream& out, std::ostream& err, Fn&& fn, bool not_in_a_is_failure = false) {
  try {
    return fn();
  } catch (const Error& e) {
    int code = exit_code_for(e.kind());
    if (not_in_a_is_failure && e.kind() == ErrorKind::NotInA) code = kExitTolerance;
    return report_error(e, json, out, err, code);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    if (json) out << Json{{"error", {{"kind", "Internal"}, {"message", e.what()}}}}.dump() << '\n';
    return kExitUsage;
  }
}

ActivationPtr make_activation(const std::string& name, const ParamMap& params) {
  return Registry::builtin().make(name, params);
}

Route pick_route(const Classification& cls, const std::optional<std::string>& name) {
  if (!name) return best_route(cls);
  auto r = parse_route(*name);
  if (!r) throw Error(ErrorKind::InvalidParameter, fmt::format("unknown route '{}'", *name));
  return *r;
}

// Explicit-scale parameters for curves: every construction is driven by one K.
ReluGadgetParams params_from_K(Route route, double K) {
  ReluGadgetParams p;
  p.K = K;
  if (route == Route::A1k) {
    p.eps = 1.0 / K;
    p.eta = p.eps * p.eps;
  } else if (route == Route::A3) {
    p.delta = std::min(1e-2, 1.0 / K);
    p.eta = p.delta;
  }
  return p;
}

Network relu_passthrough() {
  Network n;
  n.input_dim = 1;
  Layer h;
  h.weights = Matrix(1, 1, 1.0);
  h.bias = {0.0};
  h.activation = ActivationTag::relu();
  Layer o;
  o.weights = Matrix(1, 1, 1.0);
  o.bias = {0.0};
  o.activation = ActivationTag::identity();
  n.layers = {h, o};
  return n;
}

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
  } else {
    write_text_file(path, text);
  }
}

}  // namespace

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::CalibrationFailed:
    case ErrorKind::Unbounded: return kExitTolerance;
    default: return kExitUsage;
  }
}

ParamMap parse_params(const std::vector<std::string>& items) {
  ParamMap p;
  for (const std::string& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw Error(ErrorKind::InvalidParameter, fmt::format("parameter '{}' is not of the form key=value", item));
    }
    const std::string key = item.substr(0, eq);
    const std::string text = item.substr(eq + 1);
    std::istringstream in(text);
    in.imbue(std::locale::classic());
    double v = 0.0;
    in >> v;
    if (!in || !in.eof()) {
      throw Error(ErrorKind::InvalidParameter, fmt::format("parameter '{}' has non-numeric value '{}'", key, text));
    }
    p[key] = v;
  }
  return p;
}

const std::vector<std::string>& table2_names() {
  static const std::vector<std::string> names = {"elu",  "celu",    "softplus",         "gelu",
                                                 "silu", "swish",   "mish",             "x_dsilu",
                                                 "x_softsign_shift", "x_arctan_shift"};
  return names;
}

std::optional<PaperConstants> paper_constants(const ActivationSpec& spec) {
  const auto& n = spec.name;
  const auto param = [&](const char* k) { return spec.params.at(k); };
  if (n == "elu" || n == "celu") {
    if (!(param("alpha") > 0)) return std::nullopt;
    return PaperConstants{0.0, 1.0 * param("alpha")};
  }
  if (n == "softplus") return PaperConstants{0.0, std::numbers::ln2};
  if (n == "gelu") {
    if (param("mu") != 0.0) return std::nullopt;
    return PaperConstants{0.0, 0.170 * param("sigma")};
  }
  if (n == "silu") return PaperConstants{0.0, 0.278};
  if (n == "swish") return PaperConstants{0.0, 0.278 / param("beta")};
  if (n == "mish") return PaperConstants{0.0, 0.309};
  if (n == "x_dsilu") return PaperConstants{-0.265, 0.131};
  if (n == "x_softsign_shift") return PaperConstants{0.0, 0.5};
  if (n == "x_arctan_shift") return PaperConstants{0.0, 1.0 / std::numbers::pi};
  return std::nullopt;
}

int cmd_classify(const ClassifyArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(
      args.json, out, err,
      [&] {
        const Classification c = classify(make_activation(args.act, args.params));
        out << classification_to_json(c).dump(2) << '\n';
        return kExitOk;
      },
      true);
}

int cmd_constants(const ConstantsArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(args.json, out, err, [&] {
    const std::vector<std::string>& names = args.names.empty() ? table2_names() : args.names;
    Json rows = Json::array();
    bool all_pass = true;
    std::ostringstream table;
    table << fmt::format("{:<18} {:>10} {:>10} {:>10} {:>10} {:>10}  {}\n", "activation", "m", "M_sup", "paper_m",
                         "paper_M", "max_dev", "status");
    for (const std::string& entry : names) {
      // Entries may carry parameters: name:key=value,key=value
      std::string name = entry;
      std::vector<std::string> kv;
      if (auto colon = entry.find(':'); colon != std::string::npos) {
        name = entry.substr(0, colon);
        std::string rest = entry.substr(colon + 1);
        std::size_t start = 0;
        while (start <= rest.size()) {
          const auto comma = rest.find(',', start);
          kv.push_back(rest.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
          if (comma == std::string::npos) break;
          start = comma + 1;
        }
      }
      const ActivationPtr spec = make_activation(name, parse_params(kv));
      const Classification cls = classify(spec);
      const GapConstants g = estimate_gap_constants(cls);
      Json row{{"activation", name}, {"params", spec->params}, {"m", g.m}, {"M_sup", g.M_sup},
               {"tail_verified", g.tail_verified}};
      std::string status = "no-reference";
      double dev = std::nan("");
      if (auto paper = paper_constants(*spec)) {
        dev = std::max(std::fabs(g.m - paper->m), std::fabs(g.M_sup - paper->M_sup));
        const bool pass = dev <= 1e-3;
        all_pass = all_pass && pass;
        status = pass ? "pass" : "FAIL";
        row["paper_m"] = paper->m;
        row["paper_M_sup"] = paper->M_sup;
        row["deviation"] = dev;
        row["pass"] = pass;
        table << fmt::format("{:<18} {:>10.6f} {:>10.6f} {:>10.6f} {:>10.6f} {:>10.2e}  {}\n", name, g.m, g.M_sup,
                             paper->m, paper->M_sup, dev, status);
      } else {
        table << fmt::format("{:<18} {:>10.6f} {:>10.6f} {:>10} {:>10} {:>10}  {}\n", name, g.m, g.M_sup, "-", "-",
                             "-", status);
      }
      rows.push_back(row);
    }
    if (args.json) {
      out << Json{{"constants", rows}, {"tolerance", 1e-3}, {"pass", all_pass}}.dump(2) << '\n';
    } else {
      out << table.str();
    }
    return all_pass ? kExitOk : kExitTolerance;
  });
}

int cmd_gadget(const GadgetArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(args.json, out, err, [&] {
    const ActivationPtr spec = make_activation(args.act, args.params);
    Gadget g;
    bool within = true;
    if (args.target == "relu") {
      const Classification cls = classify(spec);
      const Route route = pick_route(cls, args.route);
      if (args.K) {
        g = build_relu_gadget(cls, route, args.M, params_from_K(route, *args.K));
      } else {
        g = relu_gadget(cls, args.M, args.tol, route);
        within = g.reported_error <= args.tol;
      }
    } else if (args.target == "derivative") {
      g = derivative_gadget(spec, args.k, args.eta, args.M);
    } else if (args.target == "identity") {
      g = identity_gadget(classify(spec), args.eta, args.M);
    } else if (args.target == "product") {
      g = product_gadget(classify(spec), args.eps, args.M);
    } else {
      throw Error(ErrorKind::InvalidParameter, fmt::format("unknown gadget target '{}'", args.target));
    }
    const std::string text = gadget_to_json(g).dump(2) + "\n";
    emit(args.out_path, text, out);
    if (!args.out_path.empty() && args.out_path != "-") {
      out << fmt::format("{} gadget for {}: scale {} reported_error {}\n", args.target, args.act, g.scale_param,
                         g.reported_error);
    }
    return within ? kExitOk : kExitTolerance;
  });
}

int cmd_curve(const CurveArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(args.json, out, err, [&] {
    if (!(args.M > 0.0)) throw Error(ErrorKind::InvalidParameter, "M must be positive");
    const ActivationPtr spec = make_activation(args.act, args.params);
    Network net;
    if (spec->name == "relu") {
      net = relu_passthrough();
    } else {
      const Classification cls = classify(spec);
      const Route route = pick_route(cls, args.route);
      if (args.K) {
        net = build_relu_gadget(cls, route, args.M, params_from_K(route, *args.K)).net;
      } else {
        net = relu_gadget(cls, args.M, args.tol.value_or(1e-2), route).net;
      }
    }
    Evaluator ev(net);
    std::string csv = "x,phi,relu\n";
    double worst = 0.0;
    constexpr int n = 2001;
    for (int i = 0; i < n; ++i) {
      const double x = i == n - 1 ? args.M : -args.M + 2.0 * args.M * i / (n - 1);
      const double phi = ev(std::span<const double>(&x, 1))[0];
      const double r = x > 0 ? x : 0.0;
      worst = std::max(worst, std::fabs(phi - r));
      csv += fmt::format("{},{},{}\n", x, phi, r);
    }
    emit(args.out_path, csv, out);
    if (!args.out_path.empty() && args.out_path != "-") {
      if (args.json) {
        out << Json{{"points", n}, {"max_abs_gap", worst}, {"out", args.out_path}}.dump() << '\n';
      } else {
        out << fmt::format("wrote {} points to {}, max |phi - relu| = {}\n", n, args.out_path, worst);
      }
    }
    return kExitOk;
  });
}

int cmd_transpile(const TranspileArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(args.json, out, err, [&] {
    const Network host = parse(read_text_file(args.in_path));
    const ActivationPtr spec = make_activation(args.act, args.params);
    TranspileOptions opts;
    opts.n_samples = args.samples;
    if (args.route) {
      auto r = parse_route(*args.route);
      if (!r) throw Error(ErrorKind::InvalidParameter, fmt::format("unknown route '{}'", *args.route));
      opts.route = r;
    }
    const TranspileResult res = transpile(host, spec, Box{args.A, host.input_dim}, args.eps, args.seed, opts);
    const Json report = report_to_json(res.report);
    if (!args.out_path.empty()) write_text_file(args.out_path, serialize(res.net) + "\n");
    if (!args.report_path.empty()) write_text_file(args.report_path, report.dump(2) + "\n");
    if (args.json) {
      out << report.dump(2) << '\n';
    } else {
      out << fmt::format("target {} via {}: sampled sup error {} (eps {}), factors [{}, {}], rounds {}\n",
                         res.report.target, res.report.route, res.report.sup_error_sampled, args.eps,
                         res.report.factors[0], res.report.factors[1], res.report.rounds);
      if (args.out_path.empty()) out << serialize(res.net) << '\n';
    }
    return res.report.ok ? kExitOk : kExitTolerance;
  });
}

int cmd_verify(const VerifyArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(args.json, out, err, [&] {
    const Network a = parse(read_text_file(args.a_path));
    const Network b = parse(read_text_file(args.b_path));
    const SupEstimate est = sup_distance_detailed(a, b, Box{args.A, a.input_dim}, args.samples, args.seed);
    if (args.json) {
      out << Json{{"sup_distance_sampled", est.value},
                  {"samples", {{"lattice", est.lattice}, {"corners", est.corners}, {"random", est.random},
                               {"total", est.total()}}},
                  {"seed", args.seed}}
                 .dump(2)
          << '\n';
    } else {
      out << fmt::format("sup distance (sampled): {}\n", est.value);
      out << fmt::format("samples: {} lattice + {} corners + {} random = {}\n", est.lattice, est.corners, est.random,
                         est.total());
    }
    return kExitOk;
  });
}

}  // namespace anyact
