#include "anyact/json_io.hpp"

#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <sstream>

#include "anyact/error.hpp"

namespace anyact {

namespace {

[[noreturn]] void schema(const std::string& where, const std::string& what) {
  throw Error(ErrorKind::SchemaError, fmt::format("{}: {}", where, what));
}

const Json& member(const Json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) schema(where, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) schema(where, fmt::format("missing \"{}\"", key));
  return *it;
}

double number(const Json& v, const std::string& where) {
  if (!v.is_number()) schema(where, "expected a number");
  return v.get<double>();
}

std::vector<double> numbers(const Json& v, const std::string& where) {
  if (!v.is_array()) schema(where, "expected an array");
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], fmt::format("{}[{}]", where, i)));
  return out;
}

Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

Json activation_to_json(const ActivationTag& tag) {
  switch (tag.kind()) {
    case ActivationTag::Kind::Relu: return "relu";
    case ActivationTag::Kind::Identity: return "identity";
    case ActivationTag::Kind::Named: {
      Json params = Json::object();
      for (const auto& [k, v] : tag.spec()->params) params[k] = v;
      return Json{{"name", tag.spec()->name}, {"params", params}};
    }
  }
  return nullptr;
}

ActivationTag activation_from_json(const Json& j, const Registry& registry) {
  if (j.is_string()) {
    const std::string name = j.get<std::string>();
    if (name == "relu") return ActivationTag::relu();
    if (name == "identity") return ActivationTag::identity();
    return ActivationTag::named(registry.make(name));
  }
  if (!j.is_object()) schema("activation", "expected a string or an object");
  const Json& name = member(j, "name", "activation");
  if (!name.is_string()) schema("activation.name", "expected a string");
  ParamMap params;
  if (auto it = j.find("params"); it != j.end()) {
    if (!it->is_object()) schema("activation.params", "expected an object");
    for (const auto& [k, v] : it->items()) params[k] = number(v, "activation.params." + k);
  }
  return ActivationTag::named(registry.make(name.get<std::string>(), params));
}

Json network_to_json(const Network& net) {
  Json layers = Json::array();
  for (const Layer& l : net.layers) {
    Json rows = Json::array();
    for (std::size_t r = 0; r < l.weights.rows; ++r) {
      auto row = l.weights.row(r);
      rows.push_back(std::vector<double>(row.begin(), row.end()));
    }
    layers.push_back(Json{{"weights", rows}, {"bias", l.bias}, {"activation", activation_to_json(l.activation)}});
  }
  return Json{{"input_dim", net.input_dim}, {"layers", layers}};
}

Network network_from_json(const Json& j, const Registry& registry) {
  Network net;
  const Json& dim = member(j, "input_dim", "network");
  if (!dim.is_number_integer() || dim.get<long long>() <= 0) schema("network.input_dim", "expected a positive integer");
  net.input_dim = dim.get<std::size_t>();
  const Json& layers = member(j, "layers", "network");
  if (!layers.is_array()) schema("network.layers", "expected an array");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const std::string where = fmt::format("layers[{}]", l);
    const Json& lj = layers[l];
    const Json& w = member(lj, "weights", where);
    if (!w.is_array()) schema(where + ".weights", "expected an array of rows");
    std::vector<std::vector<double>> rows;
    for (std::size_t r = 0; r < w.size(); ++r) rows.push_back(numbers(w[r], fmt::format("{}.weights[{}]", where, r)));
    Layer layer;
    layer.weights = Matrix::from_rows(rows);
    layer.bias = numbers(member(lj, "bias", where), where + ".bias");
    layer.activation = activation_from_json(member(lj, "activation", where), registry);
    net.layers.push_back(std::move(layer));
  }
  validate_network(net);
  return net;
}

std::string serialize(const Network& net) { return network_to_json(net).dump(); }

Network parse(std::string_view text, const Registry& registry) {
  Json j;
  try {
    j = Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::ParseError, e.what(), {{}, e.byte, {}});
  }
  return network_from_json(j, registry);
}

Json gadget_to_json(const Gadget& g) {
  Json j = network_to_json(g.net);
  std::string target = to_string(g.target);
  if (g.target == GadgetTarget::Derivative) target = fmt::format("derivative({})", g.order);
  Json meta{{"target", target},
            {"scale_param", g.scale_param},
            {"domain_half_width", g.domain_half_width},
            {"reported_error", finite_or_null(g.reported_error)}};
  if (g.route) meta["route"] = to_string(*g.route);
  if (!g.aux.empty()) meta["params"] = g.aux;
  j["metadata"] = meta;
  return j;
}

Json report_to_json(const TranspileReport& r) {
  Json layers = Json::array();
  for (const LayerReport& l : r.per_layer) {
    Json e{{"M", l.M}, {"gadget_scale", l.gadget_scale}, {"gadget_error", l.gadget_error}};
    if (!l.gadget_params.empty()) e["gadget_params"] = l.gadget_params;
    layers.push_back(e);
  }
  return Json{{"eps_requested", r.eps_requested},
              {"sup_error_sampled", finite_or_null(r.sup_error_sampled)},
              {"sup_error_kind", "sampled"},
              {"factors", {r.factors[0], r.factors[1]}},
              {"rounds", r.rounds},
              {"per_layer", layers},
              {"seed", r.seed},
              {"target", r.target},
              {"route", r.route},
              {"width_in", r.width_in},
              {"depth_in", r.depth_in},
              {"width_out", r.width_out},
              {"depth_out", r.depth_out},
              {"n_samples_verify", r.n_samples_verify},
              {"tau", r.tau},
              {"ok", r.ok}};
}

Json classification_to_json(const Classification& c) {
  Json j;
  j["activation"] = c.spec->name;
  j["params"] = c.spec->params;
  Json members = Json::array();
  for (const Membership& m : c.memberships) members.push_back(to_string(m));
  j["memberships"] = members;
  j["source"] = c.source;
  if (c.kink) j["kink"] = {{"x0", c.kink->x0}, {"order", c.kink->order}, {"L1", c.kink->L1}, {"L2", c.kink->L2}};
  if (c.s_decomp) {
    j["s_decomp"] = {{"b0", c.s_decomp->b0}, {"b1", c.s_decomp->b1}, {"L1", c.s_decomp->L1}, {"L2", c.s_decomp->L2}};
  }
  if (c.asymptotes) j["asymptotes"] = {{"L1", c.asymptotes->first}, {"L2", c.asymptotes->second}};
  if (c.curvature_point) j["curvature_point"] = {{"x0", c.curvature_point->x0}, {"rho_pp", c.curvature_point->rho_pp}};
  if (c.slope_point) j["slope_point"] = {{"x1", c.slope_point->x1}, {"rho_p", c.slope_point->rho_p}};
  if (!c.warnings.empty()) j["warnings"] = c.warnings;
  return j;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::ParseError, fmt::format("cannot open {}", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::InvalidParameter, fmt::format("cannot write {}", path));
  out << text;
}

}  // namespace anyact
