#pragma once

#include <json.hpp>
#include <string>
#include <string_view>

#include "anyact/activations.hpp"
#include "anyact/classification.hpp"
#include "anyact/gadgets.hpp"
#include "anyact/net_ir.hpp"
#include "anyact/transpiler.hpp"

namespace anyact {

using Json = nlohmann::json;

Json activation_to_json(const ActivationTag& tag);
ActivationTag activation_from_json(const Json& j, const Registry& registry = Registry::builtin());

Json network_to_json(const Network& net);
Network network_from_json(const Json& j, const Registry& registry = Registry::builtin());

// Lossless text form: doubles are written in shortest round-trip notation.
std::string serialize(const Network& net);
Network parse(std::string_view text, const Registry& registry = Registry::builtin());

Json gadget_to_json(const Gadget& g);
Json report_to_json(const TranspileReport& r);
Json classification_to_json(const Classification& c);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace anyact
