#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "anyact/activations.hpp"
#include "anyact/error.hpp"

namespace anyact {

// Exit codes shared by every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitTolerance = 1;
inline constexpr int kExitUsage = 2;

int exit_code_for(ErrorKind kind);

// "key=value" strings to a parameter map.
ParamMap parse_params(const std::vector<std::string>& items);

struct PaperConstants {
  double m = 0.0;
  double M_sup = 0.0;
};

// Published single-neuron constants for the Table 2 rows, scaled by the
// activation's parameters where the table does so.
std::optional<PaperConstants> paper_constants(const ActivationSpec& spec);
const std::vector<std::string>& table2_names();

struct ClassifyArgs {
  std::string act;
  ParamMap params;
  bool json = false;
};

struct ConstantsArgs {
  std::vector<std::string> names;  // empty: every Table 2 row
  bool json = false;
};

struct GadgetArgs {
  std::string act;
  ParamMap params;
  std::string target = "relu";  // relu | derivative | identity | product
  double M = 1.0;
  double tol = 1e-2;
  std::optional<double> K;
  std::optional<std::string> route;
  int k = 1;
  double eta = 1e-3;
  double eps = 1e-2;
  std::string out_path;
  bool json = false;
};

struct CurveArgs {
  std::string act;
  ParamMap params;
  double M = 2.0;
  std::optional<double> K;
  std::optional<double> tol;
  std::optional<std::string> route;
  std::string out_path;
  bool json = false;
};

struct TranspileArgs {
  std::string in_path;
  std::string act;
  ParamMap params;
  double A = 1.0;
  double eps = 1e-2;
  std::uint64_t seed = 0;
  std::size_t samples = 10000;
  std::optional<std::string> route;
  std::string out_path;
  std::string report_path;
  bool json = false;
};

struct VerifyArgs {
  std::string a_path;
  std::string b_path;
  double A = 1.0;
  std::size_t samples = 10000;
  std::uint64_t seed = 0;
  bool json = false;
};

int cmd_classify(const ClassifyArgs& args, std::ostream& out, std::ostream& err);
int cmd_constants(const ConstantsArgs& args, std::ostream& out, std::ostream& err);
int cmd_gadget(const GadgetArgs& args, std::ostream& out, std::ostream& err);
int cmd_curve(const CurveArgs& args, std::ostream& out, std::ostream& err);
int cmd_transpile(const TranspileArgs& args, std::ostream& out, std::ostream& err);
int cmd_verify(const VerifyArgs& args, std::ostream& out, std::ostream& err);

}  // namespace anyact
