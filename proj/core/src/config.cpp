#include "propas/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fstream>
#include <functional>
#include <map>
#include <string>

#include "propas/errors.hpp"

namespace propas {

namespace {

namespace pt = boost::property_tree;

using Setter = std::function<void(Config&, const std::string&)>;

template <typename T>
T convert(const std::string& key, const std::string& text) {
  pt::ptree node;
  node.put_value(text);
  auto v = node.get_value_optional<T>();
  if (!v) throw SchemaError("config: bad value '" + text + "' for " + key);
  return *v;
}

bool convert_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw SchemaError("config: bad boolean '" + text + "' for " + key);
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"environment.diameter_m",
       [](Config& c, const std::string& v) { c.env.diameter = convert<double>("diameter_m", v); }},
      {"environment.rho_kg_m3",
       [](Config& c, const std::string& v) { c.env.rho = convert<double>("rho_kg_m3", v); }},
      {"environment.lever_arm_m",
       [](Config& c, const std::string& v) {
         c.env.lever_arm = convert<double>("lever_arm_m", v);
       }},
      {"environment.eta",
       [](Config& c, const std::string& v) { c.eta = convert<double>("eta", v); }},
      {"gate.alpha_th_deg",
       [](Config& c, const std::string& v) {
         c.gate.alpha_th_deg = convert<double>("alpha_th_deg", v);
       }},
      {"gate.v_min_mps",
       [](Config& c, const std::string& v) { c.gate.v_min = convert<double>("v_min_mps", v); }},
      {"gate.gamma_sign",
       [](Config& c, const std::string& v) {
         if (v == "literal") {
           c.gate.gamma_sign = gate::GammaSign::kLiteral;
         } else if (v == "ned") {
           c.gate.gamma_sign = gate::GammaSign::kNed;
         } else {
           throw SchemaError("config: gamma_sign must be literal or ned");
         }
       }},
      {"sweep.v_min_mps",
       [](Config& c, const std::string& v) { c.v_sweep.min = convert<double>("v_min_mps", v); }},
      {"sweep.v_max_mps",
       [](Config& c, const std::string& v) { c.v_sweep.max = convert<double>("v_max_mps", v); }},
      {"sweep.v_steps",
       [](Config& c, const std::string& v) { c.v_sweep.steps = convert<int>("v_steps", v); }},
      {"sweep.rpm_min",
       [](Config& c, const std::string& v) { c.rpm_sweep.min = convert<double>("rpm_min", v); }},
      {"sweep.rpm_max",
       [](Config& c, const std::string& v) { c.rpm_sweep.max = convert<double>("rpm_max", v); }},
      {"sweep.rpm_steps",
       [](Config& c, const std::string& v) { c.rpm_sweep.steps = convert<int>("rpm_steps", v); }},
      {"lasso.folds",
       [](Config& c, const std::string& v) { c.cv.folds = convert<int>("folds", v); }},
      {"lasso.seed",
       [](Config& c, const std::string& v) { c.cv.seed = convert<std::uint64_t>("seed", v); }},
      {"lasso.n_lambdas",
       [](Config& c, const std::string& v) { c.cv.n_lambdas = convert<int>("n_lambdas", v); }},
      {"lasso.lambda_ratio",
       [](Config& c, const std::string& v) {
         c.cv.lambda_ratio = convert<double>("lambda_ratio", v);
       }},
      {"lasso.tolerance",
       [](Config& c, const std::string& v) {
         c.cv.lasso.tolerance = convert<double>("tolerance", v);
       }},
      {"lasso.max_sweeps",
       [](Config& c, const std::string& v) {
         c.cv.lasso.max_sweeps = convert<int>("max_sweeps", v);
       }},
      {"lasso.max_power_exponent",
       [](Config& c, const std::string& v) {
         c.library.max_power_exponent = convert<int>("max_power_exponent", v);
       }},
      {"lasso.min_omega_exponent",
       [](Config& c, const std::string& v) {
         c.library.min_omega_exponent = convert<int>("min_omega_exponent", v);
       }},
      {"lasso.max_omega_exponent",
       [](Config& c, const std::string& v) {
         c.library.max_omega_exponent = convert<int>("max_omega_exponent", v);
       }},
      {"lasso.include_omega_dot",
       [](Config& c, const std::string& v) {
         c.library.include_omega_dot = convert_bool("include_omega_dot", v);
       }},
      {"lasso.indirect_degree",
       [](Config& c, const std::string& v) {
         c.indirect_degree = convert<int>("indirect_degree", v);
       }},
      {"rls.lambda_f",
       [](Config& c, const std::string& v) { c.rls_lambda_f = convert<double>("lambda_f", v); }},
      {"rls.p0", [](Config& c, const std::string& v) { c.rls_p0 = convert<double>("p0", v); }},
      {"ingest.omega_unit",
       [](Config& c, const std::string& v) { c.units.omega = log::parse_omega_unit(v); }},
      {"ingest.angle_unit",
       [](Config& c, const std::string& v) { c.units.angle = log::parse_angle_unit(v); }},
      {"ingest.smoothing_window",
       [](Config& c, const std::string& v) {
         c.smoothing_window = convert<std::size_t>("smoothing_window", v);
       }},
      {"simulate.seed",
       [](Config& c, const std::string& v) {
         c.simulate_seed = convert<std::uint64_t>("seed", v);
       }},
  };
  return table;
}

void validate(const Config& c) {
  models::validate(c.env);
  gate::validate(c.gate);
  if (c.eta && !(*c.eta > 0.0 && *c.eta <= 1.0)) throw SchemaError("config: eta must be in (0, 1]");
  if (c.cv.folds < 2) throw SchemaError("config: folds must be >= 2");
  if (c.cv.n_lambdas < 1) throw SchemaError("config: n_lambdas must be >= 1");
  if (!(c.cv.lambda_ratio > 0.0 && c.cv.lambda_ratio < 1.0))
    throw SchemaError("config: lambda_ratio must be in (0, 1)");
  if (c.indirect_degree < 1) throw SchemaError("config: indirect_degree must be >= 1");
  if (!(c.rls_lambda_f > 0.0 && c.rls_lambda_f <= 1.0))
    throw SchemaError("config: lambda_f must be in (0, 1]");
  if (!(c.rls_p0 > 0.0)) throw SchemaError("config: p0 must be positive");
}

// A key given without a section header, resolved when its name is unique.
void apply_flat_key(Config& c, const std::string& key, const std::string& value) {
  const Setter* match = nullptr;
  for (const auto& [full, setter] : setters()) {
    if (full.substr(full.find('.') + 1) != key) continue;
    if (match) throw SchemaError("config: key " + key + " is ambiguous, put it under a section");
    match = &setter;
  }
  if (!match) throw SchemaError("config: unknown key " + key);
  (*match)(c, value);
}

}  // namespace

Config parse_config(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw SchemaError(std::string("config: ") + e.what());
  }

  Config c;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      apply_flat_key(c, section, body.data());
      continue;
    }
    for (const auto& [key, value] : body) {
      const std::string full = section + "." + key;
      const auto it = setters().find(full);
      if (it == setters().end()) throw SchemaError("config: unknown key " + full);
      it->second(c, value.get_value<std::string>());
    }
  }
  try {
    validate(c);
  } catch (const std::invalid_argument& e) {
    throw SchemaError(std::string("config: ") + e.what());
  }
  return c;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open config " + path.string());
  return parse_config(in);
}

}  // namespace propas
