#include "propas/model_json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>

#include "propas/atomic_file.hpp"
#include "propas/errors.hpp"
#include "propas/sparse_id.hpp"
#include "propas/units.hpp"

namespace propas {

namespace {

using TermFn = std::function<double(const sparse::RegressionRecord&)>;

// Every name the direct library can produce under any sensible exponent bounds.
const std::map<std::string, TermFn>& direct_terms() {
  static const std::map<std::string, TermFn> table = [] {
    const sparse::RegressionRecord probe{1.0, 1.0, 0.0, 0.0, 0.0};
    sparse::DirectLibraryOptions wide{6, -12, 6, true};
    const auto lib = sparse::build_features_direct({&probe, 1}, wide);
    std::map<std::string, TermFn> out;
    for (const auto& f : lib.features) out.emplace(f.name, f.eval);
    return out;
  }();
  return table;
}

std::optional<int> cp_degree(const std::string& name) {
  if (name.size() < 3 || name.compare(0, 2, "cp") != 0) return std::nullopt;
  const std::string digits = name.substr(2);
  if (!std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    return std::nullopt;
  }
  return std::stoi(digits);
}

std::optional<double> coefficient_of(const std::vector<Term>& terms, const std::string& name) {
  for (const auto& t : terms) {
    if (t.name == name) return t.coefficient;
  }
  return std::nullopt;
}

}  // namespace

std::string to_string(models::ModelKind kind) {
  return kind == models::ModelKind::kDirect ? "direct" : "indirect";
}

models::ModelKind parse_model_kind(const std::string& text) {
  if (text == "direct") return models::ModelKind::kDirect;
  if (text == "indirect") return models::ModelKind::kIndirect;
  throw SchemaError("model must be 'direct' or 'indirect', got '" + text + "'");
}

AirspeedModel AirspeedModel::from(const models::DirectCoefficients& c) {
  AirspeedModel m;
  m.kind = models::ModelKind::kDirect;
  m.terms = {{"omega", c.beta1}, {"P2_over_omega5", c.beta2}};
  return m;
}

AirspeedModel AirspeedModel::from(const models::IndirectCoefficients& c) {
  AirspeedModel m;
  m.kind = models::ModelKind::kIndirect;
  m.terms = {{"cp0", c.alpha0}, {"cp1", c.alpha1}, {"cp4", c.alpha2}};
  return m;
}

std::optional<models::DirectCoefficients> AirspeedModel::direct() const {
  if (kind != models::ModelKind::kDirect || terms.size() != 2) return std::nullopt;
  const auto b1 = coefficient_of(terms, "omega");
  const auto b2 = coefficient_of(terms, "P2_over_omega5");
  if (!b1 || !b2) return std::nullopt;
  return models::DirectCoefficients{*b1, *b2};
}

std::optional<models::IndirectCoefficients> AirspeedModel::indirect() const {
  if (kind != models::ModelKind::kIndirect) return std::nullopt;
  for (const auto& t : terms) {
    if (t.name != "cp0" && t.name != "cp1" && t.name != "cp4") return std::nullopt;
  }
  return models::IndirectCoefficients{coefficient_of(terms, "cp0").value_or(0.0),
                                      coefficient_of(terms, "cp1").value_or(0.0),
                                      coefficient_of(terms, "cp4").value_or(0.0)};
}

void AirspeedModel::check_terms() const {
  if (terms.empty()) throw SchemaError("model: no terms");
  for (const auto& t : terms) {
    const bool known = kind == models::ModelKind::kDirect ? direct_terms().count(t.name) > 0
                                                          : cp_degree(t.name).has_value();
    if (!known) throw SchemaError("model: unknown " + to_string(kind) + " term '" + t.name + "'");
    if (!std::isfinite(t.coefficient)) throw SchemaError("model: non-finite coefficient " + t.name);
  }
}

double AirspeedModel::term_response(models::ModelKind kind, const std::string& name,
                                    const sparse::RegressionRecord& r, double diameter) {
  if (kind == models::ModelKind::kDirect) {
    const auto it = direct_terms().find(name);
    if (it == direct_terms().end()) throw SchemaError("model: unknown direct term " + name);
    return it->second(r);
  }
  const auto k = cp_degree(name);
  if (!k) throw SchemaError("model: unknown indirect term " + name);
  return units::rad_s_to_rev_s(r.omega) * diameter * std::pow(r.c_p, *k);
}

models::AirspeedEstimate AirspeedModel::evaluate(const models::PowerSample& s,
                                                 const models::Environment& env,
                                                 double omega_dot) const {
  if (!(s.omega > 0.0)) throw std::invalid_argument("evaluate: omega must be positive");
  sparse::RegressionRecord r{s.power, s.omega, omega_dot, 0.0, 0.0};
  if (kind == models::ModelKind::kIndirect) {
    r.c_p = models::power_coefficient(s.power, s.omega, s.rho.value_or(env.rho), env.diameter);
  }
  double v = 0.0;
  for (const auto& t : terms) v += t.coefficient * term_response(kind, t.name, r, env.diameter);
  if (!std::isfinite(v)) throw NonFiniteError("evaluate: non-finite airspeed");
  if (v < 0.0) return {0.0, true};
  return {v, false};
}

nlohmann::json to_json(const AirspeedModel& m) {
  nlohmann::json j;
  j["model"] = to_string(m.kind);
  nlohmann::json coeffs = nlohmann::json::object();
  if (const auto d = m.direct()) {
    coeffs = {{"beta1", d->beta1}, {"beta2", d->beta2}};
  } else if (const auto ind = m.indirect()) {
    coeffs = {{"alpha0", ind->alpha0}, {"alpha1", ind->alpha1}, {"alpha2", ind->alpha2}};
  }
  j["coefficients"] = coeffs;
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& t : m.terms) terms.push_back({{"name", t.name}, {"coefficient", t.coefficient}});
  j["terms"] = terms;
  j["omega_unit"] = "rad_s";
  nlohmann::json meta = {{"dataset", m.training.dataset},
                         {"rho_a", m.training.rho},
                         {"diameter_m", m.training.diameter}};
  meta["eta"] = m.training.eta ? nlohmann::json(*m.training.eta) : nlohmann::json(nullptr);
  j["training_metadata"] = meta;
  if (m.wind) j["wind"] = {{"v_wn_mps", m.wind->v_wn}, {"v_we_mps", m.wind->v_we}};
  if (!m.diagnostics.empty()) j["diagnostics"] = m.diagnostics;
  return j;
}

AirspeedModel model_from_json(const nlohmann::json& j) {
  try {
    AirspeedModel m;
    m.kind = parse_model_kind(j.at("model").get<std::string>());
    const std::string unit = j.value("omega_unit", std::string("rad_s"));
    if (unit != "rad_s") throw UnitUnknownError("model: omega_unit must be rad_s, got " + unit);

    if (j.contains("terms")) {
      for (const auto& t : j.at("terms")) {
        m.terms.push_back({t.at("name").get<std::string>(), t.at("coefficient").get<double>()});
      }
    } else {
      const auto& c = j.at("coefficients");
      if (m.kind == models::ModelKind::kDirect) {
        m.terms = AirspeedModel::from(models::DirectCoefficients{c.at("beta1").get<double>(),
                                                                 c.at("beta2").get<double>()})
                      .terms;
      } else {
        m.terms = AirspeedModel::from(models::IndirectCoefficients{c.at("alpha0").get<double>(),
                                                                   c.at("alpha1").get<double>(),
                                                                   c.at("alpha2").get<double>()})
                      .terms;
      }
    }
    m.check_terms();

    if (j.contains("training_metadata")) {
      const auto& meta = j.at("training_metadata");
      m.training.dataset = meta.value("dataset", std::string());
      m.training.rho = meta.value("rho_a", m.training.rho);
      m.training.diameter = meta.value("diameter_m", m.training.diameter);
      if (meta.contains("eta") && !meta.at("eta").is_null())
        m.training.eta = meta.at("eta").get<double>();
    }
    if (j.contains("wind")) {
      m.wind = inflight::WindEstimate{j.at("wind").at("v_wn_mps").get<double>(),
                                      j.at("wind").at("v_we_mps").get<double>()};
    }
    if (j.contains("diagnostics")) m.diagnostics = j.at("diagnostics");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("model: ") + e.what());
  }
}

void save_json(const std::filesystem::path& path, const nlohmann::json& j) {
  write_atomically(path, j.dump(2) + "\n");
}

nlohmann::json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

void save_model(const std::filesystem::path& path, const AirspeedModel& m) {
  save_json(path, to_json(m));
}

AirspeedModel load_model(const std::filesystem::path& path) {
  return model_from_json(load_json(path));
}

}  // namespace propas
