#include <set>
#include <string>

#include "tsdr/error.hpp"
#include "tsdr/simgen.hpp"

namespace tsdr {
namespace {

using nlohmann::json;

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto r = m.row(i);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  return rows;
}

Matrix matrix_from(const json& j, const char* key) {
  if (!j.is_array() || j.empty()) throw Error(ErrorKind::ConfigError, std::string(key) + " must be a non-empty array of rows");
  const std::size_t rows = j.size();
  const std::size_t cols = j.at(0).size();
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    const auto row = j.at(i).get<std::vector<double>>();
    if (row.size() != cols) throw Error(ErrorKind::ConfigError, std::string(key) + " has ragged rows");
    for (std::size_t k = 0; k < cols; ++k) m(i, k) = row[k];
  }
  return m;
}

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorKind::ConfigError, where + " must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) throw Error(ErrorKind::ConfigError, "unknown key '" + key + "' in " + where);
}

template <typename T>
T required(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw Error(ErrorKind::ConfigError, "missing key '" + std::string(key) + "' in " + where);
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigError, "bad value for '" + std::string(key) + "' in " + where + ": " + e.what());
  }
}

GammaParam gamma_param_from(const std::string& s) {
  if (s == "shape-scale") return GammaParam::ShapeScale;
  if (s == "shape-rate") return GammaParam::ShapeRate;
  if (s == "shape-mean") return GammaParam::ShapeMean;
  throw Error(ErrorKind::ConfigError, "unknown gamma convention '" + s + "'");
}

NoiseScale noise_from(const std::string& s) {
  if (s == "sd") return NoiseScale::StdDev;
  if (s == "variance") return NoiseScale::Variance;
  throw Error(ErrorKind::ConfigError, "unknown noise scale '" + s + "'");
}

}  // namespace

std::string to_string(GammaParam c) {
  switch (c) {
    case GammaParam::ShapeScale: return "shape-scale";
    case GammaParam::ShapeRate: return "shape-rate";
    case GammaParam::ShapeMean: return "shape-mean";
  }
  return "?";
}

std::string to_string(NoiseScale c) { return c == NoiseScale::StdDev ? "sd" : "variance"; }

void to_json(json& j, const ModelSpec& spec) {
  j = json::object();
  j["name"] = spec.name;
  std::visit(
      [&](const auto& law) {
        using T = std::decay_t<decltype(law)>;
        j["mu"] = law.mu;
        j["sigma"] = matrix_json(law.sigma);
        if constexpr (std::is_same_v<T, GammaModel>) {
          j["family"] = "gamma";
          j["alpha"] = law.alpha;
          j["scale"] = law.scale;
        } else if constexpr (std::is_same_v<T, LognormalRatioModel>) {
          j["family"] = "lognormal-ratio";
          j["alpha1"] = law.alpha1;
          j["alpha2"] = law.alpha2;
          j["radius_beta"] = {law.radius_a, law.radius_b};
          j["noise"] = to_string(law.noise);
        } else {
          j["family"] = "piecewise-hazard";
          j["alpha1"] = law.alpha1;
          j["alpha2"] = law.alpha2;
          j["alpha3"] = law.alpha3;
          j["tau"] = {law.tau1, law.tau2};
        }
      },
      spec.law);
  if (spec.censoring) {
    j["censoring"] = {{"shape", spec.censoring->shape},
                      {"param", spec.censoring->param},
                      {"convention", to_string(spec.censoring->convention)}};
  }
}

void from_json(const json& j, ModelSpec& spec) {
  if (!j.is_object()) throw Error(ErrorKind::ConfigError, "model must be a JSON object");
  const auto family = required<std::string>(j, "family", "model");
  ModelSpec out;
  out.name = j.value("name", family);
  if (family == "gamma") {
    reject_unknown(j, {"name", "family", "mu", "sigma", "alpha", "scale", "censoring"}, "model");
    GammaModel m;
    m.alpha = required<Vector>(j, "alpha", "model");
    m.scale = j.value("scale", 0.5);
    m.mu = required<Vector>(j, "mu", "model");
    m.sigma = matrix_from(j.at("sigma"), "sigma");
    out.law = m;
  } else if (family == "lognormal-ratio") {
    reject_unknown(j, {"name", "family", "mu", "sigma", "alpha1", "alpha2", "radius_beta", "noise", "censoring"},
                   "model");
    LognormalRatioModel m;
    m.alpha1 = required<Vector>(j, "alpha1", "model");
    m.alpha2 = required<Vector>(j, "alpha2", "model");
    if (j.contains("radius_beta")) {
      const auto ab = required<std::vector<double>>(j, "radius_beta", "model");
      if (ab.size() != 2) throw Error(ErrorKind::ConfigError, "radius_beta must hold two numbers");
      m.radius_a = ab[0];
      m.radius_b = ab[1];
    }
    if (j.contains("noise")) m.noise = noise_from(required<std::string>(j, "noise", "model"));
    m.mu = required<Vector>(j, "mu", "model");
    m.sigma = matrix_from(j.at("sigma"), "sigma");
    out.law = m;
  } else if (family == "piecewise-hazard") {
    reject_unknown(j, {"name", "family", "mu", "sigma", "alpha1", "alpha2", "alpha3", "tau", "censoring"}, "model");
    PiecewiseHazardModel m;
    m.alpha1 = required<Vector>(j, "alpha1", "model");
    m.alpha2 = required<Vector>(j, "alpha2", "model");
    m.alpha3 = required<Vector>(j, "alpha3", "model");
    const auto tau = required<std::vector<double>>(j, "tau", "model");
    if (tau.size() != 2) throw Error(ErrorKind::ConfigError, "tau must hold two numbers");
    m.tau1 = tau[0];
    m.tau2 = tau[1];
    m.mu = required<Vector>(j, "mu", "model");
    m.sigma = matrix_from(j.at("sigma"), "sigma");
    out.law = m;
  } else {
    throw Error(ErrorKind::ConfigError, "unknown model family '" + family + "'");
  }
  if (j.contains("censoring") && !j.at("censoring").is_null()) {
    const json& c = j.at("censoring");
    reject_unknown(c, {"shape", "param", "convention"}, "censoring");
    CensoringLaw law;
    law.shape = required<double>(c, "shape", "censoring");
    law.param = required<double>(c, "param", "censoring");
    if (c.contains("convention")) law.convention = gamma_param_from(required<std::string>(c, "convention", "censoring"));
    out.censoring = law;
  }
  out.validate();
  spec = std::move(out);
}

}  // namespace tsdr
