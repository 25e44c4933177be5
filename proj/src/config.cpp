#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "modshift/errors.hpp"
#include "modshift/experiment.hpp"

namespace modshift::experiment {

namespace {

using nlohmann::json;

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "d",           "K",
      "m_k",         "w_star",
      "label_noise_std", "channel_noise_var",
      "eta",         "R",
      "rounds",      "scheme",
      "custom_gamma", "custom_gamma_per_agent",
      "baseline.kind", "baseline.beta_sq", "baseline.lambda_sq",
      "heterogeneity", "master_seed",
      "trace_out",   "summary_out",
  };
  return keys;
}

Vector vector_from_json(const json& j, const std::string& key) {
  if (!j.is_array()) throw ConfigError("'" + key + "' must be an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  Eigen::Index i = 0;
  for (const auto& item : j) {
    if (!item.is_number()) throw ConfigError("'" + key + "' must contain numbers only");
    v[i++] = item.get<double>();
  }
  return v;
}

double number_from(const json& j, const std::string& key) {
  if (!j.is_number()) throw ConfigError("'" + key + "' must be a number");
  return j.get<double>();
}

int int_from(const json& j, const std::string& key) {
  if (!j.is_number_integer()) throw ConfigError("'" + key + "' must be an integer");
  return j.get<int>();
}

}  // namespace

ExperimentConfig parse_config_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) {
    throw ConfigError("config must be a JSON object");
  }
  for (const auto& item : doc.items()) {
    if (known_keys().count(item.key()) == 0) {
      throw ConfigError("unknown config key '" + item.key() + "'");
    }
  }

  ExperimentConfig cfg;
  if (doc.contains("d")) cfg.d = int_from(doc["d"], "d");
  if (doc.contains("K")) cfg.agents = int_from(doc["K"], "K");
  if (doc.contains("m_k")) cfg.samples_per_agent = int_from(doc["m_k"], "m_k");
  if (doc.contains("w_star")) {
    const auto& w = doc["w_star"];
    if (w.is_string()) {
      if (w.get<std::string>() != "ramp") {
        throw ConfigError("'w_star' must be \"ramp\" or an array of length d");
      }
      cfg.w_star_spec = WStarSpec::ramp;
    } else {
      cfg.w_star_spec = WStarSpec::custom;
      cfg.w_star_custom = vector_from_json(w, "w_star");
    }
  }
  if (doc.contains("label_noise_std")) {
    cfg.label_noise_std = number_from(doc["label_noise_std"], "label_noise_std");
  }
  if (doc.contains("channel_noise_var")) {
    cfg.channel_noise_var = number_from(doc["channel_noise_var"], "channel_noise_var");
  }
  if (doc.contains("eta")) cfg.eta = number_from(doc["eta"], "eta");
  if (doc.contains("R")) cfg.local_epochs = int_from(doc["R"], "R");
  if (doc.contains("rounds")) cfg.rounds = int_from(doc["rounds"], "rounds");

  std::string scheme_name = "none";
  if (doc.contains("scheme")) {
    if (!doc["scheme"].is_string()) throw ConfigError("'scheme' must be a string");
    scheme_name = doc["scheme"].get<std::string>();
  }
  const auto kind = shiftdesign::scheme_from_name(scheme_name);
  if (kind == shiftdesign::SchemeKind::custom) {
    const bool single = doc.contains("custom_gamma");
    const bool per_agent = doc.contains("custom_gamma_per_agent");
    if (single == per_agent) {
      throw ConfigError(
          "custom scheme requires exactly one of 'custom_gamma' or 'custom_gamma_per_agent'");
    }
    if (single) {
      cfg.scheme = shiftdesign::ShiftScheme::custom(vector_from_json(doc["custom_gamma"],
                                                                     "custom_gamma"));
    } else {
      cfg.scheme.kind = shiftdesign::SchemeKind::custom;
      const auto& outer = doc["custom_gamma_per_agent"];
      if (!outer.is_array()) {
        throw ConfigError("'custom_gamma_per_agent' must be an array of arrays");
      }
      for (const auto& inner : outer) {
        cfg.per_agent_gamma.push_back(vector_from_json(inner, "custom_gamma_per_agent"));
      }
    }
  } else {
    if (doc.contains("custom_gamma") || doc.contains("custom_gamma_per_agent")) {
      throw ConfigError("gamma vectors are only valid with the custom scheme");
    }
    cfg.scheme.kind = kind;
  }

  if (doc.contains("baseline.kind")) {
    if (!doc["baseline.kind"].is_string()) throw ConfigError("'baseline.kind' must be a string");
    const std::string kind_name = doc["baseline.kind"].get<std::string>();
    baselines::InjectionConfig injection;
    if (kind_name == "gaussian") {
      injection.kind = baselines::InjectionKind::gaussian;
      if (!doc.contains("baseline.beta_sq")) {
        throw ConfigError("gaussian baseline requires 'baseline.beta_sq'");
      }
      injection.beta_sq = number_from(doc["baseline.beta_sq"], "baseline.beta_sq");
    } else if (kind_name == "laplace") {
      injection.kind = baselines::InjectionKind::laplace;
      if (!doc.contains("baseline.lambda_sq")) {
        throw ConfigError("laplace baseline requires 'baseline.lambda_sq'");
      }
      const double lambda_sq = number_from(doc["baseline.lambda_sq"], "baseline.lambda_sq");
      if (lambda_sq < 0.0) throw ConfigError("'baseline.lambda_sq' must be nonnegative");
      // The sweep parameter is the squared scale; the sampler takes the scale.
      injection.lambda = std::sqrt(lambda_sq);
    } else {
      throw ConfigError("'baseline.kind' must be \"gaussian\" or \"laplace\"");
    }
    cfg.baseline = injection;
  } else if (doc.contains("baseline.beta_sq") || doc.contains("baseline.lambda_sq")) {
    throw ConfigError("baseline parameters require 'baseline.kind'");
  }

  if (doc.contains("heterogeneity")) {
    cfg.heterogeneity = number_from(doc["heterogeneity"], "heterogeneity");
  }
  if (doc.contains("master_seed")) {
    if (!doc["master_seed"].is_number_integer()) {
      throw ConfigError("'master_seed' must be an integer");
    }
    cfg.master_seed = doc["master_seed"].get<std::uint64_t>();
  }
  if (doc.contains("trace_out")) {
    if (!doc["trace_out"].is_string()) throw ConfigError("'trace_out' must be a string");
    cfg.trace_path = doc["trace_out"].get<std::string>();
  }
  if (doc.contains("summary_out")) {
    if (!doc["summary_out"].is_string()) throw ConfigError("'summary_out' must be a string");
    cfg.summary_path = doc["summary_out"].get<std::string>();
  }

  cfg.validate();
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) {
    throw ConfigError("cannot open config file: " + path);
  }
  std::ostringstream buffer;
  buffer << file.rdbuf();
  return parse_config_json(buffer.str());
}

namespace {

json config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["d"] = cfg.d;
  j["K"] = cfg.agents;
  j["m_k"] = cfg.samples_per_agent;
  if (cfg.w_star_spec == WStarSpec::ramp) {
    j["w_star"] = "ramp";
  } else {
    j["w_star"] = std::vector<double>(cfg.w_star_custom.begin(), cfg.w_star_custom.end());
  }
  j["label_noise_std"] = cfg.label_noise_std;
  j["channel_noise_var"] = cfg.channel_noise_var;
  j["eta"] = cfg.eta;
  j["R"] = cfg.local_epochs;
  j["rounds"] = cfg.rounds;
  j["scheme"] = shiftdesign::scheme_name(cfg.scheme.kind);
  if (cfg.scheme.custom_gamma.has_value()) {
    j["custom_gamma"] =
        std::vector<double>(cfg.scheme.custom_gamma->begin(), cfg.scheme.custom_gamma->end());
  }
  if (!cfg.per_agent_gamma.empty()) {
    json gammas = json::array();
    for (const auto& g : cfg.per_agent_gamma) {
      gammas.push_back(std::vector<double>(g.begin(), g.end()));
    }
    j["custom_gamma_per_agent"] = std::move(gammas);
  }
  if (cfg.baseline.has_value()) {
    if (cfg.baseline->kind == baselines::InjectionKind::gaussian) {
      j["baseline.kind"] = "gaussian";
      j["baseline.beta_sq"] = cfg.baseline->beta_sq;
    } else {
      j["baseline.kind"] = "laplace";
      j["baseline.lambda_sq"] = cfg.baseline->lambda * cfg.baseline->lambda;
    }
  }
  j["heterogeneity"] = cfg.heterogeneity;
  j["master_seed"] = cfg.master_seed;
  if (!cfg.trace_path.empty()) j["trace_out"] = cfg.trace_path;
  if (!cfg.summary_path.empty()) j["summary_out"] = cfg.summary_path;
  return j;
}

}  // namespace

std::string summary_json(const Summary& summary) {
  json j;
  j["config"] = config_to_json(summary.config);
  j["rounds_run"] = summary.rounds_run;
  j["final"] = {
      {"loss_bob", summary.final_loss_bob},
      {"loss_eve", summary.final_loss_eve},
      {"shift_vs_bob", summary.final_shift_vs_bob},
      {"shift_vs_wstar", summary.final_shift_vs_wstar},
  };
  j["ledger"] = {{"total_scalars", summary.ledger_total}};
  j["tamper"] = {
      {"pass_rate", summary.tamper_pass_rate},
      {"margin_min", summary.tamper_margin_min},
      {"margin_mean", summary.tamper_margin_mean},
  };
  return j.dump(2);
}

}  // namespace modshift::experiment
