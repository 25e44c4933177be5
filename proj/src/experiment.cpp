#include "modshift/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <string>

#include "modshift/adversary.hpp"
#include "modshift/channel.hpp"
#include "modshift/errors.hpp"
#include "modshift/rng.hpp"

namespace modshift::experiment {

void ExperimentConfig::validate() const {
  if (d < 2) throw ConfigError("dimension d must be at least 2");
  if (agents < 1) throw ConfigError("agent count K must be at least 1");
  if (samples_per_agent < 1) throw ConfigError("samples per agent m_k must be at least 1");
  if (label_noise_std < 0.0 || !std::isfinite(label_noise_std)) {
    throw ConfigError("label_noise_std must be nonnegative and finite");
  }
  if (channel_noise_var < 0.0 || !std::isfinite(channel_noise_var)) {
    throw ConfigError("channel_noise_var must be nonnegative and finite");
  }
  if (!(eta > 0.0) || !std::isfinite(eta)) {
    throw ConfigError("eta must be positive and finite");
  }
  if (local_epochs < 1) throw ConfigError("local epochs R must be at least 1");
  if (rounds < 1) throw ConfigError("rounds N must be at least 1");
  if (heterogeneity < 0.0 || !std::isfinite(heterogeneity)) {
    throw ConfigError("heterogeneity must be nonnegative and finite");
  }
  if (w_star_spec == WStarSpec::custom) {
    if (w_star_custom.size() != d) {
      throw ConfigError("custom w_star must have length d");
    }
    if (!w_star_custom.allFinite()) {
      throw ConfigError("custom w_star must be finite");
    }
  }
  if (scheme.kind != shiftdesign::SchemeKind::none && baseline.has_value()) {
    throw ConfigError("configure one privacy mechanism per run: scheme or baseline, not both");
  }
  if (baseline.has_value()) baseline->validate();
  if (scheme.kind == shiftdesign::SchemeKind::custom) {
    const bool single = scheme.custom_gamma.has_value();
    const bool per_agent = !per_agent_gamma.empty();
    if (single == per_agent) {
      throw ConfigError("custom scheme requires exactly one of custom_gamma or per-agent gammas");
    }
    if (single && scheme.custom_gamma->size() != d) {
      throw ConfigError("custom_gamma must have length d");
    }
    if (per_agent) {
      if (static_cast<int>(per_agent_gamma.size()) != agents) {
        throw ConfigError("per-agent gammas must provide one vector per agent");
      }
      for (const auto& g : per_agent_gamma) {
        if (g.size() != d || !shiftdesign::validate_gamma(g, 1e-12)) {
          throw ConfigError("each per-agent gamma must have length d and sum to -1 within 1e-12");
        }
      }
    }
  } else if (!per_agent_gamma.empty()) {
    throw ConfigError("per-agent gammas require the custom scheme");
  }
}

Vector ExperimentConfig::w_star() const {
  if (w_star_spec == WStarSpec::custom) return w_star_custom;
  Vector w(d);
  for (int i = 0; i < d; ++i) w[i] = static_cast<double>(i + 1);
  return w;
}

std::vector<fedcore::LocalDataset> generate_data(const ExperimentConfig& cfg) {
  cfg.validate();
  const Vector base = cfg.w_star();
  std::vector<fedcore::LocalDataset> out;
  out.reserve(static_cast<size_t>(cfg.agents));
  for (int k = 0; k < cfg.agents; ++k) {
    auto feature_stream = make_stream(cfg.master_seed, StreamLabel::data_features, k, 0);
    auto label_stream = make_stream(cfg.master_seed, StreamLabel::data_labels, k, 0);
    Vector w_k = base;
    if (cfg.heterogeneity > 0.0) {
      auto het_stream = make_stream(cfg.master_seed, StreamLabel::data_heterogeneity, k, 0);
      w_k += het_stream.gaussian_vector(cfg.d, cfg.heterogeneity);
    }
    Matrix x(cfg.samples_per_agent, cfg.d);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      for (Eigen::Index j = 0; j < x.cols(); ++j) {
        x(i, j) = feature_stream.gaussian();
      }
    }
    Vector y = x * w_k;
    if (cfg.label_noise_std > 0.0) {
      y += label_stream.gaussian_vector(y.size(), cfg.label_noise_std);
    }
    out.emplace_back(std::move(x), std::move(y), k);
  }
  return out;
}

RunResult run_experiment(const ExperimentConfig& cfg) {
  return run_experiment(cfg, generate_data(cfg));
}

RunResult run_experiment(const ExperimentConfig& cfg,
                         const std::vector<fedcore::LocalDataset>& data) {
  cfg.validate();
  if (static_cast<int>(data.size()) != cfg.agents) {
    throw ConfigError("dataset count does not match the configured agent count");
  }
  double total_samples = 0.0;
  for (const auto& ds : data) {
    if (ds.dim() != cfg.d) throw ConfigError("dataset dimension does not match config");
    total_samples += static_cast<double>(ds.sample_count());
  }
  Vector weights(cfg.agents);
  for (int k = 0; k < cfg.agents; ++k) {
    weights[k] = static_cast<double>(data[static_cast<size_t>(k)].sample_count()) / total_samples;
  }

  fedcore::TrainConfig train_cfg{cfg.eta, cfg.local_epochs, cfg.rounds, weights};
  train_cfg.validate();

  const double channel_stddev = std::sqrt(cfg.channel_noise_var);
  const channel::ChannelParams bob_channel{1.0, channel_stddev, channel::Receiver::bob};
  const channel::ChannelParams eve_channel{1.0, channel_stddev, channel::Receiver::eve};

  const bool shifting = cfg.scheme.kind != shiftdesign::SchemeKind::none;
  const Vector w_star = cfg.w_star();

  Vector w_bob = Vector::Zero(cfg.d);
  adversary::EveState eve{Vector::Zero(cfg.d), {}, {}};
  channel::SecretLedger ledger;

  RunResult result;
  result.rounds.reserve(static_cast<size_t>(cfg.rounds));

  for (int n = 0; n < cfg.rounds; ++n) {
    std::vector<fedcore::Delta> deltas;
    deltas.reserve(static_cast<size_t>(cfg.agents));
    for (int k = 0; k < cfg.agents; ++k) {
      Vector w_local;
      try {
        w_local = fedcore::local_descent(w_bob, data[static_cast<size_t>(k)], train_cfg);
      } catch (const DivergenceError& e) {
        throw DivergenceError(std::string(e.what()) + ", round " + std::to_string(n),
                              e.agent_id, e.local_epoch, n);
      }
      deltas.push_back(fedcore::compute_delta(w_local, w_bob, k, n));
    }

    const auto alignment = adversary::alpha(deltas, weights);

    const long ledger_before = ledger.total();
    std::vector<fedcore::Delta> bob_received;
    bob_received.reserve(static_cast<size_t>(cfg.agents));
    std::vector<Vector> eve_observations;
    eve_observations.reserve(static_cast<size_t>(cfg.agents));
    std::vector<double> gamma_norms(static_cast<size_t>(cfg.agents), 0.0);
    bool homogeneous = true;
    Vector first_gamma;

    for (int k = 0; k < cfg.agents; ++k) {
      auto bob_stream = make_stream(cfg.master_seed, StreamLabel::channel_bob, k, n);
      auto eve_stream = make_stream(cfg.master_seed, StreamLabel::channel_eve, k, n);
      const auto& delta = deltas[static_cast<size_t>(k)];
      Vector y_bob;
      Vector y_eve;
      if (shifting) {
        const Vector gamma = cfg.per_agent_gamma.empty()
                                 ? shiftdesign::make_gamma(cfg.scheme, delta)
                                 : cfg.per_agent_gamma[static_cast<size_t>(k)];
        const auto shifted = shiftdesign::apply_shift(delta, gamma);
        y_eve = channel::eve_observe(shifted, eve_channel, eve_stream);
        y_bob = channel::bob_receive_and_compensate(shifted, shifted.shift_scalar(), bob_channel,
                                                    bob_stream, ledger);
        gamma_norms[static_cast<size_t>(k)] = gamma.norm();
        if (k == 0) {
          first_gamma = gamma;
        } else if (homogeneous && (gamma.array() != first_gamma.array()).any()) {
          homogeneous = false;
        }
      } else if (cfg.baseline.has_value()) {
        auto injection_stream = make_stream(cfg.master_seed, StreamLabel::injection, k, n);
        const auto injected =
            baselines::inject(delta, *cfg.baseline, injection_stream, ledger);
        y_eve = channel::transmit(injected.perturbed, eve_channel, eve_stream);
        // The server knows the injected vector exactly, so denoising cancels
        // it and leaves the plain delta through his channel.
        y_bob = channel::transmit(delta.values, bob_channel, bob_stream);
      } else {
        y_eve = channel::transmit(delta.values, eve_channel, eve_stream);
        y_bob = channel::transmit(delta.values, bob_channel, bob_stream);
      }
      bob_received.push_back(fedcore::Delta{std::move(y_bob), k, n});
      eve_observations.push_back(std::move(y_eve));
    }

    const Vector w_next = fedcore::aggregate(w_bob, bob_received, weights);
    eve = adversary::eve_update(std::move(eve), eve_observations, weights);

    const double epsilon = (w_next - w_bob).norm();
    const double eve_norm = eve.history.back();
    const adversary::TamperBoundInputs bound_inputs{epsilon, gamma_norms, alignment.value,
                                                    homogeneous};
    const double bound = adversary::tamper_bound(bound_inputs, cfg.d);
    const bool pass = adversary::tamper_test(eve_norm, bound);
    eve.tamper_flags.push_back(pass);

    w_bob = w_next;

    RoundTrace row;
    row.round = n;
    row.loss_bob = fedcore::global_loss(w_bob, data);
    row.loss_eve = fedcore::global_loss(eve.w_eve, data);
    row.shift_vs_bob = (eve.w_eve - w_bob).norm();
    row.shift_vs_wstar = (eve.w_eve - w_star).norm();
    row.bob_update_norm = epsilon;
    row.eve_update_norm = eve_norm;
    row.tamper_bound = bound;
    row.tamper_pass = pass;
    row.alpha = alignment.value;
    row.secret_scalars = ledger.total() - ledger_before;
    result.rounds.push_back(row);
  }

  Summary& s = result.summary;
  s.config = cfg;
  s.rounds_run = cfg.rounds;
  const RoundTrace& last = result.rounds.back();
  s.final_loss_bob = last.loss_bob;
  s.final_loss_eve = last.loss_eve;
  s.final_shift_vs_bob = last.shift_vs_bob;
  s.final_shift_vs_wstar = last.shift_vs_wstar;
  s.ledger_total = ledger.total();
  int passes = 0;
  int finite_bounds = 0;
  double margin_min = std::numeric_limits<double>::infinity();
  double margin_sum = 0.0;
  for (const auto& row : result.rounds) {
    if (row.tamper_pass) ++passes;
    if (std::isfinite(row.tamper_bound)) {
      ++finite_bounds;
      const double margin = row.tamper_bound - row.eve_update_norm;
      margin_sum += margin;
      margin_min = std::min(margin_min, margin);
    }
  }
  s.tamper_pass_rate = static_cast<double>(passes) / static_cast<double>(cfg.rounds);
  if (finite_bounds > 0) {
    s.tamper_margin_min = margin_min;
    s.tamper_margin_mean = margin_sum / static_cast<double>(finite_bounds);
  } else {
    s.tamper_margin_min = std::numeric_limits<double>::quiet_NaN();
    s.tamper_margin_mean = std::numeric_limits<double>::quiet_NaN();
  }
  return result;
}

std::string trace_csv(const std::vector<RoundTrace>& rounds) {
  std::string out =
      "round,loss_bob,loss_eve,shift_vs_bob,shift_vs_wstar,bob_update_norm,"
      "eve_update_norm,tamper_bound,tamper_pass,alpha,secret_scalars\n";
  char line[512];
  for (const auto& r : rounds) {
    std::snprintf(line, sizeof line,
                  "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%.17g,%ld\n", r.round,
                  r.loss_bob, r.loss_eve, r.shift_vs_bob, r.shift_vs_wstar, r.bob_update_norm,
                  r.eve_update_norm, r.tamper_bound, r.tamper_pass ? 1 : 0, r.alpha,
                  r.secret_scalars);
    out += line;
  }
  return out;
}

void write_trace_csv(const std::string& path, const std::vector<RoundTrace>& rounds) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error("cannot open trace output file: " + path);
  file << trace_csv(rounds);
  if (!file) throw Error("failed writing trace file: " + path);
}

void write_summary_json(const std::string& path, const Summary& summary) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error("cannot open summary output file: " + path);
  file << summary_json(summary) << '\n';
  if (!file) throw Error("failed writing summary file: " + path);
}

}  // namespace modshift::experiment
