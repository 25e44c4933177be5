#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "modshift/baselines.hpp"
#include "modshift/fedcore.hpp"
#include "modshift/shiftdesign.hpp"
#include "modshift/types.hpp"

namespace modshift::experiment {

enum class WStarSpec { ramp, custom };

/// Full description of a simulation run. Defaults reproduce the reference
/// benchmark: d = 60, 100 agents with 1000 samples each, ramp generating
/// weights [1..d], label noise 0.1, per-receiver channel noise variance 0.1,
/// eta = 0.005, R = 10.
struct ExperimentConfig {
  int d = 60;
  int agents = 100;             // K
  int samples_per_agent = 1000; // m_k
  WStarSpec w_star_spec = WStarSpec::ramp;
  Vector w_star_custom;         // consulted when w_star_spec == custom
  double label_noise_std = 0.1;
  double channel_noise_var = 0.1;  // sigma^2 / h^2, same for both receivers
  double eta = 0.005;
  int local_epochs = 10;  // R
  int rounds = 200;       // N
  shiftdesign::ShiftScheme scheme;                 // defaults to none
  std::vector<Vector> per_agent_gamma;             // optional, requires scheme == custom
  std::optional<baselines::InjectionConfig> baseline;
  double heterogeneity = 0.0;  // std of per-agent generating-weight perturbation
  std::uint64_t master_seed = 1;
  std::string trace_path;    // optional output paths, used by the CLI
  std::string summary_path;

  void validate() const;

  /// The generating weights: [1, 2, ..., d] for ramp, or the custom vector.
  Vector w_star() const;
};

/// One row of the machine-readable trace.
struct RoundTrace {
  int round = 0;
  double loss_bob = 0.0;
  double loss_eve = 0.0;
  double shift_vs_bob = 0.0;    // |w_eve - w_bob|
  double shift_vs_wstar = 0.0;  // |w_eve - w_star|
  double bob_update_norm = 0.0; // epsilon_n
  double eve_update_norm = 0.0;
  double tamper_bound = 0.0;
  bool tamper_pass = false;
  double alpha = 1.0;           // +inf when the weighted delta sum vanished
  long secret_scalars = 0;      // secret-channel scalars consumed this round
};

struct Summary {
  ExperimentConfig config;
  int rounds_run = 0;
  double final_loss_bob = 0.0;
  double final_loss_eve = 0.0;
  double final_shift_vs_bob = 0.0;
  double final_shift_vs_wstar = 0.0;
  long ledger_total = 0;
  double tamper_pass_rate = 0.0;
  double tamper_margin_min = 0.0;   // min over rounds of (bound - eve norm)
  double tamper_margin_mean = 0.0;  // over rounds with a finite bound
};

struct RunResult {
  std::vector<RoundTrace> rounds;
  Summary summary;
};

/// K synthetic regression datasets: features iid standard normal, labels
/// w_star . x plus Gaussian noise. Deterministic per master seed.
std::vector<fedcore::LocalDataset> generate_data(const ExperimentConfig& cfg);

/// Runs the full protocol for cfg.rounds rounds: local descent, delta
/// computation, the configured privacy mechanism, both channels, server
/// aggregation and eavesdropper reconstruction, with one RoundTrace per round.
RunResult run_experiment(const ExperimentConfig& cfg);

/// Same, with pre-generated datasets (they must match cfg; useful when
/// several mechanisms share one seed).
RunResult run_experiment(const ExperimentConfig& cfg,
                         const std::vector<fedcore::LocalDataset>& data);

std::string trace_csv(const std::vector<RoundTrace>& rounds);
void write_trace_csv(const std::string& path, const std::vector<RoundTrace>& rounds);

std::string summary_json(const Summary& summary);
void write_summary_json(const std::string& path, const Summary& summary);

/// Parses the flat JSON configuration document; unknown keys are rejected.
ExperimentConfig parse_config_json(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

}  // namespace modshift::experiment
