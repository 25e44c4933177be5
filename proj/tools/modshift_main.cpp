// Command line front end: runs experiments, emits Fisher-information
// reports, sweeps the comparison grids, and validates configurations.
//
// Exit codes: 0 success, 1 runtime failure, 2 configuration error.

#include <CLI11.hpp>
#include <json.hpp>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "modshift/adversary.hpp"
#include "modshift/channel.hpp"
#include "modshift/experiment.hpp"
#include "modshift/fim.hpp"
#include "modshift/rng.hpp"
#include "modshift/shiftdesign.hpp"

namespace {

using nlohmann::json;
using namespace modshift;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

std::vector<double> to_std(const Vector& v) { return {v.begin(), v.end()}; }

Vector parse_number_list(const std::string& text, const std::string& flag) {
  std::vector<double> values;
  std::string token;
  std::istringstream in(text);
  while (std::getline(in, token, ',')) {
    try {
      values.push_back(std::stod(token));
    } catch (const std::exception&) {
      throw ConfigError("cannot parse '" + token + "' in " + flag + " as a number");
    }
  }
  if (values.empty()) throw ConfigError(flag + " must contain at least one number");
  Vector v(static_cast<Eigen::Index>(values.size()));
  for (size_t i = 0; i < values.size(); ++i) v[static_cast<Eigen::Index>(i)] = values[i];
  return v;
}

std::string with_repeat_suffix(const std::string& path, int repeat) {
  const auto dot = path.rfind('.');
  const std::string suffix = "_r" + std::to_string(repeat);
  if (dot == std::string::npos || dot == 0) return path + suffix;
  return path.substr(0, dot) + suffix + path.substr(dot);
}

// ---------------------------------------------------------------------------
// run

struct RunOptions {
  std::string config_path;
  std::string trace_path;
  std::string summary_path;
  int repeats = 1;
};

int cmd_run(const RunOptions& opt) {
  experiment::ExperimentConfig cfg = opt.config_path.empty()
                                         ? experiment::ExperimentConfig{}
                                         : experiment::load_config_file(opt.config_path);
  if (!opt.trace_path.empty()) cfg.trace_path = opt.trace_path;
  if (!opt.summary_path.empty()) cfg.summary_path = opt.summary_path;
  if (cfg.trace_path.empty()) cfg.trace_path = "trace.csv";
  if (cfg.summary_path.empty()) cfg.summary_path = "summary.json";
  if (opt.repeats < 1) throw ConfigError("--repeats must be at least 1");

  if (opt.repeats == 1) {
    const auto result = experiment::run_experiment(cfg);
    experiment::write_trace_csv(cfg.trace_path, result.rounds);
    experiment::write_summary_json(cfg.summary_path, result.summary);
    std::cout << "wrote " << cfg.trace_path << " (" << result.rounds.size() << " rounds) and "
              << cfg.summary_path << "; final eve loss "
              << result.summary.final_loss_eve << ", final bob loss "
              << result.summary.final_loss_bob << "\n";
    return kExitOk;
  }

  json combined;
  combined["repeats"] = json::array();
  double loss_bob = 0, loss_eve = 0, shift_bob = 0, shift_wstar = 0;
  for (int r = 0; r < opt.repeats; ++r) {
    experiment::ExperimentConfig run_cfg = cfg;
    run_cfg.master_seed = cfg.master_seed + static_cast<std::uint64_t>(r);
    const auto result = experiment::run_experiment(run_cfg);
    const std::string trace_path = with_repeat_suffix(cfg.trace_path, r);
    experiment::write_trace_csv(trace_path, result.rounds);
    combined["repeats"].push_back(json::parse(experiment::summary_json(result.summary)));
    loss_bob += result.summary.final_loss_bob;
    loss_eve += result.summary.final_loss_eve;
    shift_bob += result.summary.final_shift_vs_bob;
    shift_wstar += result.summary.final_shift_vs_wstar;
    std::cout << "wrote " << trace_path << " (seed " << run_cfg.master_seed << ")\n";
  }
  combined["mean_final"] = {
      {"loss_bob", loss_bob / opt.repeats},
      {"loss_eve", loss_eve / opt.repeats},
      {"shift_vs_bob", shift_bob / opt.repeats},
      {"shift_vs_wstar", shift_wstar / opt.repeats},
  };
  std::ofstream out(cfg.summary_path, std::ios::binary);
  if (!out) throw Error("cannot open summary output file: " + cfg.summary_path);
  out << combined.dump(2) << '\n';
  std::cout << "wrote " << cfg.summary_path << " (" << opt.repeats << " repeats)\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// fim-report

struct FimReportOptions {
  std::string scheme;
  int d = 0;
  double h = 1.0;
  double sigma = 1.0;
  std::string gamma_text;
  std::string delta_text;
  std::uint64_t seed = 1;
  std::string out_path;
};

int cmd_fim_report(const FimReportOptions& opt) {
  const auto kind = shiftdesign::scheme_from_name(opt.scheme);
  if (kind == shiftdesign::SchemeKind::none) {
    throw ConfigError("scheme 'none' applies no shift and has no spectrum report");
  }

  Vector gamma;
  std::optional<Vector> delta_used;
  if (kind == shiftdesign::SchemeKind::custom) {
    if (opt.gamma_text.empty()) throw ConfigError("--gamma is required for the custom scheme");
    gamma = parse_number_list(opt.gamma_text, "--gamma");
    if (!shiftdesign::validate_gamma(gamma, 1e-12)) {
      throw ConfigError("--gamma entries must be finite and sum to -1");
    }
  } else if (kind == shiftdesign::SchemeKind::max) {
    Vector delta;
    if (!opt.delta_text.empty()) {
      delta = parse_number_list(opt.delta_text, "--delta");
    } else {
      if (opt.d < 2) throw ConfigError("--d is required (>= 2) when --delta is not given");
      auto stream = make_stream(opt.seed, StreamLabel::probe, 0, 0);
      delta = stream.gaussian_vector(opt.d);
    }
    delta_used = delta;
    gamma = shiftdesign::make_gamma(shiftdesign::ShiftScheme::max(),
                                    fedcore::Delta{delta, 0, 0});
  } else {
    if (opt.d < 2) throw ConfigError("--d is required (>= 2) for this scheme");
    const fedcore::Delta probe{Vector::Zero(opt.d), 0, 0};
    gamma = shiftdesign::make_gamma({kind, std::nullopt}, probe);
  }

  const fim::FimContext ctx(gamma, opt.h, opt.sigma);
  const Matrix j = fim::build_fim(ctx);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(j, Eigen::EigenvaluesOnly);

  json report;
  report["scheme"] = opt.scheme;
  report["d"] = ctx.d;
  report["h"] = opt.h;
  report["sigma"] = opt.sigma;
  report["gamma"] = to_std(gamma);
  if (delta_used.has_value()) report["delta"] = to_std(*delta_used);
  report["closed_form_eigenvalues"] = to_std(fim::closed_form_eigenvalues(ctx));
  report["numeric_eigenvalues"] = to_std(solver.eigenvalues());
  report["singular"] = fim::is_singular(j);
  report["rank_deficiency"] =
      shiftdesign::shift_matrix_rank_deficiency(gamma, gamma.size());

  const std::string text = report.dump(2);
  if (opt.out_path.empty()) {
    std::cout << text << '\n';
  } else {
    std::ofstream out(opt.out_path, std::ios::binary);
    if (!out) throw Error("cannot open output file: " + opt.out_path);
    out << text << '\n';
    std::cout << "wrote " << opt.out_path << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepOptions {
  std::string config_path;
  std::string out_dir;
  std::string grid = "both";
  int seeds = 5;
};

struct Mechanism {
  std::string label;
  shiftdesign::ShiftScheme scheme;
  std::optional<baselines::InjectionConfig> baseline;
};

// Shift vs noise injection vs no protection.
std::vector<Mechanism> comparison_grid() {
  using baselines::InjectionConfig;
  using baselines::InjectionKind;
  return {
      {"max", shiftdesign::ShiftScheme::max(), std::nullopt},
      {"gaussian_b2_0.1", shiftdesign::ShiftScheme::none(),
       InjectionConfig{InjectionKind::gaussian, 0.1, 0.0}},
      {"gaussian_b2_1", shiftdesign::ShiftScheme::none(),
       InjectionConfig{InjectionKind::gaussian, 1.0, 0.0}},
      {"laplace_l2_0.1", shiftdesign::ShiftScheme::none(),
       InjectionConfig{InjectionKind::laplace, 0.0, std::sqrt(0.1)}},
      {"laplace_l2_1", shiftdesign::ShiftScheme::none(),
       InjectionConfig{InjectionKind::laplace, 0.0, 1.0}},
      {"none", shiftdesign::ShiftScheme::none(), std::nullopt},
  };
}

// The three shift schemes against the unprotected run.
std::vector<Mechanism> scheme_grid() {
  return {
      {"max", shiftdesign::ShiftScheme::max(), std::nullopt},
      {"mean", shiftdesign::ShiftScheme::mean(), std::nullopt},
      {"comp", shiftdesign::ShiftScheme::comp(), std::nullopt},
      {"none", shiftdesign::ShiftScheme::none(), std::nullopt},
  };
}

json sweep_grid(const experiment::ExperimentConfig& base, const std::vector<Mechanism>& grid,
                const std::string& prefix, const std::filesystem::path& out_dir, int seeds) {
  struct Totals {
    double loss_eve = 0, shift_bob = 0, loss_bob = 0;
    std::vector<double> per_seed_loss_eve, per_seed_shift;
  };
  std::map<std::string, Totals> totals;
  bool bob_identical = true;

  for (int s = 0; s < seeds; ++s) {
    experiment::ExperimentConfig seed_cfg = base;
    seed_cfg.master_seed = base.master_seed + static_cast<std::uint64_t>(s);
    seed_cfg.scheme = shiftdesign::ShiftScheme::none();
    seed_cfg.per_agent_gamma.clear();
    seed_cfg.baseline.reset();
    const auto data = experiment::generate_data(seed_cfg);

    std::optional<double> bob_reference;
    for (const auto& mech : grid) {
      experiment::ExperimentConfig cfg = seed_cfg;
      cfg.scheme = mech.scheme;
      cfg.baseline = mech.baseline;
      const auto result = experiment::run_experiment(cfg, data);

      const std::string stem =
          prefix + "_" + mech.label + "_seed" + std::to_string(cfg.master_seed);
      experiment::write_trace_csv((out_dir / (stem + ".csv")).string(), result.rounds);
      experiment::write_summary_json((out_dir / (stem + ".json")).string(), result.summary);

      auto& t = totals[mech.label];
      t.loss_eve += result.summary.final_loss_eve;
      t.shift_bob += result.summary.final_shift_vs_bob;
      t.loss_bob += result.summary.final_loss_bob;
      t.per_seed_loss_eve.push_back(result.summary.final_loss_eve);
      t.per_seed_shift.push_back(result.summary.final_shift_vs_bob);
      if (!bob_reference.has_value()) {
        bob_reference = result.summary.final_loss_bob;
      } else if (*bob_reference != result.summary.final_loss_bob) {
        bob_identical = false;
      }
    }
  }

  json out;
  out["seeds"] = seeds;
  out["first_seed"] = base.master_seed;
  out["bob_final_loss_identical_across_mechanisms"] = bob_identical;
  for (const auto& [label, t] : totals) {
    out["mechanisms"][label] = {
        {"final_loss_eve_mean", t.loss_eve / seeds},
        {"final_shift_vs_bob_mean", t.shift_bob / seeds},
        {"final_loss_bob_mean", t.loss_bob / seeds},
        {"final_loss_eve_per_seed", t.per_seed_loss_eve},
        {"final_shift_vs_bob_per_seed", t.per_seed_shift},
    };
  }
  return out;
}

int cmd_sweep(const SweepOptions& opt) {
  if (opt.grid != "comparison" && opt.grid != "schemes" && opt.grid != "both") {
    throw ConfigError("--grid must be comparison, schemes or both");
  }
  if (opt.seeds < 1) throw ConfigError("--seeds must be at least 1");
  experiment::ExperimentConfig base = opt.config_path.empty()
                                          ? experiment::ExperimentConfig{}
                                          : experiment::load_config_file(opt.config_path);
  const std::filesystem::path out_dir(opt.out_dir);
  std::filesystem::create_directories(out_dir);

  if (opt.grid == "comparison" || opt.grid == "both") {
    const json summary = sweep_grid(base, comparison_grid(), "comparison", out_dir, opt.seeds);
    std::ofstream out(out_dir / "comparison_summary.json", std::ios::binary);
    out << summary.dump(2) << '\n';
    std::cout << "wrote " << (out_dir / "comparison_summary.json").string() << '\n';
  }
  if (opt.grid == "schemes" || opt.grid == "both") {
    const json summary = sweep_grid(base, scheme_grid(), "schemes", out_dir, opt.seeds);
    std::ofstream out(out_dir / "schemes_summary.json", std::ios::binary);
    out << summary.dump(2) << '\n';
    std::cout << "wrote " << (out_dir / "schemes_summary.json").string() << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// validate

int cmd_validate(const std::string& config_path) {
  experiment::ExperimentConfig cfg = config_path.empty()
                                         ? experiment::ExperimentConfig{}
                                         : experiment::load_config_file(config_path);
  cfg.validate();
  bool all_ok = true;
  const auto report = [&all_ok](bool ok, const std::string& name, const std::string& detail = "") {
    all_ok = all_ok && ok;
    std::cout << (ok ? "ok:   " : "fail: ") << name;
    if (!detail.empty()) std::cout << " (" << detail << ")";
    std::cout << '\n';
  };

  report(true, "config", "mechanism: " +
                             (cfg.baseline.has_value()
                                  ? std::string(cfg.baseline->kind ==
                                                        baselines::InjectionKind::gaussian
                                                    ? "gaussian injection"
                                                    : "laplace injection")
                                  : "scheme " + shiftdesign::scheme_name(cfg.scheme.kind)));

  if (cfg.scheme.kind != shiftdesign::SchemeKind::none) {
    auto probe_stream = make_stream(cfg.master_seed, StreamLabel::probe, 0, 0);
    const fedcore::Delta probe{probe_stream.gaussian_vector(cfg.d), 0, 0};
    std::vector<Vector> gammas;
    if (!cfg.per_agent_gamma.empty()) {
      gammas = cfg.per_agent_gamma;
    } else {
      gammas.push_back(shiftdesign::make_gamma(cfg.scheme, probe));
    }
    bool constraint_ok = true;
    bool rank_ok = true;
    for (const auto& g : gammas) {
      constraint_ok = constraint_ok && shiftdesign::validate_gamma(g);
      rank_ok = rank_ok && shiftdesign::shift_matrix_rank_deficiency(g, cfg.d) == 1;
    }
    report(constraint_ok, "gamma constraint", "entries sum to -1");
    report(rank_ok, "shift matrix rank deficiency equals 1");

    // Singularity is scale free; probe at unit gain and noise.
    const fim::FimContext ctx(gammas.front(), 1.0, 1.0);
    const Matrix j = fim::build_fim(ctx);
    report(fim::is_singular(j), "eavesdropper information matrix singular");
    Eigen::SelfAdjointEigenSolver<Matrix> solver(j, Eigen::EigenvaluesOnly);
    const Vector closed = fim::closed_form_eigenvalues(ctx);
    const double scale = closed[cfg.d - 1];
    report((closed - solver.eigenvalues()).cwiseAbs().maxCoeff() <= 1e-9 * scale,
           "closed-form spectrum matches dense eigendecomposition");
  }

  report(shiftdesign::free_term_hook(Vector::Zero(cfg.d)), "zero free term admissible");

  {
    auto a = make_stream(cfg.master_seed, StreamLabel::channel_bob, 0, 0);
    auto b = make_stream(cfg.master_seed, StreamLabel::channel_bob, 0, 0);
    report((a.gaussian_vector(16).array() == b.gaussian_vector(16).array()).all(),
           "noise streams deterministic");
  }

  {
    experiment::ExperimentConfig data_cfg = cfg;
    data_cfg.agents = std::min(cfg.agents, 2);
    const auto once = experiment::generate_data(data_cfg);
    const auto twice = experiment::generate_data(data_cfg);
    bool same = true;
    for (size_t k = 0; k < once.size(); ++k) {
      same = same && (once[k].features().array() == twice[k].features().array()).all() &&
             (once[k].labels().array() == twice[k].labels().array()).all();
    }
    report(same, "synthetic data deterministic per seed");
  }

  {
    experiment::ExperimentConfig dry = cfg;
    dry.rounds = 1;
    const auto result = experiment::run_experiment(dry);
    const auto& row = result.rounds.front();
    const bool finite = std::isfinite(row.loss_bob) && std::isfinite(row.loss_eve) &&
                        std::isfinite(row.bob_update_norm) && std::isfinite(row.eve_update_norm);
    report(finite, "single-round dry run", "bob loss " + std::to_string(row.loss_bob));
  }

  if (!all_ok) {
    std::cout << "validation failed\n";
    return kExitRuntime;
  }
  std::cout << "all checks passed\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Model-privacy federated learning simulator"};
  app.require_subcommand(1);

  RunOptions run_opt;
  auto* run = app.add_subcommand("run", "Execute a configured experiment");
  run->add_option("--config", run_opt.config_path, "Config JSON path (defaults reproduce the benchmark)");
  run->add_option("--out", run_opt.trace_path, "Trace CSV output path");
  run->add_option("--summary", run_opt.summary_path, "Summary JSON output path");
  run->add_option("--repeats", run_opt.repeats, "Run this many seeds (master_seed + i) and average");

  FimReportOptions fim_opt;
  auto* fim_report = app.add_subcommand("fim-report", "Eavesdropper information spectrum report");
  fim_report->set_help_flag("--help", "Print this help message and exit");  // frees --h
  fim_report->add_option("--scheme", fim_opt.scheme, "max|mean|comp|custom")->required();
  fim_report->add_option("--d", fim_opt.d, "Model dimension");
  fim_report->add_option("--h", fim_opt.h, "Eve channel gain");
  fim_report->add_option("--sigma", fim_opt.sigma, "Eve noise level");
  fim_report->add_option("--gamma", fim_opt.gamma_text, "Comma-separated gamma (custom scheme)");
  fim_report->add_option("--delta", fim_opt.delta_text, "Comma-separated delta (max scheme)");
  fim_report->add_option("--seed", fim_opt.seed, "Seed for the random probe delta (max scheme)");
  fim_report->add_option("--out", fim_opt.out_path, "Write the JSON report here instead of stdout");

  SweepOptions sweep_opt;
  auto* sweep = app.add_subcommand("sweep", "Run the comparison grids over several seeds");
  sweep->add_option("--config", sweep_opt.config_path, "Base config JSON path");
  sweep->add_option("--out-dir", sweep_opt.out_dir, "Output directory")->required();
  sweep->add_option("--grid", sweep_opt.grid, "comparison, schemes or both (default both)");
  sweep->add_option("--seeds", sweep_opt.seeds, "Number of seeds (default 5)");

  std::string validate_config;
  auto* validate = app.add_subcommand("validate", "Check a config and core invariants without training");
  validate->add_option("--config", validate_config, "Config JSON path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (app.got_subcommand(run)) return cmd_run(run_opt);
    if (app.got_subcommand(fim_report)) return cmd_fim_report(fim_opt);
    if (app.got_subcommand(sweep)) return cmd_sweep(sweep_opt);
    if (app.got_subcommand(validate)) return cmd_validate(validate_config);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const UsageError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitConfig;
}
