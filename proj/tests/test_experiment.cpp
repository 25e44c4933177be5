#include <doctest.h>

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <string>

#include "helpers.hpp"
#include "modshift/adversary.hpp"
#include "modshift/channel.hpp"
#include "modshift/experiment.hpp"

using namespace modshift;
using namespace modshift::experiment;

namespace {

// Small but non-trivial configuration used throughout this file.
ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.d = 6;
  cfg.agents = 5;
  cfg.samples_per_agent = 50;
  cfg.eta = 0.01;
  cfg.local_epochs = 3;
  cfg.rounds = 20;
  cfg.master_seed = 101;
  return cfg;
}

}  // namespace

TEST_CASE("generate_data is exact without label noise and deterministic") {
  ExperimentConfig cfg = small_config();
  cfg.label_noise_std = 0.0;
  const auto data = generate_data(cfg);
  REQUIRE(data.size() == 5);
  const Vector w_star = cfg.w_star();
  for (const auto& ds : data) {
    const Vector expected = ds.features() * w_star;
    CHECK((ds.labels().array() == expected.array()).all());
  }

  const auto again = generate_data(cfg);
  for (size_t k = 0; k < data.size(); ++k) {
    CHECK((data[k].features().array() == again[k].features().array()).all());
    CHECK((data[k].labels().array() == again[k].labels().array()).all());
  }
}

TEST_CASE("pooled least squares recovers the generating weights") {
  ExperimentConfig cfg = small_config();
  cfg.agents = 8;
  cfg.samples_per_agent = 400;
  const auto data = generate_data(cfg);
  Matrix normal = Matrix::Zero(cfg.d, cfg.d);
  Vector rhs = Vector::Zero(cfg.d);
  for (const auto& ds : data) {
    const double m = static_cast<double>(ds.sample_count());
    normal += m * ds.gram();
    rhs += m * ds.cross();
  }
  const Vector estimate = normal.ldlt().solve(rhs);
  CHECK((estimate - cfg.w_star()).cwiseAbs().maxCoeff() < 0.01);
}

TEST_CASE("ramp and custom generating weights") {
  ExperimentConfig cfg = small_config();
  const Vector ramp = cfg.w_star();
  CHECK(ramp[0] == 1.0);
  CHECK(ramp[5] == 6.0);

  cfg.w_star_spec = WStarSpec::custom;
  cfg.w_star_custom = Vector::Constant(6, 2.0);
  CHECK(cfg.w_star()[3] == 2.0);
  cfg.w_star_custom = Vector::Constant(4, 2.0);
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("run_experiment traces are byte-identical across runs") {
  ExperimentConfig cfg = small_config();
  cfg.scheme = shiftdesign::ShiftScheme::max();
  const auto a = run_experiment(cfg);
  const auto b = run_experiment(cfg);
  CHECK(trace_csv(a.rounds) == trace_csv(b.rounds));
  CHECK(a.summary.final_loss_eve == b.summary.final_loss_eve);
}

TEST_CASE("noiseless unshifted run keeps Eve exactly on Bob's trajectory") {
  ExperimentConfig cfg = small_config();
  cfg.channel_noise_var = 0.0;
  const auto result = run_experiment(cfg);
  for (const auto& row : result.rounds) {
    CHECK(row.shift_vs_bob == 0.0);
    CHECK(row.loss_eve == row.loss_bob);
    CHECK(row.tamper_pass);
  }
}

TEST_CASE("bob's loss column is identical across privacy mechanisms") {
  ExperimentConfig base = small_config();

  std::vector<ExperimentConfig> variants;
  variants.push_back(base);
  for (auto scheme : {shiftdesign::ShiftScheme::max(), shiftdesign::ShiftScheme::mean(),
                      shiftdesign::ShiftScheme::comp()}) {
    ExperimentConfig cfg = base;
    cfg.scheme = scheme;
    variants.push_back(cfg);
  }
  {
    ExperimentConfig cfg = base;
    cfg.baseline = baselines::InjectionConfig{baselines::InjectionKind::gaussian, 1.0, 0.0};
    variants.push_back(cfg);
  }
  {
    ExperimentConfig cfg = base;
    cfg.baseline = baselines::InjectionConfig{baselines::InjectionKind::laplace, 0.0, 1.0};
    variants.push_back(cfg);
  }

  const auto data = generate_data(base);
  const auto reference = run_experiment(base, data);
  for (size_t i = 1; i < variants.size(); ++i) {
    const auto run = run_experiment(variants[i], data);
    for (int n = 0; n < base.rounds; ++n) {
      CHECK(run.rounds[static_cast<size_t>(n)].loss_bob ==
            reference.rounds[static_cast<size_t>(n)].loss_bob);
      CHECK(run.rounds[static_cast<size_t>(n)].bob_update_norm ==
            reference.rounds[static_cast<size_t>(n)].bob_update_norm);
    }
  }
}

TEST_CASE("run_experiment matches a hand-rolled orchestration") {
  ExperimentConfig cfg = small_config();
  cfg.channel_noise_var = 0.0;
  cfg.scheme = shiftdesign::ShiftScheme::mean();
  cfg.rounds = 4;

  const auto data = generate_data(cfg);
  const auto result = run_experiment(cfg, data);

  // Re-run the protocol with the module-level operations directly.
  const Vector weights = Vector::Constant(cfg.agents, 1.0 / cfg.agents);
  fedcore::TrainConfig train{cfg.eta, cfg.local_epochs, cfg.rounds, weights};
  channel::ChannelParams bob_ch{1.0, 0.0, channel::Receiver::bob};
  channel::ChannelParams eve_ch{1.0, 0.0, channel::Receiver::eve};
  channel::SecretLedger ledger;
  Vector w_bob = Vector::Zero(cfg.d);
  adversary::EveState eve{Vector::Zero(cfg.d), {}, {}};

  for (int n = 0; n < cfg.rounds; ++n) {
    std::vector<fedcore::Delta> received;
    std::vector<Vector> observations;
    for (int k = 0; k < cfg.agents; ++k) {
      const Vector w_local = fedcore::local_descent(w_bob, data[static_cast<size_t>(k)], train);
      const auto delta = fedcore::compute_delta(w_local, w_bob, k, n);
      const auto gamma = shiftdesign::make_gamma(cfg.scheme, delta);
      const auto shifted = shiftdesign::apply_shift(delta, gamma);
      auto bob_stream = make_stream(cfg.master_seed, StreamLabel::channel_bob, k, n);
      auto eve_stream = make_stream(cfg.master_seed, StreamLabel::channel_eve, k, n);
      observations.push_back(channel::eve_observe(shifted, eve_ch, eve_stream));
      received.push_back(fedcore::Delta{
          channel::bob_receive_and_compensate(shifted, shifted.shift_scalar(), bob_ch,
                                              bob_stream, ledger),
          k, n});
    }
    w_bob = fedcore::aggregate(w_bob, received, weights);
    eve = adversary::eve_update(std::move(eve), observations, weights);

    const auto& row = result.rounds[static_cast<size_t>(n)];
    CHECK(row.loss_bob == fedcore::global_loss(w_bob, data));
    CHECK(row.loss_eve == fedcore::global_loss(eve.w_eve, data));
    CHECK(row.shift_vs_bob == (eve.w_eve - w_bob).norm());
    CHECK(row.eve_update_norm == eve.history.back());
    CHECK(row.secret_scalars == cfg.agents);
  }
  CHECK(result.summary.ledger_total == ledger.total());
}

TEST_CASE("bob's update equals the weighted sum of his received deltas") {
  ExperimentConfig cfg = small_config();
  cfg.rounds = 6;
  const auto result = run_experiment(cfg);
  // With the noisy channel the received deltas are not reconstructable here,
  // but the update norm must satisfy the aggregate definition recomputed from
  // consecutive trace rows; run a noiseless unshifted twin and compare to the
  // direct recomputation instead.
  cfg.channel_noise_var = 0.0;
  const auto data = generate_data(cfg);
  const auto clean = run_experiment(cfg, data);
  const Vector weights = Vector::Constant(cfg.agents, 1.0 / cfg.agents);
  fedcore::TrainConfig train{cfg.eta, cfg.local_epochs, cfg.rounds, weights};
  Vector w_bob = Vector::Zero(cfg.d);
  for (int n = 0; n < cfg.rounds; ++n) {
    Vector update = Vector::Zero(cfg.d);
    for (int k = 0; k < cfg.agents; ++k) {
      const Vector w_local = fedcore::local_descent(w_bob, data[static_cast<size_t>(k)], train);
      update += weights[k] * (w_local - w_bob);
    }
    w_bob += update;
    const double recomputed = update.norm();
    CHECK(clean.rounds[static_cast<size_t>(n)].bob_update_norm ==
          doctest::Approx(recomputed).epsilon(1e-12));
  }
  CHECK(result.rounds.size() == 6);
}

TEST_CASE("secret ledger laws per mechanism") {
  ExperimentConfig cfg = small_config();
  cfg.rounds = 7;

  const auto none = run_experiment(cfg);
  CHECK(none.summary.ledger_total == 0);

  cfg.scheme = shiftdesign::ShiftScheme::comp();
  const auto shifted = run_experiment(cfg);
  CHECK(shifted.summary.ledger_total == static_cast<long>(cfg.rounds) * cfg.agents);
  for (const auto& row : shifted.rounds) CHECK(row.secret_scalars == cfg.agents);

  cfg.scheme = shiftdesign::ShiftScheme::none();
  cfg.baseline = baselines::InjectionConfig{baselines::InjectionKind::gaussian, 0.1, 0.0};
  const auto injected = run_experiment(cfg);
  CHECK(injected.summary.ledger_total ==
        static_cast<long>(cfg.rounds) * cfg.agents * cfg.d);
}

TEST_CASE("per-agent gammas engage the alignment form of the bound") {
  ExperimentConfig cfg = small_config();
  cfg.channel_noise_var = 0.0;
  cfg.rounds = 10;
  cfg.heterogeneity = 0.5;
  cfg.scheme.kind = shiftdesign::SchemeKind::custom;
  NoiseStream stream(2718);
  for (int k = 0; k < cfg.agents; ++k) {
    cfg.per_agent_gamma.push_back(testutil::random_gamma_with_sum(stream, cfg.d));
  }
  const auto result = run_experiment(cfg);
  for (const auto& row : result.rounds) {
    CHECK(row.alpha >= 1.0 - 1e-12);
    CHECK(row.tamper_pass);
    CHECK(std::isfinite(row.tamper_bound));
  }
}

TEST_CASE("config rejects combined mechanisms and bad shapes") {
  ExperimentConfig cfg = small_config();
  cfg.scheme = shiftdesign::ShiftScheme::max();
  cfg.baseline = baselines::InjectionConfig{baselines::InjectionKind::gaussian, 1.0, 0.0};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  ExperimentConfig bad_gamma = small_config();
  bad_gamma.scheme.kind = shiftdesign::SchemeKind::custom;
  CHECK_THROWS_AS(bad_gamma.validate(), ConfigError);

  ExperimentConfig wrong_count = small_config();
  wrong_count.scheme.kind = shiftdesign::SchemeKind::custom;
  wrong_count.per_agent_gamma.push_back(Vector::Constant(wrong_count.d, -1.0 / wrong_count.d));
  CHECK_THROWS_AS(wrong_count.validate(), ConfigError);
}

TEST_CASE("config json parsing") {
  const std::string text = R"({
    "d": 6, "K": 5, "m_k": 50, "eta": 0.01, "R": 3, "rounds": 20,
    "scheme": "max", "master_seed": 101, "channel_noise_var": 0.1
  })";
  const auto cfg = parse_config_json(text);
  CHECK(cfg.d == 6);
  CHECK(cfg.agents == 5);
  CHECK(cfg.scheme.kind == shiftdesign::SchemeKind::max);
  CHECK(cfg.master_seed == 101);

  CHECK_THROWS_AS(parse_config_json("{\"dd\": 3}"), ConfigError);
  CHECK_THROWS_AS(parse_config_json("not json"), ConfigError);
  CHECK_THROWS_AS(parse_config_json(R"({"scheme": "max", "baseline.kind": "gaussian",
                                       "baseline.beta_sq": 1.0})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config_json(R"({"scheme": "custom"})"), ConfigError);
  CHECK_THROWS_AS(parse_config_json(R"({"baseline.beta_sq": 1.0})"), ConfigError);

  const auto laplace = parse_config_json(
      R"({"baseline.kind": "laplace", "baseline.lambda_sq": 0.25})");
  REQUIRE(laplace.baseline.has_value());
  CHECK(laplace.baseline->lambda == doctest::Approx(0.5));

  const auto custom = parse_config_json(
      R"({"d": 3, "scheme": "custom", "custom_gamma": [-0.5, -0.25, -0.25]})");
  CHECK(custom.scheme.custom_gamma->size() == 3);

  // Defaults reproduce the benchmark setup.
  const auto defaults = parse_config_json("{}");
  CHECK(defaults.d == 60);
  CHECK(defaults.agents == 100);
  CHECK(defaults.samples_per_agent == 1000);
  CHECK(defaults.eta == 0.005);
  CHECK(defaults.local_epochs == 10);
  CHECK(defaults.label_noise_std == 0.1);
  CHECK(defaults.channel_noise_var == 0.1);
}

TEST_CASE("trace csv format") {
  ExperimentConfig cfg = small_config();
  cfg.rounds = 2;
  const auto result = run_experiment(cfg);
  const std::string csv = trace_csv(result.rounds);
  CHECK(csv.rfind("round,loss_bob,loss_eve,shift_vs_bob,shift_vs_wstar,bob_update_norm,"
                  "eve_update_norm,tamper_bound,tamper_pass,alpha,secret_scalars\n",
                  0) == 0);
  // One header plus one line per round.
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}

TEST_CASE("summary json embeds the resolved config") {
  ExperimentConfig cfg = small_config();
  cfg.rounds = 2;
  cfg.scheme = shiftdesign::ShiftScheme::mean();
  const auto result = run_experiment(cfg);
  const std::string json = summary_json(result.summary);
  CHECK(json.find("\"scheme\": \"mean\"") != std::string::npos);
  CHECK(json.find("\"master_seed\": 101") != std::string::npos);
  CHECK(json.find("\"pass_rate\"") != std::string::npos);
}

TEST_CASE("divergence error carries round context") {
  ExperimentConfig cfg = small_config();
  cfg.eta = 1e180;
  cfg.rounds = 3;
  try {
    run_experiment(cfg);
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.round == 0);
    CHECK(std::string(e.what()).find("round 0") != std::string::npos);
  }
}
