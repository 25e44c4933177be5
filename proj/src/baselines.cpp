#include "modshift/baselines.hpp"

#include <cmath>

#include "modshift/errors.hpp"

namespace modshift::baselines {

void InjectionConfig::validate() const {
  switch (kind) {
    case InjectionKind::gaussian:
      if (beta_sq < 0.0 || !std::isfinite(beta_sq)) {
        throw ConfigError("gaussian injection variance beta_sq must be nonnegative and finite");
      }
      return;
    case InjectionKind::laplace:
      if (lambda < 0.0 || !std::isfinite(lambda)) {
        throw ConfigError("laplace injection scale lambda must be nonnegative and finite");
      }
      return;
  }
  throw ConfigError("unknown injection kind");
}

InjectionResult inject(const fedcore::Delta& delta, const InjectionConfig& cfg,
                       NoiseStream& noise_stream, channel::SecretLedger& ledger) {
  cfg.validate();
  const Eigen::Index d = delta.values.size();
  Vector noise;
  if (cfg.kind == InjectionKind::gaussian) {
    const double stddev = std::sqrt(cfg.beta_sq);
    noise = stddev == 0.0 ? Vector::Zero(d) : noise_stream.gaussian_vector(d, stddev);
  } else {
    noise = cfg.lambda == 0.0 ? Vector::Zero(d) : noise_stream.laplace_vector(d, cfg.lambda);
  }
  ledger.record(delta.agent_id, delta.round, static_cast<long>(d));
  return InjectionResult{delta.values + noise, std::move(noise)};
}

Vector bob_denoise(const Vector& received, const Vector& noise_vector) {
  if (received.size() != noise_vector.size()) {
    throw ConfigError("received vector and noise vector dimensions differ");
  }
  return received - noise_vector;
}

}  // namespace modshift::baselines
