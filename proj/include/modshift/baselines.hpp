#pragma once

#include "modshift/channel.hpp"
#include "modshift/fedcore.hpp"
#include "modshift/rng.hpp"
#include "modshift/types.hpp"

namespace modshift::baselines {

enum class InjectionKind { gaussian, laplace };

/// Additive noise baseline: Gaussian with variance beta_sq per entry, or
/// Laplace with scale lambda (variance 2 lambda^2).
struct InjectionConfig {
  InjectionKind kind = InjectionKind::gaussian;
  double beta_sq = 0.0;  // consulted for gaussian
  double lambda = 0.0;   // consulted for laplace

  void validate() const;
};

struct InjectionResult {
  Vector perturbed;
  Vector noise;
};

/// delta + noise; the full noise vector is what the agent must ship to the
/// server, so the ledger is charged d scalars.
InjectionResult inject(const fedcore::Delta& delta, const InjectionConfig& cfg,
                       NoiseStream& noise_stream, channel::SecretLedger& ledger);

/// received - noise_vector.
Vector bob_denoise(const Vector& received, const Vector& noise_vector);

}  // namespace modshift::baselines
