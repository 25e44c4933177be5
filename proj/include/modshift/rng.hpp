#pragma once

#include <cstdint>
#include <random>

#include "modshift/types.hpp"

namespace modshift {

/// Independent randomness families. Every stream in a run is identified by
/// (master seed, label, agent, round); the channel realizations therefore do
/// not depend on which privacy mechanism is active or on evaluation order.
enum class StreamLabel : std::uint64_t {
  data_features = 1,
  data_labels = 2,
  data_heterogeneity = 3,
  channel_bob = 4,
  channel_eve = 5,
  injection = 6,
  probe = 7,
};

/// Counter-based key derivation (splitmix64 chain).
std::uint64_t derive_seed(std::uint64_t master_seed, StreamLabel label,
                          std::uint64_t agent, std::uint64_t round);

/// Deterministic sampling stream.
///
/// Gaussian and Laplace variates are produced by explicit transforms of
/// mt19937_64 output instead of std::*_distribution, whose algorithms are
/// implementation-defined; a seed therefore pins the realization.
class NoiseStream {
 public:
  explicit NoiseStream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform();

  /// Standard normal (Marsaglia polar method).
  double gaussian();

  /// Zero-mean Laplace with unit scale (variance 2).
  double laplace();

  Vector gaussian_vector(Eigen::Index n, double stddev = 1.0);
  Vector laplace_vector(Eigen::Index n, double scale = 1.0);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

inline NoiseStream make_stream(std::uint64_t master_seed, StreamLabel label,
                               std::uint64_t agent, std::uint64_t round) {
  return NoiseStream(derive_seed(master_seed, label, agent, round));
}

}  // namespace modshift
