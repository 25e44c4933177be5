#include "modshift/rng.hpp"

#include <cmath>

namespace modshift {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master_seed, StreamLabel label,
                          std::uint64_t agent, std::uint64_t round) {
  std::uint64_t s = splitmix64(master_seed);
  s = splitmix64(s ^ static_cast<std::uint64_t>(label));
  s = splitmix64(s ^ agent);
  s = splitmix64(s ^ round);
  return s;
}

double NoiseStream::uniform() {
  // 53 uniformly distributed mantissa bits.
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double NoiseStream::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double w = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * w;
  has_spare_ = true;
  return u * w;
}

double NoiseStream::laplace() {
  const double u = uniform() - 0.5;
  const double mag = -std::log1p(-2.0 * std::abs(u));
  return u < 0.0 ? -mag : mag;
}

Vector NoiseStream::gaussian_vector(Eigen::Index n, double stddev) {
  Vector out(n);
  for (Eigen::Index i = 0; i < n; ++i) out[i] = stddev * gaussian();
  return out;
}

Vector NoiseStream::laplace_vector(Eigen::Index n, double scale) {
  Vector out(n);
  for (Eigen::Index i = 0; i < n; ++i) out[i] = scale * laplace();
  return out;
}

}  // namespace modshift
