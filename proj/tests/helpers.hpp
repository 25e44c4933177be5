#pragma once

#include <cmath>

#include "modshift/fedcore.hpp"
#include "modshift/rng.hpp"
#include "modshift/types.hpp"

namespace testutil {

/// Random gamma with entries summing to the target (default -1): a Gaussian
/// draw at scheme scale (norm around 1, like the named schemes) projected onto
/// the constraint, with a second pass to push the residual to machine
/// precision.
inline modshift::Vector random_gamma_with_sum(modshift::NoiseStream& stream, int d,
                                              double target = -1.0) {
  modshift::Vector g = stream.gaussian_vector(d, 1.0 / std::sqrt(static_cast<double>(d)));
  for (int pass = 0; pass < 2; ++pass) {
    g.array() -= (g.sum() - target) / static_cast<double>(d);
  }
  return g;
}

inline modshift::fedcore::LocalDataset random_dataset(modshift::NoiseStream& stream, int samples,
                                                      int dim, int agent_id = 0) {
  modshift::Matrix x(samples, dim);
  for (int i = 0; i < samples; ++i) {
    for (int j = 0; j < dim; ++j) x(i, j) = stream.gaussian();
  }
  modshift::Vector y = stream.gaussian_vector(samples);
  return modshift::fedcore::LocalDataset(std::move(x), std::move(y), agent_id);
}

}  // namespace testutil
