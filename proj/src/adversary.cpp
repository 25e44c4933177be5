#include "modshift/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "modshift/errors.hpp"

namespace modshift::adversary {

EveState eve_update(EveState state, const std::vector<Vector>& observations,
                    const Vector& weights) {
  fedcore::validate_weights(weights);
  if (static_cast<Eigen::Index>(observations.size()) != weights.size()) {
    throw ProtocolError("expected one observation per agent");
  }
  Vector update = Vector::Zero(state.w_eve.size());
  for (size_t k = 0; k < observations.size(); ++k) {
    if (observations[k].size() != state.w_eve.size()) {
      throw ConfigError("observation dimension does not match Eve's model");
    }
    update += weights[static_cast<Eigen::Index>(k)] * observations[k];
  }
  state.w_eve += update;
  state.history.push_back(update.norm());
  return state;
}

AlphaResult alpha(const std::vector<fedcore::Delta>& deltas, const Vector& weights) {
  fedcore::validate_weights(weights);
  if (static_cast<Eigen::Index>(deltas.size()) != weights.size()) {
    throw ProtocolError("expected one delta per agent");
  }
  const Eigen::Index dim = deltas.front().values.size();
  double norm_sum = 0.0;
  Vector weighted_sum = Vector::Zero(dim);
  for (size_t k = 0; k < deltas.size(); ++k) {
    if (deltas[k].values.size() != dim) {
      throw ConfigError("delta dimensions differ");
    }
    const double w = weights[static_cast<Eigen::Index>(k)];
    norm_sum += w * deltas[k].values.norm();
    weighted_sum += w * deltas[k].values;
  }
  const double denom = weighted_sum.norm();
  if (denom == 0.0) {
    return {std::numeric_limits<double>::infinity(), true};
  }
  return {norm_sum / denom, false};
}

double tamper_bound(const TamperBoundInputs& inputs, int d) {
  if (d < 1) {
    throw ConfigError("dimension must be positive");
  }
  if (inputs.epsilon < 0.0 || !std::isfinite(inputs.epsilon)) {
    throw ConfigError("epsilon must be nonnegative and finite");
  }
  if (inputs.gamma_norms.empty()) {
    throw ConfigError("at least one gamma norm is required");
  }
  if (inputs.alpha < 1.0 - 1e-12) {
    throw ConfigError("alpha below 1 violates the triangle inequality");
  }
  const double root_d = std::sqrt(static_cast<double>(d));
  if (inputs.homogeneous) {
    return inputs.epsilon * (1.0 + root_d * inputs.gamma_norms.front());
  }
  if (!std::isfinite(inputs.alpha)) {
    // Degenerate alignment: the weighted delta sum vanished, so the test is
    // trivially satisfied.
    return std::numeric_limits<double>::infinity();
  }
  const double max_norm = *std::max_element(inputs.gamma_norms.begin(), inputs.gamma_norms.end());
  return inputs.epsilon * (1.0 + root_d * max_norm * inputs.alpha);
}

bool tamper_test(double eve_update_norm, double bound) {
  if (eve_update_norm < 0.0 || bound < 0.0) {
    throw ConfigError("tamper test requires nonnegative norm and bound");
  }
  return eve_update_norm <= bound + 1e-12;
}

}  // namespace modshift::adversary
