#include "modshift/fedcore.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace modshift::fedcore {

LocalDataset::LocalDataset(Matrix features, Vector labels, int agent_id)
    : features_(std::move(features)), labels_(std::move(labels)), agent_id_(agent_id) {
  if (features_.rows() < 1) {
    throw ConfigError("dataset must contain at least one sample");
  }
  if (features_.rows() != labels_.size()) {
    throw ConfigError("feature rows and labels must have equal count (agent " +
                      std::to_string(agent_id_) + ")");
  }
  if (!features_.allFinite() || !labels_.allFinite()) {
    throw ConfigError("dataset entries must be finite (agent " + std::to_string(agent_id_) + ")");
  }
  const double m = static_cast<double>(features_.rows());
  gram_ = (features_.transpose() * features_) / m;
  cross_ = (features_.transpose() * labels_) / m;
  label_energy_ = labels_.squaredNorm() / m;
}

void TrainConfig::validate() const {
  if (!(eta > 0.0) || !std::isfinite(eta)) {
    throw ConfigError("learning rate eta must be positive and finite");
  }
  if (local_epochs < 1) {
    throw ConfigError("local_epochs (R) must be at least 1");
  }
  if (rounds < 1) {
    throw ConfigError("rounds (N) must be at least 1");
  }
  validate_weights(agent_weights);
}

void validate_weights(const Vector& weights) {
  if (weights.size() < 1) {
    throw ConfigError("agent weights must be nonempty");
  }
  if (!weights.allFinite() || weights.minCoeff() < 0.0) {
    throw ConfigError("agent weights must be finite and nonnegative");
  }
  if (std::abs(weights.sum() - 1.0) > 1e-12) {
    throw ConfigError("agent weights must sum to 1 within 1e-12");
  }
}

namespace {

void check_dim(const Vector& w, const LocalDataset& data) {
  if (w.size() != data.dim()) {
    throw ConfigError("model dimension " + std::to_string(w.size()) +
                      " does not match data dimension " + std::to_string(data.dim()));
  }
}

}  // namespace

double mse_loss(const Vector& w, const LocalDataset& data) {
  check_dim(w, data);
  const double value = w.dot(data.gram() * w) - 2.0 * data.cross().dot(w) + data.label_energy();
  // The quadratic form can round to a tiny negative at an exact fit.
  return std::max(value, 0.0);
}

Vector mse_gradient(const Vector& w, const LocalDataset& data) {
  check_dim(w, data);
  return 2.0 * (data.gram() * w - data.cross());
}

double global_loss(const Vector& w, const std::vector<LocalDataset>& datasets) {
  if (datasets.empty()) {
    throw ConfigError("global loss requires at least one dataset");
  }
  double total_samples = 0.0;
  for (const auto& data : datasets) total_samples += static_cast<double>(data.sample_count());
  double loss = 0.0;
  for (const auto& data : datasets) {
    loss += (static_cast<double>(data.sample_count()) / total_samples) * mse_loss(w, data);
  }
  return loss;
}

Vector local_descent(const Vector& w, const LocalDataset& data, const TrainConfig& cfg) {
  check_dim(w, data);
  if (!(cfg.eta > 0.0) || !std::isfinite(cfg.eta)) {
    throw ConfigError("learning rate eta must be positive and finite");
  }
  if (cfg.local_epochs < 1) {
    throw ConfigError("local_epochs (R) must be at least 1");
  }
  if (!w.allFinite()) {
    throw ConfigError("initial weights must be finite");
  }
  Vector current = w;
  for (int r = 0; r < cfg.local_epochs; ++r) {
    current -= cfg.eta * mse_gradient(current, data);
    if (!current.allFinite()) {
      throw DivergenceError("local descent diverged: non-finite weights at agent " +
                                std::to_string(data.agent_id()) + ", local epoch " +
                                std::to_string(r),
                            data.agent_id(), r);
    }
  }
  return current;
}

Delta compute_delta(const Vector& w_local, const Vector& w_global, int agent_id, int round) {
  if (w_local.size() != w_global.size()) {
    throw ConfigError("local and global model dimensions differ");
  }
  return Delta{w_local - w_global, agent_id, round};
}

Vector aggregate(const Vector& w, const std::vector<Delta>& deltas, const Vector& weights) {
  validate_weights(weights);
  const auto agent_count = weights.size();
  if (static_cast<Eigen::Index>(deltas.size()) != agent_count) {
    throw ProtocolError("expected one delta per agent: got " + std::to_string(deltas.size()) +
                        " for " + std::to_string(agent_count) + " agents");
  }
  std::vector<const Delta*> by_agent(static_cast<size_t>(agent_count), nullptr);
  const int round = deltas.front().round;
  for (const auto& delta : deltas) {
    if (delta.round != round) {
      throw ProtocolError("deltas from different rounds cannot be aggregated");
    }
    if (delta.agent_id < 0 || delta.agent_id >= agent_count) {
      throw ProtocolError("unknown agent id " + std::to_string(delta.agent_id));
    }
    if (by_agent[static_cast<size_t>(delta.agent_id)] != nullptr) {
      throw ProtocolError("duplicate delta for agent " + std::to_string(delta.agent_id));
    }
    if (delta.values.size() != w.size()) {
      throw ConfigError("delta dimension does not match the global model");
    }
    by_agent[static_cast<size_t>(delta.agent_id)] = &delta;
  }
  // Accumulate the weighted update separately and add it once; the
  // eavesdropper's reconstruction evaluates the same expression, so noiseless
  // no-shift runs match her trajectory bitwise.
  Vector update = Vector::Zero(w.size());
  for (Eigen::Index k = 0; k < agent_count; ++k) {
    update += weights[k] * by_agent[static_cast<size_t>(k)]->values;
  }
  return w + update;
}

}  // namespace modshift::fedcore
