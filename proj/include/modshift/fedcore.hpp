#pragma once

#include <vector>

#include "modshift/errors.hpp"
#include "modshift/types.hpp"

namespace modshift::fedcore {

/// Per-agent training data. Rows of `features` are samples.
///
/// The quadratic loss only depends on the data through its second moments, so
/// the constructor caches (X^T X)/m, (X^T y)/m and (y^T y)/m; loss and
/// gradient evaluations are then O(d^2) instead of O(m d).
class LocalDataset {
 public:
  LocalDataset(Matrix features, Vector labels, int agent_id);

  const Matrix& features() const { return features_; }
  const Vector& labels() const { return labels_; }
  int agent_id() const { return agent_id_; }
  Eigen::Index sample_count() const { return features_.rows(); }
  Eigen::Index dim() const { return features_.cols(); }

  const Matrix& gram() const { return gram_; }
  const Vector& cross() const { return cross_; }
  double label_energy() const { return label_energy_; }

 private:
  Matrix features_;
  Vector labels_;
  int agent_id_;
  Matrix gram_;          // (X^T X) / m
  Vector cross_;         // (X^T y) / m
  double label_energy_;  // (y^T y) / m
};

/// An agent's round difference: local model after R epochs minus the global
/// model it started from.
struct Delta {
  Vector values;
  int agent_id = 0;
  int round = 0;
};

struct TrainConfig {
  double eta = 0.005;    // learning rate
  int local_epochs = 10; // R
  int rounds = 200;      // N
  Vector agent_weights;  // m_k / m, nonnegative, sums to 1

  void validate() const;
};

/// Mean squared error of the linear model w on the agent's data.
double mse_loss(const Vector& w, const LocalDataset& data);

/// Full-batch gradient of mse_loss: (2/m) * sum_i (w.x_i - y_i) x_i.
Vector mse_gradient(const Vector& w, const LocalDataset& data);

/// Sample-weighted average loss over all agents' data.
double global_loss(const Vector& w, const std::vector<LocalDataset>& datasets);

/// Runs exactly cfg.local_epochs full-batch gradient steps at rate cfg.eta.
/// Throws DivergenceError as soon as any weight becomes non-finite.
Vector local_descent(const Vector& w, const LocalDataset& data, const TrainConfig& cfg);

Delta compute_delta(const Vector& w_local, const Vector& w_global, int agent_id, int round);

/// w + sum_k weights[k] * delta_k. Expects exactly one delta per agent, all
/// from the same round; the sum runs in ascending agent_id order so results
/// are reproducible regardless of the order deltas arrive in.
Vector aggregate(const Vector& w, const std::vector<Delta>& deltas, const Vector& weights);

/// Validates an agent-weight vector (nonnegative, sums to 1 within 1e-12).
void validate_weights(const Vector& weights);

}  // namespace modshift::fedcore
