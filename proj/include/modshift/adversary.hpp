#pragma once

#include <vector>

#include "modshift/fedcore.hpp"
#include "modshift/types.hpp"

namespace modshift::adversary {

/// The eavesdropper's running reconstruction of the global model, fed by the
/// raw observations of every agent's transmission.
struct EveState {
  Vector w_eve;
  std::vector<double> history;      // per-round update norms
  std::vector<bool> tamper_flags;   // per-round test outcomes (orchestrator-filled)
};

/// Adds the weighted sum of the round's observations to Eve's model and
/// appends the update norm to her history. Expects one observation per agent,
/// in ascending agent order.
EveState eve_update(EveState state, const std::vector<Vector>& observations,
                    const Vector& weights);

struct AlphaResult {
  double value;     // +infinity when degenerate
  bool degenerate;  // the weighted delta sum has zero norm
};

/// Alignment ratio: sum_k w_k |delta_k| / |sum_k w_k delta_k|. At least 1 by
/// the triangle inequality; equals 1 iff the weighted deltas share a
/// direction.
AlphaResult alpha(const std::vector<fedcore::Delta>& deltas, const Vector& weights);

struct TamperBoundInputs {
  double epsilon = 0.0;             // Bob's realized update norm this round
  std::vector<double> gamma_norms;  // per-agent |gamma_k|
  double alpha = 1.0;               // alignment ratio (heterogeneous case)
  bool homogeneous = true;          // all gamma_k equal this round
};

/// Upper bound on Eve's update norm for untampered convergence:
/// epsilon (1 + sqrt(d) |gamma|) when every agent uses the same gamma, and
/// epsilon (1 + sqrt(d) max_k |gamma_k| alpha) otherwise.
double tamper_bound(const TamperBoundInputs& inputs, int d);

/// Eve's convergence test: passes iff her update norm stays within the bound
/// (absolute slack 1e-12).
bool tamper_test(double eve_update_norm, double bound);

}  // namespace modshift::adversary
