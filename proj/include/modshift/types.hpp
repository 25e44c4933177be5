#pragma once

#include <Eigen/Core>

namespace modshift {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// A point in model parameter space (global model, local model, or Eve's
/// running estimate). Plain dense vector; invariants (finiteness, configured
/// dimension) are enforced at operation boundaries.
using ModelVector = Eigen::VectorXd;

}  // namespace modshift
