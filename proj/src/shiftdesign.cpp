#include "modshift/shiftdesign.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <limits>

namespace modshift::shiftdesign {

ShiftScheme ShiftScheme::custom(Vector gamma) {
  if (!validate_gamma(gamma, 1e-12)) {
    throw ConfigError("custom gamma must be finite and sum to -1 within 1e-12");
  }
  return {SchemeKind::custom, std::move(gamma)};
}

SchemeKind scheme_from_name(const std::string& name) {
  if (name == "max") return SchemeKind::max;
  if (name == "mean") return SchemeKind::mean;
  if (name == "comp") return SchemeKind::comp;
  if (name == "custom") return SchemeKind::custom;
  if (name == "none") return SchemeKind::none;
  throw ConfigError("unknown shift scheme '" + name + "' (expected max|mean|comp|custom|none)");
}

std::string scheme_name(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::max: return "max";
    case SchemeKind::mean: return "mean";
    case SchemeKind::comp: return "comp";
    case SchemeKind::custom: return "custom";
    case SchemeKind::none: return "none";
  }
  return "none";
}

bool validate_gamma(const Vector& gamma, double tol) {
  if (gamma.size() < 1 || !gamma.allFinite()) return false;
  return std::abs(gamma.sum() + 1.0) <= tol;
}

Vector make_gamma(const ShiftScheme& scheme, const fedcore::Delta& delta) {
  const Eigen::Index d = delta.values.size();
  if (d < 2) {
    throw ConfigError("shift schemes require dimension d >= 2");
  }
  if (!delta.values.allFinite()) {
    throw ConfigError("delta must be finite");
  }
  switch (scheme.kind) {
    case SchemeKind::max: {
      Eigen::Index best = 0;
      double best_abs = std::abs(delta.values[0]);
      for (Eigen::Index i = 1; i < d; ++i) {
        const double a = std::abs(delta.values[i]);
        if (a > best_abs) {  // strict: ties break toward the lowest index
          best = i;
          best_abs = a;
        }
      }
      Vector gamma = Vector::Zero(d);
      gamma[best] = -1.0;
      return gamma;
    }
    case SchemeKind::mean:
      return Vector::Constant(d, -1.0 / static_cast<double>(d));
    case SchemeKind::comp: {
      Vector gamma = Vector::Zero(d);
      gamma[0] = -1.0;
      return gamma;
    }
    case SchemeKind::custom: {
      if (!scheme.custom_gamma.has_value()) {
        throw ConfigError("custom scheme requires a gamma vector");
      }
      if (scheme.custom_gamma->size() != d) {
        throw ConfigError("custom gamma dimension does not match delta");
      }
      return *scheme.custom_gamma;
    }
    case SchemeKind::none:
      throw UsageError("scheme 'none' produces no gamma; do not shift");
  }
  throw UsageError("unhandled scheme kind");
}

ShiftedDelta::ShiftedDelta(fedcore::Delta delta, double shift_scalar)
    : original_(std::move(delta.values)),
      shift_scalar_(shift_scalar),
      agent_id_(delta.agent_id),
      round_(delta.round) {
  values_ = original_.array() + shift_scalar_;
}

ShiftedDelta ShiftedDelta::unshifted(fedcore::Delta delta) {
  ShiftedDelta out(std::move(delta), 0.0);
  out.values_ = out.original_;  // bitwise, even for signed zeros
  return out;
}

ShiftedDelta apply_shift(const fedcore::Delta& delta, const Vector& gamma) {
  if (!validate_gamma(gamma)) {
    throw ConstraintError("shift gamma must be finite with entries summing to -1");
  }
  if (gamma.size() != delta.values.size()) {
    throw ConfigError("gamma dimension does not match delta");
  }
  const double scalar = gamma.dot(delta.values);
  return ShiftedDelta(delta, scalar);
}

Matrix shift_matrix(const Vector& gamma) {
  const Eigen::Index d = gamma.size();
  Matrix m = Matrix::Identity(d, d);
  m += Vector::Ones(d) * gamma.transpose();
  return m;
}

int shift_matrix_rank_deficiency(const Vector& gamma, Eigen::Index d) {
  if (gamma.size() != d) {
    throw ConfigError("gamma dimension does not match d");
  }
  if (!validate_gamma(gamma)) {
    throw ConstraintError("rank law applies to valid gammas only");
  }
  Eigen::JacobiSVD<Matrix> svd(shift_matrix(gamma));
  const Vector& sv = svd.singularValues();
  const double threshold =
      static_cast<double>(d) * std::numeric_limits<double>::epsilon() * sv[0];
  int zeros = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv[i] < threshold) ++zeros;
  }
  return zeros;
}

bool free_term_hook(const Vector& g_grad, double tol) {
  if (!g_grad.allFinite()) return false;
  return std::abs(g_grad.sum()) <= tol;
}

}  // namespace modshift::shiftdesign
