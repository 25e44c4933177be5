#pragma once

#include <optional>
#include <string>

#include "modshift/fedcore.hpp"
#include "modshift/types.hpp"

namespace modshift::shiftdesign {

enum class SchemeKind { max, mean, comp, custom, none };

/// Rule producing the shift coefficient vector gamma with gamma . ones = -1.
struct ShiftScheme {
  SchemeKind kind = SchemeKind::none;
  std::optional<Vector> custom_gamma;  // consulted only for kind == custom

  static ShiftScheme max() { return {SchemeKind::max, std::nullopt}; }
  static ShiftScheme mean() { return {SchemeKind::mean, std::nullopt}; }
  static ShiftScheme comp() { return {SchemeKind::comp, std::nullopt}; }
  static ShiftScheme none() { return {SchemeKind::none, std::nullopt}; }
  /// Validates the vector (finite, entries summing to -1 within 1e-12).
  static ShiftScheme custom(Vector gamma);
};

SchemeKind scheme_from_name(const std::string& name);
std::string scheme_name(SchemeKind kind);

/// True iff gamma is finite and its entries sum to -1 within tol.
bool validate_gamma(const Vector& gamma, double tol = 1e-10);

/// Produces gamma for the scheme given the current delta (the max scheme
/// depends on it). Ties in the max scheme break toward the lowest index.
Vector make_gamma(const ShiftScheme& scheme, const fedcore::Delta& delta);

/// Transmitted form of a delta: values = delta + (gamma . delta) * ones.
///
/// The pre-shift delta is retained so the server can undo the shift exactly
/// once the scalar arrives over the secret channel, which is how the protocol
/// models compensation.
class ShiftedDelta {
 public:
  static ShiftedDelta unshifted(fedcore::Delta delta);

  const Vector& values() const { return values_; }
  double shift_scalar() const { return shift_scalar_; }
  int agent_id() const { return agent_id_; }
  int round() const { return round_; }
  const Vector& original() const { return original_; }

 private:
  friend ShiftedDelta apply_shift(const fedcore::Delta& delta, const Vector& gamma);
  ShiftedDelta(fedcore::Delta delta, double shift_scalar);

  Vector values_;
  Vector original_;
  double shift_scalar_;
  int agent_id_;
  int round_;
};

/// Applies the rank-one shift (I + ones gamma^T) delta. Requires a valid gamma.
ShiftedDelta apply_shift(const fedcore::Delta& delta, const Vector& gamma);

/// The d x d shift transformation I + ones gamma^T.
Matrix shift_matrix(const Vector& gamma);

/// d minus the numerical rank of (I + ones gamma^T); equals 1 for every valid
/// gamma. Singular values below d * machine-eps * largest count as zero.
int shift_matrix_rank_deficiency(const Vector& gamma, Eigen::Index d);

/// Validation hook for free-term gradients of composite shift functions: the
/// chain-rule gradient with respect to delta must sum to 0 within tol. The
/// shipped configuration uses the zero free term.
bool free_term_hook(const Vector& g_grad, double tol = 1e-10);

}  // namespace modshift::shiftdesign
