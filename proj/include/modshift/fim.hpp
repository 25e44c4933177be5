#pragma once

#include <utility>

#include "modshift/types.hpp"

namespace modshift::fim {

/// Inputs of the eavesdropper's per-update Fisher information: the gradient
/// of the shift function (equal to gamma for linear shifts), her channel gain
/// and noise level, and the model dimension.
struct FimContext {
  Vector grad_f;
  double h;
  double sigma;
  int d;

  FimContext(Vector grad_f, double h, double sigma);

  /// Scale of every information entry: 2 h^2 / sigma^2.
  double prefactor() const { return 2.0 * h * h / (sigma * sigma); }
};

/// The d x d Fisher information matrix of a shifted update observed through
/// Gaussian noise:
///
///   (2 h^2 / sigma^2) (I + ones g^T + g ones^T + d g g^T),  g = grad_f.
///
/// Built entry by entry on the upper triangle and mirrored, so the result is
/// symmetric bitwise.
Matrix build_fim(const FimContext& ctx);

/// Closed-form spectrum under the singularity constraint g . ones = -1,
/// ascending: one zero, the prefactor with multiplicity d-2, and
/// prefactor * d * |g|^2. Throws ConstraintError if the constraint fails,
/// since the closed form is only established in that regime.
Vector closed_form_eigenvalues(const FimContext& ctx);

/// True iff the smallest eigenvalue magnitude of the symmetric matrix is
/// below rel_tol times the largest.
bool is_singular(const Matrix& matrix, double rel_tol = 1e-10);

/// Matrix determinant lemma for a scalar base: with A = a I_d,
///
///   det(A + U V^T) = a^d det(I_m + V^T U / a),
///
/// evaluating a d x d determinant through an m x m one. Throws
/// ConstraintError when a == 0.
double det_via_mdl(double a_diag_value, const Matrix& u, const Matrix& v);

/// The rank-3 factors with J1 = I + U V^T for the scaled information matrix:
/// U = [g, ones, sqrt(d) g], V = [ones, g, sqrt(d) g]. Feeding them to
/// det_via_mdl with a = 1 - lambda evaluates det(J1 - lambda I) cheaply.
std::pair<Matrix, Matrix> mdl_decomposition(const Vector& grad_f);

}  // namespace modshift::fim
