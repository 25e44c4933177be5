#include "modshift/fim.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <cmath>

#include "modshift/errors.hpp"
#include "modshift/shiftdesign.hpp"

namespace modshift::fim {

FimContext::FimContext(Vector grad_f_in, double h_in, double sigma_in)
    : grad_f(std::move(grad_f_in)), h(h_in), sigma(sigma_in), d(static_cast<int>(grad_f.size())) {
  if (d < 2) {
    throw ConfigError("Fisher information context requires d >= 2");
  }
  if (!grad_f.allFinite()) {
    throw ConfigError("grad_f must be finite");
  }
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw ConfigError("channel gain h must be positive and finite");
  }
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw ConfigError("noise level sigma must be positive and finite");
  }
}

Matrix build_fim(const FimContext& ctx) {
  const auto& g = ctx.grad_f;
  const double c = ctx.prefactor();
  const Eigen::Index d = g.size();
  Matrix j(d, d);
  for (Eigen::Index row = 0; row < d; ++row) {
    for (Eigen::Index col = row; col < d; ++col) {
      const double identity = row == col ? 1.0 : 0.0;
      const double value =
          c * (identity + g[row] + g[col] + static_cast<double>(d) * g[row] * g[col]);
      j(row, col) = value;
      j(col, row) = value;
    }
  }
  return j;
}

Vector closed_form_eigenvalues(const FimContext& ctx) {
  if (!shiftdesign::validate_gamma(ctx.grad_f)) {
    throw ConstraintError("closed-form spectrum requires grad_f summing to -1");
  }
  const double c = ctx.prefactor();
  const Eigen::Index d = ctx.grad_f.size();
  Vector eigs(d);
  eigs[0] = 0.0;
  for (Eigen::Index i = 1; i + 1 < d; ++i) eigs[i] = c;
  // Cauchy-Schwarz with g.ones = -1 gives d |g|^2 >= 1, so this is the top.
  eigs[d - 1] = c * static_cast<double>(d) * ctx.grad_f.squaredNorm();
  return eigs;
}

bool is_singular(const Matrix& matrix, double rel_tol) {
  if (matrix.rows() != matrix.cols() || matrix.rows() < 1) {
    throw ConfigError("singularity test requires a nonempty square matrix");
  }
  const double scale = matrix.cwiseAbs().maxCoeff();
  if (scale == 0.0) return true;  // the zero matrix
  if ((matrix - matrix.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
    throw ConfigError("singularity test requires a symmetric matrix");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(matrix, Eigen::EigenvaluesOnly);
  const Vector abs_eigs = solver.eigenvalues().cwiseAbs();
  return abs_eigs.minCoeff() < rel_tol * abs_eigs.maxCoeff();
}

double det_via_mdl(double a_diag_value, const Matrix& u, const Matrix& v) {
  if (a_diag_value == 0.0) {
    throw ConstraintError("determinant lemma requires a nonsingular base matrix");
  }
  if (u.rows() != v.rows() || u.cols() != v.cols()) {
    throw ConfigError("U and V must have identical shapes");
  }
  if (u.rows() < 1) {
    throw ConfigError("U and V must have at least one row");
  }
  const Eigen::Index d = u.rows();
  const Eigen::Index m = u.cols();
  const Matrix small = Matrix::Identity(m, m) + (v.transpose() * u) / a_diag_value;
  return std::pow(a_diag_value, static_cast<double>(d)) * small.determinant();
}

std::pair<Matrix, Matrix> mdl_decomposition(const Vector& grad_f) {
  const Eigen::Index d = grad_f.size();
  const double root_d = std::sqrt(static_cast<double>(d));
  Matrix u(d, 3);
  Matrix v(d, 3);
  u.col(0) = grad_f;
  u.col(1) = Vector::Ones(d);
  u.col(2) = root_d * grad_f;
  v.col(0) = Vector::Ones(d);
  v.col(1) = grad_f;
  v.col(2) = root_d * grad_f;
  return {u, v};
}

}  // namespace modshift::fim
