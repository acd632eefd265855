#pragma once

#include <Eigen/Dense>

namespace ospkit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace linalg {

/// Tolerances a covariance matrix must meet to be accepted.
inline constexpr double kSymmetryTolerance = 1e-10;
inline constexpr double kPsdTolerance = 1e-10;

/// e^{M t} by scaling and squaring with a Pade approximant
/// (degree chosen from the 1-norm bound, 3 to 13).
/// Throws Error{Dimension} for non-square M and Error{Domain} for
/// non-finite input.
Matrix mat_exp(const Matrix& m, double t);

[[nodiscard]] bool all_finite(const Matrix& m) noexcept;

/// (X + X^T) / 2
[[nodiscard]] Matrix symmetrize(const Matrix& x);

[[nodiscard]] double min_eigenvalue(const Matrix& symmetric);

[[nodiscard]] double symmetry_defect(const Matrix& x);

/// Throws Error{Domain} unless x is square, finite, symmetric and PSD within
/// the tolerances above. `what` names the matrix in the message.
void require_covariance(const Matrix& x, const char* what);

/// ||a - b||_F / max(||b||_F, floor)
[[nodiscard]] double relative_frobenius(const Matrix& a, const Matrix& b, double floor = 1e-300);

}  // namespace linalg
}  // namespace ospkit
