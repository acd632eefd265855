#include "ospkit/linalg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <string>

#include "ospkit/errors.hpp"

namespace ospkit {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::Dimension: return "dimension error";
    case ErrorKind::Domain: return "domain error";
    case ErrorKind::Ordering: return "ordering error";
    case ErrorKind::Configuration: return "configuration error";
    case ErrorKind::Numeric: return "numeric error";
    case ErrorKind::SizeGuard: return "size guard error";
    }
    return "error";
}

namespace linalg {
namespace {

// Pade coefficients b_0..b_m of the diagonal [m/m] approximant to exp.
constexpr std::array<double, 4> kPade3{120.0, 60.0, 12.0, 1.0};
constexpr std::array<double, 6> kPade5{30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0};
constexpr std::array<double, 8> kPade7{17297280.0, 8648640.0, 1995840.0, 277200.0,
                                       25200.0,    1512.0,    56.0,      1.0};
constexpr std::array<double, 10> kPade9{17643225600.0, 8821612800.0, 2075673600.0, 302702400.0,
                                        30270240.0,    2162160.0,    110880.0,     3960.0,
                                        90.0,          1.0};
constexpr std::array<double, 14> kPade13{
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
    129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
    1323241920.0,        40840800.0,          960960.0,           16380.0,
    182.0,               1.0};

// 1-norm bounds below which the [m/m] approximant is accurate to unit roundoff.
constexpr double kTheta3 = 1.495585217958292e-2;
constexpr double kTheta5 = 2.539398330063230e-1;
constexpr double kTheta7 = 9.504178996162932e-1;
constexpr double kTheta9 = 2.097847961257068e0;
constexpr double kTheta13 = 5.371920351148152e0;

double one_norm(const Matrix& m) { return m.cwiseAbs().colwise().sum().maxCoeff(); }

// Low-degree approximants: U = A * sum_{odd} b_i A^{i-1}, V = sum_{even} b_i A^i.
Matrix pade_low(const Matrix& a, std::span<const double> b) {
    const auto n = a.rows();
    const Matrix ident = Matrix::Identity(n, n);
    const Matrix a2 = a * a;
    Matrix power = ident;
    Matrix u_inner = Matrix::Zero(n, n);
    Matrix v = Matrix::Zero(n, n);
    for (std::size_t i = 0; i + 1 < b.size(); i += 2) {
        v += b[i] * power;
        u_inner += b[i + 1] * power;
        power = power * a2;
    }
    const Matrix u = a * u_inner;
    return (v - u).partialPivLu().solve(v + u);
}

Matrix pade13(const Matrix& a) {
    const auto& b = kPade13;
    const auto n = a.rows();
    const Matrix ident = Matrix::Identity(n, n);
    const Matrix a2 = a * a;
    const Matrix a4 = a2 * a2;
    const Matrix a6 = a4 * a2;
    const Matrix u_high = a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2);
    const Matrix u = a * (u_high + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident);
    const Matrix v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 +
                     b[0] * ident;
    return (v - u).partialPivLu().solve(v + u);
}

}  // namespace

bool all_finite(const Matrix& m) noexcept { return m.allFinite(); }

Matrix mat_exp(const Matrix& m, double t) {
    if (m.rows() != m.cols() || m.rows() == 0) {
        fail(ErrorKind::Dimension, "mat_exp: matrix must be square and non-empty, got " +
                                       std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    }
    if (!std::isfinite(t) || !m.allFinite()) {
        fail(ErrorKind::Domain, "mat_exp: non-finite input");
    }
    const auto n = m.rows();
    if (t == 0.0) {
        return Matrix::Identity(n, n);
    }
    Matrix a = m * t;
    const double norm = one_norm(a);
    if (norm == 0.0) {
        return Matrix::Identity(n, n);
    }
    if (norm <= kTheta3) return pade_low(a, kPade3);
    if (norm <= kTheta5) return pade_low(a, kPade5);
    if (norm <= kTheta7) return pade_low(a, kPade7);
    if (norm <= kTheta9) return pade_low(a, kPade9);

    const int squarings = std::max(0, static_cast<int>(std::ceil(std::log2(norm / kTheta13))));
    a /= std::ldexp(1.0, squarings);
    Matrix result = pade13(a);
    for (int i = 0; i < squarings; ++i) {
        result = result * result;
    }
    if (!result.allFinite()) {
        fail(ErrorKind::Numeric, "mat_exp: result overflowed");
    }
    return result;
}

Matrix symmetrize(const Matrix& x) { return 0.5 * (x + x.transpose()); }

double min_eigenvalue(const Matrix& symmetric) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetric, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

double symmetry_defect(const Matrix& x) { return (x - x.transpose()).cwiseAbs().maxCoeff(); }

void require_covariance(const Matrix& x, const char* what) {
    if (x.rows() != x.cols() || x.rows() == 0) {
        fail(ErrorKind::Dimension, std::string(what) + " must be square and non-empty");
    }
    if (!x.allFinite()) {
        fail(ErrorKind::Domain, std::string(what) + " has non-finite entries");
    }
    if (symmetry_defect(x) > kSymmetryTolerance) {
        fail(ErrorKind::Domain, std::string(what) + " is not symmetric");
    }
    if (min_eigenvalue(symmetrize(x)) < -kPsdTolerance) {
        fail(ErrorKind::Domain, std::string(what) + " is not positive semi-definite");
    }
}

double relative_frobenius(const Matrix& a, const Matrix& b, double floor) {
    return (a - b).norm() / std::max(b.norm(), floor);
}

}  // namespace linalg
}  // namespace ospkit
