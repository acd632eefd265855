#include "ospkit/dynamics.hpp"

#include <cmath>
#include <string>

#include "ospkit/errors.hpp"

namespace ospkit::dynamics {
namespace {

void require_ordered(double s, double t, const char* op) {
    if (!(s <= t)) {
        fail(ErrorKind::Ordering, std::string(op) + ": start time " + std::to_string(s) +
                                      " is after end time " + std::to_string(t));
    }
}

}  // namespace

Matrix transition_phi(const Matrix& a, double s, double t) {
    require_ordered(s, t, "transition_phi");
    if (s == t) {
        return Matrix::Identity(a.rows(), a.cols());
    }
    return linalg::mat_exp(a, t - s);
}

Matrix transition_phi(const SystemModel& model, double s, double t) { return transition_phi(model.a(), s, t); }

Matrix input_integral(const Matrix& a, const Matrix& b, double h) {
    const auto n = a.rows();
    const auto m = b.cols();
    if (h == 0.0) {
        return Matrix::Zero(n, m);
    }
    Matrix aug = Matrix::Zero(n + m, n + m);
    aug.topLeftCorner(n, n) = a;
    aug.topRightCorner(n, m) = b;
    return linalg::mat_exp(aug, h).topRightCorner(n, m);
}

Matrix input_lambda(const Matrix& a, const Matrix& b, double r, double s, double t) {
    require_ordered(r, s, "input_lambda");
    require_ordered(s, t, "input_lambda");
    if (r == s) {
        return Matrix::Zero(a.rows(), b.cols());
    }
    return transition_phi(a, s, t) * input_integral(a, b, s - r);
}

Matrix input_lambda(const SystemModel& model, double r, double s, double t) {
    return input_lambda(model.a(), model.b(), r, s, t);
}

Discretization discretize(const Matrix& a, const Matrix& q, double dt) {
    const auto n = a.rows();
    if (dt == 0.0) {
        return {Matrix::Identity(n, n), Matrix::Zero(n, n)};
    }
    // The -A block of the Van Loan matrix grows like e^{|A| dt}, so long or
    // stiff intervals are split into 2^halvings pieces and recombined with
    // Q(2h) = Phi(h) Q(h) Phi(h)^T + Q(h).
    const double scale = a.cwiseAbs().colwise().sum().maxCoeff() * dt;
    const int halvings = scale > 1.0 ? static_cast<int>(std::ceil(std::log2(scale))) : 0;
    const double h = std::ldexp(dt, -halvings);

    // exp([[-A, Q], [0, A^T]] h) = [[*, F12], [0, F22]] with F22 = e^{A^T h}
    // and Q(h) = F22^T F12.
    Matrix van_loan = Matrix::Zero(2 * n, 2 * n);
    van_loan.topLeftCorner(n, n) = -a;
    van_loan.topRightCorner(n, n) = q;
    van_loan.bottomRightCorner(n, n) = a.transpose();
    const Matrix f = linalg::mat_exp(van_loan, h);
    Matrix phi = f.bottomRightCorner(n, n).transpose();
    Matrix noise = linalg::symmetrize(phi * f.topRightCorner(n, n));
    for (int i = 0; i < halvings; ++i) {
        noise = linalg::symmetrize(phi * noise * phi.transpose() + noise);
        phi = phi * phi;
    }
    return {linalg::mat_exp(a, dt), noise};
}

Discretization discretize(const SystemModel& model, double s, double t) {
    require_ordered(s, t, "discretize");
    return discretize(model.a(), model.q(), t - s);
}

Matrix process_noise_cov(const Matrix& a, const Matrix& q, double s, double t) {
    require_ordered(s, t, "process_noise_cov");
    return discretize(a, q, t - s).noise;
}

Matrix process_noise_cov(const SystemModel& model, double s, double t) {
    return process_noise_cov(model.a(), model.q(), s, t);
}

}  // namespace ospkit::dynamics
