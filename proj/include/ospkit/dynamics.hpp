#pragma once

#include "ospkit/linalg.hpp"
#include "ospkit/model.hpp"

namespace ospkit::dynamics {

/// Phi(s, t) = e^{A (t - s)}. Returns the identity exactly when s == t.
Matrix transition_phi(const Matrix& a, double s, double t);
Matrix transition_phi(const SystemModel& model, double s, double t);

/// Gamma(h) = (integral_0^h e^{A tau} d tau) B, read off the upper-right block
/// of exp([[A, B], [0, 0]] h). Valid for singular A.
Matrix input_integral(const Matrix& a, const Matrix& b, double h);

/// Lambda(r, s, t) = e^{A (t - s)} Gamma(s - r): the response at t to a unit
/// input held over [r, s]. Requires r <= s <= t.
Matrix input_lambda(const Matrix& a, const Matrix& b, double r, double s, double t);
Matrix input_lambda(const SystemModel& model, double r, double s, double t);

/// Q(s, t) = integral_0^{t-s} e^{A tau} Q e^{A^T tau} d tau by Van Loan's method,
/// symmetrized on output.
Matrix process_noise_cov(const Matrix& a, const Matrix& q, double s, double t);
Matrix process_noise_cov(const SystemModel& model, double s, double t);

/// Transition and integrated noise over one interval, from a single
/// exponential of the 2S x 2S Van Loan matrix.
struct Discretization {
    Matrix phi;
    Matrix noise;
};

Discretization discretize(const Matrix& a, const Matrix& q, double dt);
Discretization discretize(const SystemModel& model, double s, double t);

}  // namespace ospkit::dynamics
