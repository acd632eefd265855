#pragma once

#include <cstddef>
#include <vector>

#include "ospkit/linalg.hpp"

namespace ospkit {

/// Continuous-time LTI plant observed by N scalar observers:
///
///   x'(t) = A x(t) + B u(t) + v(t),   E[v v^T] = Q delta
///   y(t)  = C x(t) + w(t),            E[w w^T] = R delta, R diagonal
///
/// plus the decision period T and one sampling period per observer.
/// Construction validates every invariant; a SystemModel that exists is valid.
class SystemModel {
public:
    /// Throws Error{Dimension|Domain} naming the first offending field.
    SystemModel(Matrix a, Matrix b, Matrix c, Matrix q, Matrix r, double period,
                std::vector<double> observer_periods);

    [[nodiscard]] const Matrix& a() const noexcept { return a_; }
    [[nodiscard]] const Matrix& b() const noexcept { return b_; }
    [[nodiscard]] const Matrix& c() const noexcept { return c_; }
    [[nodiscard]] const Matrix& q() const noexcept { return q_; }
    [[nodiscard]] const Matrix& r() const noexcept { return r_; }
    [[nodiscard]] double period() const noexcept { return period_; }
    [[nodiscard]] const std::vector<double>& observer_periods() const noexcept { return observer_periods_; }

    [[nodiscard]] std::size_t state_dim() const noexcept { return static_cast<std::size_t>(a_.rows()); }
    [[nodiscard]] std::size_t input_dim() const noexcept { return static_cast<std::size_t>(b_.cols()); }
    [[nodiscard]] std::size_t observer_count() const noexcept { return observer_periods_.size(); }

    /// Row n of C as a column vector.
    [[nodiscard]] Vector observation_row(std::size_t observer) const;
    /// Diagonal entry n of R.
    [[nodiscard]] double noise_variance(std::size_t observer) const;

private:
    Matrix a_;
    Matrix b_;
    Matrix c_;
    Matrix q_;
    Matrix r_;
    double period_;
    std::vector<double> observer_periods_;
};

}  // namespace ospkit
