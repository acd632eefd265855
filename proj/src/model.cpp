#include "ospkit/model.hpp"

#include <cmath>
#include <string>

#include "ospkit/errors.hpp"

namespace ospkit {
namespace {

std::string shape(const Matrix& m) { return std::to_string(m.rows()) + "x" + std::to_string(m.cols()); }

}  // namespace

SystemModel::SystemModel(Matrix a, Matrix b, Matrix c, Matrix q, Matrix r, double period,
                         std::vector<double> observer_periods)
    : a_(std::move(a)),
      b_(std::move(b)),
      c_(std::move(c)),
      q_(std::move(q)),
      r_(std::move(r)),
      period_(period),
      observer_periods_(std::move(observer_periods)) {
    if (a_.rows() == 0 || a_.rows() != a_.cols()) {
        fail(ErrorKind::Dimension, "A must be square and non-empty, got " + shape(a_));
    }
    const auto s = a_.rows();
    const auto n = static_cast<Eigen::Index>(observer_periods_.size());
    if (b_.rows() != s || b_.cols() == 0) {
        fail(ErrorKind::Dimension, "B must be " + std::to_string(s) + "xM with M > 0, got " + shape(b_));
    }
    if (c_.rows() != n || c_.cols() != s) {
        fail(ErrorKind::Dimension, "C must be " + std::to_string(n) + "x" + std::to_string(s) +
                                       " (observers x states), got " + shape(c_));
    }
    if (q_.rows() != s || q_.cols() != s) {
        fail(ErrorKind::Dimension, "Q must be " + std::to_string(s) + "x" + std::to_string(s) + ", got " +
                                       shape(q_));
    }
    if (r_.rows() != n || r_.cols() != n) {
        fail(ErrorKind::Dimension, "R must be " + std::to_string(n) + "x" + std::to_string(n) + ", got " +
                                       shape(r_));
    }
    for (const Matrix* m : {&a_, &b_, &c_}) {
        if (!m->allFinite()) fail(ErrorKind::Domain, "model matrices must have finite entries");
    }
    linalg::require_covariance(q_, "Q");
    if (!r_.allFinite()) fail(ErrorKind::Domain, "R has non-finite entries");
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i != j && r_(i, j) != 0.0) {
                fail(ErrorKind::Domain, "R must be diagonal: observers are updated one scalar at a time, "
                                        "so cross-correlated observation noise is not supported (entry " +
                                            std::to_string(i) + "," + std::to_string(j) + ")");
            }
        }
        if (r_(i, i) < 0.0) {
            fail(ErrorKind::Domain, "R diagonal entry " + std::to_string(i) + " is negative");
        }
    }
    if (!(period_ > 0.0) || !std::isfinite(period_)) {
        fail(ErrorKind::Domain, "decision period T must be positive");
    }
    for (std::size_t i = 0; i < observer_periods_.size(); ++i) {
        if (!(observer_periods_[i] > 0.0) || !std::isfinite(observer_periods_[i])) {
            fail(ErrorKind::Domain, "observer period " + std::to_string(i) + " must be positive");
        }
    }
}

Vector SystemModel::observation_row(std::size_t observer) const {
    if (observer >= observer_count()) {
        fail(ErrorKind::Domain, "observer index " + std::to_string(observer) + " out of range");
    }
    return c_.row(static_cast<Eigen::Index>(observer)).transpose();
}

double SystemModel::noise_variance(std::size_t observer) const {
    if (observer >= observer_count()) {
        fail(ErrorKind::Domain, "observer index " + std::to_string(observer) + " out of range");
    }
    const auto i = static_cast<Eigen::Index>(observer);
    return r_(i, i);
}

}  // namespace ospkit
