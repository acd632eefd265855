#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "ospkit/linalg.hpp"
#include "ospkit/model.hpp"

namespace ospkit::kalman {

/// Relative tolerance (times T) used when snapping cycle-boundary arithmetic.
inline constexpr double kBoundaryEpsilon = 1e-9;

/// Timestamp of observer n's first sample in decision cycle k (k >= 1), or
/// nothing if a slow observer (T_n > T) produces no sample in that cycle.
///
///   T_n == T : (k-1) T
///   T_n <  T : ceil((k-1) T / T_n) T_n
///   T_n >  T : floor(k T / T_n) T_n, present only if k T minus it is <= T
std::optional<double> first_obs_timestamp(double period, double observer_period, long long cycle);

/// The single representative observation an observer offers in one cycle.
struct ObservationSlot {
    std::size_t observer = 0;
    double timestamp = 0.0;
};

/// One slot per observer that samples in cycle k, in observer order.
std::vector<ObservationSlot> cycle_candidates(const SystemModel& model, long long cycle);

/// Scalar measurement update bookkeeping.
struct KfUpdateTrace {
    double innovation_variance = 0.0;
    Vector gain;
    Matrix prior_cov;
    Matrix posterior_cov;
};

/// h_{i,j}: Phi P Phi^T + Q(t_i, t_j), symmetrized.
Matrix predict_cov(const SystemModel& model, const Matrix& cov, double t_i, double t_j);

/// P - (1/e) P c c^T P with e = c^T P c + r. Throws Error{Domain} for r <= 0.
KfUpdateTrace scalar_update_cov(const Matrix& cov, const Vector& c, double r);

/// g_{i,j}: predict to t_j, then fold in observer j's measurement.
Matrix g_step(const SystemModel& model, const Matrix& cov, double t_i, double t_j, std::size_t observer);

/// h_i: predict to the cycle boundary kT.
Matrix boundary_predict(const SystemModel& model, const Matrix& cov, double t_i, double boundary);

/// One element of a sequence being scored: who observes, and when.
struct TimedObservation {
    std::size_t observer = 0;
    double timestamp = 0.0;
};

struct SequenceMse {
    double mse = 0.0;
    /// Posterior covariance after the last update (the prior itself for an
    /// empty sequence). Extensions of the sequence start from here.
    Matrix running_cov;
    /// Timestamp running_cov refers to (t0 for an empty sequence).
    double last_time = 0.0;
};

/// MSE of the estimate at `boundary` after fusing `seq` in order, starting
/// from covariance `prior` at time `t0`. Timestamps must be non-decreasing and
/// lie in [t0, boundary]; otherwise Error{Ordering}.
SequenceMse sequence_mse(const SystemModel& model, const Matrix& prior, double t0,
                         std::span<const TimedObservation> seq, double boundary);

/// Continue a sequence from a running covariance by one more observation.
SequenceMse extend_sequence(const SystemModel& model, const SequenceMse& prefix, const TimedObservation& next,
                            double boundary);

/// Zero-order-hold input schedule: u(tau) = actions[floor(tau / T)]. Cycles
/// past the end of `actions` use `fill` when it is set.
struct InputSchedule {
    std::vector<Vector> actions;
    std::optional<Vector> fill;

    [[nodiscard]] static InputSchedule constant(Vector u) { return {{}, std::move(u)}; }
    [[nodiscard]] static InputSchedule zero(std::size_t input_dim) {
        return constant(Vector::Zero(static_cast<Eigen::Index>(input_dim)));
    }
    /// Throws Error{Configuration} when cycle j is not covered.
    [[nodiscard]] const Vector& at(long long cycle) const;
};

/// Mean propagation x(t) = Phi(s,t) x(s) + sum over cycle segments of Lambda u.
/// Throws Error{Configuration} if a cycle touched by (s, t) has no action.
Vector propagate_estimate(const SystemModel& model, const Vector& x, const InputSchedule& inputs, double s,
                          double t);

/// Input-only part of propagate_estimate (the response from a zero state).
Vector forced_response(const SystemModel& model, const InputSchedule& inputs, double s, double t);

struct EstimateUpdate {
    Vector state;
    Matrix cov;
    KfUpdateTrace trace;
};

/// K = P c / e; x <- x + K (y - c^T x).
EstimateUpdate update_estimate(const Vector& x, const Matrix& cov, double y, const Vector& c, double r);

}  // namespace ospkit::kalman
