#include "ospkit/kalman.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ospkit/dynamics.hpp"
#include "ospkit/errors.hpp"

namespace ospkit::kalman {

std::optional<double> first_obs_timestamp(double period, double observer_period, long long cycle) {
    if (cycle < 1) {
        fail(ErrorKind::Domain, "first_obs_timestamp: cycle index must be >= 1, got " + std::to_string(cycle));
    }
    if (!(period > 0.0) || !(observer_period > 0.0)) {
        fail(ErrorKind::Domain, "first_obs_timestamp: periods must be positive");
    }
    const double eps = kBoundaryEpsilon * period;
    const double start = static_cast<double>(cycle - 1) * period;
    const double end = static_cast<double>(cycle) * period;
    // Grid points within eps of a cycle edge are reported as the edge itself so
    // that they compare equal to boundaries computed elsewhere as k T.
    auto snap = [&](double stamp) {
        if (std::abs(stamp - start) <= eps) return start;
        if (std::abs(stamp - end) <= eps) return end;
        return stamp;
    };
    if (std::abs(observer_period - period) <= eps) {
        return start;
    }
    if (observer_period < period) {
        const double index = std::ceil(start / observer_period - eps / observer_period);
        return snap(index * observer_period);
    }
    const double index = std::floor(end / observer_period + eps / observer_period);
    const double stamp = index * observer_period;
    if (end - stamp <= period + eps) {
        return snap(stamp);
    }
    return std::nullopt;
}

std::vector<ObservationSlot> cycle_candidates(const SystemModel& model, long long cycle) {
    std::vector<ObservationSlot> slots;
    const auto& periods = model.observer_periods();
    for (std::size_t n = 0; n < periods.size(); ++n) {
        if (auto stamp = first_obs_timestamp(model.period(), periods[n], cycle)) {
            slots.push_back({n, *stamp});
        }
    }
    return slots;
}

Matrix predict_cov(const SystemModel& model, const Matrix& cov, double t_i, double t_j) {
    if (!(t_i <= t_j)) {
        fail(ErrorKind::Ordering, "predict_cov: t_i = " + std::to_string(t_i) + " is after t_j = " +
                                      std::to_string(t_j));
    }
    if (t_i == t_j) {
        return cov;
    }
    const auto step = dynamics::discretize(model, t_i, t_j);
    return linalg::symmetrize(step.phi * cov * step.phi.transpose() + step.noise);
}

KfUpdateTrace scalar_update_cov(const Matrix& cov, const Vector& c, double r) {
    if (!(r > 0.0) || !std::isfinite(r)) {
        fail(ErrorKind::Domain, "scalar_update_cov: observation noise variance must be positive, got " +
                                    std::to_string(r));
    }
    if (c.size() != cov.rows() || cov.rows() != cov.cols()) {
        fail(ErrorKind::Dimension, "scalar_update_cov: observation row does not match covariance");
    }
    KfUpdateTrace trace;
    const Vector pc = cov * c;
    trace.innovation_variance = c.dot(pc) + r;
    trace.gain = pc / trace.innovation_variance;
    trace.prior_cov = cov;
    trace.posterior_cov = linalg::symmetrize(cov - trace.gain * pc.transpose());
    return trace;
}

Matrix g_step(const SystemModel& model, const Matrix& cov, double t_i, double t_j, std::size_t observer) {
    const Matrix predicted = predict_cov(model, cov, t_i, t_j);
    return scalar_update_cov(predicted, model.observation_row(observer), model.noise_variance(observer))
        .posterior_cov;
}

Matrix boundary_predict(const SystemModel& model, const Matrix& cov, double t_i, double boundary) {
    return predict_cov(model, cov, t_i, boundary);
}

SequenceMse extend_sequence(const SystemModel& model, const SequenceMse& prefix, const TimedObservation& next,
                            double boundary) {
    if (!(prefix.last_time <= next.timestamp) || !(next.timestamp <= boundary)) {
        fail(ErrorKind::Ordering, "sequence timestamps must be non-decreasing and not past the boundary (" +
                                      std::to_string(prefix.last_time) + " -> " + std::to_string(next.timestamp) +
                                      ", boundary " + std::to_string(boundary) + ")");
    }
    SequenceMse out;
    out.running_cov = g_step(model, prefix.running_cov, prefix.last_time, next.timestamp, next.observer);
    out.last_time = next.timestamp;
    out.mse = boundary_predict(model, out.running_cov, out.last_time, boundary).trace();
    return out;
}

SequenceMse sequence_mse(const SystemModel& model, const Matrix& prior, double t0,
                         std::span<const TimedObservation> seq, double boundary) {
    if (!(t0 <= boundary)) {
        fail(ErrorKind::Ordering, "sequence_mse: prior time is after the boundary");
    }
    SequenceMse state;
    state.running_cov = prior;
    state.last_time = t0;
    state.mse = boundary_predict(model, prior, t0, boundary).trace();
    for (const auto& obs : seq) {
        state = extend_sequence(model, state, obs, boundary);
    }
    return state;
}

const Vector& InputSchedule::at(long long cycle) const {
    if (cycle >= 0 && static_cast<std::size_t>(cycle) < actions.size()) {
        return actions[static_cast<std::size_t>(cycle)];
    }
    if (fill) {
        return *fill;
    }
    fail(ErrorKind::Configuration, "no action vector for cycle " + std::to_string(cycle));
}

Vector forced_response(const SystemModel& model, const InputSchedule& inputs, double s, double t) {
    if (!(s <= t)) {
        fail(ErrorKind::Ordering, "propagate_estimate: s is after t");
    }
    const double period = model.period();
    const double eps = kBoundaryEpsilon * period;
    Vector response = Vector::Zero(static_cast<Eigen::Index>(model.state_dim()));
    double cursor = s;
    while (t - cursor > eps) {
        auto cycle = static_cast<long long>(std::floor(cursor / period + kBoundaryEpsilon));
        double segment_end = static_cast<double>(cycle + 1) * period;
        if (segment_end - cursor <= eps) {
            ++cycle;
            segment_end = static_cast<double>(cycle + 1) * period;
        }
        segment_end = std::min(segment_end, t);
        const Vector& u = inputs.at(cycle);
        if (u.size() != static_cast<Eigen::Index>(model.input_dim())) {
            fail(ErrorKind::Configuration, "action vector for cycle " + std::to_string(cycle) + " has length " +
                                               std::to_string(u.size()) + ", expected " +
                                               std::to_string(model.input_dim()));
        }
        if (!u.isZero(0.0)) {
            response += dynamics::input_lambda(model, cursor, segment_end, t) * u;
        }
        cursor = segment_end;
    }
    return response;
}

Vector propagate_estimate(const SystemModel& model, const Vector& x, const InputSchedule& inputs, double s,
                          double t) {
    const Vector forced = forced_response(model, inputs, s, t);
    return dynamics::transition_phi(model, s, t) * x + forced;
}

EstimateUpdate update_estimate(const Vector& x, const Matrix& cov, double y, const Vector& c, double r) {
    EstimateUpdate out;
    out.trace = scalar_update_cov(cov, c, r);
    out.state = x + out.trace.gain * (y - c.dot(x));
    out.cov = out.trace.posterior_cov;
    return out;
}

}  // namespace ospkit::kalman
