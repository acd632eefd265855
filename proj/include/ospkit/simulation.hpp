#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ospkit/channel.hpp"
#include "ospkit/kalman.hpp"
#include "ospkit/model.hpp"
#include "ospkit/scheduler.hpp"

namespace ospkit::sim {

/// The true trajectory is drawn boundary to boundary from one stream, and
/// states at observation instants are bridged in from another. The boundary
/// states therefore depend only on (seed, model, T), not on which instants a
/// run happens to visit.
enum class Policy { Bnb, Greedy, All, None };

const char* to_string(Policy policy) noexcept;
/// Throws Error{Configuration} for an unknown name.
Policy parse_policy(const std::string& name);

/// x(t) = Phi(s,t) x(s) + forced response + nu, nu ~ N(0, Q(s,t)).
Vector step_true_state(const SystemModel& model, const Vector& x, const kalman::InputSchedule& inputs, double s,
                       double t, std::mt19937_64& rng);

/// Sample x(u) for s <= u <= t conditioned on both x(s) and x(t) (the
/// Gaussian bridge of the plant's process noise).
Vector bridge_state(const SystemModel& model, const kalman::InputSchedule& inputs, double s, const Vector& x_s,
                    double u, double t, const Vector& x_t, std::mt19937_64& rng);

/// Zero-mean Gaussian sample with covariance `cov`. Falls back to a 1e-12
/// relative diagonal jitter when the Cholesky factorization fails; throws
/// Error{Numeric} if that fails too.
Vector sample_gaussian(const Matrix& cov, std::mt19937_64& rng);

struct CycleLog {
    long long cycle = 0;
    std::string policy;
    std::vector<osp::Candidate> candidates;  // harvest order
    double budget = 0.0;
    osp::ObsSequence seq;
    std::vector<std::size_t> chosen_observers;
    double end_of_harvest = 0.0;
    bool forced_empty = false;
    std::size_t nodes_visited = 0;
    double prior_time = 0.0;
    Matrix prior_cov;
    double mse_pred = 0.0;
    double sq_err = 0.0;
    Vector true_state;  // x(kT)
    Vector estimate;    // x_hat(kT | last fused observation)
};

struct SimulationOptions {
    Policy policy = Policy::Bnb;
    long long cycles = 1;
    Matrix initial_cov;                  // P at t0 = 0
    std::optional<Vector> initial_state; // sampled from N(0, initial_cov) when absent
    kalman::InputSchedule inputs;        // defaults to u = 0 when empty
    /// Called once per cycle with the instance and the policy's answer.
    std::function<void(const osp::CycleContext&, const osp::ScheduleEvaluation&)> on_cycle;
};

std::vector<CycleLog> run_simulation(const SystemModel& model, const ChannelConfig& channel,
                                     const SimulationOptions& options);

/// Fraction of cycles in which each observer was harvested.
std::vector<double> selection_stats(const std::vector<CycleLog>& logs, std::size_t observer_count);

/// Run one cycle's policy on a prepared context.
osp::ScheduleEvaluation apply_policy(Policy policy, const osp::CycleContext& ctx, const SystemModel& model);

}  // namespace ospkit::sim
