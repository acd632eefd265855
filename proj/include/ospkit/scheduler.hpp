#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ospkit/kalman.hpp"
#include "ospkit/linalg.hpp"
#include "ospkit/model.hpp"

namespace ospkit::osp {

/// A representative observation offered for harvesting in one cycle.
struct Candidate {
    std::size_t observer = 0;
    double timestamp = 0.0;  // absolute sampling time
    double airtime = 0.0;    // transmission time this cycle
};

/// Ascending by timestamp; equal timestamps ordered by observer id.
std::vector<Candidate> order_observations(std::vector<Candidate> raw);

/// B = T - sum(A_m). May be <= 0, in which case nothing is schedulable.
double harvesting_budget(double period, std::span<const double> action_airtimes);

/// One decision cycle's instance of the selection problem.
///
/// Candidates are stored in harvest order (o_1 ... o_L). Harvest arithmetic
/// uses offsets from the cycle start, estimation uses absolute timestamps.
class CycleContext {
public:
    CycleContext(std::vector<Candidate> candidates, std::vector<double> action_airtimes, double cycle_start,
                 double period, double prior_time, Matrix prior_cov);

    /// Cycle k >= 1 of a run with decision period T: spans [(k-1)T, kT], with
    /// both edges computed as integer multiples of T.
    static CycleContext for_cycle(long long cycle, double period, std::vector<Candidate> candidates,
                                  std::vector<double> action_airtimes, double prior_time, Matrix prior_cov);

    [[nodiscard]] const std::vector<Candidate>& candidates() const noexcept { return candidates_; }
    [[nodiscard]] std::size_t size() const noexcept { return candidates_.size(); }
    [[nodiscard]] const std::vector<double>& action_airtimes() const noexcept { return action_airtimes_; }
    [[nodiscard]] double cycle_start() const noexcept { return cycle_start_; }
    [[nodiscard]] double period() const noexcept { return period_; }
    /// kT, the boundary at which the estimate is scored.
    [[nodiscard]] double boundary() const noexcept { return boundary_; }
    [[nodiscard]] double prior_time() const noexcept { return prior_time_; }
    [[nodiscard]] const Matrix& prior_cov() const noexcept { return prior_cov_; }
    [[nodiscard]] double budget() const noexcept { return budget_; }

    /// o_l measured from the start of the cycle.
    [[nodiscard]] double harvest_offset(std::size_t index) const;

private:
    std::vector<Candidate> candidates_;
    std::vector<double> action_airtimes_;
    double cycle_start_;
    double period_;
    double boundary_;
    double prior_time_;
    Matrix prior_cov_;
    double budget_;
};

/// Strictly ascending 0-based candidate positions.
struct ObsSequence {
    std::vector<std::size_t> indices;

    [[nodiscard]] bool empty() const noexcept { return indices.empty(); }
    [[nodiscard]] std::size_t size() const noexcept { return indices.size(); }
    /// 1-based positions joined by '+', or "-" for the empty sequence.
    [[nodiscard]] std::string to_string() const;

    friend bool operator==(const ObsSequence&, const ObsSequence&) = default;
};

/// Throws Error{Domain} unless indices are strictly ascending and < ctx.size().
void validate_sequence(const ObsSequence& seq, const CycleContext& ctx);

/// d <- max(o_j + O_j, d + O_j) over the sequence; 0 for the empty sequence.
double end_of_harvest(const ObsSequence& seq, const CycleContext& ctx);

/// max over i in seq of (o_i + sum of O_j for j >= i in seq).
double end_of_harvest_closed_form(const ObsSequence& seq, const CycleContext& ctx);

/// end_of_harvest(seq) < budget, strictly.
bool is_schedulable(const ObsSequence& seq, const CycleContext& ctx);

/// Timed observations of a sequence, for kalman::sequence_mse.
std::vector<kalman::TimedObservation> timed_observations(const ObsSequence& seq, const CycleContext& ctx);

struct ScheduleEvaluation {
    ObsSequence seq;
    double end_of_harvest = 0.0;
    double mse = 0.0;
    Matrix running_cov;
    double last_time = 0.0;
    std::size_t nodes_visited = 0;
    /// Set when B <= 0: the empty sequence is returned although it violates d < B.
    bool forced_empty = false;
};

/// Relative MSE tolerance under which two sequences are considered tied.
inline constexpr double kTieTolerance = 1e-12;

/// True if (mse, seq) should replace (best_mse, best_seq): smaller MSE, or a tie
/// broken by fewer observations, then lexicographically smaller indices.
bool preferred(double mse, const ObsSequence& seq, double best_mse, const ObsSequence& best_seq);

/// Exact optimum over all schedulable sequences by depth-first traversal of the
/// subset forest with feasibility pruning.
ScheduleEvaluation bnb_search(const CycleContext& ctx, const SystemModel& model);

/// Chronological first-come-first-served baseline.
ScheduleEvaluation greedy_search(const CycleContext& ctx, const SystemModel& model);

/// Ground truth by enumerating all 2^L subsets from scratch. L <= 20.
ScheduleEvaluation exhaustive_oracle(const CycleContext& ctx, const SystemModel& model);

inline constexpr std::size_t kExhaustiveLimit = 20;

/// Score an arbitrary sequence from scratch (no schedulability check).
ScheduleEvaluation evaluate_sequence(const ObsSequence& seq, const CycleContext& ctx, const SystemModel& model);

}  // namespace ospkit::osp
