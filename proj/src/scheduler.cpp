#include "ospkit/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ospkit/errors.hpp"

namespace ospkit::osp {

std::vector<Candidate> order_observations(std::vector<Candidate> raw) {
    std::stable_sort(raw.begin(), raw.end(), [](const Candidate& lhs, const Candidate& rhs) {
        if (lhs.timestamp != rhs.timestamp) return lhs.timestamp < rhs.timestamp;
        return lhs.observer < rhs.observer;
    });
    return raw;
}

double harvesting_budget(double period, std::span<const double> action_airtimes) {
    return period - std::accumulate(action_airtimes.begin(), action_airtimes.end(), 0.0);
}

CycleContext::CycleContext(std::vector<Candidate> candidates, std::vector<double> action_airtimes,
                           double cycle_start, double period, double prior_time, Matrix prior_cov)
    : candidates_(order_observations(std::move(candidates))),
      action_airtimes_(std::move(action_airtimes)),
      cycle_start_(cycle_start),
      period_(period),
      boundary_(cycle_start + period),
      prior_time_(prior_time),
      prior_cov_(std::move(prior_cov)),
      budget_(harvesting_budget(period, action_airtimes_)) {
    if (!(period_ > 0.0)) {
        fail(ErrorKind::Domain, "cycle context: period must be positive");
    }
    linalg::require_covariance(prior_cov_, "prior covariance");
    for (double a : action_airtimes_) {
        if (!(a >= 0.0) || !std::isfinite(a)) fail(ErrorKind::Domain, "action airtimes must be >= 0");
    }
    const double eps = kalman::kBoundaryEpsilon * period_;
    for (std::size_t i = 0; i < candidates_.size(); ++i) {
        const auto& c = candidates_[i];
        if (!(c.airtime > 0.0) || !std::isfinite(c.airtime)) {
            fail(ErrorKind::Domain, "observation airtimes must be > 0 (observer " + std::to_string(c.observer) + ")");
        }
        if (c.timestamp < cycle_start_ - eps || c.timestamp > boundary() + eps) {
            fail(ErrorKind::Domain, "observation timestamp " + std::to_string(c.timestamp) +
                                        " lies outside the cycle [" + std::to_string(cycle_start_) + ", " +
                                        std::to_string(boundary()) + "]");
        }
        if (i > 0 && c.timestamp == candidates_[i - 1].timestamp && c.observer == candidates_[i - 1].observer) {
            fail(ErrorKind::Domain, "duplicate candidate for observer " + std::to_string(c.observer));
        }
    }
    if (!candidates_.empty() && prior_time_ > candidates_.front().timestamp) {
        fail(ErrorKind::Ordering, "prior time " + std::to_string(prior_time_) + " is after the first candidate at " +
                                      std::to_string(candidates_.front().timestamp));
    }
    if (prior_time_ > boundary()) {
        fail(ErrorKind::Ordering, "prior time is after the cycle boundary");
    }
}

CycleContext CycleContext::for_cycle(long long cycle, double period, std::vector<Candidate> candidates,
                                     std::vector<double> action_airtimes, double prior_time, Matrix prior_cov) {
    if (cycle < 1) fail(ErrorKind::Domain, "cycle index must be >= 1");
    CycleContext ctx(std::move(candidates), std::move(action_airtimes), static_cast<double>(cycle - 1) * period,
                     period, prior_time, std::move(prior_cov));
    ctx.boundary_ = static_cast<double>(cycle) * period;
    return ctx;
}

double CycleContext::harvest_offset(std::size_t index) const {
    return std::max(0.0, candidates_.at(index).timestamp - cycle_start_);
}

std::string ObsSequence::to_string() const {
    if (indices.empty()) return "-";
    std::string out;
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (i > 0) out += '+';
        out += std::to_string(indices[i] + 1);
    }
    return out;
}

void validate_sequence(const ObsSequence& seq, const CycleContext& ctx) {
    for (std::size_t i = 0; i < seq.indices.size(); ++i) {
        if (seq.indices[i] >= ctx.size()) {
            fail(ErrorKind::Domain, "sequence index " + std::to_string(seq.indices[i] + 1) + " out of range 1.." +
                                        std::to_string(ctx.size()));
        }
        if (i > 0 && seq.indices[i] <= seq.indices[i - 1]) {
            fail(ErrorKind::Domain, "sequence indices must be strictly ascending");
        }
    }
}

namespace {

double harvest_step(double d, double offset, double airtime) { return std::max(offset + airtime, d + airtime); }

}  // namespace

double end_of_harvest(const ObsSequence& seq, const CycleContext& ctx) {
    validate_sequence(seq, ctx);
    double d = 0.0;
    for (auto i : seq.indices) {
        d = harvest_step(d, ctx.harvest_offset(i), ctx.candidates()[i].airtime);
    }
    return d;
}

double end_of_harvest_closed_form(const ObsSequence& seq, const CycleContext& ctx) {
    validate_sequence(seq, ctx);
    double best = 0.0;
    for (std::size_t first = 0; first < seq.size(); ++first) {
        double suffix = 0.0;
        for (std::size_t j = first; j < seq.size(); ++j) {
            suffix += ctx.candidates()[seq.indices[j]].airtime;
        }
        best = std::max(best, ctx.harvest_offset(seq.indices[first]) + suffix);
    }
    return best;
}

bool is_schedulable(const ObsSequence& seq, const CycleContext& ctx) { return end_of_harvest(seq, ctx) < ctx.budget(); }

std::vector<kalman::TimedObservation> timed_observations(const ObsSequence& seq, const CycleContext& ctx) {
    validate_sequence(seq, ctx);
    std::vector<kalman::TimedObservation> out;
    out.reserve(seq.size());
    for (auto i : seq.indices) {
        out.push_back({ctx.candidates()[i].observer, ctx.candidates()[i].timestamp});
    }
    return out;
}

bool preferred(double mse, const ObsSequence& seq, double best_mse, const ObsSequence& best_seq) {
    const double tol = kTieTolerance * std::max(std::abs(mse), std::abs(best_mse));
    if (mse < best_mse - tol) return true;
    if (mse > best_mse + tol) return false;
    if (seq.size() != best_seq.size()) return seq.size() < best_seq.size();
    return seq.indices < best_seq.indices;
}

ScheduleEvaluation evaluate_sequence(const ObsSequence& seq, const CycleContext& ctx, const SystemModel& model) {
    const auto timed = timed_observations(seq, ctx);
    auto scored = kalman::sequence_mse(model, ctx.prior_cov(), ctx.prior_time(), timed, ctx.boundary());
    ScheduleEvaluation out;
    out.seq = seq;
    out.end_of_harvest = end_of_harvest(seq, ctx);
    out.mse = scored.mse;
    out.running_cov = std::move(scored.running_cov);
    out.last_time = scored.last_time;
    return out;
}

namespace {

ScheduleEvaluation empty_evaluation(const CycleContext& ctx, const SystemModel& model) {
    auto out = evaluate_sequence(ObsSequence{}, ctx, model);
    out.forced_empty = !(0.0 < ctx.budget());
    return out;
}

// Depth-first walk of the subset forest. Each frame owns its prefix's running
// covariance; extending never mutates the parent's.
class ForestSearch {
public:
    ForestSearch(const CycleContext& ctx, const SystemModel& model, ScheduleEvaluation& best)
        : ctx_(ctx), model_(model), best_(best) {}

    void run(std::size_t first, double d, const kalman::SequenceMse& prefix, ObsSequence& seq) {
        for (std::size_t j = first; j < ctx_.size(); ++j) {
            ++best_.nodes_visited;
            const double extended_d = harvest_step(d, ctx_.harvest_offset(j), ctx_.candidates()[j].airtime);
            if (!(extended_d < ctx_.budget())) {
                // Every sequence starting with (seq, j) is also late; later j may still fit.
                continue;
            }
            const auto& cand = ctx_.candidates()[j];
            const auto child = kalman::extend_sequence(model_, prefix, {cand.observer, cand.timestamp}, ctx_.boundary());
            seq.indices.push_back(j);
            if (preferred(child.mse, seq, best_.mse, best_.seq)) {
                best_.seq = seq;
                best_.mse = child.mse;
                best_.end_of_harvest = extended_d;
                best_.running_cov = child.running_cov;
                best_.last_time = child.last_time;
                best_.forced_empty = false;
            }
            run(j + 1, extended_d, child, seq);
            seq.indices.pop_back();
        }
    }

private:
    const CycleContext& ctx_;
    const SystemModel& model_;
    ScheduleEvaluation& best_;
};

}  // namespace

ScheduleEvaluation bnb_search(const CycleContext& ctx, const SystemModel& model) {
    ScheduleEvaluation best = empty_evaluation(ctx, model);
    const kalman::SequenceMse root{best.mse, ctx.prior_cov(), ctx.prior_time()};
    ObsSequence seq;
    ForestSearch(ctx, model, best).run(0, 0.0, root, seq);
    return best;
}

ScheduleEvaluation greedy_search(const CycleContext& ctx, const SystemModel& model) {
    ScheduleEvaluation out = empty_evaluation(ctx, model);
    kalman::SequenceMse running{out.mse, ctx.prior_cov(), ctx.prior_time()};
    double d = 0.0;
    for (std::size_t j = 0; j < ctx.size(); ++j) {
        ++out.nodes_visited;
        const auto& cand = ctx.candidates()[j];
        const double extended_d = harvest_step(d, ctx.harvest_offset(j), cand.airtime);
        if (!(extended_d < ctx.budget())) {
            continue;
        }
        d = extended_d;
        running = kalman::extend_sequence(model, running, {cand.observer, cand.timestamp}, ctx.boundary());
        out.seq.indices.push_back(j);
    }
    if (!out.seq.empty()) {
        out.end_of_harvest = d;
        out.mse = running.mse;
        out.running_cov = std::move(running.running_cov);
        out.last_time = running.last_time;
        out.forced_empty = false;
    }
    return out;
}

ScheduleEvaluation exhaustive_oracle(const CycleContext& ctx, const SystemModel& model) {
    const std::size_t count = ctx.size();
    if (count > kExhaustiveLimit) {
        fail(ErrorKind::SizeGuard, "exhaustive_oracle: " + std::to_string(count) + " candidates exceeds the limit of " +
                                       std::to_string(kExhaustiveLimit));
    }
    ScheduleEvaluation best = empty_evaluation(ctx, model);
    const std::size_t subsets = std::size_t{1} << count;
    for (std::size_t mask = 1; mask < subsets; ++mask) {
        ObsSequence seq;
        for (std::size_t i = 0; i < count; ++i) {
            if (mask & (std::size_t{1} << i)) seq.indices.push_back(i);
        }
        ++best.nodes_visited;
        const double d = end_of_harvest_closed_form(seq, ctx);
        if (!(d < ctx.budget())) {
            continue;
        }
        const auto timed = timed_observations(seq, ctx);
        auto scored = kalman::sequence_mse(model, ctx.prior_cov(), ctx.prior_time(), timed, ctx.boundary());
        if (preferred(scored.mse, seq, best.mse, best.seq)) {
            best.seq = std::move(seq);
            best.mse = scored.mse;
            best.end_of_harvest = d;
            best.running_cov = std::move(scored.running_cov);
            best.last_time = scored.last_time;
            best.forced_empty = false;
        }
    }
    return best;
}

}  // namespace ospkit::osp
