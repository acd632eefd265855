#include "ospkit/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "ospkit/dynamics.hpp"
#include "ospkit/errors.hpp"

namespace ospkit::sim {

const char* to_string(Policy policy) noexcept {
    switch (policy) {
    case Policy::Bnb: return "bnb";
    case Policy::Greedy: return "greedy";
    case Policy::All: return "all";
    case Policy::None: return "none";
    }
    return "?";
}

Policy parse_policy(const std::string& name) {
    for (auto p : {Policy::Bnb, Policy::Greedy, Policy::All, Policy::None}) {
        if (name == to_string(p)) return p;
    }
    fail(ErrorKind::Configuration, "unknown policy '" + name + "' (expected bnb, greedy, all or none)");
}

Vector sample_gaussian(const Matrix& cov, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    const auto n = cov.rows();
    Vector z(n);
    for (Eigen::Index i = 0; i < n; ++i) z(i) = normal(rng);
    if (cov.isZero(0.0)) {
        return Vector::Zero(n);
    }
    Eigen::LLT<Matrix> llt(cov);
    if (llt.info() != Eigen::Success) {
        const double jitter = 1e-12 * std::max(cov.diagonal().cwiseAbs().maxCoeff(), 1e-300);
        llt.compute(cov + jitter * Matrix::Identity(n, n));
        if (llt.info() != Eigen::Success) {
            fail(ErrorKind::Numeric, "covariance factorization failed after jitter");
        }
    }
    return llt.matrixL() * z;
}

Vector step_true_state(const SystemModel& model, const Vector& x, const kalman::InputSchedule& inputs, double s,
                       double t, std::mt19937_64& rng) {
    const auto step = dynamics::discretize(model, s, t);
    const Vector forced = kalman::forced_response(model, inputs, s, t);
    return step.phi * x + forced + sample_gaussian(step.noise, rng);
}

Vector bridge_state(const SystemModel& model, const kalman::InputSchedule& inputs, double s, const Vector& x_s,
                    double u, double t, const Vector& x_t, std::mt19937_64& rng) {
    if (!(s <= u) || !(u <= t)) {
        fail(ErrorKind::Ordering, "bridge_state: need s <= u <= t");
    }
    const auto n = x_s.size();
    if (u == t) {
        sample_gaussian(Matrix::Zero(n, n), rng);
        return x_t;
    }
    const auto head = dynamics::discretize(model, s, u);
    const auto tail = dynamics::discretize(model, u, t);
    const Vector mean_u = head.phi * x_s + kalman::forced_response(model, inputs, s, u);
    const Vector residual = x_t - tail.phi * mean_u - kalman::forced_response(model, inputs, u, t);
    // Cov(x_u, x_t | x_s) = Q_su Phi_ut^T and Cov(x_t | x_s) = Phi_ut Q_su Phi_ut^T + Q_ut.
    const Matrix cross = head.noise * tail.phi.transpose();
    const Matrix joint = linalg::symmetrize(tail.phi * cross + tail.noise);
    const Eigen::LDLT<Matrix> solver(joint);
    if (solver.info() != Eigen::Success) {
        fail(ErrorKind::Numeric, "bridge_state: endpoint covariance is singular");
    }
    const Matrix gain = solver.solve(cross.transpose()).transpose();
    const Matrix cov = linalg::symmetrize(head.noise - gain * cross.transpose());
    return mean_u + gain * residual + sample_gaussian(cov, rng);
}

osp::ScheduleEvaluation apply_policy(Policy policy, const osp::CycleContext& ctx, const SystemModel& model) {
    switch (policy) {
    case Policy::Bnb: return osp::bnb_search(ctx, model);
    case Policy::Greedy: return osp::greedy_search(ctx, model);
    case Policy::All: {
        osp::ObsSequence all;
        all.indices.resize(ctx.size());
        std::iota(all.indices.begin(), all.indices.end(), std::size_t{0});
        return osp::evaluate_sequence(all, ctx, model);
    }
    case Policy::None: return osp::evaluate_sequence(osp::ObsSequence{}, ctx, model);
    }
    fail(ErrorKind::Configuration, "unknown policy");
}

std::vector<CycleLog> run_simulation(const SystemModel& model, const ChannelConfig& channel,
                                     const SimulationOptions& options) {
    if (options.cycles < 1) {
        fail(ErrorKind::Configuration, "cycle count must be >= 1");
    }
    const auto dim = static_cast<Eigen::Index>(model.state_dim());
    if (options.initial_cov.rows() != dim || options.initial_cov.cols() != dim) {
        fail(ErrorKind::Dimension, "initial covariance must be " + std::to_string(dim) + "x" + std::to_string(dim));
    }
    linalg::require_covariance(options.initial_cov, "initial covariance");
    channel.validate();
    if (!channel.trace && channel.observation.size() != model.observer_count()) {
        fail(ErrorKind::Configuration, "channel has " + std::to_string(channel.observation.size()) +
                                           " observation links for " + std::to_string(model.observer_count()) +
                                           " observers");
    }

    const kalman::InputSchedule inputs = (options.inputs.actions.empty() && !options.inputs.fill)
                                             ? kalman::InputSchedule::zero(model.input_dim())
                                             : options.inputs;

    auto process_rng = make_engine(channel.seed, Stream::ProcessNoise);
    auto observation_rng = make_engine(channel.seed, Stream::ObservationNoise);
    auto initial_rng = make_engine(channel.seed, Stream::InitialState);
    auto bridge_rng = make_engine(channel.seed, Stream::Bridge);
    std::normal_distribution<double> normal(0.0, 1.0);

    Vector x_true = options.initial_state ? *options.initial_state : sample_gaussian(options.initial_cov, initial_rng);
    if (x_true.size() != dim) {
        fail(ErrorKind::Dimension, "initial state must have " + std::to_string(dim) + " entries");
    }

    // Executive's belief: estimate and covariance at prior_time.
    Vector x_hat = Vector::Zero(dim);
    Matrix cov = options.initial_cov;
    double prior_time = 0.0;
    std::vector<std::size_t> fused_at_prior_time;

    const double period = model.period();
    std::vector<CycleLog> logs;
    logs.reserve(static_cast<std::size_t>(options.cycles));

    for (long long k = 1; k <= options.cycles; ++k) {
        const double cycle_start = static_cast<double>(k - 1) * period;
        const auto draw = sample_airtimes(channel, k);
        if (draw.observation.size() != model.observer_count()) {
            fail(ErrorKind::Configuration, "airtime draw has the wrong number of observation links");
        }

        std::vector<osp::Candidate> raw;
        for (const auto& slot : kalman::cycle_candidates(model, k)) {
            const bool already_fused =
                slot.timestamp == prior_time &&
                std::find(fused_at_prior_time.begin(), fused_at_prior_time.end(), slot.observer) !=
                    fused_at_prior_time.end();
            if (slot.timestamp < prior_time || already_fused) continue;
            raw.push_back({slot.observer, slot.timestamp, draw.observation[slot.observer]});
        }
        const auto ctx = osp::CycleContext::for_cycle(k, period, std::move(raw), draw.action, prior_time, cov);
        const double boundary = ctx.boundary();
        auto eval = apply_policy(options.policy, ctx, model);
        if (options.on_cycle) options.on_cycle(ctx, eval);

        // Same boundary trajectory under every policy; every candidate gets a value.
        const Vector x_start = x_true;
        const Vector x_end = step_true_state(model, x_start, inputs, cycle_start, boundary, process_rng);
        std::vector<double> values(ctx.size());
        double bridge_time = cycle_start;
        Vector bridge_x = x_start;
        for (std::size_t i = 0; i < ctx.size(); ++i) {
            const auto& cand = ctx.candidates()[i];
            if (cand.timestamp != bridge_time) {
                bridge_x = bridge_state(model, inputs, bridge_time, bridge_x, cand.timestamp, boundary, x_end,
                                        bridge_rng);
                bridge_time = cand.timestamp;
            }
            const double noise = std::sqrt(model.noise_variance(cand.observer)) * normal(observation_rng);
            values[i] = model.observation_row(cand.observer).dot(bridge_x) + noise;
        }
        x_true = x_end;

        CycleLog log;
        log.cycle = k;
        log.policy = to_string(options.policy);
        log.candidates = ctx.candidates();
        log.budget = ctx.budget();
        log.prior_time = prior_time;
        log.prior_cov = cov;

        for (auto i : eval.seq.indices) {
            const auto& cand = ctx.candidates()[i];
            x_hat = kalman::propagate_estimate(model, x_hat, inputs, prior_time, cand.timestamp);
            const Matrix predicted = kalman::predict_cov(model, cov, prior_time, cand.timestamp);
            auto upd = kalman::update_estimate(x_hat, predicted, values[i], model.observation_row(cand.observer),
                                               model.noise_variance(cand.observer));
            if (cand.timestamp != prior_time) fused_at_prior_time.clear();
            fused_at_prior_time.push_back(cand.observer);
            x_hat = std::move(upd.state);
            cov = std::move(upd.cov);
            prior_time = cand.timestamp;
            log.chosen_observers.push_back(cand.observer);
        }

        log.seq = eval.seq;
        log.end_of_harvest = eval.end_of_harvest;
        log.forced_empty = eval.forced_empty;
        log.nodes_visited = eval.nodes_visited;
        log.mse_pred = eval.mse;
        log.estimate = kalman::propagate_estimate(model, x_hat, inputs, prior_time, boundary);
        log.true_state = x_true;
        log.sq_err = (log.true_state - log.estimate).squaredNorm();
        logs.push_back(std::move(log));
    }
    return logs;
}

std::vector<double> selection_stats(const std::vector<CycleLog>& logs, std::size_t observer_count) {
    if (logs.empty()) {
        fail(ErrorKind::Domain, "selection_stats: no cycles logged");
    }
    std::vector<double> freq(observer_count, 0.0);
    for (const auto& log : logs) {
        for (auto obs : log.chosen_observers) {
            if (obs < observer_count) freq[obs] += 1.0;
        }
    }
    for (auto& f : freq) f /= static_cast<double>(logs.size());
    return freq;
}

}  // namespace ospkit::sim
