#pragma once

// Random selection-problem instances on the three-state plant.

#include <random>
#include <vector>

#include "ospkit/config.hpp"
#include "ospkit/scheduler.hpp"
#include "oracles.hpp"

namespace testing {

struct Instance {
    ospkit::SystemModel model;
    ospkit::osp::CycleContext ctx;
};

// L observers with Gaussian observation rows and noise variances spread over
// [1e-3, 1]; airtimes sized so that typically a few but not all fit.
inline Instance random_instance(std::mt19937_64& rng, std::size_t count, long long cycle = 1) {
    using ospkit::Matrix;
    const double period = ospkit::config::kDecisionPeriod;
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto n = static_cast<Eigen::Index>(count);
    Matrix c(n, 3);
    Matrix r = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < 3; ++j) c(i, j) = g(rng);
        r(i, i) = std::pow(10.0, -3.0 * unit(rng));
    }
    ospkit::SystemModel model(ospkit::config::plant_a(), ospkit::config::plant_b(), c,
                              ospkit::config::kLowNoise * Matrix::Identity(3, 3), r, period,
                              std::vector<double>(count, period));
    const double start = static_cast<double>(cycle - 1) * period;
    std::vector<ospkit::osp::Candidate> cands;
    for (std::size_t i = 0; i < count; ++i) {
        cands.push_back({i, start + 0.9 * period * unit(rng), 2e-4 + 2.8e-3 * unit(rng)});
    }
    std::vector<double> actions{1e-3 + 3e-3 * unit(rng)};
    const double prior_time = start - 0.5 * period * unit(rng);
    Matrix prior = oracle::random_psd(rng, 3, 0.1 * (0.1 + unit(rng)));
    auto ctx = ospkit::osp::CycleContext::for_cycle(cycle, period, std::move(cands), std::move(actions),
                                                    std::max(0.0, prior_time), prior);
    return {std::move(model), std::move(ctx)};
}

}  // namespace testing
