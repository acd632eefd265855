#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "ospkit/channel.hpp"
#include "ospkit/dynamics.hpp"
#include "ospkit/kalman.hpp"
#include "ospkit/simulation.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace ospkit;
using namespace ospkit::sim;
using testing::error_kind;

namespace {

ChannelConfig uniform_channel(std::size_t observers, UniformRange obs, UniformRange act, std::uint64_t seed) {
    ChannelConfig ch;
    ch.observation.assign(observers, obs);
    ch.action = {act};
    ch.seed = seed;
    return ch;
}

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

}  // namespace

TEST_CASE("sample_airtimes") {
    SUBCASE("degenerate range") {
        auto ch = uniform_channel(3, {2e-4, 2e-4}, {1e-3, 1e-3}, 4);
        auto d = sample_airtimes(ch, 7);
        for (double o : d.observation) CHECK(o == 2e-4);
        CHECK(d.action == std::vector<double>{1e-3});
    }
    SUBCASE("reproducible per cycle, independent of history") {
        auto ch = uniform_channel(3, {1e-4, 1e-3}, {1e-3, 2e-3}, 99);
        auto first = sample_airtimes(ch, 12);
        (void)sample_airtimes(ch, 3);
        auto second = sample_airtimes(ch, 12);
        CHECK(first.observation == second.observation);
        CHECK(first.action == second.action);
        CHECK(sample_airtimes(ch, 13).observation != first.observation);
        ch.seed = 100;
        CHECK(sample_airtimes(ch, 12).observation != first.observation);
    }
    SUBCASE("uniform statistics") {
        auto ch = uniform_channel(1, {1e-4, 1e-3}, {1e-3, 2e-3}, 5);
        std::vector<double> draws;
        for (long long k = 1; k <= 10000; ++k) draws.push_back(sample_airtimes(ch, k).observation[0]);
        for (double x : draws) {
            CHECK(x >= 1e-4);
            CHECK(x <= 1e-3);
        }
        const double sigma = (1e-3 - 1e-4) / std::sqrt(12.0) / std::sqrt(10000.0);
        CHECK(std::abs(mean(draws) - 5.5e-4) <= 3 * sigma);
    }
    SUBCASE("invalid ranges") {
        CHECK(error_kind([] { sample_airtimes(uniform_channel(1, {0.0, 1e-3}, {1e-3, 1e-3}, 1), 1); }) ==
              ErrorKind::Configuration);
        CHECK(error_kind([] { sample_airtimes(uniform_channel(1, {2e-3, 1e-3}, {1e-3, 1e-3}, 1), 1); }) ==
              ErrorKind::Configuration);
        CHECK(error_kind([] { sample_airtimes(uniform_channel(1, {1e-3, 2e-3}, {-1.0, 1e-3}, 1), 1); }) ==
              ErrorKind::Configuration);
    }
}

TEST_CASE("airtime traces") {
    const std::string text = "# O1,O2,A1\n0.001,0.002,0.003\n\n0.004, 0.005 ,0.006\n";
    auto trace = AirtimeTrace::parse(text, 2, 1);
    CHECK(trace.cycles() == 2);
    CHECK(trace.at(2).observation == std::vector<double>{0.004, 0.005});
    CHECK(trace.at(2).action == std::vector<double>{0.006});
    CHECK(error_kind([&] { (void)trace.at(3); }) == ErrorKind::Configuration);
    CHECK(error_kind([] { AirtimeTrace::parse("0.001,0.002\n", 2, 1); }) == ErrorKind::Configuration);
    CHECK(error_kind([] { AirtimeTrace::parse("0.001,abc,0.1\n", 2, 1); }) == ErrorKind::Configuration);

    ChannelConfig ch;
    ch.trace = trace;
    CHECK(sample_airtimes(ch, 1).observation == std::vector<double>{0.001, 0.002});
}

TEST_CASE("unit_uniform and engines") {
    auto a = make_engine(3, Stream::Channel, 5);
    auto b = make_engine(3, Stream::Channel, 5);
    auto c = make_engine(3, Stream::ProcessNoise, 5);
    const double ua = unit_uniform(a);
    CHECK(ua == unit_uniform(b));
    CHECK(ua != unit_uniform(c));
    for (int i = 0; i < 1000; ++i) {
        const double u = unit_uniform(a);
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("sample_gaussian") {
    std::mt19937_64 rng(1);
    CHECK(sample_gaussian(Matrix::Zero(3, 3), rng).isZero(0.0));
    Matrix bad = Matrix::Identity(2, 2);
    bad(0, 0) = -1.0;
    CHECK(error_kind([&] { sample_gaussian(bad, rng); }) == ErrorKind::Numeric);

    // Rank-deficient covariance: draws stay in the range.
    Matrix rank1(2, 2);
    rank1 << 1, 1, 1, 1;
    for (int i = 0; i < 20; ++i) {
        auto x = sample_gaussian(rank1, rng);
        CHECK(std::abs(x(0) - x(1)) < 1e-5);
    }
}

TEST_CASE("step_true_state") {
    const auto model = testing::plant_model(config::observation_c1(), config::noise_from_bits("000000"));
    const Vector x = Eigen::Vector3d(1.0, -0.5, 0.2);
    const auto zero_input = kalman::InputSchedule::zero(1);

    SUBCASE("noise-free") {
        SystemModel quiet(config::plant_a(), config::plant_b(), config::observation_c1(), Matrix::Zero(3, 3),
                          config::noise_from_bits("000000"), 0.01, std::vector<double>(6, 0.01));
        std::mt19937_64 rng(1);
        CHECK(step_true_state(quiet, x, zero_input, 0.003, 0.011, rng) ==
              dynamics::transition_phi(quiet, 0.003, 0.011) * x);
    }
    SUBCASE("variance of a random walk") {
        const auto walk = testing::scalar_model(0.0, 2.0, 1.0);
        std::mt19937_64 rng(8);
        std::vector<double> inc;
        Vector state = Vector::Zero(1);
        for (int i = 0; i < 10000; ++i) {
            Vector next = step_true_state(walk, state, zero_input, 0.0, 0.05, rng);
            inc.push_back(next(0) - state(0));
            state = next;
        }
        double var = 0.0;
        for (double d : inc) var += d * d;
        var /= static_cast<double>(inc.size());
        CHECK(var == doctest::Approx(2.0 * 0.05).epsilon(0.05));
    }
    SUBCASE("deterministic for a seed") {
        std::mt19937_64 a(4), b(4);
        CHECK(step_true_state(model, x, zero_input, 0.0, 0.02, a) == step_true_state(model, x, zero_input, 0.0, 0.02, b));
    }
}

TEST_CASE("bridge_state follows the Brownian bridge law") {
    // a = 0: x(u) | x(s), x(t) ~ N(x_s + (u-s)/(t-s) (x_t - x_s), q (u-s)(t-u)/(t-s)).
    const auto walk = testing::scalar_model(0.0, 3.0, 1.0);
    const auto zero_input = kalman::InputSchedule::zero(1);
    std::mt19937_64 rng(12);
    const double s = 0.0, u = 0.3, t = 1.0;
    const Vector xs = Vector::Constant(1, 1.0), xt = Vector::Constant(1, -2.0);
    std::vector<double> draws;
    for (int i = 0; i < 20000; ++i) draws.push_back(bridge_state(walk, zero_input, s, xs, u, t, xt, rng)(0));
    const double m = mean(draws);
    double var = 0.0;
    for (double d : draws) var += (d - m) * (d - m);
    var /= static_cast<double>(draws.size() - 1);
    const double want_var = 3.0 * 0.3 * 0.7;
    CHECK(std::abs(m - (1.0 + 0.3 * -3.0)) < 4 * std::sqrt(want_var / 20000.0));
    CHECK(var == doctest::Approx(want_var).epsilon(0.05));

    CHECK(bridge_state(walk, zero_input, s, xs, t, t, xt, rng) == xt);
    CHECK(error_kind([&] { bridge_state(walk, zero_input, s, xs, 1.5, t, xt, rng); }) == ErrorKind::Ordering);
}

TEST_CASE("policies") {
    CHECK(parse_policy("bnb") == Policy::Bnb);
    CHECK(parse_policy("greedy") == Policy::Greedy);
    CHECK(parse_policy("all") == Policy::All);
    CHECK(parse_policy("none") == Policy::None);
    CHECK(error_kind([] { parse_policy("best"); }) == ErrorKind::Configuration);
    CHECK(std::string(to_string(Policy::Greedy)) == "greedy");
}

TEST_CASE("a single predict-only cycle") {
    const auto model = testing::plant_model(config::observation_c2(), config::noise_from_bits("000000"));
    SimulationOptions opt;
    opt.policy = Policy::None;
    opt.cycles = 1;
    opt.initial_cov = Matrix::Identity(3, 3);
    opt.initial_state = Vector(Eigen::Vector3d(0.4, 0.1, -0.3));
    auto logs = run_simulation(model, uniform_channel(6, {1e-4, 5e-4}, {1e-3, 2e-3}, 2), opt);
    REQUIRE(logs.size() == 1);
    CHECK(logs[0].seq.empty());
    CHECK(logs[0].estimate.isZero(0.0));
    CHECK(logs[0].mse_pred == doctest::Approx(kalman::boundary_predict(model, opt.initial_cov, 0.0, 0.01).trace()).epsilon(1e-12));
    CHECK(logs[0].sq_err == doctest::Approx(logs[0].true_state.squaredNorm()).epsilon(1e-15));
}

TEST_CASE("closed-loop logs are consistent") {
    const auto model = testing::plant_model(config::observation_c2(), config::noise_from_bits("010000"),
                                            {0.01, 0.003, 0.007, 0.01, 0.025, 0.004});
    const auto channel = uniform_channel(6, {1.5e-3, 2.5e-3}, {1e-3, 3e-3}, 77);
    SimulationOptions opt;
    opt.policy = Policy::Bnb;
    opt.cycles = 100;
    opt.initial_cov = Matrix::Identity(3, 3);
    auto logs = run_simulation(model, channel, opt);
    REQUIRE(logs.size() == 100);
    for (const auto& log : logs) {
        std::vector<double> offsets, airtimes;
        const double start = static_cast<double>(log.cycle - 1) * 0.01;
        for (const auto& c : log.candidates) {
            offsets.push_back(std::max(0.0, c.timestamp - start));
            airtimes.push_back(c.airtime);
        }
        const double d = oracle::end_of_harvest(offsets, airtimes, log.seq.indices);
        CHECK(log.end_of_harvest == doctest::Approx(d).epsilon(1e-15));
        if (!log.forced_empty) CHECK(d < log.budget);

        std::vector<kalman::TimedObservation> timed;
        for (auto i : log.seq.indices) timed.push_back({log.candidates[i].observer, log.candidates[i].timestamp});
        const double recomputed =
            kalman::sequence_mse(model, log.prior_cov, log.prior_time, timed, static_cast<double>(log.cycle) * 0.01).mse;
        CHECK(std::abs(recomputed - log.mse_pred) <= 1e-12 * log.mse_pred);
        CHECK(log.mse_pred >= 0.0);
        CHECK(log.chosen_observers.size() == log.seq.size());
    }

    SUBCASE("reproducible") {
        auto again = run_simulation(model, channel, opt);
        for (std::size_t i = 0; i < logs.size(); ++i) {
            CHECK(again[i].seq == logs[i].seq);
            CHECK(again[i].true_state == logs[i].true_state);
            CHECK(again[i].estimate == logs[i].estimate);
            CHECK(again[i].mse_pred == logs[i].mse_pred);
        }
    }
    SUBCASE("every policy sees the same world") {
        for (auto p : {Policy::Greedy, Policy::All, Policy::None}) {
            auto other_opt = opt;
            other_opt.policy = p;
            auto other = run_simulation(model, channel, other_opt);
            for (std::size_t i = 0; i < logs.size(); ++i) CHECK(other[i].true_state == logs[i].true_state);
        }
    }
}

TEST_CASE("bnb never loses to greedy on the same cycle") {
    const auto model = testing::plant_model(config::observation_c2(), config::noise_from_bits("100100"));
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        SimulationOptions opt;
        opt.cycles = 60;
        opt.initial_cov = Matrix::Identity(3, 3);
        std::size_t checked = 0;
        opt.on_cycle = [&](const osp::CycleContext& ctx, const osp::ScheduleEvaluation& best) {
            const auto greedy = osp::greedy_search(ctx, model);
            CHECK(best.mse <= greedy.mse * (1.0 + osp::kTieTolerance));
            ++checked;
        };
        run_simulation(model, uniform_channel(6, {1.5e-3, 3e-3}, {1e-3, 2e-3}, seed), opt);
        CHECK(checked == 60);
    }
}

TEST_CASE("filter is calibrated over a long run") {
    const auto model = testing::plant_model(config::observation_c2(), config::noise_from_bits("000000"),
                                            {0.01, 0.003, 0.007, 0.01, 0.025, 0.004});
    SimulationOptions opt;
    opt.policy = Policy::All;
    opt.cycles = 600;
    opt.initial_cov = Matrix::Identity(3, 3);
    auto logs = run_simulation(model, uniform_channel(6, {1e-4, 5e-4}, {1e-3, 2e-3}, 3), opt);
    double err = 0.0, pred = 0.0;
    for (const auto& l : logs) {
        err += l.sq_err;
        pred += l.mse_pred;
    }
    CHECK(err / pred >= 0.5);
    CHECK(err / pred <= 2.0);
}

TEST_CASE("constant input is tracked by the estimate") {
    const auto model = testing::plant_model(config::observation_c1(), config::noise_from_bits("000000"));
    SimulationOptions opt;
    opt.policy = Policy::All;
    opt.cycles = 200;
    opt.initial_cov = 1e-2 * Matrix::Identity(3, 3);
    opt.inputs = kalman::InputSchedule::constant(Vector::Constant(1, 5.0));
    auto logs = run_simulation(model, uniform_channel(6, {1e-4, 5e-4}, {1e-3, 2e-3}, 6), opt);
    double err = 0.0, pred = 0.0;
    for (const auto& l : logs) {
        err += l.sq_err;
        pred += l.mse_pred;
    }
    CHECK(err / pred >= 0.5);
    CHECK(err / pred <= 2.0);
    // The forced response is large compared with the error.
    CHECK(logs.back().true_state.norm() > 10 * std::sqrt(logs.back().mse_pred));
}

TEST_CASE("selection_stats") {
    const auto model = testing::plant_model(config::observation_c1(), config::noise_from_bits("000000"));
    const auto channel = uniform_channel(6, {1e-4, 5e-4}, {1e-3, 2e-3}, 1);
    SimulationOptions opt;
    opt.cycles = 20;
    opt.initial_cov = Matrix::Identity(3, 3);
    opt.policy = Policy::All;
    for (double f : selection_stats(run_simulation(model, channel, opt), 6)) CHECK(f == 1.0);
    opt.policy = Policy::None;
    for (double f : selection_stats(run_simulation(model, channel, opt), 6)) CHECK(f == 0.0);
    CHECK(error_kind([] { selection_stats({}, 3); }) == ErrorKind::Domain);
}

TEST_CASE("run_simulation argument checks") {
    const auto model = testing::plant_model(config::observation_c1(), config::noise_from_bits("000000"));
    SimulationOptions opt;
    opt.initial_cov = Matrix::Identity(3, 3);
    opt.cycles = 0;
    CHECK(error_kind([&] { run_simulation(model, uniform_channel(6, {1e-4, 5e-4}, {1e-3, 2e-3}, 1), opt); }) ==
          ErrorKind::Configuration);
    opt.cycles = 1;
    CHECK(error_kind([&] { run_simulation(model, uniform_channel(5, {1e-4, 5e-4}, {1e-3, 2e-3}, 1), opt); }) ==
          ErrorKind::Configuration);
    opt.initial_cov = Matrix::Identity(2, 2);
    CHECK(error_kind([&] { run_simulation(model, uniform_channel(6, {1e-4, 5e-4}, {1e-3, 2e-3}, 1), opt); }) ==
          ErrorKind::Dimension);
}
