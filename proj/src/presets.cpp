#include <algorithm>

#include "ospkit/config.hpp"
#include "ospkit/errors.hpp"

namespace ospkit::config {

Matrix plant_a() {
    Matrix a(3, 3);
    a << -10.0, 1.0, 0.0,
         -0.02, -2.0, 156.3,
          0.0, 0.0, -1000.0;
    return a;
}

Matrix plant_b() {
    Matrix b(3, 1);
    b << 0.0, 0.0, 64.0;
    return b;
}

Matrix observation_c1() {
    Matrix c(6, 3);
    c << 1, 0, 0,
         1, 0, 0,
         0, 1, 0,
         0, 1, 0,
         0, 0, 1,
         0, 0, 1;
    return c;
}

Matrix observation_c2() {
    Matrix c(6, 3);
    c << -0.684, 0.763, 0.144,
         -0.684, 0.763, 0.144,
          0.504, 0.765, 0.532,
          0.504, 0.765, 0.532,
          2.180, -0.554, -0.632,
          2.180, -0.554, -0.632;
    return c;
}

Matrix noise_from_bits(const std::string& bits) {
    if (bits.empty() || bits.find_first_not_of("01") != std::string::npos) {
        fail(ErrorKind::Configuration, "noise bitstring must be non-empty and contain only 0 and 1, got '" + bits + "'");
    }
    const auto n = static_cast<Eigen::Index>(bits.size());
    Matrix r = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        r(i, i) = bits[static_cast<std::size_t>(i)] == '1' ? kHighNoise : kLowNoise;
    }
    return r;
}

namespace {

Matrix process_noise() { return kLowNoise * Matrix::Identity(3, 3); }

Matrix rows(const Matrix& c, std::initializer_list<Eigen::Index> picks) {
    Matrix out(static_cast<Eigen::Index>(picks.size()), c.cols());
    Eigen::Index i = 0;
    for (auto p : picks) out.row(i++) = c.row(p);
    return out;
}

ExperimentConfig build(std::string name, Matrix c, Matrix r, std::vector<double> periods,
                       std::vector<sim::UniformRange> obs, std::vector<sim::UniformRange> act, long long cycles) {
    SystemModel model(plant_a(), plant_b(), std::move(c), process_noise(), std::move(r), kDecisionPeriod,
                      std::move(periods));
    sim::ChannelConfig channel;
    channel.observation = std::move(obs);
    channel.action = std::move(act);
    channel.seed = 1;
    const std::size_t agents = channel.action.size();
    return ExperimentConfig{std::move(name), std::move(model), std::move(channel), std::nullopt, agents,
                            sim::Policy::Bnb, cycles, 1.0, std::nullopt, std::nullopt};
}

// Single observer (first row of C2, low noise) sampling every `observer_period`
// over a channel with plenty of room. The run starts near steady state and is
// long enough that the realized error average is not dominated by a few
// unlucky stretches.
ExperimentConfig rate_preset(std::string name, double observer_period) {
    auto cfg = build(std::move(name), rows(observation_c2(), {0}), noise_from_bits("0"), {observer_period},
                     {{1e-4, 5e-4}}, {{1e-3, 2e-3}}, 5000);
    cfg.initial_cov_scale = 1e-2;
    return cfg;
}

// Six observers (C2) sampling at the decision rate. Each observation takes
// 1.8-2.0 ms and one action takes 1.5 ms, so B = 8.5 ms: any four fit
// (<= 8 ms) and no five do (>= 9 ms).
ExperimentConfig blackout_preset(std::string name, const std::string& bits) {
    return build(std::move(name), observation_c2(), noise_from_bits(bits), std::vector<double>(6, kDecisionPeriod),
                 std::vector<sim::UniformRange>(6, {1.8e-3, 2.0e-3}), {{1.5e-3, 1.5e-3}}, 100);
}

// Three distinct observers (C2 rows 0, 2, 4) sampling at the cycle start.
// Observer 0 comes first but needs 7.2-7.5 ms of air; with B = 8.5 ms
// nothing fits behind it, so first-come-first-served harvests it alone while
// the optimum takes the two short ones.
ExperimentConfig baseline_preset(std::string name, bool adversarial) {
    std::vector<sim::UniformRange> obs{{1.5e-3, 2.0e-3}, {1.5e-3, 2.0e-3}, {1.5e-3, 2.0e-3}};
    if (adversarial) obs[0] = {7.2e-3, 7.5e-3};
    return build(std::move(name), rows(observation_c2(), {0, 2, 4}), noise_from_bits("000"),
                 std::vector<double>(3, kDecisionPeriod), std::move(obs), {{1.5e-3, 1.5e-3}}, 100);
}

const std::vector<std::string> kPresetNames{
    "rate-fast",
    "rate-slow",
    "blackout-6of6",
    "blackout-6of6-100000",
    "blackout-6of6-001000",
    "blackout-6of6-000010",
    "unconstrained",
    "baseline-compare",
    "baseline-compare-benign",
};

}  // namespace

std::vector<std::string> preset_names() { return kPresetNames; }

ExperimentConfig make_preset(const std::string& name) {
    if (name == "rate-fast") return rate_preset(name, 0.003);
    if (name == "rate-slow") return rate_preset(name, 0.053);
    if (name == "blackout-6of6") return blackout_preset(name, "100000");
    const std::string blackout = "blackout-6of6-";
    if (name.rfind(blackout, 0) == 0 && std::find(kPresetNames.begin(), kPresetNames.end(), name) != kPresetNames.end()) {
        return blackout_preset(name, name.substr(blackout.size()));
    }
    if (name == "unconstrained") {
        // All six airtimes together stay under 3 ms; B >= 9.5 ms.
        return build(name, observation_c1(), noise_from_bits("000000"), std::vector<double>(6, kDecisionPeriod),
                     std::vector<sim::UniformRange>(6, {1e-4, 5e-4}), {{1e-4, 5e-4}}, 100);
    }
    if (name == "baseline-compare") return baseline_preset(name, true);
    if (name == "baseline-compare-benign") return baseline_preset(name, false);

    std::string known;
    for (const auto& n : kPresetNames) known += (known.empty() ? "" : ", ") + n;
    fail(ErrorKind::Configuration, "unknown preset '" + name + "' (known: " + known + ")");
}

}  // namespace ospkit::config
