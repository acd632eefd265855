#include "ospkit/cli.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "ospkit/config.hpp"
#include "ospkit/errors.hpp"
#include "ospkit/kalman.hpp"
#include "ospkit/scheduler.hpp"

namespace ospkit::cli {
namespace {

// OSPKIT_LOG: off|error|info|debug (or 0..3). Diagnostics go to stderr.
enum class LogLevel { Off = 0, Error = 1, Info = 2, Debug = 3 };

LogLevel log_level() {
    const char* env = std::getenv("OSPKIT_LOG");
    if (!env) return LogLevel::Error;
    const std::string v(env);
    if (v == "off" || v == "0") return LogLevel::Off;
    if (v == "info" || v == "2") return LogLevel::Info;
    if (v == "debug" || v == "3") return LogLevel::Debug;
    return LogLevel::Error;
}

class Log {
public:
    explicit Log(std::ostream& err) : err_(err), level_(log_level()) {}
    void error(const std::string& msg) const { emit(LogLevel::Error, "error", msg); }
    void info(const std::string& msg) const { emit(LogLevel::Info, "info", msg); }
    void debug(const std::string& msg) const { emit(LogLevel::Debug, "debug", msg); }

private:
    void emit(LogLevel at, const char* tag, const std::string& msg) const {
        if (static_cast<int>(level_) >= static_cast<int>(at)) err_ << "ospkit " << tag << ": " << msg << '\n';
    }
    std::ostream& err_;
    LogLevel level_;
};

std::string fmt17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_short(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

int exit_code_for(const Error& e) { return e.kind() == ErrorKind::Numeric ? kNumericError : kConfigError; }

struct SimulateArgs {
    std::string config;
    std::optional<std::string> policy;
    std::optional<long long> cycles;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    int reps = 1;
};

std::vector<sim::CycleLog> simulate_once(const config::ExperimentConfig& cfg, sim::Policy policy, long long cycles,
                                         std::uint64_t seed,
                                         std::function<void(const osp::CycleContext&, const osp::ScheduleEvaluation&)>
                                             hook = {}) {
    auto channel = cfg.channel;
    channel.seed = seed;
    sim::SimulationOptions opts;
    opts.policy = policy;
    opts.cycles = cycles;
    const auto dim = static_cast<Eigen::Index>(cfg.model.state_dim());
    opts.initial_cov = cfg.initial_cov_scale * Matrix::Identity(dim, dim);
    if (cfg.constant_input) opts.inputs = kalman::InputSchedule::constant(*cfg.constant_input);
    opts.on_cycle = std::move(hook);
    return sim::run_simulation(cfg.model, channel, opts);
}

void print_summary(std::ostream& out, const std::vector<sim::CycleLog>& logs, std::size_t observers) {
    double mse = 0.0;
    double err = 0.0;
    std::size_t forced = 0;
    for (const auto& log : logs) {
        mse += log.mse_pred;
        err += log.sq_err;
        forced += log.forced_empty ? 1 : 0;
    }
    const double count = static_cast<double>(logs.size());
    out << "cycles            " << logs.size() << '\n';
    out << "policy            " << logs.front().policy << '\n';
    out << "mean mse_pred     " << fmt_short(mse / count) << '\n';
    out << "mean sq_err       " << fmt_short(err / count) << '\n';
    out << "forced empty      " << forced << '\n';
    out << "observer  selected\n";
    const auto freq = sim::selection_stats(logs, observers);
    for (std::size_t n = 0; n < freq.size(); ++n) {
        char line[64];
        std::snprintf(line, sizeof line, "%8zu  %8.3f\n", n, freq[n]);
        out << line;
    }
}

int cmd_simulate(const SimulateArgs& args, std::ostream& out, const Log& log) {
    auto cfg = config::load_config(args.config);
    const auto policy = args.policy ? sim::parse_policy(*args.policy) : cfg.policy;
    const long long cycles = args.cycles.value_or(cfg.cycles);
    const std::uint64_t seed = args.seed.value_or(cfg.channel.seed);
    if (args.reps < 1) fail(ErrorKind::Configuration, "--reps must be >= 1");

    std::vector<std::future<std::vector<sim::CycleLog>>> runs;
    for (int rep = 0; rep < args.reps; ++rep) {
        runs.push_back(std::async(std::launch::async, [&cfg, policy, cycles, seed, rep] {
            return simulate_once(cfg, policy, cycles, seed + static_cast<std::uint64_t>(rep));
        }));
    }
    std::vector<sim::CycleLog> logs;
    for (auto& run : runs) {
        auto part = run.get();
        logs.insert(logs.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
    log.info("simulated " + std::to_string(logs.size()) + " cycles");

    const auto csv_path = args.out ? args.out : cfg.csv_path;
    if (csv_path) {
        std::ofstream file(*csv_path, std::ios::binary);
        if (!file) fail(ErrorKind::Configuration, "cannot write " + *csv_path);
        write_csv(file, logs, cfg.model.state_dim());
        log.info("wrote " + *csv_path);
    }
    print_summary(out, logs, cfg.model.observer_count());
    return kOk;
}

int cmd_schedule(const std::string& path, const std::string& policy, std::ostream& out) {
    const auto inst = config::load_cycle(path);
    osp::ScheduleEvaluation eval;
    if (policy == "oracle") {
        eval = osp::exhaustive_oracle(inst.context, inst.model);
    } else {
        eval = sim::apply_policy(sim::parse_policy(policy), inst.context, inst.model);
    }
    out << "candidates     " << inst.context.size() << '\n';
    out << "budget         " << fmt17(inst.context.budget()) << '\n';
    out << "sequence       " << eval.seq.to_string() << '\n';
    out << "observers      ";
    if (eval.seq.empty()) out << '-';
    for (std::size_t i = 0; i < eval.seq.size(); ++i) {
        out << (i ? "+" : "") << inst.context.candidates()[eval.seq.indices[i]].observer;
    }
    out << '\n';
    out << "end_of_harvest " << fmt17(eval.end_of_harvest) << '\n';
    out << "mse            " << fmt17(eval.mse) << '\n';
    out << "nodes_visited  " << eval.nodes_visited << '\n';
    if (eval.forced_empty) out << "forced_empty   yes\n";
    return kOk;
}

int cmd_oracle(const std::string& path, std::optional<long long> cycles, std::optional<std::uint64_t> seed,
               std::ostream& out, const Log& log) {
    auto cfg = config::load_config(path);
    std::size_t checked = 0;
    std::size_t mismatches = 0;
    long long cycle = 0;
    auto hook = [&](const osp::CycleContext& ctx, const osp::ScheduleEvaluation& bnb) {
        ++cycle;
        if (ctx.size() > osp::kExhaustiveLimit) {
            log.info("cycle " + std::to_string(cycle) + " skipped: too many candidates for exhaustive search");
            return;
        }
        const auto truth = osp::exhaustive_oracle(ctx, cfg.model);
        ++checked;
        const double rel = std::abs(bnb.mse - truth.mse) / std::max(std::abs(truth.mse), 1e-300);
        if (!(bnb.seq == truth.seq) || rel > 1e-9) {
            ++mismatches;
            out << "mismatch cycle " << cycle << ": bnb " << bnb.seq.to_string() << " mse " << fmt17(bnb.mse)
                << ", exhaustive " << truth.seq.to_string() << " mse " << fmt17(truth.mse) << '\n';
        } else {
            log.debug("cycle " + std::to_string(cycle) + " agrees: " + bnb.seq.to_string());
        }
    };
    simulate_once(cfg, sim::Policy::Bnb, cycles.value_or(cfg.cycles), seed.value_or(cfg.channel.seed), hook);
    out << "checked " << checked << " cycles, " << mismatches << " mismatches\n";
    return mismatches == 0 ? kOk : kOracleMismatch;
}

int cmd_timestamps(const std::optional<std::string>& path, std::optional<double> period,
                   std::optional<double> observer_period, long long cycles, std::ostream& out) {
    double t = 0.0;
    std::vector<double> periods;
    if (path) {
        const auto cfg = config::load_config(*path);
        t = cfg.model.period();
        periods = cfg.model.observer_periods();
    } else if (period && observer_period) {
        t = *period;
        periods = {*observer_period};
    } else {
        fail(ErrorKind::Configuration, "timestamps needs --config, or both --period and --observer-period");
    }
    if (cycles < 1) fail(ErrorKind::Configuration, "--cycles must be >= 1");
    out << "cycle,observer,timestamp\n";
    for (long long k = 1; k <= cycles; ++k) {
        for (std::size_t n = 0; n < periods.size(); ++n) {
            const auto stamp = kalman::first_obs_timestamp(t, periods[n], k);
            out << k << ',' << n << ',' << (stamp ? fmt_short(*stamp) : std::string("-")) << '\n';
        }
    }
    return kOk;
}

int cmd_preset(const std::string& name, bool list, const std::optional<std::string>& out_path, std::ostream& out) {
    if (list) {
        for (const auto& n : config::preset_names()) out << n << '\n';
        return kOk;
    }
    const auto text = config::to_json(config::make_preset(name));
    if (out_path) {
        std::ofstream file(*out_path, std::ios::binary);
        if (!file) fail(ErrorKind::Configuration, "cannot write " + *out_path);
        file << text;
    } else {
        out << text;
    }
    return kOk;
}

}  // namespace

std::string csv_header(std::size_t state_dim) {
    std::string h = "cycle,policy,seq,d,budget,mse_pred,sq_err,nodes_visited";
    for (std::size_t i = 0; i < state_dim; ++i) h += ",x" + std::to_string(i);
    for (std::size_t i = 0; i < state_dim; ++i) h += ",xhat" + std::to_string(i);
    return h;
}

void write_csv(std::ostream& os, const std::vector<sim::CycleLog>& logs, std::size_t state_dim, bool header) {
    if (header) os << csv_header(state_dim) << '\n';
    for (const auto& log : logs) {
        os << log.cycle << ',' << log.policy << ',' << log.seq.to_string() << ',' << fmt17(log.end_of_harvest) << ','
           << fmt17(log.budget) << ',' << fmt17(log.mse_pred) << ',' << fmt17(log.sq_err) << ','
           << log.nodes_visited;
        for (Eigen::Index i = 0; i < log.true_state.size(); ++i) os << ',' << fmt17(log.true_state(i));
        for (Eigen::Index i = 0; i < log.estimate.size(); ++i) os << ',' << fmt17(log.estimate(i));
        os << '\n';
    }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    const Log log(err);
    CLI::App app{"Observer selection for deadline-constrained state estimation", "ospkit"};
    app.require_subcommand(1);

    SimulateArgs sim_args;
    auto* simulate = app.add_subcommand("simulate", "Run the closed-loop simulation and write a CSV log");
    simulate->add_option("--config", sim_args.config, "Experiment config (JSON)")->required();
    simulate->add_option("--policy", sim_args.policy, "bnb, greedy, all or none");
    simulate->add_option("--cycles", sim_args.cycles, "Number of decision cycles");
    simulate->add_option("--seed", sim_args.seed, "Random seed");
    simulate->add_option("--out", sim_args.out, "CSV output path");
    simulate->add_option("--reps", sim_args.reps, "Repetitions with seeds seed, seed+1, ...");

    std::string cycle_path;
    std::string schedule_policy = "bnb";
    auto* schedule = app.add_subcommand("schedule", "Solve one decision cycle read from a JSON file");
    schedule->add_option("--config", cycle_path, "Cycle file (JSON)")->required();
    schedule->add_option("--policy", schedule_policy, "bnb, greedy, all, none or oracle");

    std::string oracle_config;
    std::optional<long long> oracle_cycles;
    std::optional<std::uint64_t> oracle_seed;
    auto* oracle = app.add_subcommand("oracle", "Cross-check branch-and-bound against exhaustive search");
    oracle->add_option("--config", oracle_config, "Experiment config (JSON)")->required();
    oracle->add_option("--cycles", oracle_cycles, "Number of decision cycles");
    oracle->add_option("--seed", oracle_seed, "Random seed");

    std::optional<std::string> ts_config;
    std::optional<double> ts_period;
    std::optional<double> ts_observer_period;
    long long ts_cycles = 10;
    auto* timestamps = app.add_subcommand("timestamps", "Tabulate representative observation timestamps");
    timestamps->add_option("--config", ts_config, "Experiment config (JSON)");
    timestamps->add_option("--period", ts_period, "Decision period T");
    timestamps->add_option("--observer-period", ts_observer_period, "Observation period T_n");
    timestamps->add_option("--cycles", ts_cycles, "Number of cycles to list");

    std::string preset_name;
    bool preset_list = false;
    std::optional<std::string> preset_out;
    auto* preset = app.add_subcommand("preset", "Print a shipped scenario config");
    preset->add_option("name", preset_name, "Preset name");
    preset->add_flag("--list", preset_list, "List preset names");
    preset->add_option("--out", preset_out, "Write to a file instead of stdout");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "ospkit: " << e.what() << "\n\n" << app.help();
        return kConfigError;
    }

    try {
        if (*simulate) return cmd_simulate(sim_args, out, log);
        if (*schedule) return cmd_schedule(cycle_path, schedule_policy, out);
        if (*oracle) return cmd_oracle(oracle_config, oracle_cycles, oracle_seed, out, log);
        if (*timestamps) return cmd_timestamps(ts_config, ts_period, ts_observer_period, ts_cycles, out);
        if (*preset) {
            if (!preset_list && preset_name.empty()) fail(ErrorKind::Configuration, "preset: give a name or --list");
            return cmd_preset(preset_name, preset_list, preset_out, out);
        }
    } catch (const Error& e) {
        log.error(e.what());
        if (log_level() == LogLevel::Off) err << "ospkit: " << to_string(e.kind()) << '\n';
        return exit_code_for(e);
    } catch (const std::exception& e) {
        log.error(e.what());
        return kNumericError;
    }
    return kConfigError;
}

}  // namespace ospkit::cli
