#include "ospkit/channel.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "ospkit/errors.hpp"

namespace ospkit::sim {

AirtimeTrace AirtimeTrace::parse(const std::string& text, std::size_t observers, std::size_t agents) {
    AirtimeTrace trace;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;

        std::vector<double> values;
        std::istringstream fields(line);
        std::string field;
        while (std::getline(fields, field, ',')) {
            try {
                std::size_t used = 0;
                const double v = std::stod(field, &used);
                if (field.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(field);
                values.push_back(v);
            } catch (const std::exception&) {
                fail(ErrorKind::Configuration, "airtime trace line " + std::to_string(line_no) + ": '" + field +
                                                   "' is not a number");
            }
        }
        if (values.size() != observers + agents) {
            fail(ErrorKind::Configuration, "airtime trace line " + std::to_string(line_no) + ": expected " +
                                               std::to_string(observers + agents) + " values, got " +
                                               std::to_string(values.size()));
        }
        for (std::size_t i = 0; i < values.size(); ++i) {
            const bool is_obs = i < observers;
            if (!std::isfinite(values[i]) || (is_obs ? !(values[i] > 0.0) : !(values[i] >= 0.0))) {
                fail(ErrorKind::Configuration, "airtime trace line " + std::to_string(line_no) + ": value " +
                                                   std::to_string(i + 1) + " must be " +
                                                   (is_obs ? "> 0" : ">= 0"));
            }
        }
        AirtimeDraw row;
        row.observation.assign(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(observers));
        row.action.assign(values.begin() + static_cast<std::ptrdiff_t>(observers), values.end());
        trace.rows_.push_back(std::move(row));
    }
    return trace;
}

AirtimeTrace AirtimeTrace::load(const std::filesystem::path& path, std::size_t observers, std::size_t agents) {
    std::ifstream file(path);
    if (!file) {
        fail(ErrorKind::Configuration, "cannot open airtime trace " + path.string());
    }
    std::ostringstream buffer;
    buffer << file.rdbuf();
    return parse(buffer.str(), observers, agents);
}

const AirtimeDraw& AirtimeTrace::at(long long cycle) const {
    if (cycle < 1 || static_cast<std::size_t>(cycle) > rows_.size()) {
        fail(ErrorKind::Configuration, "airtime trace has " + std::to_string(rows_.size()) +
                                           " cycles, cycle " + std::to_string(cycle) + " requested");
    }
    return rows_[static_cast<std::size_t>(cycle - 1)];
}

void ChannelConfig::validate() const {
    if (trace) return;
    auto check = [](const std::vector<UniformRange>& ranges, const char* what) {
        for (std::size_t i = 0; i < ranges.size(); ++i) {
            const auto& r = ranges[i];
            if (!(r.lo > 0.0) || !(r.lo <= r.hi) || !std::isfinite(r.hi)) {
                fail(ErrorKind::Configuration, std::string(what) + " airtime range " + std::to_string(i) +
                                                   " must satisfy 0 < lo <= hi");
            }
        }
    };
    check(observation, "observation");
    check(action, "action");
}

std::size_t ChannelConfig::agent_count() const { return action.size(); }

std::mt19937_64 make_engine(std::uint64_t seed, Stream stream, std::uint64_t salt) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(salt),
                      static_cast<std::uint32_t>(salt >> 32)};
    return std::mt19937_64(seq);
}

double unit_uniform(std::mt19937_64& engine) { return static_cast<double>(engine() >> 11) * 0x1.0p-53; }

AirtimeDraw sample_airtimes(const ChannelConfig& cfg, long long cycle) {
    if (cfg.trace) {
        return cfg.trace->at(cycle);
    }
    cfg.validate();
    auto engine = make_engine(cfg.seed, Stream::Channel, static_cast<std::uint64_t>(cycle));
    auto draw = [&engine](const UniformRange& r) {
        if (r.lo == r.hi) {
            engine();  // keep the stream position independent of degeneracy
            return r.lo;
        }
        return r.lo + (r.hi - r.lo) * unit_uniform(engine);
    };
    AirtimeDraw out;
    out.observation.reserve(cfg.observation.size());
    for (const auto& r : cfg.observation) out.observation.push_back(draw(r));
    out.action.reserve(cfg.action.size());
    for (const auto& r : cfg.action) out.action.push_back(draw(r));
    return out;
}

}  // namespace ospkit::sim
