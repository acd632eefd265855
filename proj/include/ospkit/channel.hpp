#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <vector>

namespace ospkit::sim {

struct UniformRange {
    double lo = 0.0;
    double hi = 0.0;
};

/// Airtimes in effect for one cycle: one per observer (indexed by observer id,
/// whether or not it samples this cycle) and one per agent.
struct AirtimeDraw {
    std::vector<double> observation;
    std::vector<double> action;
};

/// Pre-recorded airtimes, one line per cycle: O_1..O_N then A_1..A_M,
/// comma-separated. Blank lines and lines starting with '#' are skipped.
class AirtimeTrace {
public:
    static AirtimeTrace parse(const std::string& text, std::size_t observers, std::size_t agents);
    static AirtimeTrace load(const std::filesystem::path& path, std::size_t observers, std::size_t agents);

    [[nodiscard]] std::size_t cycles() const noexcept { return rows_.size(); }
    /// Cycle k >= 1. Throws Error{Configuration} past the end of the trace.
    [[nodiscard]] const AirtimeDraw& at(long long cycle) const;

private:
    std::vector<AirtimeDraw> rows_;
};

/// Block-fading channel: every link redraws its airtime once per cycle.
struct ChannelConfig {
    std::vector<UniformRange> observation;
    std::vector<UniformRange> action;
    std::uint64_t seed = 0;
    std::optional<AirtimeTrace> trace;

    /// Throws Error{Configuration} on lo <= 0 or lo > hi.
    void validate() const;
    [[nodiscard]] std::size_t agent_count() const;
};

/// Deterministic in (seed, cycle): the draw for cycle k does not depend on
/// which cycles were drawn before it.
AirtimeDraw sample_airtimes(const ChannelConfig& cfg, long long cycle);

/// Independent random streams, one per role.
enum class Stream : std::uint32_t {
    Channel = 1,
    ProcessNoise = 2,
    ObservationNoise = 3,
    InitialState = 4,
    Bridge = 5,
};

std::mt19937_64 make_engine(std::uint64_t seed, Stream stream, std::uint64_t salt = 0);

/// Uniform double in [0, 1) from the top 53 bits of one engine output.
double unit_uniform(std::mt19937_64& engine);

}  // namespace ospkit::sim
