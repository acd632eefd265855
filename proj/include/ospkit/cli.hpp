#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ospkit/simulation.hpp"

namespace ospkit::cli {

enum ExitCode : int {
    kOk = 0,
    kConfigError = 1,
    kNumericError = 2,
    kOracleMismatch = 3,
};

/// Entry point for the `ospkit` executable. Subcommands:
///   schedule    solve one cycle read from a JSON file
///   simulate    run the closed loop and write the CSV log
///   oracle      check branch-and-bound against exhaustive search every cycle
///   timestamps  tabulate representative-observation timestamps
///   preset      print a shipped scenario config
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Fixed CSV header for a model with `state_dim` states.
std::string csv_header(std::size_t state_dim);

/// One CSV row per log, LF endings, %.17g floats.
void write_csv(std::ostream& os, const std::vector<sim::CycleLog>& logs, std::size_t state_dim, bool header = true);

}  // namespace ospkit::cli
