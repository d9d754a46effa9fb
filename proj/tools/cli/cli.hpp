#pragma once

#include <iosfwd>
#include <stop_token>
#include <string>
#include <vector>

#include "promptassist/config.hpp"

namespace promptassist::cli {

enum ExitCode : int {
    kOk = 0,
    kUsage = 2,
    kExhausted = 3,
    kBackend = 4,
};

struct CliEnvironment {
    std::ostream& out;
    std::ostream& err;
    std::istream& in;
    /// Defaults to the process environment.
    EnvLookup env;
    /// Interrupt: cancels a generation in flight and stops `serve`.
    std::stop_token cancel;
};

/// Runs one command line (without the program name) and returns the exit
/// code. Never throws.
int run_cli(const std::vector<std::string>& args, CliEnvironment io);

}  // namespace promptassist::cli
