#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "chemrep/app/config.hpp"

namespace chemrep::app {

/// Command-line overrides applied on top of the config file.
struct Invocation {
    std::optional<Command> command;
    std::optional<std::filesystem::path> config;
    std::optional<std::filesystem::path> out;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> mms_problem;
    bool check_gradient = false;
};

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int check_failed = 1;
inline constexpr int error = 2;
}  // namespace exit_code

/// Each command writes its outputs under cfg.out and returns 0, or 1 when one
/// of its checks failed. Module errors propagate as exceptions.
int simulate(const RunConfig& cfg, std::ostream& log);
int optimize(const RunConfig& cfg, bool check_gradient, std::ostream& log);
int verify(const RunConfig& cfg, std::ostream& log);
int mms(const RunConfig& cfg, std::ostream& log);
int seed(const RunConfig& cfg, std::ostream& log);

/// Loads the config, applies the overrides and runs the command. Errors are
/// reported as {"error": {"kind", "message"}} on `err` and in <out>/error.json,
/// with exit code 2.
int run(const Invocation& inv, std::ostream& log, std::ostream& err);

}  // namespace chemrep::app
