#pragma once

// Command-line driver: simulate | segment | discover | analyze | synth.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gsindy/config.hpp"
#include "gsindy/error.hpp"

namespace gsindy::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumerical = 4;

/// 2 for usage and validation errors, 3 for data errors, 4 for numerical
/// failures.
int exit_code(ErrorKind kind) noexcept;

struct RunOptions {
  std::string command;
  std::optional<std::filesystem::path> config;
  std::filesystem::path out = "out";
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 1;
};

int cmd_simulate(const Config& cfg, const RunOptions& opts, std::ostream& log);
int cmd_synth(const Config& cfg, const RunOptions& opts, std::ostream& log);
int cmd_segment(const Config& cfg, const RunOptions& opts, std::ostream& log);
int cmd_discover(const Config& cfg, const RunOptions& opts, std::ostream& log);
int cmd_analyze(const Config& cfg, const RunOptions& opts, std::ostream& log);

/// Parses arguments (argv[0] is the program name), dispatches and maps
/// errors to exit codes. GESTURE_SINDY_JOBS supplies --jobs when absent.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

const char* version() noexcept;

}  // namespace gsindy::cli
