#pragma once

// Command implementations shared by the C API and the CLI. Each command
// reads its inputs, writes its outputs plus a JSON run manifest, and
// returns a printable summary. Failures raise irtcat::Error.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "irtcat/config.hpp"

namespace irtcat::commands {

inline constexpr const char* kToolVersion = "0.1.0";

struct Request {
  std::string command;     // synth | calibrate | simulate | exercise
  std::string subcommand;  // empty for calibrate
  std::optional<std::filesystem::path> config_path;
  std::optional<config::Json> resolved_config;  // wins over config_path
  /// Input files by role: bank, responses, events, labels, item_levels, truth.
  std::map<std::string, std::filesystem::path> inputs;
  std::filesystem::path out;
  std::optional<std::uint64_t> seed;
  unsigned workers = 1;
};

struct Result {
  std::string summary;
  std::filesystem::path manifest;
  std::vector<std::string> outputs;
};

Result run(const Request& request);

/// Re-executes the run recorded in `manifest`, writing to `out`. Input
/// digests must still match.
Result rerun(const std::filesystem::path& manifest, const std::filesystem::path& out,
             unsigned workers);

std::string sha256_file(const std::filesystem::path& path);

}  // namespace irtcat::commands
