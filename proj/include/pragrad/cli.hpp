#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pragrad/metrics.hpp"
#include "pragrad/remote.hpp"

namespace pragrad {

// Resolved run configuration. Precedence, highest first: command-line flags,
// environment variables, the JSON config file, built-in defaults.
struct Config {
  std::optional<std::filesystem::path> lexicon_path;
  std::optional<std::filesystem::path> keywords_path;
  EndpointConfig clean_endpoint;
  EndpointConfig generate_endpoint;
  double shift_threshold = 0.25;
  F1Averaging averaging = F1Averaging::kMacro;
  std::optional<std::filesystem::path> output_dir;
  std::size_t jobs = 1;
  std::uint64_t seed = 0;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

// Reads the process environment.
EnvLookup process_environment();

// Applies a JSON config object on top of `config`. Throws InputError on
// unknown keys or wrong types.
void apply_config_json(Config& config, const nlohmann::json& j, const std::string& source);
// Applies PRAGRAD_* variables on top of `config`.
void apply_environment(Config& config, const EnvLookup& env);

// JSON view of a config with auth tokens redacted.
nlohmann::ordered_json config_to_json(const Config& config);

struct RunContext {
  std::ostream& out;
  std::ostream& err;
  EnvLookup env;
};

// Runs one subcommand. Returns 0 on success, 1 on input errors or an unknown
// subcommand, 2 when a remote endpoint fails.
int run(const std::string& command, const std::vector<std::string>& args, const RunContext& ctx);

// argv[1] is the subcommand.
int run_main(int argc, const char* const* argv);

std::string usage();

}  // namespace pragrad
