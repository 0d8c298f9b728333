#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "config.hpp"
#include "manifest.hpp"

namespace econoscale::cli {

/// Environment variable that overrides the configured seed (but not --seed).
inline constexpr const char* seed_env_var = "ECONOSCALE_SEED";

const std::vector<std::string>& command_names();

/// Full default configuration tree of a command.
json default_config(const std::string& command);

/// A fully resolved run: everything needed to reproduce its outputs.
struct Invocation {
  std::string command;
  json config;
  std::uint64_t seed = 0;
  std::string seed_source = "default";
  std::uint64_t replicas = 1;
  std::filesystem::path out;
};

/// Runs a resolved invocation and writes its outputs plus manifest.json (or
/// error.json). Returns the process exit code.
int execute(const Invocation& inv, std::ostream& out, std::ostream& err);

/// Re-runs the invocation recorded in a manifest into `out_dir`, then compares
/// the new outputs with the ones next to the manifest when those exist.
int replay(const std::filesystem::path& manifest, const std::filesystem::path& out_dir,
           std::ostream& out, std::ostream& err);

int run_main(int argc, char** argv);

}  // namespace econoscale::cli
