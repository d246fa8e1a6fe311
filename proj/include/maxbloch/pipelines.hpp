#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "maxbloch/config.hpp"

namespace maxbloch {

struct RunFlags {
  int threads = 1;
  std::optional<std::string> out_dir;  // overrides output_dir from the config
};

enum ExitCode : int { kExitOk = 0, kExitPipeline = 1, kExitThreshold = 2, kExitUsage = 64 };

bool is_subcommand(const std::string& name);

// Runs one pipeline and writes its outputs plus manifest.json. Pipeline
// failures propagate as exceptions; the return value is kExitOk or
// kExitThreshold.
int dispatch(const std::string& subcommand, const RunConfig& cfg, const RunFlags& flags,
             std::ostream& log);

}  // namespace maxbloch
