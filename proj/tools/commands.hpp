#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "hvacd/config.hpp"

namespace hvacd::cli {

enum ExitCode { kOk = 0, kUsage = 1, kConfigError = 2, kDataError = 3, kInfeasible = 4 };

/// Entry point shared by the executable and the integration tests.
int run(int argc, char** argv);
int run(const std::vector<std::string>& args);

// Subcommands; each writes under cfg.output_dir and returns an exit code.
int cmd_synth(const PipelineConfig& cfg);
int cmd_disaggregate(const PipelineConfig& cfg);
int cmd_evaluate(const PipelineConfig& cfg);
int cmd_report(const PipelineConfig& cfg);

}  // namespace hvacd::cli
