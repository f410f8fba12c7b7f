#pragma once

#include <string>
#include <vector>

#include "agelab/run_config.hpp"

namespace agelab {

// Executes one subcommand against a resolved config; throws on any error.
// Outputs are staged under <out>/failed/ and moved up only when the command
// finishes cleanly, so partial results of an interrupted or failed run are
// always flagged by that marker directory (which also holds error.txt and the
// resolved config for post-mortems).
void run_command(const std::string& command, const RunConfig& cfg);

const std::vector<std::string>& command_names();

} // namespace agelab
