// Batch command dispatch: runs a configured job and writes its artifacts.
#pragma once

#include "vvflow/config.hpp"

namespace vvflow {

// Exit status: 0 success, 1 solver failure, 2 config error. Artifacts are
// written under cfg.out_dir; every report starts with a provenance header
// (config echo, mesh stats, solver tolerances).
int run(const RunConfig& cfg);

}  // namespace vvflow
