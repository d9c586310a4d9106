#pragma once

#include "psf/config.hpp"

namespace psf {

// JSON-over-HTTP safe-environment service. Blocks until the process is
// terminated; returns a process exit code on startup failure.
int serve(const RunConfig& config, int port);

}  // namespace psf
