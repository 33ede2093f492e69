#pragma once

#include <spdlog/spdlog.h>

namespace volut {

// Shared logger; level comes from the VOLUT_LOG environment variable
// (trace, debug, info, warn, error, off). Default: warn.
spdlog::logger& log();

}  // namespace volut
