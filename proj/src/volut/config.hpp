#pragma once

// JSON option objects for the C API and the CLI. Every key is optional and
// falls back to the struct default; unknown keys are rejected so typos fail
// loudly instead of running with defaults.

#include <string_view>

#include "volut/bench.hpp"
#include "volut/server.hpp"
#include "volut/session.hpp"
#include "volut/sr_pipeline.hpp"
#include "volut/synthetic.hpp"

namespace volut {

SrConfig sr_config_from_json(std::string_view text);
SessionConfig session_config_from_json(std::string_view text);
BenchOptions bench_options_from_json(std::string_view text);
// "trace" names a CSV file; it is loaded here.
ServerOptions server_options_from_json(std::string_view text);
VideoSpec video_spec_from_json(std::string_view text);

}  // namespace volut
