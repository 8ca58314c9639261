#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rppg/dsp.hpp"
#include "rppg/error.hpp"
#include "rppg/estimator.hpp"

namespace rppg::cli {

// Fully resolved parameters of one invocation: defaults, then --config file,
// then flags. Echoed next to the outputs.
struct RunConfig {
  std::string command;
  PipelineConfig pipeline;
  WindowSpec windows;
  std::string calibration_path;  // empty: built-in defaults
  MethodSelection method = MethodSelection::Both;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> paths;
};

std::string echo_json(const RunConfig& cfg);

// Exit codes: 0 success, 2 usage error, 10 + ErrorKind for library errors.
int exit_code(ErrorKind kind);

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rppg::cli
