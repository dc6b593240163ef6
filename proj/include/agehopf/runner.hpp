#pragma once

#include <string>

#include "agehopf/scenario.hpp"

namespace agehopf {

struct RunOptions {
    std::string out_dir;  // overrides scenario output.dir when nonempty
    int threads = 0;      // 0: AGEHOPF_THREADS env var, else hardware
};

/// Exit codes: 0 success, 1 runtime failure, 2 certify found no certified
/// Hopf point.
int run(const std::string& subcommand, const Scenario& scenario, const RunOptions& opts = {});

}  // namespace agehopf
