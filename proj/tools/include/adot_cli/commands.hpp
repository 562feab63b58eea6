#pragma once

#include "adot_cli/config.hpp"

namespace adot::cli {

enum ExitCode : int { kOk = 0, kInputError = 2, kNotConverged = 3 };

/// Worker count from ADOT_THREADS; unset, empty or 0 means sequential.
int threads_from_env();

int cmd_gen_data(const RunConfig& cfg);
int cmd_solve(const RunConfig& cfg);
int cmd_benchmark(const RunConfig& cfg);
int cmd_emit_plots(const RunConfig& cfg);

}  // namespace adot::cli
