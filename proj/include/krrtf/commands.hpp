#pragma once

#include <string>

#include "krrtf/config.hpp"
#include "krrtf/solvers.hpp"

namespace krrtf {

enum ExitCode { kExitOk = 0, kExitCheckFailed = 1, kExitUsage = 2 };

// Each command writes under cfg.out and returns an exit code.
int cmd_gen_tasks(const ExperimentConfig& cfg);
int cmd_plan(const ExperimentConfig& cfg, bool weights);
int cmd_construct_check(const ExperimentConfig& cfg, bool strict);
int cmd_solve(const ExperimentConfig& cfg, Method method);
int cmd_compare(const ExperimentConfig& cfg);
int cmd_noise_sweep(const ExperimentConfig& cfg);

}  // namespace krrtf
