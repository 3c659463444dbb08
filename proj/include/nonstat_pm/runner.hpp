#pragma once

#include <iosfwd>

#include "nonstat_pm/config.hpp"

namespace nspm {

// Runs the configured experiment: writes results.csv, results.json and
// manifest.json under the output directory. Returns 0 on success. Output is
// bitwise reproducible for a fixed resolved config (the manifest timestamp
// and wall time aside).
int run_experiment(const ExperimentConfig& config, std::ostream& log);

}  // namespace nspm
