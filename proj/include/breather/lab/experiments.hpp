#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "config.hpp"

namespace breather::lab {

/// One checked claim of a run: `measured` compared with `threshold` by
/// `relation` ("<=", ">=", "within" for |measured - target| <= threshold, "==").
struct Assertion {
    std::string name;
    bool passed = false;
    double measured = 0.0;
    double threshold = 0.0;
    std::string relation;
    double target = 0.0;
};

struct RunResult {
    Experiment experiment = Experiment::residual;
    std::vector<Assertion> assertions;
    std::vector<std::string> outputs;
    double wall_seconds = 0.0;

    bool passed() const;
    std::vector<std::string> failures() const;
};

/// Runs one experiment, writing its CSV files and manifest.json into
/// `out_dir` (created if needed).
RunResult run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir);

/// Version string baked in at build time.
std::string code_version();

}  // namespace breather::lab
