#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "fpdiff/cli/config.hpp"

namespace fpdiff::cli {

struct AssertionOutcome {
    std::string name;
    bool passed = false;
    double value = 0.0;
    double threshold = 0.0;
    std::string detail;
};

struct RunReport {
    std::string kind;
    std::vector<std::pair<std::string, double>> scalars;
    std::vector<std::filesystem::path> csv_paths;
    std::vector<std::filesystem::path> svg_paths;
    std::vector<AssertionOutcome> assertions; ///< config order, one per requested assertion
    double seconds = 0.0;

    bool all_passed() const;
};

struct RunOptions {
    std::filesystem::path out_dir = "out";
    bool plot = false;
};

/// Runs one experiment and writes `<kind>_*.csv` (and SVG when plot is set)
/// into out_dir. Library errors propagate with the experiment name prepended.
RunReport run_experiment(const ExperimentConfig& cfg, const RunOptions& options);

/// Human-readable summary, one line per scalar and per assertion.
std::string format_report(const RunReport& report);

} // namespace fpdiff::cli
