#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fpdiff/cli/config.hpp"
#include "fpdiff/cli/experiments.hpp"
#include "fpdiff/error.hpp"

namespace {

// 0 all assertions pass, 1 some assertion failed, 2 config error,
// 3 numerical failure, 4 output could not be written.
int exit_code_for(fpdiff::ErrorCode code) {
    using fpdiff::ErrorCode;
    if (code == ErrorCode::IoError) return 4;
    if (fpdiff::is_numerical_failure(code)) return 3;
    return 2;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"fpdiff: fixed-point differentiation experiments on transfer operators and model maps"};
    std::string config_path;
    std::string out_dir = "./out";
    bool plot = false;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> resolution;
    app.add_option("--config", config_path, "experiment config file")->required();
    app.add_flag("--plot", plot, "also write SVG charts");
    app.add_option("--out", out_dir, "output directory")->capture_default_str();
    app.add_option("--seed", seed, "override the config seed");
    app.add_option("--resolution", resolution,
                   "override the grid size (N for transfer kinds, interval points for the examples)");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        fpdiff::cli::ExperimentConfig cfg = fpdiff::cli::load_config(config_path);
        if (seed) cfg.seed = *seed;
        if (resolution) {
            using fpdiff::cli::ExperimentKind;
            if (cfg.kind == ExperimentKind::ExampleComposition || cfg.kind == ExperimentKind::ExampleAffine) {
                if (*resolution < 8) throw fpdiff::Error(fpdiff::ErrorCode::ConfigParseError, "--resolution must be >= 8");
                cfg.interval_points = *resolution;
            } else {
                if (*resolution < 8 || *resolution % 2 != 0) {
                    throw fpdiff::Error(fpdiff::ErrorCode::ConfigParseError, "--resolution must be even and >= 8");
                }
                cfg.resolution = *resolution;
            }
        }
        const fpdiff::cli::RunReport report = fpdiff::cli::run_experiment(cfg, {out_dir, plot});
        std::cout << fpdiff::cli::format_report(report);
        return report.all_passed() ? 0 : 1;
    } catch (const fpdiff::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
