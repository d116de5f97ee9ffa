#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "fpdiff/holder.hpp"
#include "fpdiff/map_family.hpp"

namespace fpdiff::cli {

enum class ExperimentKind {
    Solve,
    Response,
    Spectrum,
    HoelderScan,
    TaylorCheck,
    PressureCheck,
    ExampleComposition,
    ExampleAffine,
};

std::string_view kind_name(ExperimentKind kind) noexcept;

/// Assertion names a kind may evaluate, in report order.
const std::vector<std::string>& assertion_names(ExperimentKind kind);

struct ConfigValue {
    std::string text;
    int line = 0;
    int column = 0; ///< 1-based column where the value starts
};

/// `key = value` lines; '#' starts a comment; blank lines are ignored.
/// Duplicate keys and malformed lines raise ConfigParseError with line and column.
std::map<std::string, ConfigValue> parse_key_values(const std::string& text);

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::Spectrum;
    std::uint64_t seed = kDefaultSeed;
    std::vector<std::string> assertions; ///< evaluated assertions, config order
    std::map<std::string, double> tolerances;

    // transfer-operator kinds
    std::size_t resolution = 64;
    int degree = 2;
    TrigSeries map_base;
    std::vector<TrigSeries> perturbations;
    double u_power = 1.0;
    std::string weight = "geometric";
    double weight_constant = 0.5;
    TrigSeries potential;
    std::vector<TrigSeries> couplings;
    Eigen::VectorXd u0;
    Eigen::VectorXd direction;
    std::vector<double> deltas;
    double tol = 1e-13;
    double fd_step = 1e-4;
    double alpha = 0.9;
    double beta = 0.3;
    std::size_t observables = 5;
    std::optional<TrigSeries> observable;
    std::optional<double> expect_lambda;
    std::optional<double> expect_slope;

    // model problems
    double r = 0.5;
    double r_prime = 0.2;
    std::size_t interval_points = 257;
    std::size_t samples = 100;
    double slope_c = 0.1;
    std::string affine_family = "kink";
    double affine_amplitude = 0.25;
    double affine_epsilon = 0.5;

    std::size_t param_dim() const noexcept { return perturbations.size(); }
    /// Threshold for an assertion: the config override or the given default.
    double tolerance(const std::string& assertion, double fallback) const;
    bool wants(const std::string& assertion) const;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Number list "a, b, c"; each item is a decimal number or b^e (e.g. 2^-10).
std::vector<double> parse_number_list(const std::string& text);

/// "k:a:b, k:a:b"; k = 0 takes the form 0:c for the constant term.
TrigSeries parse_series(const std::string& text);

MapFamily build_map(const ExperimentConfig& cfg);
Weight build_weight(const ExperimentConfig& cfg, const MapFamily& map);

} // namespace fpdiff::cli
