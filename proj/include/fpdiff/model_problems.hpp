#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "fpdiff/fit.hpp"
#include "fpdiff/fixed_point.hpp"
#include "fpdiff/holder.hpp"
#include "fpdiff/interval_function.hpp"

namespace fpdiff {

/// F(u, phi) = phi o phi / 2 + u on I = [-1, 1]; states and parameters are
/// samples on the same M equispaced nodes.
struct CompositionMapConfig {
    double r = 0.5;       ///< radius of the state ball in C^{1,1}
    double r_prime = 0.2; ///< radius of the parameter ball in C^{1,1}
    std::size_t m = 257;

    /// Throws ConfigInfeasible naming the first violated invariance or contraction condition.
    void validate() const;
    /// max((1 + r) / 2, (2 r + r^2) / 2).
    double contraction_constant() const;
};

inline constexpr double kCompositionLower = -1.0;
inline constexpr double kCompositionUpper = 1.0;

/// Samples of f on the M nodes of [-1, 1].
Eigen::VectorXd interval_samples(std::size_t m, const std::function<double(double)>& f);

/// P = Id, Q z = (phi' o phi z + z o phi) / 2. apply throws RangeViolation when
/// |phi(t)| > 1 + 1e-9 at a node.
ParametrizedMap composition_map(const CompositionMapConfig& cfg);

/// Q20 = Q11 = 0, Q02[z, w] = (z' o phi w + w' o phi z + phi'' o phi z w) / 2.
GradedCoefficients composition_coefficients(const CompositionMapConfig& cfg);

struct CompositionSuiteReport {
    std::size_t samples = 0;
    double max_image_norm = 0.0;     ///< max ||F(u, phi)||_{C^{1,1}} over the samples
    double max_contraction_ratio = 0.0; ///< max ||F(u,phi) - F(u,psi)||_{C^1} / ||phi - psi||_{C^1}
    double max_q_ratio = 0.0;        ///< max ||Q_phi z||_inf / ||z||_inf over smooth test z
    bool ball_preserved = false;     ///< max_image_norm <= r + 1e-9
    bool contracting = false;        ///< ratio <= contraction_constant + 0.01
    bool q_bounded = false;          ///< q ratio <= (1 + r) / 2
};

/// Random states and parameters drawn inside the two C^{1,1} balls.
CompositionSuiteReport composition_constraint_suite(const CompositionMapConfig& cfg, std::size_t samples,
                                                    std::uint64_t seed = kDefaultSeed);

/// The fixed point for u(t) = c t is a t with a = 1 - sqrt(1 - 2c).
double composition_linear_slope(double c);

struct SecondDerivativeCheck {
    Eigen::VectorXd engine;
    Eigen::VectorXd finite_difference;
    double engine_norm = 0.0;
    double relative_error = 0.0; ///< ||engine - fd||_inf / max(||fd||_inf, 1e-12)
    double absolute_error = 0.0;
};

/// D^2 phi(u0)[h, h] from the graded coefficients against a Richardson second
/// difference of the solved fixed point along h.
SecondDerivativeCheck second_derivative_check(const ParametrizedMap& f, const GradedCoefficients& coefficients,
                                              const Eigen::VectorXd& u0, const Eigen::VectorXd& phi_init,
                                              const Eigen::VectorXd& h, double fd_step,
                                              const FixedPointOptions& options = {});

SecondDerivativeCheck composition_second_derivative_check(const CompositionMapConfig& cfg,
                                                          const Eigen::VectorXd& u0, const Eigen::VectorXd& h,
                                                          double fd_step = 1e-2);

/// F(u, phi)(t) = phi((t + u) / 2) / 2 + g(t, u) on I = [-1, 1] with scalar u in [-epsilon, epsilon].
struct AffineMapConfig {
    std::function<double(double t, double u)> g;
    std::function<double(double t, double u)> g_u;  ///< optional; enables P
    std::function<double(double t, double u)> g_uu; ///< optional; enables second derivatives
    double epsilon = 0.5;
    double alpha = 0.5;
    std::size_t m = 257;

    void validate() const;
};

ParametrizedMap affine_map(const AffineMapConfig& cfg);

/// Q20[h1, h2] = h1 h2 (phi''((t+u)/2) / 8 + g_uu), Q11[h, z] = h z'((t+u)/2) / 4, Q02 = 0.
GradedCoefficients affine_coefficients(const AffineMapConfig& cfg);

/// sum_{n < terms} 2^-n g(t_n, u) with t_0 = t, t_{n+1} = (t_n + u) / 2, at the nodes.
Eigen::VectorXd affine_series_solution(const AffineMapConfig& cfg, double u, int terms = 60);

struct AffineHolderRow {
    double delta = 0.0;
    double distance = 0.0; ///< ||phi_delta - phi_0||_inf
};

struct AffineHolderReport {
    std::vector<AffineHolderRow> rows;
    ExponentFit fit;
};

/// Throws DegenerateFit when the deltas do not spread.
AffineHolderReport affine_holder_experiment(const AffineMapConfig& cfg, const std::vector<double>& deltas,
                                            const FixedPointOptions& options = {});

struct AffineContractionReport {
    double max_full_ratio = 0.0;     ///< C^alpha norm of the difference of images over that of the inputs
    double max_seminorm_ratio = 0.0; ///< same for the alpha-seminorm part alone
};

AffineContractionReport affine_contraction(const AffineMapConfig& cfg, double u, std::size_t samples,
                                           std::uint64_t seed = kDefaultSeed);

} // namespace fpdiff
