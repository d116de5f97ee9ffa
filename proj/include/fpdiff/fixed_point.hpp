#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fpdiff/fit.hpp"

namespace fpdiff {

using StateNorm = std::function<double(const Eigen::VectorXd&)>;

double max_abs_norm(const Eigen::VectorXd& v);

/// A map F(u, phi) on finite-dimensional state and parameter vectors,
/// optionally carrying its first-order Taylor data at (u, phi):
/// P(u, phi) (state_dim x param_dim) and Q(u, phi) (state_dim x state_dim).
struct ParametrizedMap {
    using Apply = std::function<Eigen::VectorXd(const Eigen::VectorXd& u, const Eigen::VectorXd& phi)>;
    using Linearization = std::function<Eigen::MatrixXd(const Eigen::VectorXd& u, const Eigen::VectorXd& phi)>;

    Apply apply;
    Eigen::Index state_dim = 0;
    Eigen::Index param_dim = 0;
    Linearization p;
    Linearization q;

    Eigen::VectorXd operator()(const Eigen::VectorXd& u, const Eigen::VectorXd& phi) const;
};

/// Two norms on one representation together with the injection between
/// them. The injection is usually the identity on sample vectors.
struct ScalePair {
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> project;
    StateNorm fine_norm;
    StateNorm coarse_norm;
};

/// Largest observed coarse_norm(project z) / fine_norm(z) over the samples.
double estimate_embedding_constant(const ScalePair& scale, std::span<const Eigen::VectorXd> samples);

struct FixedPointOptions {
    double tol = 1e-12;
    int max_iter = 10000;
    StateNorm norm;               ///< defaults to max_abs_norm
    int window = 5;               ///< steps per contraction window
    int divergence_windows = 20;  ///< consecutive windows with ratio >= 1 before NonContraction
};

struct FixedPointResult {
    Eigen::VectorXd phi_star;
    int iterations = 0;
    double residual = 0.0;             ///< norm(F(u, phi_star) - phi_star)
    double contraction_estimate = 0.0; ///< observed increment ratio per step
};

/// Picard iteration phi <- F(u, phi) until the increment drops below tol.
/// The increment ratio is monitored over windows, so maps with only a
/// contracting iterate F^n are accepted.
FixedPointResult solve_fixed_point(const ParametrizedMap& f, const Eigen::VectorXd& u, const Eigen::VectorXd& phi0,
                                   const FixedPointOptions& options = {});

struct ContinuityRow {
    std::size_t direction = 0;
    double delta = 0.0;
    double distance = 0.0; ///< norm(phi(u0 + delta e) - phi(u0))
};

std::vector<ContinuityRow> continuity_scan(const ParametrizedMap& f, const Eigen::VectorXd& u0,
                                           const Eigen::VectorXd& phi_init,
                                           std::span<const Eigen::VectorXd> directions,
                                           std::span<const double> deltas, const StateNorm& norm,
                                           const FixedPointOptions& options = {});

struct ResolventOptions {
    double singular_threshold = 1e-10;
    int neumann_terms = 200;
    int max_power = 8; ///< iterates Q^k, k <= max_power, tried for a norm estimate below 1
};

struct ResolventSolution {
    Eigen::VectorXd z;
    double min_singular_value = 0.0;
    /// Smallest k with estimated ||Q^k||_2 < 1, when one was found.
    std::optional<int> contracting_power;
    std::optional<double> norm_estimate;
    /// ||neumann - z|| / ||z|| when the Neumann cross-check ran.
    std::optional<double> neumann_relative_gap;
};

/// z = (Id - Q0)^{-1} P0 h by a dense solve. Throws SingularSystem when the
/// smallest singular value of Id - Q0 is below the threshold. When some
/// iterate of Q0 has estimated norm below 1, the Neumann partial sum is
/// computed as a cross-check.
ResolventSolution fixed_point_derivative(const Eigen::MatrixXd& p0, const Eigen::MatrixXd& q0,
                                         const Eigen::VectorXd& h, const ResolventOptions& options = {});

/// Power-iteration estimate of the spectral norm of q^power.
double estimate_power_norm(const Eigen::MatrixXd& q, int power, int iterations = 40);

/// sum_{n < terms} Q^n b.
Eigen::VectorXd neumann_sum(const Eigen::MatrixXd& q, const Eigen::VectorXd& b, int terms);

struct TaylorResidualRow {
    double delta = 0.0;
    double h_norm = 0.0;
    double z_norm = 0.0;
    double residual_norm = 0.0;
    double normalized_residual = 0.0; ///< residual / (h_norm + z_norm)
};

struct TaylorResidualReport {
    std::vector<TaylorResidualRow> rows;
    /// Slope of log residual against log h_norm over rows above the noise
    /// floor; +inf when every residual is at the noise floor.
    double fitted_order = 0.0;
    std::optional<ExponentFit> fit;
};

struct TaylorScanOptions {
    StateNorm coarse_norm;  ///< defaults to max_abs_norm
    StateNorm param_norm;   ///< defaults to max_abs_norm
    FixedPointOptions solver;
    /// Residuals below noise_factor * solver.tol are excluded from the fit.
    double noise_factor = 10.0;
};

/// For each delta: h = delta * direction, z = phi(u0 + h) - phi0 and the
/// residual F(u0+h, phi0+z) - F(u0, phi0) - P0 h - Q0 z in the coarse norm.
TaylorResidualReport taylor_residual_scan(const ParametrizedMap& f, const Eigen::VectorXd& u0,
                                          const Eigen::VectorXd& phi0, const Eigen::MatrixXd& p0,
                                          const Eigen::MatrixXd& q0, const Eigen::VectorXd& direction,
                                          std::span<const double> deltas, const TaylorScanOptions& options = {});

/// Second-order Taylor data of a 2-graded family, as multilinear partial
/// derivatives at (u, phi): q10 = D_u F, q01 = D_phi F, q20 = D_uu F,
/// q11 = D_u D_phi F, q02 = D_phiphi F (symmetric in their last two slots).
struct GradedCoefficients {
    using Matrix01 = std::function<Eigen::MatrixXd(const Eigen::VectorXd& u, const Eigen::VectorXd& phi)>;
    using Linear = std::function<Eigen::VectorXd(const Eigen::VectorXd& u, const Eigen::VectorXd& phi,
                                                 const Eigen::VectorXd& a)>;
    using Bilinear = std::function<Eigen::VectorXd(const Eigen::VectorXd& u, const Eigen::VectorXd& phi,
                                                   const Eigen::VectorXd& a, const Eigen::VectorXd& b)>;

    Matrix01 q01; ///< falls back to ParametrizedMap::q when empty
    Linear q10;   ///< falls back to ParametrizedMap::p when empty
    Bilinear q20;
    Bilinear q11; ///< (h, z) -> D_u D_phi F [h, z]
    Bilinear q02;
};

struct SecondDerivativeResult {
    Eigen::VectorXd value;     ///< D^2 phi(u0)[h1, h2]
    Eigen::VectorXd first_h1;  ///< D phi(u0) h1
    Eigen::VectorXd first_h2;  ///< D phi(u0) h2
    Eigen::VectorXd phi;       ///< phi(u0)
    double min_singular_value = 0.0;
};

/// D^2 phi[h1, h2] = (Id - Q01)^{-1} R2 with
/// R2 = Q20[h1, h2] + Q11[h1, D phi h2] + Q11[h2, D phi h1] + Q02[D phi h1, D phi h2].
/// Throws MissingCoefficient when a second-order coefficient is absent.
SecondDerivativeResult second_derivative_graded(const ParametrizedMap& f, const GradedCoefficients& coefficients,
                                                const Eigen::VectorXd& u0, const Eigen::VectorXd& phi_init,
                                                const Eigen::VectorXd& h1, const Eigen::VectorXd& h2,
                                                const FixedPointOptions& options = {});

} // namespace fpdiff
