#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "fpdiff/fit.hpp"
#include "fpdiff/fixed_point.hpp"
#include "fpdiff/grid_function.hpp"
#include "fpdiff/holder.hpp"
#include "fpdiff/map_family.hpp"

namespace fpdiff {

/// Dense N x N matrix acting on node samples.
using OperatorMatrix = Eigen::MatrixXd;

/// The `degree` points y in [0, 1) with T(u, y) = x mod 1, in increasing order.
/// Throws BranchNewtonFailure when safeguarded Newton does not reach
/// |T(u, y) - x - k| < 1e-13 within 50 steps.
std::vector<double> inverse_branches(const MapFamily& map, const Eigen::VectorXd& u, double x);

/// L phi(x_i) = sum over T(u, y) = x_i of g(u, y) phi(y), with phi read off its
/// trigonometric interpolant.
OperatorMatrix assemble_operator(const MapFamily& map, const Weight& g, const Eigen::VectorXd& u, std::size_t n);

/// The parameter derivative of L along h, assembled branch by branch.
OperatorMatrix d_u_operator(const MapFamily& map, const Weight& g, const Eigen::VectorXd& u,
                            const Eigen::VectorXd& h, std::size_t n);

/// L composed with multiplication by exp(s A) on node samples.
OperatorMatrix twisted_operator(const OperatorMatrix& l, const GridFunction& a, double s);

struct SpectralOptions {
    double power_tol = 1e-13;
    int max_iter = 10000;
    /// NoSpectralGap is raised when sigma_estimate >= 1 - gap_margin.
    double gap_margin = 1e-3;
    int sigma_steps = 20;
    std::uint64_t seed = kDefaultSeed;
};

struct SpectralData {
    double lambda = 0.0;
    GridFunction phi;   ///< <ell_ref, phi> = 1
    DualFunctional ell; ///< <ell, phi> = 1
    OperatorMatrix pi;
    OperatorMatrix r;
    double sigma_estimate = 0.0;
    int iterations = 0;
};

/// Leading eigendata by power iteration (right from the constant function,
/// left from Lebesgue weights), Pi z = <ell, z> phi and R = L - lambda Pi.
/// Throws NonPositiveEigenfunction or NoSpectralGap.
SpectralData spectral_data(const OperatorMatrix& l, const DualFunctional& ell_ref, const SpectralOptions& options = {});

/// Spectral data at u0 normalised against its own left eigenvector
/// (which then serves as ell_ref for every nearby u).
SpectralData reference_spectral_data(const OperatorMatrix& l0, const SpectralOptions& options = {});

/// F(u, phi) = L_u phi / <ell_ref, L_u phi> with analytic P and Q.
/// apply throws NormalizationVanishes when |<ell_ref, L_u phi>| < 1e-13.
ParametrizedMap normalized_map(const MapFamily& map, const Weight& g, const DualFunctional& ell_ref, std::size_t n);

/// Norms ||lambda^-n R^n v|| for n = 1..n_max (sup norm on samples).
std::vector<double> spectral_decay(const SpectralData& data, const Eigen::VectorXd& v, int n_max);

struct LinearResponse {
    GridFunction response; ///< D_u phi(u0) h
    SpectralData data;     ///< at u0
    OperatorMatrix du_l;   ///< d_u L(u0) h
    double min_singular_value = 0.0;
};

/// Solves (Id - R / lambda) w = (Id - Pi) (d_u L h) phi0 / lambda.
LinearResponse linear_response(const MapFamily& map, const Weight& g, const Eigen::VectorXd& u0,
                               const Eigen::VectorXd& h, std::size_t n, const SpectralOptions& options = {});

/// <ell0, (d_u L h) phi0> + <ell0, L0 D_u phi h>.
double lambda_derivative(const LinearResponse& response);
double lambda_derivative(const MapFamily& map, const Weight& g, const Eigen::VectorXd& u0, const Eigen::VectorXd& h,
                         std::size_t n, const SpectralOptions& options = {});

/// m(f) = <ell, f phi>.
double gibbs_measure(const SpectralData& data, const GridFunction& f);

/// d/du m_u(A) h from the derivatives of phi_u and ell_u.
double measure_response(const LinearResponse& response, const GridFunction& a);
double measure_response(const MapFamily& map, const Weight& g, const Eigen::VectorXd& u0, const Eigen::VectorXd& h,
                        const GridFunction& a, std::size_t n, const SpectralOptions& options = {});

struct PressureCheck {
    double derivative = 0.0; ///< Richardson central difference of log lambda(L e^{sA}) at s = 0
    double measure = 0.0;    ///< m_u(A)
    double relative_gap = 0.0; ///< |derivative - measure| / max(1, |measure|)
};

PressureCheck pressure_s_derivative(const MapFamily& map, const Weight& g, const Eigen::VectorXd& u,
                                    const GridFunction& a, std::size_t n, double step = 1e-4,
                                    const SpectralOptions& options = {});

struct HolderScanRow {
    std::size_t direction = 0;
    double delta = 0.0;
    double operator_difference = 0.0;    ///< ||(L_{u0+delta e} - L_{u0}) psi||_{C^{1+beta}}
    double eigenvector_difference = 0.0; ///< ||phi_{u0+delta e} - phi_{u0}||_{C^{1+beta}}
};

struct HolderScanReport {
    std::vector<HolderScanRow> rows;
    ExponentFit operator_fit;
    ExponentFit eigenvector_fit;
};

/// psi is rescaled to ||psi||_{C^{1+alpha}} = 1. Fits are taken over all rows.
HolderScanReport holder_scan_operator(const MapFamily& map, const Weight& g, const Eigen::VectorXd& u0,
                                      const std::vector<Eigen::VectorXd>& directions,
                                      const std::vector<double>& deltas, double alpha, double beta,
                                      const GridFunction& psi, const SpectralOptions& options = {},
                                      const PairSampling& sampling = {});

} // namespace fpdiff
