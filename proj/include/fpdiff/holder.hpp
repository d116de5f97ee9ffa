#pragma once

#include <cstdint>

#include "fpdiff/grid_function.hpp"
#include "fpdiff/interval_function.hpp"

namespace fpdiff {

inline constexpr std::uint64_t kDefaultSeed = 0x5EED;

/// Empirical C^{k+alpha} norm data for one function.
struct HolderNormReport {
    double sup_norm = 0.0;
    double ck_norm = 0.0;           ///< max of sup norms of f, f', ..., f^(k)
    double seminorm_estimate = 0.0; ///< sampled lower bound of [f^(k)]_alpha (0 when alpha == 0)
    double exponent = 0.0;          ///< alpha; 0 means a pure C^k norm
    int order = 0;                  ///< k
    bool resolution_warning = false; ///< set when k >= N/4

    double value() const noexcept { return ck_norm > seminorm_estimate ? ck_norm : seminorm_estimate; }
};

/// Smoothness index r = k + alpha split into its parts. Integer r denotes
/// the plain C^k norm (alpha = 0); otherwise alpha = r - floor(r).
struct Smoothness {
    int k = 0;
    double alpha = 0.0;

    static Smoothness from_real(double r);
};

struct PairSampling {
    std::size_t pair_budget = 4096;
    std::uint64_t seed = kDefaultSeed;
};

/// Lower bound of sup |f(x) - f(y)| / d(x, y)^alpha over all node pairs at
/// dyadic distances 2^-m plus `pair_budget` seeded random pairs.
double holder_seminorm(const GridFunction& f, double alpha, const PairSampling& sampling = {});
double holder_seminorm(const IntervalFunction& f, double alpha, const PairSampling& sampling = {});

HolderNormReport cr_norm(const GridFunction& f, Smoothness s, const PairSampling& sampling = {});
HolderNormReport cr_norm(const IntervalFunction& f, Smoothness s, const PairSampling& sampling = {});

inline HolderNormReport cr_norm(const GridFunction& f, double r, const PairSampling& sampling = {}) {
    return cr_norm(f, Smoothness::from_real(r), sampling);
}
inline HolderNormReport cr_norm(const IntervalFunction& f, double r, const PairSampling& sampling = {}) {
    return cr_norm(f, Smoothness::from_real(r), sampling);
}

struct InterpolationCheck {
    bool holds = false;
    double lhs = 0.0;                ///< ||f||_{k+beta}
    double rhs_without_constant = 0.0; ///< ||f||_{k+alpha}^mu ||f||_{k+gamma}^(1-mu)
    double mu = 0.0;
    double empirical_constant = 0.0; ///< lhs / rhs_without_constant
};

/// Checks ||f||_{k+beta} <= M ||f||_{k+alpha}^mu ||f||_{k+gamma}^(1-mu) with
/// mu = (gamma - beta) / (gamma - alpha), all norms from cr_norm.
/// Requires 0 <= alpha < beta < gamma < 1 and M > 0.
InterpolationCheck check_interpolation_inequality(const GridFunction& f, int k, double alpha, double beta,
                                                  double gamma, double constant,
                                                  const PairSampling& sampling = {});

} // namespace fpdiff
