#include "fpdiff/holder.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "fpdiff/error.hpp"

namespace fpdiff {

namespace {

void check_exponent(double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "Hoelder exponent must lie in (0, 1], got " + std::to_string(alpha));
    }
}

// Random pair distances are drawn log-uniformly so that short and long
// separations are both represented. Separations stay above kMinSeparation
// (relative to the domain length), independent of resolution so that refined
// grids see the same pairs; shorter pairs only amplify round-off.
constexpr double kMinSeparation = 0x1p-12;
double log_uniform(std::mt19937_64& rng, double lo, double hi) {
    std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
    return std::exp(u(rng));
}

} // namespace

Smoothness Smoothness::from_real(double r) {
    if (!(r > 0.0)) throw Error(ErrorCode::InvalidArgument, "smoothness index must be positive");
    const double k = std::floor(r);
    double alpha = r - k;
    if (alpha < 1e-12) alpha = 0.0;
    return {static_cast<int>(k), alpha};
}

double holder_seminorm(const GridFunction& f, double alpha, const PairSampling& sampling) {
    check_exponent(alpha);
    const std::size_t n = f.size();
    double best = 0.0;
    for (std::size_t step = n / 2;; step /= 2) {
        const double d = circle_distance(0.0, static_cast<double>(step) / static_cast<double>(n));
        const double scale = std::pow(d, alpha);
        for (std::size_t i = 0; i < n; ++i) {
            best = std::max(best, std::abs(f[i] - f[(i + step) % n]) / scale);
        }
        if (step % 2 != 0 || step == 1) break;
    }
    std::mt19937_64 rng(sampling.seed);
    std::uniform_real_distribution<double> pos(0.0, 1.0);
    for (std::size_t p = 0; p < sampling.pair_budget; ++p) {
        const double x = pos(rng);
        const double d = log_uniform(rng, kMinSeparation, 0.5);
        const double y = x + d;
        best = std::max(best, std::abs(f.eval(x) - f.eval(y)) / std::pow(circle_distance(x, y), alpha));
    }
    return best;
}

double holder_seminorm(const IntervalFunction& f, double alpha, const PairSampling& sampling) {
    check_exponent(alpha);
    const std::size_t m = f.size();
    const double h = f.spacing();
    double best = 0.0;
    for (std::size_t step = 1; step < m; step *= 2) {
        const double scale = std::pow(h * static_cast<double>(step), alpha);
        for (std::size_t i = 0; i + step < m; ++i) {
            best = std::max(best, std::abs(f[i] - f[i + step]) / scale);
        }
    }
    const double len = f.upper() - f.lower();
    std::mt19937_64 rng(sampling.seed);
    std::uniform_real_distribution<double> pos(f.lower(), f.upper());
    for (std::size_t p = 0; p < sampling.pair_budget; ++p) {
        const double x = pos(rng);
        const double d = log_uniform(rng, kMinSeparation * len, len);
        double y = x + d;
        if (y > f.upper()) y = x - d;
        if (y < f.lower()) continue;
        best = std::max(best, std::abs(f.eval(x) - f.eval(y)) / std::pow(std::abs(x - y), alpha));
    }
    return best;
}

namespace {

template <typename Fn>
HolderNormReport cr_norm_impl(const Fn& f, Smoothness s, const PairSampling& sampling, std::size_t resolution) {
    if (s.k < 0) throw Error(ErrorCode::InvalidArgument, "derivative order must be >= 0");
    if (s.alpha < 0.0 || s.alpha > 1.0) throw Error(ErrorCode::InvalidArgument, "Hoelder exponent outside [0, 1]");
    HolderNormReport rep;
    rep.order = s.k;
    rep.exponent = s.alpha;
    rep.sup_norm = f.sup_norm();
    rep.resolution_warning = static_cast<std::size_t>(s.k) >= resolution / 4;
    Fn current = f;
    rep.ck_norm = rep.sup_norm;
    for (int i = 1; i <= s.k; ++i) {
        current = differentiate(current);
        rep.ck_norm = std::max(rep.ck_norm, current.sup_norm());
    }
    if (s.alpha > 0.0) rep.seminorm_estimate = holder_seminorm(current, s.alpha, sampling);
    return rep;
}

} // namespace

HolderNormReport cr_norm(const GridFunction& f, Smoothness s, const PairSampling& sampling) {
    return cr_norm_impl(f, s, sampling, f.size());
}

HolderNormReport cr_norm(const IntervalFunction& f, Smoothness s, const PairSampling& sampling) {
    return cr_norm_impl(f, s, sampling, f.size());
}

InterpolationCheck check_interpolation_inequality(const GridFunction& f, int k, double alpha, double beta,
                                                  double gamma, double constant, const PairSampling& sampling) {
    if (!(0.0 <= alpha && alpha < beta && beta < gamma && gamma < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "interpolation check requires 0 <= alpha < beta < gamma < 1");
    }
    if (!(constant > 0.0)) throw Error(ErrorCode::InvalidArgument, "candidate constant must be positive");
    InterpolationCheck out;
    out.mu = (gamma - beta) / (gamma - alpha);
    out.lhs = cr_norm(f, Smoothness{k, beta}, sampling).value();
    const double low = cr_norm(f, Smoothness{k, alpha}, sampling).value();
    const double high = cr_norm(f, Smoothness{k, gamma}, sampling).value();
    out.rhs_without_constant = std::pow(low, out.mu) * std::pow(high, 1.0 - out.mu);
    out.empirical_constant = out.rhs_without_constant > 0.0 ? out.lhs / out.rhs_without_constant : 0.0;
    out.holds = out.lhs <= constant * out.rhs_without_constant;
    return out;
}

} // namespace fpdiff
