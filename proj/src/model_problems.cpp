#include "fpdiff/model_problems.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <string>

#include "fpdiff/error.hpp"
#include "fpdiff/finite_difference.hpp"

namespace fpdiff {

namespace {

constexpr double kRangeSlack = 1e-9;

IntervalFunction on_interval(const Eigen::VectorXd& samples) {
    return IntervalFunction(kCompositionLower, kCompositionUpper, samples);
}

double node_of(std::size_t m, std::size_t i) {
    return kCompositionLower + (kCompositionUpper - kCompositionLower) * static_cast<double>(i) /
                                   static_cast<double>(m - 1);
}

double checked_argument(double y, std::size_t i) {
    if (std::abs(y) > kCompositionUpper + kRangeSlack) {
        std::ostringstream msg;
        msg << "phi leaves [-1, 1] at node " << i << " (value " << y << ")";
        throw Error(ErrorCode::RangeViolation, msg.str());
    }
    return std::clamp(y, kCompositionLower, kCompositionUpper);
}

// Smooth random function a0 + a1 t + a2 t^2 + a3 sin(w t + theta).
std::function<double(double)> random_smooth(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    std::uniform_real_distribution<double> freq(0.5, 3.0);
    std::uniform_real_distribution<double> phase(0.0, 6.283185307179586);
    const double a0 = coef(rng), a1 = coef(rng), a2 = coef(rng), a3 = coef(rng);
    const double w = freq(rng), th = phase(rng);
    return [=](double t) { return a0 + a1 * t + a2 * t * t + a3 * std::sin(w * t + th); };
}

double c11_norm(const Eigen::VectorXd& v) { return cr_norm(on_interval(v), Smoothness{1, 1.0}).value(); }
double c1_norm(const Eigen::VectorXd& v) { return cr_norm(on_interval(v), Smoothness{1, 0.0}).value(); }

Eigen::VectorXd random_in_ball(std::mt19937_64& rng, std::size_t m, double radius) {
    std::uniform_real_distribution<double> fraction(0.2, 1.0);
    Eigen::VectorXd v = interval_samples(m, random_smooth(rng));
    return v * (radius * fraction(rng) / c11_norm(v));
}

} // namespace

void CompositionMapConfig::validate() const {
    const auto need = [](bool ok, const std::string& what) {
        if (!ok) throw Error(ErrorCode::ConfigInfeasible, what);
    };
    need(r > 0.0 && r < 1.0, "r must lie in (0, 1)");
    need(r_prime > 0.0 && r_prime < 1.0, "r_prime must lie in (0, 1)");
    need(m >= 8, "M must be >= 8");
    need(r / 2 + r_prime <= r, "r/2 + r' <= r fails");
    need(r * r / 2 + r_prime <= r, "r^2/2 + r' <= r fails");
    need(r * r / 2 * (1 + r) + r_prime <= r, "(r^2/2)(1 + r) + r' <= r fails");
    need((1 + r) / 2 < 1.0, "(1 + r)/2 < 1 fails");
    need((2 * r + r * r) / 2 < 1.0, "(2r + r^2)/2 < 1 fails");
}

double CompositionMapConfig::contraction_constant() const { return std::max((1 + r) / 2, (2 * r + r * r) / 2); }

Eigen::VectorXd interval_samples(std::size_t m, const std::function<double(double)>& f) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i) v[static_cast<Eigen::Index>(i)] = f(node_of(m, i));
    return v;
}

ParametrizedMap composition_map(const CompositionMapConfig& cfg) {
    cfg.validate();
    const std::size_t m = cfg.m;
    const auto dim = static_cast<Eigen::Index>(m);
    ParametrizedMap f;
    f.state_dim = dim;
    f.param_dim = dim;
    f.apply = [m](const Eigen::VectorXd& u, const Eigen::VectorXd& phi) -> Eigen::VectorXd {
        const IntervalFunction p = on_interval(phi);
        Eigen::VectorXd out(phi.size());
        for (std::size_t i = 0; i < m; ++i) {
            const auto k = static_cast<Eigen::Index>(i);
            out[k] = 0.5 * p.eval(checked_argument(phi[k], i)) + u[k];
        }
        return out;
    };
    f.p = [dim](const Eigen::VectorXd&, const Eigen::VectorXd&) -> Eigen::MatrixXd {
        return Eigen::MatrixXd::Identity(dim, dim);
    };
    f.q = [m](const Eigen::VectorXd&, const Eigen::VectorXd& phi) -> Eigen::MatrixXd {
        const IntervalFunction p = on_interval(phi);
        const auto dim = static_cast<Eigen::Index>(m);
        Eigen::MatrixXd q = Eigen::MatrixXd::Zero(dim, dim);
        for (std::size_t i = 0; i < m; ++i) {
            const auto k = static_cast<Eigen::Index>(i);
            const double y = checked_argument(phi[k], i);
            const CubicStencil s = cubic_stencil(kCompositionLower, kCompositionUpper, m, y);
            for (int j = 0; j < 4; ++j) q(k, static_cast<Eigen::Index>(s.first) + j) += 0.5 * s.value[j];
            q(k, k) += 0.5 * p.eval_derivative(y);
        }
        return q;
    };
    return f;
}

GradedCoefficients composition_coefficients(const CompositionMapConfig& cfg) {
    cfg.validate();
    const auto dim = static_cast<Eigen::Index>(cfg.m);
    const std::size_t m = cfg.m;
    GradedCoefficients c;
    const auto zero = [dim](const Eigen::VectorXd&, const Eigen::VectorXd&, const Eigen::VectorXd&,
                            const Eigen::VectorXd&) -> Eigen::VectorXd { return Eigen::VectorXd::Zero(dim); };
    c.q20 = zero;
    c.q11 = zero;
    c.q02 = [m](const Eigen::VectorXd&, const Eigen::VectorXd& phi, const Eigen::VectorXd& z,
                const Eigen::VectorXd& w) -> Eigen::VectorXd {
        const IntervalFunction p = on_interval(phi), zf = on_interval(z), wf = on_interval(w);
        Eigen::VectorXd out(phi.size());
        for (std::size_t i = 0; i < m; ++i) {
            const auto k = static_cast<Eigen::Index>(i);
            const double y = checked_argument(phi[k], i);
            out[k] = 0.5 * (zf.eval_derivative(y) * w[k] + wf.eval_derivative(y) * z[k] +
                            p.eval_second_derivative(y) * z[k] * w[k]);
        }
        return out;
    };
    return c;
}

CompositionSuiteReport composition_constraint_suite(const CompositionMapConfig& cfg, std::size_t samples,
                                                    std::uint64_t seed) {
    const ParametrizedMap f = composition_map(cfg);
    std::mt19937_64 rng(seed);
    CompositionSuiteReport rep;
    rep.samples = samples;
    for (std::size_t s = 0; s < samples; ++s) {
        const Eigen::VectorXd phi = random_in_ball(rng, cfg.m, cfg.r);
        const Eigen::VectorXd psi = random_in_ball(rng, cfg.m, cfg.r);
        const Eigen::VectorXd u = random_in_ball(rng, cfg.m, cfg.r_prime);
        const Eigen::VectorXd image = f(u, phi);
        rep.max_image_norm = std::max(rep.max_image_norm, c11_norm(image));
        const double denom = c1_norm(phi - psi);
        if (denom > 0.0) {
            rep.max_contraction_ratio = std::max(rep.max_contraction_ratio, c1_norm(image - f(u, psi)) / denom);
        }
        const Eigen::MatrixXd q = f.q(u, phi);
        const Eigen::VectorXd z = interval_samples(cfg.m, random_smooth(rng));
        const double zn = z.cwiseAbs().maxCoeff();
        if (zn > 0.0) rep.max_q_ratio = std::max(rep.max_q_ratio, (q * z).cwiseAbs().maxCoeff() / zn);
    }
    rep.ball_preserved = rep.max_image_norm <= cfg.r + 1e-9;
    rep.contracting = rep.max_contraction_ratio <= cfg.contraction_constant() + 0.01;
    rep.q_bounded = rep.max_q_ratio <= (1 + cfg.r) / 2;
    return rep;
}

double composition_linear_slope(double c) {
    if (!(c < 0.5)) throw Error(ErrorCode::InvalidArgument, "linear fixed point requires c < 1/2");
    return 1.0 - std::sqrt(1.0 - 2.0 * c);
}

SecondDerivativeCheck second_derivative_check(const ParametrizedMap& f, const GradedCoefficients& coefficients,
                                              const Eigen::VectorXd& u0, const Eigen::VectorXd& phi_init,
                                              const Eigen::VectorXd& h, double fd_step,
                                              const FixedPointOptions& options) {
    SecondDerivativeCheck out;
    const SecondDerivativeResult engine = second_derivative_graded(f, coefficients, u0, phi_init, h, h, options);
    out.engine = engine.value;
    out.finite_difference = richardson_second(
        [&](double s) -> Eigen::VectorXd {
            return solve_fixed_point(f, Eigen::VectorXd(u0 + s * h), engine.phi, options).phi_star;
        },
        fd_step);
    out.engine_norm = out.engine.cwiseAbs().maxCoeff();
    out.absolute_error = (out.engine - out.finite_difference).cwiseAbs().maxCoeff();
    out.relative_error = out.absolute_error / std::max(out.finite_difference.cwiseAbs().maxCoeff(), 1e-12);
    return out;
}

SecondDerivativeCheck composition_second_derivative_check(const CompositionMapConfig& cfg,
                                                          const Eigen::VectorXd& u0, const Eigen::VectorXd& h,
                                                          double fd_step) {
    FixedPointOptions options;
    options.tol = 1e-14;
    return second_derivative_check(composition_map(cfg), composition_coefficients(cfg), u0,
                                   Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cfg.m)), h, fd_step, options);
}

void AffineMapConfig::validate() const {
    if (!g) throw Error(ErrorCode::ConfigInfeasible, "affine map needs g");
    if (!(epsilon > 0.0 && epsilon <= 1.0)) throw Error(ErrorCode::ConfigInfeasible, "epsilon must lie in (0, 1]");
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::ConfigInfeasible, "alpha must lie in (0, 1)");
    if (m < 8) throw Error(ErrorCode::ConfigInfeasible, "M must be >= 8");
}

namespace {

double affine_parameter(const AffineMapConfig& cfg, const Eigen::VectorXd& u) {
    if (u.size() != 1) throw Error(ErrorCode::InvalidArgument, "affine map has a scalar parameter");
    if (std::abs(u[0]) > cfg.epsilon + 1e-12) {
        throw Error(ErrorCode::OutOfDomain, "parameter " + std::to_string(u[0]) + " outside [-epsilon, epsilon]");
    }
    return u[0];
}

} // namespace

ParametrizedMap affine_map(const AffineMapConfig& cfg) {
    cfg.validate();
    const std::size_t m = cfg.m;
    const auto dim = static_cast<Eigen::Index>(m);
    ParametrizedMap f;
    f.state_dim = dim;
    f.param_dim = 1;
    f.apply = [cfg, m](const Eigen::VectorXd& uv, const Eigen::VectorXd& phi) -> Eigen::VectorXd {
        const double u = affine_parameter(cfg, uv);
        const IntervalFunction p = on_interval(phi);
        Eigen::VectorXd out(phi.size());
        for (std::size_t i = 0; i < m; ++i) {
            const double t = node_of(m, i);
            out[static_cast<Eigen::Index>(i)] = 0.5 * p.eval(0.5 * (t + u)) + cfg.g(t, u);
        }
        return out;
    };
    f.q = [cfg, m](const Eigen::VectorXd& uv, const Eigen::VectorXd&) -> Eigen::MatrixXd {
        const double u = affine_parameter(cfg, uv);
        const auto dim = static_cast<Eigen::Index>(m);
        Eigen::MatrixXd q = Eigen::MatrixXd::Zero(dim, dim);
        for (std::size_t i = 0; i < m; ++i) {
            const CubicStencil s = cubic_stencil(kCompositionLower, kCompositionUpper, m, 0.5 * (node_of(m, i) + u));
            for (int j = 0; j < 4; ++j) q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(s.first) + j) += 0.5 * s.value[j];
        }
        return q;
    };
    if (cfg.g_u) {
        f.p = [cfg, m](const Eigen::VectorXd& uv, const Eigen::VectorXd& phi) -> Eigen::MatrixXd {
            const double u = affine_parameter(cfg, uv);
            const IntervalFunction p = on_interval(phi);
            Eigen::MatrixXd out(static_cast<Eigen::Index>(m), 1);
            for (std::size_t i = 0; i < m; ++i) {
                const double t = node_of(m, i);
                out(static_cast<Eigen::Index>(i), 0) = 0.25 * p.eval_derivative(0.5 * (t + u)) + cfg.g_u(t, u);
            }
            return out;
        };
    }
    return f;
}

GradedCoefficients affine_coefficients(const AffineMapConfig& cfg) {
    cfg.validate();
    if (!cfg.g_u || !cfg.g_uu) throw Error(ErrorCode::MissingCoefficient, "affine coefficients need g_u and g_uu");
    const std::size_t m = cfg.m;
    GradedCoefficients c;
    c.q20 = [cfg, m](const Eigen::VectorXd& uv, const Eigen::VectorXd& phi, const Eigen::VectorXd& h1,
                     const Eigen::VectorXd& h2) -> Eigen::VectorXd {
        const double u = affine_parameter(cfg, uv);
        const IntervalFunction p = on_interval(phi);
        Eigen::VectorXd out(static_cast<Eigen::Index>(m));
        for (std::size_t i = 0; i < m; ++i) {
            const double t = node_of(m, i);
            out[static_cast<Eigen::Index>(i)] =
                h1[0] * h2[0] * (0.125 * p.eval_second_derivative(0.5 * (t + u)) + cfg.g_uu(t, u));
        }
        return out;
    };
    c.q11 = [cfg, m](const Eigen::VectorXd& uv, const Eigen::VectorXd&, const Eigen::VectorXd& h,
                     const Eigen::VectorXd& z) -> Eigen::VectorXd {
        const double u = affine_parameter(cfg, uv);
        const IntervalFunction zf = on_interval(z);
        Eigen::VectorXd out(static_cast<Eigen::Index>(m));
        for (std::size_t i = 0; i < m; ++i) {
            out[static_cast<Eigen::Index>(i)] = 0.25 * h[0] * zf.eval_derivative(0.5 * (node_of(m, i) + u));
        }
        return out;
    };
    c.q02 = [m](const Eigen::VectorXd&, const Eigen::VectorXd&, const Eigen::VectorXd&,
                const Eigen::VectorXd&) -> Eigen::VectorXd {
        return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
    };
    return c;
}

Eigen::VectorXd affine_series_solution(const AffineMapConfig& cfg, double u, int terms) {
    cfg.validate();
    Eigen::VectorXd out(static_cast<Eigen::Index>(cfg.m));
    for (std::size_t i = 0; i < cfg.m; ++i) {
        double t = node_of(cfg.m, i);
        double weight = 1.0, sum = 0.0;
        for (int n = 0; n < terms; ++n) {
            sum += weight * cfg.g(t, u);
            weight *= 0.5;
            t = 0.5 * (t + u);
        }
        out[static_cast<Eigen::Index>(i)] = sum;
    }
    return out;
}

AffineHolderReport affine_holder_experiment(const AffineMapConfig& cfg, const std::vector<double>& deltas,
                                            const FixedPointOptions& options) {
    const ParametrizedMap f = affine_map(cfg);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cfg.m));
    const Eigen::VectorXd base = solve_fixed_point(f, Eigen::VectorXd::Zero(1), zero, options).phi_star;
    AffineHolderReport rep;
    std::vector<double> xs, ys;
    for (double delta : deltas) {
        const Eigen::VectorXd u = Eigen::VectorXd::Constant(1, delta);
        const Eigen::VectorXd phi = solve_fixed_point(f, u, base, options).phi_star;
        const double dist = (phi - base).cwiseAbs().maxCoeff();
        rep.rows.push_back({delta, dist});
        xs.push_back(std::abs(delta));
        ys.push_back(dist);
    }
    rep.fit = fit_loglog(xs, ys);
    return rep;
}

AffineContractionReport affine_contraction(const AffineMapConfig& cfg, double u, std::size_t samples,
                                           std::uint64_t seed) {
    const ParametrizedMap f = affine_map(cfg);
    const Eigen::VectorXd uv = Eigen::VectorXd::Constant(1, u);
    std::mt19937_64 rng(seed);
    AffineContractionReport rep;
    const Smoothness s{0, cfg.alpha};
    for (std::size_t k = 0; k < samples; ++k) {
        const Eigen::VectorXd phi = interval_samples(cfg.m, random_smooth(rng));
        const Eigen::VectorXd psi = interval_samples(cfg.m, random_smooth(rng));
        const HolderNormReport in = cr_norm(on_interval(phi - psi), s);
        const HolderNormReport out = cr_norm(on_interval(f(uv, phi) - f(uv, psi)), s);
        if (in.value() > 0.0) rep.max_full_ratio = std::max(rep.max_full_ratio, out.value() / in.value());
        if (in.seminorm_estimate > 0.0) {
            rep.max_seminorm_ratio =
                std::max(rep.max_seminorm_ratio, out.seminorm_estimate / in.seminorm_estimate);
        }
    }
    return rep;
}

} // namespace fpdiff
