#include "fpdiff/fixed_point.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fpdiff/error.hpp"

namespace fpdiff {

double max_abs_norm(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

Eigen::VectorXd ParametrizedMap::operator()(const Eigen::VectorXd& u, const Eigen::VectorXd& phi) const {
    if (u.size() != param_dim || phi.size() != state_dim) {
        throw Error(ErrorCode::InvalidArgument,
                    "map expects (param " + std::to_string(param_dim) + ", state " + std::to_string(state_dim) +
                        "), got (" + std::to_string(u.size()) + ", " + std::to_string(phi.size()) + ")");
    }
    return apply(u, phi);
}

double estimate_embedding_constant(const ScalePair& scale, std::span<const Eigen::VectorXd> samples) {
    double c = 0.0;
    for (const auto& z : samples) {
        const double fine = scale.fine_norm(z);
        if (fine > 0.0) c = std::max(c, scale.coarse_norm(scale.project(z)) / fine);
    }
    return c;
}

FixedPointResult solve_fixed_point(const ParametrizedMap& f, const Eigen::VectorXd& u, const Eigen::VectorXd& phi0,
                                   const FixedPointOptions& options) {
    if (!(options.tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "fixed-point tolerance must be positive");
    if (options.max_iter < 1) throw Error(ErrorCode::InvalidArgument, "max_iter must be >= 1");
    const StateNorm norm = options.norm ? options.norm : StateNorm(max_abs_norm);

    FixedPointResult out;
    Eigen::VectorXd phi = phi0;
    std::vector<double> increments;
    double estimate = 0.0;
    int bad_windows = 0;

    for (int n = 0; n <= options.max_iter; ++n) {
        Eigen::VectorXd next = f(u, phi);
        const double inc = norm(next - phi);
        if (!std::isfinite(inc)) {
            throw Error(ErrorCode::NonContraction, "iterate became non-finite after " + std::to_string(n) + " steps");
        }
        if (inc <= options.tol) {
            out.phi_star = std::move(phi);
            out.iterations = n;
            out.residual = inc;
            out.contraction_estimate = estimate;
            return out;
        }
        increments.push_back(inc);
        const auto count = static_cast<int>(increments.size());
        if (count >= 2 && increments[count - 2] > 0.0) estimate = inc / increments[count - 2];
        if (count > options.window && (count - 1) % options.window == 0) {
            const double start = increments[count - 1 - options.window];
            const double ratio = std::pow(inc / start, 1.0 / options.window);
            estimate = ratio;
            bad_windows = ratio >= 1.0 ? bad_windows + 1 : 0;
            if (bad_windows >= options.divergence_windows) {
                throw Error(ErrorCode::NonContraction, "increment ratio >= 1 over " + std::to_string(bad_windows) +
                                                           " consecutive windows (last ratio " +
                                                           std::to_string(ratio) + ")");
            }
        }
        phi = std::move(next);
    }
    throw Error(ErrorCode::MaxIterExceeded,
                "no convergence to " + std::to_string(options.tol) + " in " + std::to_string(options.max_iter) +
                    " iterations (last increment " + std::to_string(increments.back()) + ")");
}

std::vector<ContinuityRow> continuity_scan(const ParametrizedMap& f, const Eigen::VectorXd& u0,
                                           const Eigen::VectorXd& phi_init,
                                           std::span<const Eigen::VectorXd> directions,
                                           std::span<const double> deltas, const StateNorm& norm,
                                           const FixedPointOptions& options) {
    const Eigen::VectorXd base = solve_fixed_point(f, u0, phi_init, options).phi_star;
    std::vector<ContinuityRow> rows;
    rows.reserve(directions.size() * deltas.size());
    for (std::size_t d = 0; d < directions.size(); ++d) {
        for (double delta : deltas) {
            ContinuityRow row{d, delta, 0.0};
            if (delta != 0.0) {
                const Eigen::VectorXd u = u0 + delta * directions[d];
                row.distance = norm(solve_fixed_point(f, u, base, options).phi_star - base);
            }
            rows.push_back(row);
        }
    }
    return rows;
}

double estimate_power_norm(const Eigen::MatrixXd& q, int power, int iterations) {
    const Eigen::Index n = q.cols();
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = 1.0 + 0.5 * std::sin(1.0 + static_cast<double>(i));
    v.normalize();
    double best = 0.0;
    for (int it = 0; it < iterations; ++it) {
        Eigen::VectorXd w = v;
        for (int k = 0; k < power; ++k) w = q * w;
        best = std::max(best, w.norm());
        for (int k = 0; k < power; ++k) w = q.transpose() * w;
        const double s = w.norm();
        if (s == 0.0) break;
        v = w / s;
    }
    return best;
}

Eigen::VectorXd neumann_sum(const Eigen::MatrixXd& q, const Eigen::VectorXd& b, int terms) {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(b.size());
    Eigen::VectorXd term = b;
    for (int n = 0; n < terms; ++n) {
        sum += term;
        term = q * term;
    }
    return sum;
}

ResolventSolution fixed_point_derivative(const Eigen::MatrixXd& p0, const Eigen::MatrixXd& q0,
                                         const Eigen::VectorXd& h, const ResolventOptions& options) {
    if (q0.rows() != q0.cols() || p0.rows() != q0.rows() || p0.cols() != h.size()) {
        throw Error(ErrorCode::InvalidArgument, "fixed_point_derivative: dimension mismatch");
    }
    const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(q0.rows(), q0.cols()) - q0;
    ResolventSolution out;
    out.min_singular_value = Eigen::BDCSVD<Eigen::MatrixXd>(a).singularValues().minCoeff();
    if (!(out.min_singular_value > options.singular_threshold)) {
        throw Error(ErrorCode::SingularSystem,
                    "Id - Q is numerically singular (smallest singular value " +
                        std::to_string(out.min_singular_value) + ")");
    }
    const Eigen::VectorXd rhs = p0 * h;
    out.z = a.partialPivLu().solve(rhs);
    for (int k = 1; k <= options.max_power; ++k) {
        const double est = estimate_power_norm(q0, k);
        if (est < 1.0) {
            out.contracting_power = k;
            out.norm_estimate = est;
            const Eigen::VectorXd neumann = neumann_sum(q0, rhs, options.neumann_terms);
            const double scale = out.z.norm();
            out.neumann_relative_gap = scale > 0.0 ? (neumann - out.z).norm() / scale : (neumann - out.z).norm();
            break;
        }
    }
    return out;
}

TaylorResidualReport taylor_residual_scan(const ParametrizedMap& f, const Eigen::VectorXd& u0,
                                          const Eigen::VectorXd& phi0, const Eigen::MatrixXd& p0,
                                          const Eigen::MatrixXd& q0, const Eigen::VectorXd& direction,
                                          std::span<const double> deltas, const TaylorScanOptions& options) {
    const StateNorm coarse = options.coarse_norm ? options.coarse_norm : StateNorm(max_abs_norm);
    const StateNorm pnorm = options.param_norm ? options.param_norm : StateNorm(max_abs_norm);
    const Eigen::VectorXd f0 = f(u0, phi0);

    TaylorResidualReport rep;
    std::vector<double> hs, rs;
    const double floor = options.noise_factor * options.solver.tol;
    for (double delta : deltas) {
        const Eigen::VectorXd h = delta * direction;
        const Eigen::VectorXd phi_h = solve_fixed_point(f, u0 + h, phi0, options.solver).phi_star;
        const Eigen::VectorXd z = phi_h - phi0;
        const Eigen::VectorXd r = f(u0 + h, phi0 + z) - f0 - p0 * h - q0 * z;
        TaylorResidualRow row;
        row.delta = delta;
        row.h_norm = pnorm(h);
        row.z_norm = coarse(z);
        row.residual_norm = coarse(r);
        const double denom = row.h_norm + row.z_norm;
        row.normalized_residual = denom > 0.0 ? row.residual_norm / denom : 0.0;
        rep.rows.push_back(row);
        if (row.residual_norm > floor && row.h_norm > 0.0) {
            hs.push_back(row.h_norm);
            rs.push_back(row.residual_norm);
        }
    }
    if (hs.size() >= 2) {
        rep.fit = fit_loglog(hs, rs);
        rep.fitted_order = rep.fit->slope;
    } else {
        rep.fitted_order = std::numeric_limits<double>::infinity();
    }
    return rep;
}

SecondDerivativeResult second_derivative_graded(const ParametrizedMap& f, const GradedCoefficients& c,
                                                const Eigen::VectorXd& u0, const Eigen::VectorXd& phi_init,
                                                const Eigen::VectorXd& h1, const Eigen::VectorXd& h2,
                                                const FixedPointOptions& options) {
    if (!c.q20) throw Error(ErrorCode::MissingCoefficient, "second-order coefficient Q(2,0) not supplied");
    if (!c.q11) throw Error(ErrorCode::MissingCoefficient, "second-order coefficient Q(1,1) not supplied");
    if (!c.q02) throw Error(ErrorCode::MissingCoefficient, "second-order coefficient Q(0,2) not supplied");
    if (!c.q01 && !f.q) throw Error(ErrorCode::MissingCoefficient, "coefficient Q(0,1) not supplied");
    if (!c.q10 && !f.p) throw Error(ErrorCode::MissingCoefficient, "coefficient Q(1,0) not supplied");

    SecondDerivativeResult out;
    out.phi = solve_fixed_point(f, u0, phi_init, options).phi_star;
    const Eigen::MatrixXd q01 = c.q01 ? c.q01(u0, out.phi) : f.q(u0, out.phi);
    const auto first_order = [&](const Eigen::VectorXd& h) -> Eigen::VectorXd {
        return c.q10 ? c.q10(u0, out.phi, h) : Eigen::VectorXd(f.p(u0, out.phi) * h);
    };

    const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(q01.rows(), q01.cols()) - q01;
    out.min_singular_value = Eigen::BDCSVD<Eigen::MatrixXd>(a).singularValues().minCoeff();
    if (!(out.min_singular_value > 1e-10)) {
        throw Error(ErrorCode::SingularSystem, "Id - Q(0,1) is numerically singular");
    }
    const auto lu = a.partialPivLu();
    out.first_h1 = lu.solve(first_order(h1));
    out.first_h2 = lu.solve(first_order(h2));

    const Eigen::VectorXd r2 = c.q20(u0, out.phi, h1, h2) + c.q11(u0, out.phi, h1, out.first_h2) +
                               c.q11(u0, out.phi, h2, out.first_h1) + c.q02(u0, out.phi, out.first_h1, out.first_h2);
    out.value = lu.solve(r2);
    return out;
}

} // namespace fpdiff
