#include "fpdiff/transfer_operator.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <random>
#include <sstream>
#include <string>

#include "fpdiff/error.hpp"

namespace fpdiff {

namespace {

constexpr double kBranchTol = 1e-13;
constexpr int kBranchSteps = 50;

double solve_branch(const MapFamily& map, const Eigen::VectorXd& u, double target) {
    double lo = 0.0, hi = 1.0;
    const double t0 = map.map(u, 0.0);
    double y = std::clamp((target - t0) / static_cast<double>(map.degree), 0.0, 1.0);
    for (int step = 0; step < kBranchSteps; ++step) {
        const double f = map.map(u, y) - target;
        if (std::abs(f) < kBranchTol) return y;
        if (f < 0.0) {
            lo = y;
        } else {
            hi = y;
        }
        const double slope = map.dx(u, y);
        double next = y - f / slope;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (next == y) break;
        y = next;
    }
    const double f = map.map(u, y) - target;
    if (std::abs(f) < kBranchTol) return y;
    std::ostringstream msg;
    msg << "inverse branch for target " << target << " did not converge (residual " << f << ")";
    throw Error(ErrorCode::BranchNewtonFailure, msg.str());
}

Eigen::VectorXd unit(Eigen::Index dim, Eigen::Index p) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(dim);
    e[p] = 1.0;
    return e;
}

double sup(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

} // namespace

std::vector<double> inverse_branches(const MapFamily& map, const Eigen::VectorXd& u, double x) {
    const double t0 = map.map(u, 0.0);
    const double t1 = map.map(u, 1.0);
    if (!(t1 - t0 > 0.0) || std::abs(t1 - t0 - map.degree) > 1e-9) {
        throw Error(ErrorCode::NotExpanding, "map lift is not an orientation-preserving degree-" +
                                                 std::to_string(map.degree) + " covering");
    }
    // First target x + k at or above T(u, 0); each target then has exactly one preimage in [0, 1].
    const double k0 = std::ceil(t0 - x);
    std::vector<double> ys;
    ys.reserve(static_cast<std::size_t>(map.degree));
    for (int i = 0; i < map.degree; ++i) {
        double y = solve_branch(map, u, x + k0 + i);
        if (y >= 1.0) y -= 1.0;
        ys.push_back(y);
    }
    std::sort(ys.begin(), ys.end());
    return ys;
}

OperatorMatrix assemble_operator(const MapFamily& map, const Weight& g, const Eigen::VectorXd& u, std::size_t n) {
    OperatorMatrix l = OperatorMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const double x = static_cast<double>(i) / static_cast<double>(n);
        for (double y : inverse_branches(map, u, x)) {
            l.row(static_cast<Eigen::Index>(i)) += g.value(u, y) * interpolation_row(n, y);
        }
    }
    return l;
}

OperatorMatrix d_u_operator(const MapFamily& map, const Weight& g, const Eigen::VectorXd& u,
                            const Eigen::VectorXd& h, std::size_t n) {
    if (h.size() != map.param_dim) throw Error(ErrorCode::InvalidArgument, "direction has wrong parameter dimension");
    OperatorMatrix out = OperatorMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const double x = static_cast<double>(i) / static_cast<double>(n);
        for (double y : inverse_branches(map, u, x)) {
            const double psi_h = -map.du(u, y).dot(h) / map.dx(u, y);
            const double value_coeff = g.du(u, y).dot(h) + g.dx(u, y) * psi_h;
            const double slope_coeff = g.value(u, y) * psi_h;
            auto row = out.row(static_cast<Eigen::Index>(i));
            row += value_coeff * interpolation_row(n, y);
            if (slope_coeff != 0.0) row += slope_coeff * derivative_row(n, y);
        }
    }
    return out;
}

OperatorMatrix twisted_operator(const OperatorMatrix& l, const GridFunction& a, double s) {
    return l * (s * a.to_vector()).array().exp().matrix().asDiagonal();
}

SpectralData spectral_data(const OperatorMatrix& l, const DualFunctional& ell_ref, const SpectralOptions& options) {
    const Eigen::Index n = l.rows();
    if (l.cols() != n || static_cast<Eigen::Index>(ell_ref.size()) != n) {
        throw Error(ErrorCode::InvalidArgument, "spectral_data: dimension mismatch");
    }
    int iterations = 0;
    Eigen::VectorXd v = Eigen::VectorXd::Ones(n);
    for (; iterations < options.max_iter; ++iterations) {
        Eigen::VectorXd w = l * v;
        const double s = sup(w);
        if (!(s > 0.0) || !std::isfinite(s)) throw Error(ErrorCode::NonPositiveEigenfunction, "power iterate vanished");
        w /= s;
        if (w.sum() < 0.0) w = -w;
        const double change = sup(w - v);
        v = std::move(w);
        if (change < options.power_tol) break;
    }
    const double c = ell_ref.pair(v);
    if (!(std::abs(c) > 1e-300)) throw Error(ErrorCode::NormalizationVanishes, "<ell_ref, phi> vanishes");
    Eigen::VectorXd phi = v / c;
    if (phi.minCoeff() <= 0.0) {
        throw Error(ErrorCode::NonPositiveEigenfunction,
                    "leading eigenvector changes sign (min " + std::to_string(phi.minCoeff()) + ")");
    }

    Eigen::VectorXd ell = DualFunctional::lebesgue(static_cast<std::size_t>(n)).to_vector();
    for (int it = 0; it < options.max_iter; ++it) {
        Eigen::VectorXd w = l.transpose() * ell;
        const double s = w.cwiseAbs().sum();
        if (!(s > 0.0) || !std::isfinite(s)) throw Error(ErrorCode::NoSpectralGap, "adjoint power iterate vanished");
        w /= s;
        const double change = (w - ell).cwiseAbs().sum();
        ell = std::move(w);
        if (change < options.power_tol) break;
    }
    const double lp = ell.dot(phi);
    if (!(std::abs(lp) > 1e-300)) throw Error(ErrorCode::NormalizationVanishes, "<ell, phi> vanishes");
    ell /= lp;

    const double lambda = ell.dot(l * phi);
    OperatorMatrix pi = phi * ell.transpose();
    OperatorMatrix r = l - lambda * pi;

    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Eigen::VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i) z[i] = dist(rng);
    z -= pi * z;
    const double z0 = z.norm();
    double sigma = 0.0;
    if (z0 > 0.0) {
        for (int m = 0; m < options.sigma_steps; ++m) z = r * z;
        sigma = std::pow(z.norm() / z0, 1.0 / options.sigma_steps) / std::abs(lambda);
    }
    if (sigma >= 1.0 - options.gap_margin) {
        throw Error(ErrorCode::NoSpectralGap, "subdominant ratio estimate " + std::to_string(sigma));
    }
    return SpectralData{lambda,          GridFunction(phi), DualFunctional(ell), std::move(pi), std::move(r),
                        sigma,           iterations};
}

SpectralData reference_spectral_data(const OperatorMatrix& l0, const SpectralOptions& options) {
    SpectralData data = spectral_data(l0, DualFunctional::lebesgue(static_cast<std::size_t>(l0.rows())), options);
    // With ell_ref = ell itself, <ell, phi> = 1 already holds.
    return data;
}

ParametrizedMap normalized_map(const MapFamily& map, const Weight& g, const DualFunctional& ell_ref, std::size_t n) {
    struct Cache {
        std::mutex mutex;
        Eigen::VectorXd u;
        OperatorMatrix l;
    };
    auto cache = std::make_shared<Cache>();
    auto op = [=](const Eigen::VectorXd& u) {
        std::lock_guard<std::mutex> lock(cache->mutex);
        if (cache->u.size() != u.size() || cache->u != u) {
            cache->l = assemble_operator(map, g, u, n);
            cache->u = u;
        }
        return cache->l;
    };
    const Eigen::VectorXd ell = ell_ref.to_vector();
    auto normaliser = [](double c) {
        if (!(std::abs(c) >= 1e-13)) {
            throw Error(ErrorCode::NormalizationVanishes, "<ell_ref, L phi> = " + std::to_string(c));
        }
        return c;
    };

    ParametrizedMap f;
    f.state_dim = static_cast<Eigen::Index>(n);
    f.param_dim = map.param_dim;
    f.apply = [=](const Eigen::VectorXd& u, const Eigen::VectorXd& phi) -> Eigen::VectorXd {
        const Eigen::VectorXd lphi = op(u) * phi;
        return lphi / normaliser(ell.dot(lphi));
    };
    f.q = [=](const Eigen::VectorXd& u, const Eigen::VectorXd& phi) -> Eigen::MatrixXd {
        const OperatorMatrix l = op(u);
        const Eigen::VectorXd lphi = l * phi;
        const double c = normaliser(ell.dot(lphi));
        return l / c - (lphi * (ell.transpose() * l)) / (c * c);
    };
    f.p = [=](const Eigen::VectorXd& u, const Eigen::VectorXd& phi) -> Eigen::MatrixXd {
        const Eigen::VectorXd lphi = op(u) * phi;
        const double c = normaliser(ell.dot(lphi));
        Eigen::MatrixXd p(static_cast<Eigen::Index>(n), map.param_dim);
        for (Eigen::Index k = 0; k < map.param_dim; ++k) {
            const Eigen::VectorXd dl = d_u_operator(map, g, u, unit(map.param_dim, k), n) * phi;
            p.col(k) = dl / c - (ell.dot(dl) / (c * c)) * lphi;
        }
        return p;
    };
    return f;
}

std::vector<double> spectral_decay(const SpectralData& data, const Eigen::VectorXd& v, int n_max) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(std::max(n_max, 0)));
    Eigen::VectorXd z = v;
    for (int k = 1; k <= n_max; ++k) {
        z = data.r * z / data.lambda;
        out.push_back(sup(z));
    }
    return out;
}

LinearResponse linear_response(const MapFamily& map, const Weight& g, const Eigen::VectorXd& u0,
                               const Eigen::VectorXd& h, std::size_t n, const SpectralOptions& options) {
    SpectralData data = reference_spectral_data(assemble_operator(map, g, u0, n), options);
    OperatorMatrix du_l = d_u_operator(map, g, u0, h, n);
    const auto dim = static_cast<Eigen::Index>(n);
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(dim, dim);
    const Eigen::VectorXd phi = data.phi.to_vector();
    const Eigen::VectorXd rhs = (id - data.pi) * (du_l * phi) / data.lambda;
    const Eigen::MatrixXd a = id - data.r / data.lambda;
    const double smin = Eigen::BDCSVD<Eigen::MatrixXd>(a).singularValues().minCoeff();
    if (!(smin > 1e-10)) {
        throw Error(ErrorCode::SingularSystem, "Id - R/lambda is numerically singular (" + std::to_string(smin) + ")");
    }
    const Eigen::VectorXd w = a.partialPivLu().solve(rhs);
    return LinearResponse{GridFunction(w), std::move(data), std::move(du_l), smin};
}

double lambda_derivative(const LinearResponse& r) {
    const Eigen::VectorXd ell = r.data.ell.to_vector();
    const Eigen::VectorXd phi = r.data.phi.to_vector();
    const Eigen::VectorXd w = r.response.to_vector();
    const Eigen::MatrixXd l0 = r.data.lambda * r.data.pi + r.data.r;
    return ell.dot(r.du_l * phi) + ell.dot(l0 * w);
}

double lambda_derivative(const MapFamily& map, const Weight& g, const Eigen::VectorXd& u0, const Eigen::VectorXd& h,
                         std::size_t n, const SpectralOptions& options) {
    return lambda_derivative(linear_response(map, g, u0, h, n, options));
}

double gibbs_measure(const SpectralData& data, const GridFunction& f) { return data.ell.pair(f * data.phi); }

double measure_response(const LinearResponse& r, const GridFunction& a) {
    const auto dim = static_cast<Eigen::Index>(r.data.phi.size());
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(dim, dim);
    const Eigen::VectorXd ell = r.data.ell.to_vector();
    const Eigen::MatrixXd lhs = (id - r.data.r / r.data.lambda).transpose();
    const Eigen::VectorXd rhs = (id - r.data.pi).transpose() * (r.du_l.transpose() * ell) / r.data.lambda;
    const Eigen::VectorXd dell = lhs.partialPivLu().solve(rhs);
    const Eigen::VectorXd a_phi = (a * r.data.phi).to_vector();
    const Eigen::VectorXd a_w = (a * r.response).to_vector();
    return dell.dot(a_phi) + ell.dot(a_w);
}

double measure_response(const MapFamily& map, const Weight& g, const Eigen::VectorXd& u0, const Eigen::VectorXd& h,
                        const GridFunction& a, std::size_t n, const SpectralOptions& options) {
    return measure_response(linear_response(map, g, u0, h, n, options), a);
}

PressureCheck pressure_s_derivative(const MapFamily& map, const Weight& g, const Eigen::VectorXd& u,
                                    const GridFunction& a, std::size_t n, double step,
                                    const SpectralOptions& options) {
    if (a.size() != n) throw Error(ErrorCode::InvalidArgument, "observable resolution differs from operator");
    const OperatorMatrix l = assemble_operator(map, g, u, n);
    const DualFunctional lebesgue = DualFunctional::lebesgue(n);
    const auto pressure = [&](double s) { return std::log(spectral_data(twisted_operator(l, a, s), lebesgue, options).lambda); };
    PressureCheck out;
    const double d1 = (pressure(step) - pressure(-step)) / (2.0 * step);
    const double d2 = (pressure(2.0 * step) - pressure(-2.0 * step)) / (4.0 * step);
    out.derivative = (4.0 * d1 - d2) / 3.0;
    out.measure = gibbs_measure(reference_spectral_data(l, options), a);
    out.relative_gap = std::abs(out.derivative - out.measure) / std::max(1.0, std::abs(out.measure));
    return out;
}

HolderScanReport holder_scan_operator(const MapFamily& map, const Weight& g, const Eigen::VectorXd& u0,
                                      const std::vector<Eigen::VectorXd>& directions,
                                      const std::vector<double>& deltas, double alpha, double beta,
                                      const GridFunction& psi, const SpectralOptions& options,
                                      const PairSampling& sampling) {
    if (!(0.0 <= beta && beta < alpha && alpha < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "holder scan requires 0 <= beta < alpha < 1");
    }
    const std::size_t n = psi.size();
    const OperatorMatrix l0 = assemble_operator(map, g, u0, n);
    const SpectralData ref0 = reference_spectral_data(l0, options);
    // Same normalization path as the scanned points, so u-independent families give exact zeros.
    const SpectralData ref = spectral_data(l0, ref0.ell, options);
    const double psi_norm = cr_norm(psi, Smoothness{1, alpha}, sampling).value();
    if (!(psi_norm > 0.0)) throw Error(ErrorCode::InvalidArgument, "test function must be non-zero");
    const Eigen::VectorXd test = psi.to_vector() / psi_norm;
    const Smoothness coarse{1, beta};

    HolderScanReport rep;
    std::vector<double> xs, op_ys, eig_ys;
    for (std::size_t d = 0; d < directions.size(); ++d) {
        for (double delta : deltas) {
            const Eigen::VectorXd u = u0 + delta * directions[d];
            const OperatorMatrix l = assemble_operator(map, g, u, n);
            HolderScanRow row{d, delta, 0.0, 0.0};
            row.operator_difference = cr_norm(GridFunction(Eigen::VectorXd((l - l0) * test)), coarse, sampling).value();
            const SpectralData data = spectral_data(l, ref.ell, options);
            row.eigenvector_difference = cr_norm(data.phi - ref.phi, coarse, sampling).value();
            rep.rows.push_back(row);
            xs.push_back(std::abs(delta));
            op_ys.push_back(row.operator_difference);
            eig_ys.push_back(row.eigenvector_difference);
        }
    }
    rep.operator_fit = fit_loglog(xs, op_ys);
    rep.eigenvector_fit = fit_loglog(xs, eig_ys);
    return rep;
}

} // namespace fpdiff
