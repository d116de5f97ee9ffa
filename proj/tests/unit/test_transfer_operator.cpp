#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fpdiff/error.hpp"
#include "fpdiff/finite_difference.hpp"
#include "fpdiff/transfer_operator.hpp"

using namespace fpdiff;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Eigen::VectorXd scalar(double u) { return Eigen::VectorXd::Constant(1, u); }

MapFamily doubling() { return trig_family(2, {}, {TrigSeries{}}); }

// T(u, x) = 2x + u sin(2 pi k x) / (2 pi k).
MapFamily perturbed_doubling(int k = 1, double u_power = 1.0) {
    return trig_family(2, {}, {TrigSeries::normalized({{k, 1.0, 0.0}})}, u_power);
}

double sup(const Eigen::VectorXd& v) { return v.cwiseAbs().maxCoeff(); }

GridFunction random_trig(std::size_t n, std::mt19937_64& rng, int degree = 3) {
    std::uniform_real_distribution<double> c(-1.0, 1.0);
    TrigSeries s;
    s.c0 = c(rng);
    for (int k = 1; k <= degree; ++k) s.terms.push_back({k, c(rng), c(rng)});
    return GridFunction::from_function(n, [&](double x) { return s.value(x); });
}

// Bisection on the monotone lift: all y in [0, 1) with T(u, y) = x + k.
std::vector<double> bisection_branches(const MapFamily& map, const Eigen::VectorXd& u, double x) {
    std::vector<double> out;
    const double t0 = map.map(u, 0.0);
    for (int k = -4; k <= 4; ++k) {
        const double target = x + k;
        if (target < t0 || target >= t0 + map.degree) continue;
        double lo = 0.0, hi = 1.0;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (map.map(u, mid) < target ? lo : hi) = mid;
        }
        out.push_back(0.5 * (lo + hi));
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

TEST_CASE("inverse branches of the doubling map") {
    auto b0 = inverse_branches(doubling(), scalar(0.0), 0.0);
    std::sort(b0.begin(), b0.end());
    REQUIRE(b0.size() == 2);
    CHECK(b0[0] == doctest::Approx(0.0));
    CHECK(b0[1] == doctest::Approx(0.5));
    auto b1 = inverse_branches(doubling(), scalar(0.0), 0.5);
    std::sort(b1.begin(), b1.end());
    CHECK(b1[0] == doctest::Approx(0.25));
    CHECK(b1[1] == doctest::Approx(0.75));
}

TEST_CASE("inverse branches of the perturbed map match bisection") {
    const MapFamily m = perturbed_doubling();
    auto b = inverse_branches(m, scalar(0.1), 0.3);
    for (double& y : b) y = wrap_unit(y);
    std::sort(b.begin(), b.end());
    const auto oracle = bisection_branches(m, scalar(0.1), 0.3);
    REQUIRE(b.size() == oracle.size());
    for (std::size_t i = 0; i < b.size(); ++i) CHECK(std::abs(b[i] - oracle[i]) < 1e-12);
}

TEST_CASE("check_expanding examples") {
    CHECK(check_expanding(doubling(), {scalar(0.0)}, 256) == doctest::Approx(2.0));
    const MapFamily m = perturbed_doubling();
    CHECK(check_expanding(m, {scalar(-0.5), scalar(0.0), scalar(0.5)}, 256) == doctest::Approx(1.5).epsilon(1e-12));
    try {
        check_expanding(m, {scalar(2.0)}, 256);
        FAIL("expected NotExpanding");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NotExpanding);
    }
}

TEST_CASE("assembled operators of the doubling map") {
    const std::size_t n = 32;
    const Eigen::VectorXd one = Eigen::VectorXd::Ones(n);
    const OperatorMatrix half = assemble_operator(doubling(), constant_weight(0.5, 1), scalar(0.0), n);
    CHECK(sup(half * one - one) < 1e-13);
    const OperatorMatrix full = assemble_operator(doubling(), constant_weight(1.0, 1), scalar(0.0), n);
    CHECK(sup(full * one - 2.0 * one) < 1e-13);

    const OperatorMatrix geo = assemble_operator(doubling(), geometric_weight(doubling()), scalar(0.0), n);
    const Eigen::RowVectorXd leb = Eigen::RowVectorXd::Constant(n, 1.0 / n);
    CHECK(sup((leb * geo - leb).transpose()) < 1e-12);
}

TEST_CASE("transfer duality for the geometric weight of a perturbed map") {
    const MapFamily m = perturbed_doubling();
    const std::size_t n = 64;
    const OperatorMatrix l = assemble_operator(m, geometric_weight(m), scalar(0.3), n);
    std::mt19937_64 rng(31);
    for (int t = 0; t < 5; ++t) {
        const GridFunction f = random_trig(n, rng, 5);
        CHECK(std::abs(GridFunction(Eigen::VectorXd(l * f.to_vector())).mean() - f.mean()) < 1e-11);
    }
}

TEST_CASE("spectral data: doubling with g = 1/2 and g = 1") {
    const std::size_t n = 64;
    const SpectralData d = reference_spectral_data(assemble_operator(doubling(), constant_weight(0.5, 1), scalar(0.0), n));
    CHECK(d.lambda == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sup(d.phi.to_vector().array() - 1.0) < 1e-9);
    CHECK(sup(d.ell.to_vector().array() - 1.0 / n) < 1e-9 / n);
    CHECK(d.sigma_estimate <= 0.51);
    CHECK(sup(d.pi * d.pi - d.pi) < 1e-10);

    const SpectralData d2 = reference_spectral_data(assemble_operator(doubling(), constant_weight(1.0, 1), scalar(0.0), n));
    CHECK(d2.lambda == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(sup(d2.phi.to_vector().array() - 1.0) < 1e-9);
}

TEST_CASE("spectral data invariants on a perturbed family") {
    const MapFamily m = perturbed_doubling();
    const Weight g = exponential_weight(geometric_weight(m), TrigSeries{0.0, {{1, 0.0, 0.5}}}, {TrigSeries{}});
    const OperatorMatrix l = assemble_operator(m, g, scalar(0.2), 64);
    const SpectralData d = reference_spectral_data(l);
    const Eigen::VectorXd phi = d.phi.to_vector();
    CHECK(sup(l * phi - d.lambda * phi) / (d.lambda * sup(phi)) < 1e-9);
    CHECK(sup(d.pi * d.pi - d.pi) < 1e-10);
    CHECK(sup(d.pi * d.r) < 1e-9);
    CHECK(sup(d.r * d.pi) < 1e-9);
    CHECK(sup(l - d.lambda * d.pi - d.r) < 1e-9);
    CHECK(d.ell.pair(d.phi) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(phi.minCoeff() > 0.0);
    CHECK(d.ell.to_vector().minCoeff() >= -1e-12);
    CHECK(d.sigma_estimate < 1.0);
}

TEST_CASE("spectral data raises NonPositiveEigenfunction and NoSpectralGap") {
    // A rotation-like operator with no positive leading eigenvector.
    const std::size_t n = 8;
    OperatorMatrix neg = -Eigen::MatrixXd::Identity(n, n);
    try {
        reference_spectral_data(neg);
        FAIL("expected a spectral error");
    } catch (const Error& e) {
        CHECK((e.code() == ErrorCode::NonPositiveEigenfunction || e.code() == ErrorCode::NoSpectralGap));
    }
    OperatorMatrix id = Eigen::MatrixXd::Identity(n, n);
    try {
        reference_spectral_data(id);
        FAIL("expected NoSpectralGap");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NoSpectralGap);
    }
}

TEST_CASE("resolution doubling changes analytic eigendata very little") {
    const MapFamily m = perturbed_doubling();
    const Weight g = geometric_weight(m);
    const SpectralData a = reference_spectral_data(assemble_operator(m, g, scalar(0.3), 64));
    const SpectralData b = reference_spectral_data(assemble_operator(m, g, scalar(0.3), 128));
    CHECK(std::abs(a.lambda - b.lambda) < 1e-10);
    double diff = 0.0;
    for (std::size_t j = 0; j < 64; ++j) diff = std::max(diff, std::abs(a.phi[j] - b.phi[2 * j]));
    CHECK(diff < 1e-8);
}

TEST_CASE("normalized map: fixed point, linearization and iterate identity") {
    const MapFamily m = perturbed_doubling();
    const Weight g = geometric_weight(m);
    const std::size_t n = 64;
    const Eigen::VectorXd u = scalar(0.25);
    const OperatorMatrix l = assemble_operator(m, g, u, n);
    const SpectralData d = reference_spectral_data(l);
    const ParametrizedMap f = normalized_map(m, g, d.ell, n);
    const Eigen::VectorXd phi = d.phi.to_vector();
    CHECK(sup(f(u, phi) - phi) < 1e-12);
    CHECK(sup(f.q(u, phi) - d.r / d.lambda) < 1e-10);
    CHECK(sup(f.q(u, phi) - (l / d.lambda - d.pi)) < 1e-10);

    std::mt19937_64 rng(32);
    Eigen::VectorXd psi = random_trig(n, rng).to_vector().array().abs() + 0.5;
    Eigen::VectorXd iter = psi;
    for (int k = 0; k < 3; ++k) iter = f(u, iter);
    const Eigen::VectorXd l3 = l * (l * (l * psi));
    CHECK(sup(iter - l3 / d.ell.pair(l3)) < 1e-11);

    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(n);
    try {
        f(u, zero);
        FAIL("expected NormalizationVanishes");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NormalizationVanishes);
    }
}

TEST_CASE("d_u operator: u-independent family, linear weight, finite differences") {
    const std::size_t n = 32;
    const Eigen::VectorXd h = scalar(1.0);
    CHECK(sup(d_u_operator(doubling(), constant_weight(0.5, 1), scalar(0.1), h, n).reshaped()) == 0.0);

    // g(u, x) = 1/2 + u c(x) with c(x) = 0.1 cos(2 pi x).
    const auto c = [](double x) { return 0.1 * std::cos(kTwoPi * x); };
    Weight lin;
    lin.value = [c](const Eigen::VectorXd& u, double x) { return 0.5 + u[0] * c(x); };
    lin.dx = [](const Eigen::VectorXd& u, double x) { return -0.1 * kTwoPi * u[0] * std::sin(kTwoPi * x); };
    lin.du = [c](const Eigen::VectorXd&, double x) -> Eigen::VectorXd { return Eigen::VectorXd::Constant(1, c(x)); };
    Weight cw;
    cw.value = [c](const Eigen::VectorXd&, double x) { return c(x); };
    cw.dx = [](const Eigen::VectorXd&, double x) { return -0.1 * kTwoPi * std::sin(kTwoPi * x); };
    cw.du = [](const Eigen::VectorXd&, double) -> Eigen::VectorXd { return Eigen::VectorXd::Zero(1); };
    const OperatorMatrix du = d_u_operator(doubling(), lin, scalar(0.2), h, n);
    CHECK(sup((du - assemble_operator(doubling(), cw, scalar(0.2), n)).reshaped()) < 1e-13);

    const MapFamily m = perturbed_doubling();
    const Weight half = constant_weight(0.5, 1);
    const double u0 = 0.2, step = 1e-5;
    const OperatorMatrix fd =
        (assemble_operator(m, half, scalar(u0 + step), n) - assemble_operator(m, half, scalar(u0 - step), n)) / (2 * step);
    CHECK(sup((d_u_operator(m, half, scalar(u0), h, n) - fd).reshaped()) < 1e-7);
}

TEST_CASE("linear response: u-independent family, FD oracle, orthogonality") {
    const LinearResponse zero = linear_response(doubling(), constant_weight(0.5, 1), scalar(0.0), scalar(1.0), 32);
    CHECK(zero.response.sup_norm() == 0.0);

    const MapFamily m = perturbed_doubling();
    const Weight g = geometric_weight(m);
    const std::size_t n = 128;
    for (double u0 : {0.0, 0.1}) {
        const LinearResponse r = linear_response(m, g, scalar(u0), scalar(1.0), n);
        const auto phi_at = [&](double s) -> Eigen::VectorXd {
            return spectral_data(assemble_operator(m, g, scalar(u0 + s), n), r.data.ell).phi.to_vector();
        };
        const Eigen::VectorXd fd = central_difference(phi_at, 1e-4);
        const Eigen::VectorXd w = r.response.to_vector();
        if (u0 == 0.0) {
            // The doubling operator annihilates cos(2 pi x), so the response vanishes at u = 0.
            CHECK(sup(w) < 1e-12);
            CHECK(sup(w - fd) <= 1e-4 * r.data.phi.sup_norm());
        } else {
            CHECK(sup(fd) > 1e-3);
            CHECK(sup(w - fd) <= 1e-4 * sup(fd));
        }
        CHECK(std::abs(r.data.ell.pair(r.response)) < 1e-12);
    }
}

TEST_CASE("linear response equals the fixed-point derivative of the normalized map") {
    const MapFamily m = perturbed_doubling();
    const Weight g = exponential_weight(geometric_weight(m), TrigSeries{0.0, {{2, 0.3, 0.0}}}, {TrigSeries{}});
    const std::size_t n = 64;
    const Eigen::VectorXd u0 = scalar(0.15), h = scalar(1.0);
    const LinearResponse r = linear_response(m, g, u0, h, n);
    const ParametrizedMap f = normalized_map(m, g, r.data.ell, n);
    const Eigen::VectorXd phi0 = r.data.phi.to_vector();
    const ResolventSolution z = fixed_point_derivative(f.p(u0, phi0), f.q(u0, phi0), h);
    CHECK(sup(z.z - r.response.to_vector()) < 1e-9);
}

TEST_CASE("eigenvalue derivative: scaled weight and FD oracle") {
    // g_u = exp(u) / 2 on the doubling map: lambda_u = exp(u).
    const Weight scaled = exponential_weight(constant_weight(0.5, 1), TrigSeries{}, {TrigSeries{1.0, {}}});
    CHECK(lambda_derivative(doubling(), scaled, scalar(0.0), scalar(1.0), 32) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(lambda_derivative(doubling(), constant_weight(0.5, 1), scalar(0.0), scalar(1.0), 32) == 0.0);

    const MapFamily m = perturbed_doubling();
    const Weight g = exponential_weight(geometric_weight(m), TrigSeries{0.0, {{1, 0.0, 0.5}}}, {TrigSeries{0.0, {{1, 0.2, 1.0}}}});
    const std::size_t n = 64;
    const Eigen::VectorXd u0 = scalar(0.1);
    const double dl = lambda_derivative(m, g, u0, scalar(1.0), n);
    const double fd = richardson_first(
        [&](double s) { return reference_spectral_data(assemble_operator(m, g, scalar(0.1 + s), n)).lambda; }, 1e-4);
    CHECK(std::abs(dl - fd) / std::abs(fd) < 1e-5);
}

TEST_CASE("Gibbs measure examples") {
    const std::size_t n = 32;
    const SpectralData d = reference_spectral_data(assemble_operator(doubling(), constant_weight(0.5, 1), scalar(0.0), n));
    CHECK(gibbs_measure(d, GridFunction::constant(n, 1.0)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(gibbs_measure(d, GridFunction::from_function(n, [](double x) { return std::sin(kTwoPi * x); }))) < 1e-12);

    const MapFamily m = perturbed_doubling();
    const SpectralData p = reference_spectral_data(assemble_operator(m, geometric_weight(m), scalar(0.3), 64));
    const GridFunction bump = GridFunction::from_function(64, [](double x) { return std::pow(std::sin(std::numbers::pi * x), 2); });
    CHECK(gibbs_measure(p, bump) > 0.0);
}

TEST_CASE("measure response: constant observable, u-independent family, FD oracle") {
    const MapFamily m = perturbed_doubling();
    const Weight g = geometric_weight(m);
    const std::size_t n = 64;
    CHECK(std::abs(measure_response(m, g, scalar(0.1), scalar(1.0), GridFunction::constant(n, 1.0), n)) < 1e-12);
    CHECK(measure_response(doubling(), constant_weight(0.5, 1), scalar(0.0), scalar(1.0),
                           GridFunction::from_function(n, [](double x) { return std::cos(kTwoPi * x); }), n) == 0.0);

    const Weight gp = exponential_weight(g, TrigSeries{0.0, {{1, 0.0, 0.5}}}, {TrigSeries{0.0, {{2, 0.4, 0.0}}}});
    std::mt19937_64 rng(33);
    const GridFunction a = random_trig(n, rng);
    const double dm = measure_response(m, gp, scalar(0.1), scalar(1.0), a, n);
    const SpectralData ref = reference_spectral_data(assemble_operator(m, gp, scalar(0.1), n));
    const auto m_at = [&](double s) {
        return gibbs_measure(reference_spectral_data(assemble_operator(m, gp, scalar(0.1 + s), n)), a);
    };
    const double fd = central_difference(m_at, 1e-4);
    CHECK(std::abs(dm - fd) / std::max(std::abs(fd), 1e-12) < 1e-4);
    (void)ref;
}

TEST_CASE("pressure derivative: constant and mean-zero observables, random observables") {
    const std::size_t n = 32;
    const PressureCheck c = pressure_s_derivative(doubling(), constant_weight(0.5, 1), scalar(0.0), GridFunction::constant(n, 0.7), n);
    CHECK(c.derivative == doctest::Approx(0.7).epsilon(1e-9));
    const PressureCheck s = pressure_s_derivative(doubling(), constant_weight(0.5, 1), scalar(0.0),
                                                  GridFunction::from_function(n, [](double x) { return std::sin(kTwoPi * x); }), n);
    CHECK(std::abs(s.derivative) < 1e-8);

    const MapFamily m = perturbed_doubling();
    const Weight g = exponential_weight(geometric_weight(m), TrigSeries{0.0, {{1, 0.0, 0.5}}}, {TrigSeries{}});
    std::mt19937_64 rng(34);
    for (int t = 0; t < 5; ++t) {
        const PressureCheck pc = pressure_s_derivative(m, g, scalar(0.2), random_trig(64, rng), 64);
        CHECK(pc.relative_gap < 1e-6);
    }
}

TEST_CASE("Hoelder scans: u-independent, smooth, and forced exponent") {
    const GridFunction psi = GridFunction::from_function(
        64, [](double x) { return 1.0 + 0.5 * std::cos(kTwoPi * x) + 0.25 * std::sin(2 * kTwoPi * x); });
    std::vector<double> deltas;
    for (int e = 4; e <= 12; ++e) deltas.push_back(std::ldexp(1.0, -e));
    const std::vector<Eigen::VectorXd> dirs = {scalar(1.0)};

    const HolderScanReport flat = holder_scan_operator(doubling(), constant_weight(0.5, 1), scalar(0.0), dirs, deltas, 0.9, 0.3, psi);
    CHECK(flat.operator_fit.identically_zero);
    CHECK(flat.eigenvector_fit.identically_zero);

    const MapFamily smooth = perturbed_doubling();
    const HolderScanReport s = holder_scan_operator(smooth, geometric_weight(smooth), scalar(0.1), dirs, deltas, 0.9, 0.1, psi);
    CHECK(s.operator_fit.slope >= 0.7);
    CHECK(s.eigenvector_fit.slope >= 0.7);

    const MapFamily kink = perturbed_doubling(2, 0.5);
    const HolderScanReport k = holder_scan_operator(kink, geometric_weight(kink), scalar(0.0), dirs, deltas, 0.9, 0.3, psi);
    CHECK(k.operator_fit.slope == doctest::Approx(0.5).epsilon(0.2));
    CHECK(std::abs(k.operator_fit.slope - 0.5) <= 0.1);
    CHECK(std::abs(k.eigenvector_fit.slope - 0.5) <= 0.1);

    CHECK_THROWS_AS(holder_scan_operator(smooth, geometric_weight(smooth), scalar(0.1), dirs, deltas, 0.3, 0.9, psi), Error);
}

TEST_CASE("remainder decays geometrically on the perturbed doubling family") {
    const MapFamily m = perturbed_doubling();
    const Weight g = exponential_weight(geometric_weight(m), TrigSeries{0.0, {{1, 0.0, 2.0}}}, {TrigSeries{}});
    const SpectralData d = reference_spectral_data(assemble_operator(m, g, scalar(0.2), 64));
    std::mt19937_64 rng(35);
    const Eigen::VectorXd v = random_trig(64, rng, 4).to_vector();
    const std::vector<double> norms = spectral_decay(d, v, 30);
    std::vector<double> ns, ys;
    for (std::size_t k = 0; k < norms.size(); ++k) {
        if (norms[k] > 1e-13 * sup(v)) {
            ns.push_back(k + 1.0);
            ys.push_back(norms[k]);
        }
    }
    REQUIRE(ns.size() >= 20);
    const ExponentFit fit = fit_loglinear(ns, ys);
    CHECK(std::exp(fit.slope) < 0.9);
    CHECK(fit.r_squared > 0.99);
}
