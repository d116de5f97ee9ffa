#include <doctest.h>

#include <cmath>
#include <random>

#include "fpdiff/error.hpp"
#include "fpdiff/finite_difference.hpp"
#include "fpdiff/fixed_point.hpp"

using namespace fpdiff;

namespace {

// F(u, phi) = phi / 2 + u on R^n (param_dim = n).
ParametrizedMap half_plus_u(Eigen::Index n) {
    ParametrizedMap f;
    f.state_dim = n;
    f.param_dim = n;
    f.apply = [](const Eigen::VectorXd& u, const Eigen::VectorXd& phi) -> Eigen::VectorXd { return 0.5 * phi + u; };
    f.p = [n](const Eigen::VectorXd&, const Eigen::VectorXd&) -> Eigen::MatrixXd { return Eigen::MatrixXd::Identity(n, n); };
    f.q = [n](const Eigen::VectorXd&, const Eigen::VectorXd&) -> Eigen::MatrixXd {
        return 0.5 * Eigen::MatrixXd::Identity(n, n);
    };
    return f;
}

// Scalar F(u, phi) = phi / 2 + u^2 / 2, fixed point u^2.
ParametrizedMap half_plus_square() {
    ParametrizedMap f;
    f.state_dim = 1;
    f.param_dim = 1;
    f.apply = [](const Eigen::VectorXd& u, const Eigen::VectorXd& phi) -> Eigen::VectorXd {
        return 0.5 * phi + 0.5 * u.cwiseProduct(u);
    };
    f.p = [](const Eigen::VectorXd& u, const Eigen::VectorXd&) -> Eigen::MatrixXd { return u; };
    f.q = [](const Eigen::VectorXd&, const Eigen::VectorXd&) -> Eigen::MatrixXd { return Eigen::MatrixXd::Constant(1, 1, 0.5); };
    return f;
}

Eigen::VectorXd vec(std::initializer_list<double> xs) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v[i++] = x;
    return v;
}

} // namespace

TEST_CASE("solver on the linear map converges to 2u with ratio one half") {
    const ParametrizedMap f = half_plus_u(1);
    FixedPointOptions o;
    o.tol = 1e-12;
    const FixedPointResult r = solve_fixed_point(f, vec({1.0}), vec({0.0}), o);
    CHECK(r.phi_star[0] == doctest::Approx(2.0).epsilon(1e-11));
    CHECK(r.residual <= 1e-12);
    CHECK(r.contraction_estimate == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("solver started at the fixed point stops immediately") {
    const ParametrizedMap f = half_plus_u(3);
    const Eigen::VectorXd u = vec({1.0, -0.5, 0.25});
    const FixedPointResult r = solve_fixed_point(f, u, Eigen::VectorXd(2.0 * u));
    CHECK(r.iterations <= 1);
    CHECK((r.phi_star - 2.0 * u).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("solver accepts a map whose square contracts but which itself expands") {
    // Q = [[0, 4], [1/16, 0]]: ||Q|| = 4, Q^2 = diag(1/4, 1/4).
    ParametrizedMap f;
    f.state_dim = 2;
    f.param_dim = 2;
    Eigen::MatrixXd q(2, 2);
    q << 0.0, 4.0, 1.0 / 16.0, 0.0;
    f.apply = [q](const Eigen::VectorXd& u, const Eigen::VectorXd& phi) -> Eigen::VectorXd { return q * phi + u; };
    const Eigen::VectorXd u = vec({1.0, 1.0});
    const FixedPointResult r = solve_fixed_point(f, u, vec({0.0, 0.0}));
    const Eigen::VectorXd exact = (Eigen::MatrixXd::Identity(2, 2) - q).partialPivLu().solve(u);
    CHECK((r.phi_star - exact).cwiseAbs().maxCoeff() < 1e-11);
}

TEST_CASE("solver errors: divergence and iteration cap") {
    ParametrizedMap grow;
    grow.state_dim = 1;
    grow.param_dim = 1;
    grow.apply = [](const Eigen::VectorXd& u, const Eigen::VectorXd& phi) -> Eigen::VectorXd { return 1.5 * phi + u; };
    try {
        solve_fixed_point(grow, vec({1.0}), vec({0.0}));
        FAIL("expected NonContraction");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NonContraction);
    }

    ParametrizedMap slow = half_plus_u(1);
    slow.apply = [](const Eigen::VectorXd& u, const Eigen::VectorXd& phi) -> Eigen::VectorXd { return 0.999 * phi + u; };
    FixedPointOptions o;
    o.max_iter = 50;
    try {
        solve_fixed_point(slow, vec({1.0}), vec({0.0}), o);
        FAIL("expected MaxIterExceeded");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MaxIterExceeded);
    }
}

TEST_CASE("continuity scan on the linear map gives 2|delta| and exactly 0 at delta 0") {
    const ParametrizedMap f = half_plus_u(1);
    const std::vector<Eigen::VectorXd> dirs = {vec({1.0})};
    const std::vector<double> deltas = {0.5, 0.25, -0.125, 0.0};
    FixedPointOptions o;
    o.tol = 1e-14;
    const auto rows = continuity_scan(f, vec({0.3}), vec({0.0}), dirs, deltas, max_abs_norm, o);
    REQUIRE(rows.size() == 4);
    for (const auto& r : rows) CHECK(r.distance == doctest::Approx(2.0 * std::abs(r.delta)).epsilon(1e-12));
    CHECK(rows[3].distance == 0.0);
}

TEST_CASE("derivative formula: zero Q, half identity, singular system") {
    std::mt19937_64 rng(21);
    const Eigen::MatrixXd p = Eigen::MatrixXd::Random(5, 3);
    const Eigen::VectorXd h = vec({0.2, -1.0, 0.7});
    const ResolventSolution z0 = fixed_point_derivative(p, Eigen::MatrixXd::Zero(5, 5), h);
    CHECK((z0.z - p * h).cwiseAbs().maxCoeff() < 1e-15);

    const Eigen::VectorXd hh = vec({1.0, -2.0, 3.0});
    const ResolventSolution z1 =
        fixed_point_derivative(Eigen::MatrixXd::Identity(3, 3), 0.5 * Eigen::MatrixXd::Identity(3, 3), hh);
    CHECK((z1.z - 2.0 * hh).cwiseAbs().maxCoeff() < 1e-14);
    REQUIRE(z1.neumann_relative_gap.has_value());
    CHECK(*z1.neumann_relative_gap < 1e-8);

    try {
        fixed_point_derivative(Eigen::MatrixXd::Identity(3, 3), Eigen::MatrixXd::Identity(3, 3), hh);
        FAIL("expected SingularSystem");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SingularSystem);
    }
}

TEST_CASE("direct solve and Neumann sum agree for random contractions") {
    std::mt19937_64 rng(22);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 10; ++trial) {
        Eigen::MatrixXd q(20, 20);
        for (Eigen::Index i = 0; i < q.size(); ++i) q.data()[i] = g(rng);
        q *= 0.85 / q.operatorNorm();
        Eigen::VectorXd h(20);
        for (Eigen::Index i = 0; i < 20; ++i) h[i] = g(rng);
        const ResolventSolution s = fixed_point_derivative(Eigen::MatrixXd::Identity(20, 20), q, h);
        const Eigen::VectorXd neumann = neumann_sum(q, h, 200);
        CHECK((neumann - s.z).norm() / s.z.norm() < 1e-8);
        CHECK(estimate_power_norm(q, 1) <= 0.85 + 1e-9);
    }
}

TEST_CASE("derivative formula matches central differences of the solved fixed point") {
    // F(u, phi) = A phi + sin(u) B component-wise: phi(u) = (I - A)^{-1} B sin(u).
    Eigen::MatrixXd a(3, 3), b(3, 2);
    a << 0.2, 0.1, 0.0, -0.1, 0.3, 0.05, 0.0, 0.2, -0.25;
    b << 1.0, 0.0, 0.5, -1.0, 0.0, 2.0;
    ParametrizedMap f;
    f.state_dim = 3;
    f.param_dim = 2;
    f.apply = [=](const Eigen::VectorXd& u, const Eigen::VectorXd& phi) -> Eigen::VectorXd {
        return a * phi + b * u.array().sin().matrix();
    };
    f.p = [=](const Eigen::VectorXd& u, const Eigen::VectorXd&) -> Eigen::MatrixXd {
        return b * u.array().cos().matrix().asDiagonal();
    };
    f.q = [=](const Eigen::VectorXd&, const Eigen::VectorXd&) -> Eigen::MatrixXd { return a; };
    const Eigen::VectorXd u0 = vec({0.3, -0.7}), h = vec({1.0, 0.5});
    FixedPointOptions o;
    o.tol = 1e-15;
    const Eigen::VectorXd phi0 = solve_fixed_point(f, u0, Eigen::VectorXd::Zero(3), o).phi_star;
    const ResolventSolution z = fixed_point_derivative(f.p(u0, phi0), f.q(u0, phi0), h);
    const auto solve_at = [&](double s) -> Eigen::VectorXd {
        return solve_fixed_point(f, Eigen::VectorXd(u0 + s * h), phi0, o).phi_star;
    };
    for (double step : {1e-3, 1e-4}) {
        const Eigen::VectorXd fd = richardson_first(solve_at, step);
        CHECK((fd - z.z).cwiseAbs().maxCoeff() < 1e-6);
    }
}

TEST_CASE("Taylor residual scan: exact development on an affine map") {
    const ParametrizedMap f = half_plus_u(4);
    const Eigen::VectorXd u0 = vec({0.1, 0.2, 0.3, 0.4});
    FixedPointOptions o;
    o.tol = 1e-15;
    const Eigen::VectorXd phi0 = solve_fixed_point(f, u0, Eigen::VectorXd::Zero(4), o).phi_star;
    const std::vector<double> deltas = {0.5, 0.25, 0.125, 0.0625};
    TaylorScanOptions so;
    so.solver = o;
    const TaylorResidualReport r =
        taylor_residual_scan(f, u0, phi0, f.p(u0, phi0), f.q(u0, phi0), Eigen::VectorXd::Ones(4), deltas, so);
    REQUIRE(r.rows.size() == 4);
    for (const auto& row : r.rows) CHECK(row.residual_norm <= 1e-12);
    CHECK(std::isinf(r.fitted_order));
}

TEST_CASE("Taylor residual scan: quadratic remainder gives order two") {
    // F(u, phi) = phi / 2 + u^2 / 2 at u0 = 0.5.
    const ParametrizedMap f = half_plus_square();
    const Eigen::VectorXd u0 = vec({0.5});
    FixedPointOptions o;
    o.tol = 1e-15;
    const Eigen::VectorXd phi0 = solve_fixed_point(f, u0, vec({0.0}), o).phi_star;
    std::vector<double> deltas;
    for (int e = 2; e <= 10; ++e) deltas.push_back(std::ldexp(1.0, -e));
    TaylorScanOptions so;
    so.solver = o;
    const TaylorResidualReport r =
        taylor_residual_scan(f, u0, phi0, f.p(u0, phi0), f.q(u0, phi0), vec({1.0}), deltas, so);
    CHECK(r.fitted_order == doctest::Approx(2.0).epsilon(0.02));
    for (std::size_t i = 1; i < r.rows.size(); ++i) {
        CHECK(r.rows[i].normalized_residual <= 2.0 * r.rows[i - 1].normalized_residual);
    }
}

TEST_CASE("second derivative on scalar examples") {
    GradedCoefficients c;
    c.q20 = [](const Eigen::VectorXd&, const Eigen::VectorXd&, const Eigen::VectorXd& a, const Eigen::VectorXd& b) -> Eigen::VectorXd {
        return a.cwiseProduct(b);
    };
    c.q11 = [](const Eigen::VectorXd&, const Eigen::VectorXd&, const Eigen::VectorXd&, const Eigen::VectorXd&) -> Eigen::VectorXd {
        return Eigen::VectorXd::Zero(1);
    };
    c.q02 = c.q11;
    const SecondDerivativeResult sq = second_derivative_graded(half_plus_square(), c, vec({0.0}), vec({0.0}), vec({1.0}), vec({1.0}));
    CHECK(sq.value[0] == doctest::Approx(2.0).epsilon(1e-12));

    GradedCoefficients zero;
    zero.q20 = c.q11;
    zero.q11 = c.q11;
    zero.q02 = c.q11;
    const SecondDerivativeResult lin = second_derivative_graded(half_plus_u(1), zero, vec({0.7}), vec({0.0}), vec({1.0}), vec({-2.0}));
    CHECK(std::abs(lin.value[0]) < 1e-15);

    GradedCoefficients missing = c;
    missing.q02 = nullptr;
    try {
        second_derivative_graded(half_plus_square(), missing, vec({0.0}), vec({0.0}), vec({1.0}), vec({1.0}));
        FAIL("expected MissingCoefficient");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MissingCoefficient);
    }
}

TEST_CASE("embedding constant estimate over samples") {
    ScalePair sp;
    sp.project = [](const Eigen::VectorXd& v) { return v; };
    sp.fine_norm = [](const Eigen::VectorXd& v) { return v.cwiseAbs().sum(); };
    sp.coarse_norm = max_abs_norm;
    std::vector<Eigen::VectorXd> samples = {vec({1.0, 1.0}), vec({1.0, 0.0}), vec({-3.0, 1.0})};
    CHECK(estimate_embedding_constant(sp, samples) == doctest::Approx(1.0));
}
