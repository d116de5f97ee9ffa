#include "fpdiff/cli/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "fpdiff/cli/report.hpp"
#include "fpdiff/error.hpp"
#include "fpdiff/finite_difference.hpp"
#include "fpdiff/fixed_point.hpp"
#include "fpdiff/model_problems.hpp"
#include "fpdiff/transfer_operator.hpp"

namespace fpdiff::cli {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double sup(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

class Session {
public:
    Session(const ExperimentConfig& cfg, const RunOptions& options, RunReport& report)
        : cfg_(cfg), options_(options), report_(report) {}

    const ExperimentConfig& cfg() const { return cfg_; }
    bool wants(const std::string& name) const { return cfg_.wants(name); }
    double tol(const std::string& name, double fallback) const { return cfg_.tolerance(name, fallback); }

    void scalar(const std::string& name, double value) { report_.scalars.emplace_back(name, value); }

    /// value <= threshold passes.
    void at_most(const std::string& name, double value, double threshold, std::string detail = {}) {
        record(name, value <= threshold, value, threshold, std::move(detail));
    }
    void at_least(const std::string& name, double value, double threshold, std::string detail = {}) {
        record(name, value >= threshold, value, threshold, std::move(detail));
    }
    void record(const std::string& name, bool passed, double value, double threshold, std::string detail = {}) {
        if (!wants(name)) return;
        report_.assertions.push_back({name, passed, value, threshold, std::move(detail)});
    }

    void csv(const std::string& stem, const CsvTable& table) {
        const auto path = options_.out_dir / (std::string(kind_name(cfg_.kind)) + "_" + stem + ".csv");
        emit_csv(table, path);
        report_.csv_paths.push_back(path);
    }
    void svg(const std::string& stem, const SvgChart& chart) {
        if (!options_.plot) return;
        const auto path = options_.out_dir / (std::string(kind_name(cfg_.kind)) + "_" + stem + ".svg");
        emit_svg(chart, path);
        report_.svg_paths.push_back(path);
    }

private:
    const ExperimentConfig& cfg_;
    const RunOptions& options_;
    RunReport& report_;
};

SpectralOptions spectral_options(const ExperimentConfig& cfg) {
    SpectralOptions o;
    o.seed = cfg.seed;
    return o;
}

GridFunction random_trig(std::size_t n, int degree, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    TrigSeries s;
    s.c0 = coef(rng);
    for (int k = 1; k <= degree; ++k) s.terms.push_back({k, coef(rng), coef(rng)});
    return GridFunction::from_function(n, [&](double x) { return s.value(x); });
}

GridFunction series_function(std::size_t n, const TrigSeries& s) {
    return GridFunction::from_function(n, [&](double x) { return s.value(x); });
}

std::vector<double> node_positions(std::size_t n) {
    std::vector<double> xs(n);
    for (std::size_t j = 0; j < n; ++j) xs[j] = static_cast<double>(j) / static_cast<double>(n);
    return xs;
}

std::vector<double> as_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

double relative(double diff, double scale, double floor) { return diff / std::max(scale, floor); }

struct TransferSetup {
    MapFamily map;
    Weight weight;
    std::size_t n;
    Eigen::VectorXd u0;
};

TransferSetup transfer_setup(const ExperimentConfig& cfg) {
    TransferSetup s{build_map(cfg), {}, cfg.resolution, cfg.u0};
    s.weight = build_weight(cfg, s.map);
    check_expanding(s.map, {s.u0}, 4 * s.n);
    return s;
}

void run_spectrum(Session& s) {
    const auto& cfg = s.cfg();
    const TransferSetup t = transfer_setup(cfg);
    const OperatorMatrix l = assemble_operator(t.map, t.weight, t.u0, t.n);
    const SpectralData data = reference_spectral_data(l, spectral_options(cfg));
    const Eigen::VectorXd phi = data.phi.to_vector();
    const Eigen::VectorXd ell = data.ell.to_vector();
    s.scalar("lambda", data.lambda);
    s.scalar("sigma_estimate", data.sigma_estimate);
    s.scalar("power_iterations", data.iterations);

    if (cfg.expect_lambda) s.at_most("lambda", std::abs(data.lambda - *cfg.expect_lambda), s.tol("lambda", 1e-10));
    s.at_most("eigen_residual", sup(l * phi - data.lambda * phi) / (std::abs(data.lambda) * sup(phi)),
              s.tol("eigen_residual", 1e-9));
    s.at_most("projector", (data.pi * data.pi - data.pi).cwiseAbs().maxCoeff(), s.tol("projector", 1e-10));
    const double lnorm = l.cwiseAbs().maxCoeff();
    const double decomposition = std::max({(l - data.lambda * data.pi - data.r).cwiseAbs().maxCoeff(),
                                           (data.pi * data.r).cwiseAbs().maxCoeff(),
                                           (data.r * data.pi).cwiseAbs().maxCoeff()}) /
                                 lnorm;
    s.at_most("decomposition", decomposition, s.tol("decomposition", 1e-9));
    s.record("positive", phi.minCoeff() > 0.0 && ell.minCoeff() >= -1e-12, phi.minCoeff(), 0.0,
             "min phi; ell min " + format_number(ell.minCoeff()));
    s.at_most("gap", data.sigma_estimate, 1.0 - 1e-3);

    std::mt19937_64 rng(cfg.seed);
    const Eigen::VectorXd v = random_trig(t.n, 4, rng).to_vector();
    const std::vector<double> norms = spectral_decay(data, v, 30);
    CsvTable decay{{"n", "norm"}, {}};
    std::vector<double> ns, ys;
    for (std::size_t k = 0; k < norms.size(); ++k) {
        decay.add_row({static_cast<double>(k + 1), norms[k]});
        if (norms[k] > 1e-13 * sup(v)) {
            ns.push_back(static_cast<double>(k + 1));
            ys.push_back(norms[k]);
        }
    }
    s.csv("decay", decay);
    if (ns.size() >= 3) {
        const ExponentFit fit = fit_loglinear(ns, ys);
        const double sigma = std::exp(fit.slope);
        s.scalar("decay_sigma", sigma);
        s.scalar("decay_r_squared", fit.r_squared);
        s.record("decay", sigma < s.tol("decay", 0.9) && fit.r_squared > 0.99, sigma, s.tol("decay", 0.9),
                 "R^2 " + format_number(fit.r_squared) + " over " + std::to_string(ns.size()) + " points");
    } else {
        s.scalar("decay_sigma", 0.0);
        s.record("decay", true, 0.0, s.tol("decay", 0.9), "remainder reached round-off within 3 steps");
    }
    if (cfg.weight == "geometric" && cfg.potential.empty()) {
        const Eigen::VectorXd lv = l * v;
        const double gap = std::abs(lv.mean() - v.mean());
        s.at_most("duality", gap, s.tol("duality", 1e-11));
    }

    CsvTable table{{"node", "x", "phi", "ell_weight"}, {}};
    for (std::size_t j = 0; j < t.n; ++j) {
        const auto k = static_cast<Eigen::Index>(j);
        table.add_row({static_cast<double>(j), data.phi.node(j), phi[k], ell[k]});
    }
    s.csv("eigendata", table);
    s.svg("decay", {"remainder decay", "n", "||lambda^-n R^n v||", false, true,
                    {{"norm", [&] { std::vector<double> x; for (std::size_t k = 0; k < norms.size(); ++k) x.push_back(k + 1.0); return x; }(), norms}}});
}

void run_solve(Session& s) {
    const auto& cfg = s.cfg();
    const TransferSetup t = transfer_setup(cfg);
    const OperatorMatrix l = assemble_operator(t.map, t.weight, t.u0, t.n);
    const SpectralData data = reference_spectral_data(l, spectral_options(cfg));
    const ParametrizedMap f = normalized_map(t.map, t.weight, data.ell, t.n);
    FixedPointOptions fo;
    fo.tol = cfg.tol;
    const Eigen::VectorXd start = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(t.n)) /
                                  data.ell.pair(Eigen::VectorXd::Ones(static_cast<Eigen::Index>(t.n)));
    const FixedPointResult res = solve_fixed_point(f, t.u0, start, fo);
    const double lambda = data.ell.pair(Eigen::VectorXd(l * res.phi_star));
    s.scalar("iterations", res.iterations);
    s.scalar("residual", res.residual);
    s.scalar("contraction_estimate", res.contraction_estimate);
    s.scalar("lambda", lambda);
    s.at_most("residual", res.residual, cfg.tol);
    s.record("positive", res.phi_star.minCoeff() > 0.0, res.phi_star.minCoeff(), 0.0);
    s.at_most("matches_eigenvector", sup(res.phi_star - data.phi.to_vector()), s.tol("matches_eigenvector", 1e-9));
    if (cfg.expect_lambda) s.at_most("lambda", std::abs(lambda - *cfg.expect_lambda), s.tol("lambda", 1e-10));

    CsvTable table{{"node", "x", "phi"}, {}};
    for (std::size_t j = 0; j < t.n; ++j) {
        table.add_row({static_cast<double>(j), data.phi.node(j), res.phi_star[static_cast<Eigen::Index>(j)]});
    }
    s.csv("fixed_point", table);
    s.svg("fixed_point", {"fixed point", "x", "phi", false, false, {{"phi", node_positions(t.n), as_std(res.phi_star)}}});
}

void run_response(Session& s) {
    const auto& cfg = s.cfg();
    const TransferSetup t = transfer_setup(cfg);
    const SpectralOptions so = spectral_options(cfg);
    const Eigen::VectorXd& h = cfg.direction;
    const LinearResponse resp = linear_response(t.map, t.weight, t.u0, h, t.n, so);
    const Eigen::VectorXd w = resp.response.to_vector();
    const Eigen::VectorXd phi0 = resp.data.phi.to_vector();
    const double step = cfg.fd_step;

    const auto data_at = [&](double s_) {
        return spectral_data(assemble_operator(t.map, t.weight, Eigen::VectorXd(t.u0 + s_ * h), t.n), resp.data.ell, so);
    };
    const SpectralData plus = data_at(step), minus = data_at(-step);
    const Eigen::VectorXd fd = (plus.phi.to_vector() - minus.phi.to_vector()) / (2.0 * step);
    const double diff = sup(w - fd);
    const double rel = fd.size() && sup(fd) > 1e-8 * sup(phi0) ? diff / sup(fd) : diff / sup(phi0);
    s.scalar("lambda", resp.data.lambda);
    s.scalar("response_sup", sup(w));
    s.scalar("fd_relative_error", rel);
    s.at_most("fd_match", rel, s.tol("fd_match", 1e-4));

    if (s.wants("route_equivalence")) {
        const ParametrizedMap f = normalized_map(t.map, t.weight, resp.data.ell, t.n);
        const ResolventSolution z = fixed_point_derivative(f.p(t.u0, phi0), f.q(t.u0, phi0), h);
        s.scalar("route_difference", sup(z.z - w));
        s.at_most("route_equivalence", sup(z.z - w), s.tol("route_equivalence", 1e-9));
    }
    s.at_most("orthogonality", std::abs(resp.data.ell.pair(w)), s.tol("orthogonality", 1e-10) * std::max(1.0, sup(w)));

    if (s.wants("lambda_fd")) {
        const double dl = lambda_derivative(resp);
        const double dl_fd = richardson_first([&](double s_) { return data_at(s_).lambda; }, step);
        // Relative to |lambda| * 1e-6 when the derivative itself is that small (lambda constant in u).
        const double r = relative(std::abs(dl - dl_fd), std::abs(dl_fd), 1e-6 * std::abs(resp.data.lambda));
        s.scalar("lambda_derivative", dl);
        s.scalar("lambda_derivative_fd", dl_fd);
        s.at_most("lambda_fd", r, s.tol("lambda_fd", 1e-5));
    }
    if (cfg.observable && s.wants("measure_fd")) {
        const GridFunction a = series_function(t.n, *cfg.observable);
        const double dm = measure_response(resp, a);
        const double dm_fd = (gibbs_measure(plus, a) - gibbs_measure(minus, a)) / (2.0 * step);
        s.scalar("measure_response", dm);
        s.scalar("measure_response_fd", dm_fd);
        s.at_most("measure_fd", relative(std::abs(dm - dm_fd), std::abs(dm_fd), 1e-6), s.tol("measure_fd", 1e-4));
    }

    CsvTable table{{"node", "x", "response", "fd", "abs_diff"}, {}};
    for (std::size_t j = 0; j < t.n; ++j) {
        const auto k = static_cast<Eigen::Index>(j);
        table.add_row({static_cast<double>(j), resp.data.phi.node(j), w[k], fd[k], std::abs(w[k] - fd[k])});
    }
    s.csv("response", table);
    s.svg("response", {"linear response", "x", "D_u phi h", false, false,
                       {{"formula", node_positions(t.n), as_std(w)}, {"finite difference", node_positions(t.n), as_std(fd)}}});
}

void run_taylor(Session& s) {
    const auto& cfg = s.cfg();
    const TransferSetup t = transfer_setup(cfg);
    const SpectralData data = reference_spectral_data(assemble_operator(t.map, t.weight, t.u0, t.n), spectral_options(cfg));
    const ParametrizedMap f = normalized_map(t.map, t.weight, data.ell, t.n);
    const Eigen::VectorXd phi0 = data.phi.to_vector();
    TaylorScanOptions so;
    so.solver.tol = cfg.tol;
    const Smoothness coarse{1, cfg.beta};
    const PairSampling sampling{4096, cfg.seed};
    so.coarse_norm = [&](const Eigen::VectorXd& v) { return cr_norm(GridFunction(v), coarse, sampling).value(); };
    const TaylorResidualReport rep =
        taylor_residual_scan(f, t.u0, phi0, f.p(t.u0, phi0), f.q(t.u0, phi0), cfg.direction, cfg.deltas, so);
    const double gamma = cfg.alpha - cfg.beta;
    s.scalar("fitted_order", rep.fitted_order);
    s.at_least("order", rep.fitted_order, s.tol("order", 1.0 + gamma - 0.15));
    CsvTable table{{"delta", "h_norm", "z_norm", "residual_norm", "normalized_residual"}, {}};
    std::vector<double> hs, rs;
    for (const auto& r : rep.rows) {
        table.add_row({r.delta, r.h_norm, r.z_norm, r.residual_norm, r.normalized_residual});
        hs.push_back(r.h_norm);
        rs.push_back(r.residual_norm);
    }
    s.csv("residuals", table);
    s.svg("residuals", {"Taylor residual", "||h||", "residual", true, true, {{"residual", hs, rs}}});
}

void run_hoelder(Session& s) {
    const auto& cfg = s.cfg();
    const TransferSetup t = transfer_setup(cfg);
    const GridFunction psi = GridFunction::from_function(
        t.n, [](double x) { return 1.0 + 0.5 * std::cos(kTwoPi * x) + 0.25 * std::sin(2.0 * kTwoPi * x); });
    const HolderScanReport rep = holder_scan_operator(t.map, t.weight, t.u0, {cfg.direction}, cfg.deltas, cfg.alpha,
                                                      cfg.beta, psi, spectral_options(cfg), PairSampling{4096, cfg.seed});
    // A parameter entering as |u|^p caps the exponent at p.
    const double gamma = std::min(cfg.alpha - cfg.beta, std::min(cfg.u_power, 1.0));
    s.scalar("operator_slope", rep.operator_fit.slope);
    s.scalar("eigenvector_slope", rep.eigenvector_fit.slope);
    s.at_least("operator_slope", rep.operator_fit.slope, s.tol("operator_slope", gamma - 0.1),
               rep.operator_fit.identically_zero ? "differences vanish identically" : "");
    s.at_least("eigenvector_slope", rep.eigenvector_fit.slope, s.tol("eigenvector_slope", gamma - 0.1),
               rep.eigenvector_fit.identically_zero ? "differences vanish identically" : "");
    if (cfg.expect_slope) {
        const double window = s.tol("expected_slope", 0.1);
        const double off = std::max(std::abs(rep.operator_fit.slope - *cfg.expect_slope),
                                    std::abs(rep.eigenvector_fit.slope - *cfg.expect_slope));
        s.at_most("expected_slope", off, window);
    }
    CsvTable table{{"direction", "delta", "operator_difference", "eigenvector_difference"}, {}};
    std::vector<double> ds, os, es;
    for (const auto& r : rep.rows) {
        table.add_row({static_cast<double>(r.direction), r.delta, r.operator_difference, r.eigenvector_difference});
        ds.push_back(std::abs(r.delta));
        os.push_back(r.operator_difference);
        es.push_back(r.eigenvector_difference);
    }
    s.csv("scan", table);
    s.svg("scan", {"Hoelder scan", "delta", "C^{1+beta} difference", true, true,
                   {{"operator", ds, os}, {"eigenvector", ds, es}}});
}

void run_pressure(Session& s) {
    const auto& cfg = s.cfg();
    const TransferSetup t = transfer_setup(cfg);
    std::mt19937_64 rng(cfg.seed);
    CsvTable table{{"observable", "pressure_derivative", "gibbs_measure", "relative_gap"}, {}};
    double worst = 0.0;
    for (std::size_t k = 0; k < cfg.observables; ++k) {
        const GridFunction a = random_trig(t.n, 3, rng);
        const PressureCheck pc = pressure_s_derivative(t.map, t.weight, t.u0, a, t.n, 1e-4, spectral_options(cfg));
        worst = std::max(worst, pc.relative_gap);
        table.add_row({static_cast<double>(k), pc.derivative, pc.measure, pc.relative_gap});
    }
    s.scalar("max_relative_gap", worst);
    s.at_most("identity", worst, s.tol("identity", 1e-6));
    s.csv("identity", table);
}

void run_composition(Session& s) {
    const auto& cfg = s.cfg();
    CompositionMapConfig cc{cfg.r, cfg.r_prime, cfg.interval_points};
    cc.validate();
    const std::size_t m = cc.m;
    const auto dim = static_cast<Eigen::Index>(m);
    const ParametrizedMap f = composition_map(cc);
    FixedPointOptions fo;
    fo.tol = 1e-14;

    const CompositionSuiteReport suite = composition_constraint_suite(cc, cfg.samples, cfg.seed);
    s.scalar("max_image_norm", suite.max_image_norm);
    s.scalar("max_contraction_ratio", suite.max_contraction_ratio);
    s.scalar("max_q_ratio", suite.max_q_ratio);
    s.at_most("ball", suite.max_image_norm, s.tol("ball", cc.r + 1e-9));
    s.at_most("contraction", suite.max_contraction_ratio, s.tol("contraction", cc.contraction_constant() + 0.01));
    s.at_most("q_bound", suite.max_q_ratio, s.tol("q_bound", (1.0 + cc.r) / 2.0));
    CsvTable suite_table{{"metric", "value", "bound"}, {}};
    suite_table.add_row({std::string("image_c11_norm"), suite.max_image_norm, cc.r});
    suite_table.add_row({std::string("c1_contraction_ratio"), suite.max_contraction_ratio, cc.contraction_constant()});
    suite_table.add_row({std::string("q_sup_ratio"), suite.max_q_ratio, (1.0 + cc.r) / 2.0});
    s.csv("constraints", suite_table);

    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(dim);
    if (s.wants("zero_fixed_point")) {
        const Eigen::VectorXd init = interval_samples(m, [](double t) { return 0.1 * std::cos(t); });
        const FixedPointResult res = solve_fixed_point(f, zero, init, fo);
        s.at_most("zero_fixed_point", sup(res.phi_star), s.tol("zero_fixed_point", 1e-12));
    }
    if (s.wants("derivative_at_zero")) {
        const Eigen::VectorXd h = interval_samples(m, [](double t) { return 0.1 * std::sin(std::numbers::pi * t) + 0.05; });
        const ResolventSolution z = fixed_point_derivative(f.p(zero, zero), f.q(zero, zero), h);
        const Eigen::VectorXd oracle = h + Eigen::VectorXd::Constant(dim, h[dim / 2]);
        const Eigen::VectorXd fd = richardson_first(
            [&](double e) -> Eigen::VectorXd { return solve_fixed_point(f, Eigen::VectorXd(e * h), zero, fo).phi_star; },
            cfg.fd_step);
        const double err = std::max(sup(z.z - oracle), sup(z.z - fd)) / sup(oracle);
        s.scalar("derivative_at_zero_fd_gap", sup(z.z - fd) / sup(oracle));
        s.at_most("derivative_at_zero", err, s.tol("derivative_at_zero", 1e-6));
    }
    const double c = cfg.slope_c;
    if (s.wants("constant_parameter")) {
        const Eigen::VectorXd u = Eigen::VectorXd::Constant(dim, c);
        const FixedPointResult res = solve_fixed_point(f, u, zero, fo);
        const ResolventSolution z =
            fixed_point_derivative(f.p(u, res.phi_star), f.q(u, res.phi_star), Eigen::VectorXd::Ones(dim));
        const double err = std::max(sup(res.phi_star.array() - 2.0 * c), sup(z.z.array() - 2.0));
        s.at_most("constant_parameter", err, s.tol("constant_parameter", 1e-9));
    }
    if (s.wants("taylor_order")) {
        const Eigen::VectorXd u0 = interval_samples(m, [](double t) { return 0.05 + 0.1 * t; });
        const Eigen::VectorXd h = interval_samples(m, [](double t) { return 0.1 * std::sin(std::numbers::pi * t); });
        const Eigen::VectorXd phi0 = solve_fixed_point(f, u0, zero, fo).phi_star;
        TaylorScanOptions so;
        so.solver = fo;
        const TaylorResidualReport rep =
            taylor_residual_scan(f, u0, phi0, f.p(u0, phi0), f.q(u0, phi0), h, cfg.deltas, so);
        s.scalar("taylor_fitted_order", rep.fitted_order);
        s.at_least("taylor_order", rep.fitted_order, s.tol("taylor_order", 1.9));
        CsvTable table{{"delta", "h_norm", "z_norm", "residual_norm", "normalized_residual"}, {}};
        for (const auto& r : rep.rows) table.add_row({r.delta, r.h_norm, r.z_norm, r.residual_norm, r.normalized_residual});
        s.csv("taylor", table);
    }
    if (s.wants("second_derivative") || s.wants("second_derivative_closed_form")) {
        const Eigen::VectorXd u0 = interval_samples(m, [c](double t) { return c * t; });
        const Eigen::VectorXd h = interval_samples(m, [](double t) { return t; });
        const SecondDerivativeCheck chk = composition_second_derivative_check(cc, u0, h, cfg.fd_step);
        const double a2 = std::pow(1.0 - 2.0 * c, -1.5);
        const Eigen::VectorXd closed = a2 * h;
        s.scalar("second_derivative_fd_relative_error", chk.relative_error);
        s.at_most("second_derivative", chk.relative_error, s.tol("second_derivative", 1e-3));
        s.at_most("second_derivative_closed_form", sup(chk.engine - closed) / sup(closed),
                  s.tol("second_derivative_closed_form", 1e-8));
        CsvTable table{{"node", "t", "engine", "finite_difference", "closed_form"}, {}};
        for (std::size_t j = 0; j < m; ++j) {
            const auto k = static_cast<Eigen::Index>(j);
            table.add_row({static_cast<double>(j), h[k], chk.engine[k], chk.finite_difference[k], closed[k]});
        }
        s.csv("second_derivative", table);
    }
    if (s.wants("second_derivative_constant")) {
        const SecondDerivativeCheck chk = composition_second_derivative_check(
            cc, Eigen::VectorXd::Constant(dim, c), Eigen::VectorXd::Ones(dim), cfg.fd_step);
        s.at_most("second_derivative_constant", chk.engine_norm, s.tol("second_derivative_constant", 1e-6));
    }
}

AffineMapConfig affine_config(const ExperimentConfig& cfg) {
    AffineMapConfig ac;
    const double a = cfg.affine_amplitude, alpha = cfg.alpha;
    ac.alpha = alpha;
    ac.epsilon = cfg.affine_epsilon;
    ac.m = cfg.interval_points;
    if (cfg.affine_family == "kink") {
        ac.g = [a, alpha](double t, double u) { return a * std::pow(std::abs(u), alpha) * std::cos(t); };
    } else if (cfg.affine_family == "lipschitz") {
        ac.g = [a](double t, double u) { return a * (u * std::cos(t) + 0.5 * std::sin(t)); };
        ac.g_u = [a](double t, double) { return a * std::cos(t); };
        ac.g_uu = [](double, double) { return 0.0; };
    } else if (cfg.affine_family == "cubic") {
        ac.g = [a](double t, double u) { return a * (0.5 * t * t * t - u * t + 0.5 * u * u * t * t + 0.3); };
        ac.g_u = [a](double t, double u) { return a * (-t + u * t * t); };
        ac.g_uu = [a](double t, double) { return a * t * t; };
    } else {
        ac.g = [a](double, double) { return a; };
        ac.g_u = [](double, double) { return 0.0; };
        ac.g_uu = [](double, double) { return 0.0; };
    }
    ac.validate();
    return ac;
}

void run_affine(Session& s) {
    const auto& cfg = s.cfg();
    const AffineMapConfig ac = affine_config(cfg);
    const ParametrizedMap f = affine_map(ac);
    const auto dim = static_cast<Eigen::Index>(ac.m);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(dim);
    FixedPointOptions fo;
    fo.tol = 1e-15;
    const bool polynomial = cfg.affine_family == "cubic" || cfg.affine_family == "constant";

    if (s.wants("series")) {
        double worst = 0.0;
        CsvTable table{{"u", "node", "t", "solver", "series", "abs_diff"}, {}};
        for (double u : {0.0, ac.epsilon / 2.0, -ac.epsilon / 3.0}) {
            const Eigen::VectorXd uv = Eigen::VectorXd::Constant(1, u);
            const Eigen::VectorXd phi = solve_fixed_point(f, uv, zero, fo).phi_star;
            const Eigen::VectorXd series = affine_series_solution(ac, u);
            worst = std::max(worst, sup(phi - series));
            for (Eigen::Index k = 0; k < dim; k += 16) {
                table.add_row({u, static_cast<double>(k), -1.0 + 2.0 * static_cast<double>(k) / static_cast<double>(dim - 1),
                               phi[k], series[k], std::abs(phi[k] - series[k])});
            }
        }
        s.scalar("series_max_difference", worst);
        s.at_most("series", worst, s.tol("series", polynomial ? 1e-14 : 1e-7),
                  polynomial ? "g polynomial of degree <= 3 in t" : "interpolation accuracy");
        s.csv("series", table);
    }
    if (s.wants("constant_g")) {
        const Eigen::VectorXd phi = solve_fixed_point(f, Eigen::VectorXd::Constant(1, ac.epsilon / 2), zero, fo).phi_star;
        s.at_most("constant_g", sup(phi.array() - 2.0 * cfg.affine_amplitude), s.tol("constant_g", 1e-14));
    }
    if (s.wants("contraction_seminorm") || s.wants("contraction_full")) {
        const AffineContractionReport rep = affine_contraction(ac, ac.epsilon / 2, cfg.samples, cfg.seed);
        s.scalar("max_seminorm_ratio", rep.max_seminorm_ratio);
        s.scalar("max_full_ratio", rep.max_full_ratio);
        s.at_most("contraction_seminorm", rep.max_seminorm_ratio,
                  s.tol("contraction_seminorm", std::pow(2.0, -(1.0 + ac.alpha)) + 0.01));
        s.at_most("contraction_full", rep.max_full_ratio, s.tol("contraction_full", 0.5 + 0.01));
    }
    if (s.wants("holder_slope")) {
        std::vector<double> deltas;
        for (double d : cfg.deltas) deltas.push_back(std::min(d, ac.epsilon));
        const AffineHolderReport rep = affine_holder_experiment(ac, deltas, fo);
        s.scalar("holder_slope", rep.fit.slope);
        if (cfg.affine_family == "kink") {
            const double lo = ac.alpha - 0.05, hi = ac.alpha + 0.1;
            s.record("holder_slope", rep.fit.slope >= lo && rep.fit.slope <= hi, rep.fit.slope, lo,
                     "window [" + format_number(lo) + ", " + format_number(hi) + "]");
        } else {
            s.at_least("holder_slope", rep.fit.slope, s.tol("holder_slope", 0.95));
        }
        CsvTable table{{"delta", "distance"}, {}};
        std::vector<double> ds, ys;
        for (const auto& r : rep.rows) {
            table.add_row({r.delta, r.distance});
            ds.push_back(r.delta);
            ys.push_back(r.distance);
        }
        s.csv("holder", table);
        s.svg("holder", {"fixed point Hoelder scan", "delta", "||phi_delta - phi_0||", true, true, {{"distance", ds, ys}}});
    }
    if (s.wants("second_derivative")) {
        const Eigen::VectorXd u0 = Eigen::VectorXd::Constant(1, ac.epsilon / 4);
        const SecondDerivativeCheck chk =
            second_derivative_check(f, affine_coefficients(ac), u0, zero, Eigen::VectorXd::Ones(1), cfg.fd_step, fo);
        s.scalar("second_derivative_fd_relative_error", chk.relative_error);
        s.at_most("second_derivative", chk.relative_error, s.tol("second_derivative", 1e-3));
        CsvTable table{{"node", "engine", "finite_difference"}, {}};
        for (Eigen::Index k = 0; k < dim; ++k) table.add_row({static_cast<double>(k), chk.engine[k], chk.finite_difference[k]});
        s.csv("second_derivative", table);
    }
}

std::string describe(const ExperimentConfig& cfg) {
    std::ostringstream o;
    o << "experiment " << kind_name(cfg.kind);
    if (cfg.kind == ExperimentKind::ExampleComposition) {
        o << " (r=" << cfg.r << ", r'=" << cfg.r_prime << ", M=" << cfg.interval_points << ")";
    } else if (cfg.kind == ExperimentKind::ExampleAffine) {
        o << " (family=" << cfg.affine_family << ", alpha=" << cfg.alpha << ", M=" << cfg.interval_points << ")";
    } else {
        o << " (N=" << cfg.resolution << ", u0=[" << cfg.u0.transpose() << "])";
    }
    return o.str();
}

} // namespace

bool RunReport::all_passed() const {
    return std::all_of(assertions.begin(), assertions.end(), [](const auto& a) { return a.passed; });
}

RunReport run_experiment(const ExperimentConfig& cfg, const RunOptions& options) {
    const auto start = std::chrono::steady_clock::now();
    RunReport report;
    report.kind = std::string(kind_name(cfg.kind));
    Session session(cfg, options, report);
    try {
        switch (cfg.kind) {
        case ExperimentKind::Spectrum: run_spectrum(session); break;
        case ExperimentKind::Solve: run_solve(session); break;
        case ExperimentKind::Response: run_response(session); break;
        case ExperimentKind::TaylorCheck: run_taylor(session); break;
        case ExperimentKind::HoelderScan: run_hoelder(session); break;
        case ExperimentKind::PressureCheck: run_pressure(session); break;
        case ExperimentKind::ExampleComposition: run_composition(session); break;
        case ExperimentKind::ExampleAffine: run_affine(session); break;
        }
    } catch (const Error& e) {
        std::string message = e.what();
        message.erase(0, to_string(e.code()).size() + 2);
        throw Error(e.code(), describe(cfg) + ": " + message);
    }

    // Every requested assertion is reported exactly once, in config order.
    std::vector<AssertionOutcome> ordered;
    for (const auto& name : cfg.assertions) {
        const auto it = std::find_if(report.assertions.begin(), report.assertions.end(),
                                     [&](const auto& a) { return a.name == name; });
        if (it == report.assertions.end()) {
            ordered.push_back({name, false, std::numeric_limits<double>::quiet_NaN(), 0.0, "not evaluated"});
        } else {
            ordered.push_back(*it);
        }
    }
    report.assertions = std::move(ordered);

    CsvTable summary{{"assertion", "passed", "value", "threshold", "detail"}, {}};
    for (const auto& a : report.assertions) {
        summary.add_row({a.name, std::string(a.passed ? "true" : "false"), a.value, a.threshold, a.detail});
    }
    session.csv("assertions", summary);
    CsvTable scalars{{"name", "value"}, {}};
    for (const auto& [k, v] : report.scalars) scalars.add_row({k, v});
    session.csv("scalars", scalars);

    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

std::string format_report(const RunReport& report) {
    std::ostringstream o;
    o << "kind: " << report.kind << "\n";
    for (const auto& [k, v] : report.scalars) o << "  " << k << " = " << format_number(v) << "\n";
    for (const auto& a : report.assertions) {
        o << (a.passed ? "PASS " : "FAIL ") << a.name << "  value=" << format_number(a.value)
          << " threshold=" << format_number(a.threshold);
        if (!a.detail.empty()) o << "  (" << a.detail << ")";
        o << "\n";
    }
    for (const auto& p : report.csv_paths) o << "csv: " << p.string() << "\n";
    for (const auto& p : report.svg_paths) o << "svg: " << p.string() << "\n";
    o << "elapsed: " << format_number(std::round(report.seconds * 1000.0) / 1000.0) << " s\n";
    o << (report.all_passed() ? "result: PASS" : "result: FAIL") << "\n";
    return o.str();
}

} // namespace fpdiff::cli
