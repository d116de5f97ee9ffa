#include "fpdiff/map_family.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "fpdiff/error.hpp"

namespace fpdiff {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double coupling(double v, double power) {
    if (power == 1.0) return v;
    return std::copysign(std::pow(std::abs(v), power), v);
}

double coupling_derivative(double v, double power) {
    if (power == 1.0) return 1.0;
    return power * std::pow(std::abs(v), power - 1.0);
}

} // namespace

double TrigSeries::value(double x) const {
    double s = c0;
    for (const auto& t : terms) {
        const double w = kTwoPi * t.k * x;
        s += t.a * std::sin(w) + t.b * std::cos(w);
    }
    return s;
}

double TrigSeries::d1(double x) const {
    double s = 0.0;
    for (const auto& t : terms) {
        const double f = kTwoPi * t.k;
        s += f * (t.a * std::cos(f * x) - t.b * std::sin(f * x));
    }
    return s;
}

double TrigSeries::d2(double x) const {
    double s = 0.0;
    for (const auto& t : terms) {
        const double f = kTwoPi * t.k;
        s -= f * f * (t.a * std::sin(f * x) + t.b * std::cos(f * x));
    }
    return s;
}

TrigSeries TrigSeries::normalized(std::vector<Term> terms) {
    TrigSeries s;
    for (auto t : terms) {
        if (t.k < 1) throw Error(ErrorCode::InvalidArgument, "trigonometric frequency must be >= 1");
        const double f = kTwoPi * t.k;
        s.terms.push_back({t.k, t.a / f, t.b / f});
    }
    return s;
}

MapFamily trig_family(int degree, TrigSeries base, std::vector<TrigSeries> perturbations, double u_power) {
    if (degree < 2) throw Error(ErrorCode::InvalidArgument, "map degree must be >= 2");
    if (!(u_power > 0.0 && u_power <= 1.0)) throw Error(ErrorCode::InvalidArgument, "u_power must lie in (0, 1]");
    MapFamily m;
    m.degree = degree;
    m.param_dim = static_cast<Eigen::Index>(perturbations.size());
    const auto d = static_cast<double>(degree);
    m.map = [=](const Eigen::VectorXd& u, double x) {
        double t = d * x + base.value(x);
        for (std::size_t p = 0; p < perturbations.size(); ++p) t += coupling(u[p], u_power) * perturbations[p].value(x);
        return t;
    };
    m.dx = [=](const Eigen::VectorXd& u, double x) {
        double t = d + base.d1(x);
        for (std::size_t p = 0; p < perturbations.size(); ++p) t += coupling(u[p], u_power) * perturbations[p].d1(x);
        return t;
    };
    m.dxx = [=](const Eigen::VectorXd& u, double x) {
        double t = base.d2(x);
        for (std::size_t p = 0; p < perturbations.size(); ++p) t += coupling(u[p], u_power) * perturbations[p].d2(x);
        return t;
    };
    m.du = [=](const Eigen::VectorXd& u, double x) {
        Eigen::VectorXd g(perturbations.size());
        for (std::size_t p = 0; p < perturbations.size(); ++p) {
            g[p] = coupling_derivative(u[p], u_power) * perturbations[p].value(x);
        }
        return g;
    };
    m.dxdu = [=](const Eigen::VectorXd& u, double x) {
        Eigen::VectorXd g(perturbations.size());
        for (std::size_t p = 0; p < perturbations.size(); ++p) {
            g[p] = coupling_derivative(u[p], u_power) * perturbations[p].d1(x);
        }
        return g;
    };
    return m;
}

Weight geometric_weight(const MapFamily& map) {
    Weight w;
    w.value = [map](const Eigen::VectorXd& u, double x) { return 1.0 / std::abs(map.dx(u, x)); };
    w.dx = [map](const Eigen::VectorXd& u, double x) {
        const double t = map.dx(u, x);
        return -std::copysign(1.0, t) * map.dxx(u, x) / (t * t);
    };
    w.du = [map](const Eigen::VectorXd& u, double x) -> Eigen::VectorXd {
        const double t = map.dx(u, x);
        return (-std::copysign(1.0, t) / (t * t)) * map.dxdu(u, x);
    };
    return w;
}

Weight constant_weight(double c, Eigen::Index param_dim) {
    if (!(c > 0.0)) throw Error(ErrorCode::InvalidArgument, "weights must be positive");
    Weight w;
    w.value = [c](const Eigen::VectorXd&, double) { return c; };
    w.dx = [](const Eigen::VectorXd&, double) { return 0.0; };
    w.du = [param_dim](const Eigen::VectorXd&, double) -> Eigen::VectorXd { return Eigen::VectorXd::Zero(param_dim); };
    return w;
}

Weight exponential_weight(Weight base, TrigSeries potential, std::vector<TrigSeries> couplings) {
    auto exponent = [=](const Eigen::VectorXd& u, double x) {
        double e = potential.value(x);
        for (std::size_t p = 0; p < couplings.size(); ++p) e += u[p] * couplings[p].value(x);
        return e;
    };
    Weight w;
    w.value = [=](const Eigen::VectorXd& u, double x) { return base.value(u, x) * std::exp(exponent(u, x)); };
    w.dx = [=](const Eigen::VectorXd& u, double x) {
        double e1 = potential.d1(x);
        for (std::size_t p = 0; p < couplings.size(); ++p) e1 += u[p] * couplings[p].d1(x);
        return std::exp(exponent(u, x)) * (base.dx(u, x) + base.value(u, x) * e1);
    };
    w.du = [=](const Eigen::VectorXd& u, double x) -> Eigen::VectorXd {
        const double e = std::exp(exponent(u, x));
        Eigen::VectorXd g = e * base.du(u, x);
        const double b = base.value(u, x);
        for (std::size_t p = 0; p < couplings.size(); ++p) g[p] += e * b * couplings[p].value(x);
        return g;
    };
    return w;
}

Weight twisted_weight(Weight base, GridFunction a, double s) {
    Weight w;
    w.value = [=](const Eigen::VectorXd& u, double x) { return base.value(u, x) * std::exp(s * a.eval(x)); };
    w.dx = [=](const Eigen::VectorXd& u, double x) {
        const double e = std::exp(s * a.eval(x));
        return e * (base.dx(u, x) + s * a.eval_derivative(x) * base.value(u, x));
    };
    w.du = [=](const Eigen::VectorXd& u, double x) -> Eigen::VectorXd {
        return std::exp(s * a.eval(x)) * base.du(u, x);
    };
    return w;
}

double check_expanding(const MapFamily& map, const std::vector<Eigen::VectorXd>& u_grid, std::size_t x_resolution) {
    if (x_resolution == 0) throw Error(ErrorCode::InvalidArgument, "x_resolution must be positive");
    double best = std::numeric_limits<double>::infinity();
    const Eigen::VectorXd* worst_u = nullptr;
    double worst_x = 0.0;
    for (const auto& u : u_grid) {
        for (std::size_t j = 0; j < x_resolution; ++j) {
            const double x = static_cast<double>(j) / static_cast<double>(x_resolution);
            const double v = std::abs(map.dx(u, x));
            if (v < best) {
                best = v;
                worst_u = &u;
                worst_x = x;
            }
        }
    }
    if (worst_u != nullptr && !(best > 1.0)) {
        std::ostringstream msg;
        msg << "|dT/dx| = " << best << " at x = " << worst_x << ", u = (" << worst_u->transpose() << ")";
        throw Error(ErrorCode::NotExpanding, msg.str());
    }
    return best;
}

} // namespace fpdiff
