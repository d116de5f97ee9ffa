#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "fpdiff/grid_function.hpp"

namespace fpdiff {

/// c0 + sum_k [a_k sin(2 pi k x) + b_k cos(2 pi k x)], k >= 1.
struct TrigSeries {
    struct Term {
        int k = 1;
        double a = 0.0;
        double b = 0.0;
    };
    double c0 = 0.0;
    std::vector<Term> terms;

    double value(double x) const;
    double d1(double x) const;
    double d2(double x) const;
    bool empty() const noexcept { return c0 == 0.0 && terms.empty(); }

    /// Terms given as a_k sin(2 pi k x)/(2 pi k) + b_k cos(2 pi k x)/(2 pi k),
    /// so the derivative has coefficients (a_k, b_k) and sup |d1| <= sum |a_k| + |b_k|.
    static TrigSeries normalized(std::vector<Term> terms);
};

/// Lift of a parametrized circle covering x -> T(u, x), with T(u, x+1) = T(u, x) + degree.
struct MapFamily {
    using Scalar = std::function<double(const Eigen::VectorXd& u, double x)>;
    using Vector = std::function<Eigen::VectorXd(const Eigen::VectorXd& u, double x)>;

    int degree = 2;
    Eigen::Index param_dim = 1;
    Scalar map;
    Scalar dx;
    Scalar dxx;
    Vector du;   ///< dT/du_p
    Vector dxdu; ///< d^2T/dx du_p
};

/// T(u, x) = degree x + base(x) + sum_p c(u_p) s_p(x) with c(v) = v when
/// u_power == 1 and c(v) = sign(v) |v|^u_power otherwise (a family that is
/// only u_power-Hoelder in u at 0; its u-derivative is then not defined at 0).
MapFamily trig_family(int degree, TrigSeries base, std::vector<TrigSeries> perturbations, double u_power = 1.0);

/// Positive weight g(u, x) with x- and u-derivatives.
struct Weight {
    MapFamily::Scalar value;
    MapFamily::Scalar dx;
    MapFamily::Vector du;
};

/// g = 1 / |dT/dx|.
Weight geometric_weight(const MapFamily& map);

Weight constant_weight(double c, Eigen::Index param_dim);

/// base(u, x) * exp(potential(x) + sum_p u_p coupling_p(x)).
Weight exponential_weight(Weight base, TrigSeries potential, std::vector<TrigSeries> couplings);

/// base(u, x) * exp(s A(x)) with A evaluated through its interpolant.
Weight twisted_weight(Weight base, GridFunction a, double s);

/// Minimum of |dT/dx| over the u grid and x_resolution equispaced points.
/// Throws NotExpanding (naming the offending (u, x)) when that minimum is <= 1.
double check_expanding(const MapFamily& map, const std::vector<Eigen::VectorXd>& u_grid, std::size_t x_resolution);

} // namespace fpdiff
