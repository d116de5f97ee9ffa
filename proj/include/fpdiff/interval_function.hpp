#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace fpdiff {

/// A function on a compact interval [a, b], stored as M equispaced samples
/// (M >= 8) and extended by piecewise-cubic Lagrange interpolation over the
/// four nodes surrounding each cell (one-sided stencils at the ends).
/// The interpolant reproduces cubic polynomials exactly.
class IntervalFunction {
public:
    IntervalFunction(double a, double b, std::vector<double> samples);
    IntervalFunction(double a, double b, const Eigen::VectorXd& samples);

    static IntervalFunction from_function(double a, double b, std::size_t m,
                                          const std::function<double(double)>& f);

    double lower() const noexcept { return a_; }
    double upper() const noexcept { return b_; }
    std::size_t size() const noexcept { return samples_.size(); }
    double spacing() const noexcept { return (b_ - a_) / static_cast<double>(size() - 1); }
    double node(std::size_t j) const noexcept { return a_ + spacing() * static_cast<double>(j); }
    double operator[](std::size_t j) const noexcept { return samples_[j]; }
    std::span<const double> samples() const noexcept { return samples_; }
    Eigen::VectorXd to_vector() const;

    /// Raises OutOfDomain outside [a, b] (a relative slack of 1e-12 is clamped).
    double eval(double x) const;
    double eval_derivative(double x) const;
    double eval_second_derivative(double x) const;

    double sup_norm() const noexcept;

private:
    double a_;
    double b_;
    std::vector<double> samples_;
};

/// The four-node stencil used to interpolate at x on an M-point grid over
/// [a, b]: first node index and Lagrange weights for value, first and
/// second derivative.
struct CubicStencil {
    std::size_t first;
    double value[4];
    double d1[4];
    double d2[4];
};

CubicStencil cubic_stencil(double a, double b, std::size_t m, double x);

/// Row vector w with p(x) = sum_j w[j] f[j] (dense, length m).
Eigen::RowVectorXd interval_interpolation_row(double a, double b, std::size_t m, double x);

/// Node-wise derivative of the piecewise-cubic interpolant. At node j the
/// derivative of the cubic on cell [t_j, t_{j+1}] is used (cell M-2 for the
/// last node).
IntervalFunction differentiate(const IntervalFunction& f);

} // namespace fpdiff
