#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace fpdiff {

/// A 1-periodic real function on the circle R/Z, stored as samples at the
/// equispaced nodes x_j = j/N and extended off-grid by the (balanced)
/// trigonometric interpolant of degree N/2.
///
/// N must be even and at least 8. Evaluation at a node returns the stored
/// sample exactly.
class GridFunction {
public:
    explicit GridFunction(std::vector<double> samples);
    explicit GridFunction(const Eigen::VectorXd& samples);

    static GridFunction from_function(std::size_t n, const std::function<double(double)>& f);
    static GridFunction constant(std::size_t n, double value);

    std::size_t size() const noexcept { return samples_.size(); }
    double node(std::size_t j) const noexcept { return static_cast<double>(j) / static_cast<double>(size()); }
    double operator[](std::size_t j) const noexcept { return samples_[j]; }
    std::span<const double> samples() const noexcept { return samples_; }
    Eigen::VectorXd to_vector() const;

    /// Trigonometric interpolant at an arbitrary point (any real x; reduced mod 1).
    double eval(double x) const;
    /// Derivative of the trigonometric interpolant at an arbitrary point.
    double eval_derivative(double x) const;

    double sup_norm() const noexcept;
    double mean() const noexcept;

    GridFunction& operator+=(const GridFunction& other);
    GridFunction& operator-=(const GridFunction& other);
    GridFunction& operator*=(double s);

    friend GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
    friend GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
    friend GridFunction operator*(GridFunction a, double s) { return a *= s; }
    friend GridFunction operator*(double s, GridFunction a) { return a *= s; }
    /// Pointwise product of samples.
    friend GridFunction operator*(const GridFunction& a, const GridFunction& b);

private:
    std::vector<double> samples_;
};

/// A linear functional on grid functions of a fixed resolution:
/// <ell, f> = sum_j weights[j] * f[j].
class DualFunctional {
public:
    explicit DualFunctional(std::vector<double> weights);
    explicit DualFunctional(const Eigen::VectorXd& weights);

    /// Trapezoidal quadrature on the circle, weights 1/N.
    static DualFunctional lebesgue(std::size_t n);

    std::size_t size() const noexcept { return weights_.size(); }
    std::span<const double> weights() const noexcept { return weights_; }
    Eigen::VectorXd to_vector() const;

    double pair(const GridFunction& f) const;
    double pair(const Eigen::VectorXd& samples) const;

private:
    std::vector<double> weights_;
};

/// Circle distance min(|x-y|, 1-|x-y|) after reduction mod 1.
double circle_distance(double x, double y) noexcept;

/// Reduce x to [0, 1).
double wrap_unit(double x) noexcept;

/// Row vector w with p(y) = sum_j w[j] f[j] for the trigonometric
/// interpolant p of samples on n nodes.
Eigen::RowVectorXd interpolation_row(std::size_t n, double y);

/// Row vector w with p'(y) = sum_j w[j] f[j].
Eigen::RowVectorXd derivative_row(std::size_t n, double y);

/// Spectral differentiation matrix on n nodes (period 1).
Eigen::MatrixXd differentiation_matrix(std::size_t n);

/// Derivative of the trigonometric interpolant, sampled at the nodes.
/// Exact for trigonometric polynomials of degree < N/2.
GridFunction differentiate(const GridFunction& f);

/// Mean-zero antiderivative of f - mean(f) (Nyquist mode dropped).
GridFunction antiderivative(const GridFunction& f);

/// Samples of f(g(x_j) mod 1), with f evaluated through its interpolant.
GridFunction compose(const GridFunction& f, const GridFunction& g);

} // namespace fpdiff
