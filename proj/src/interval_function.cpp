#include "fpdiff/interval_function.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fpdiff/error.hpp"

namespace fpdiff {

namespace {

void validate(double a, double b, std::size_t m) {
    if (!(a < b)) throw Error(ErrorCode::InvalidArgument, "interval requires a < b");
    if (m < 8) throw Error(ErrorCode::InvalidArgument, "interval resolution must be >= 8, got " + std::to_string(m));
}

// Lagrange basis on the nodes {0, 1, 2, 3} evaluated at s (grid units).
void lagrange4(double s, double v[4], double d1[4], double d2[4]) {
    const double nodes[4] = {0.0, 1.0, 2.0, 3.0};
    for (int i = 0; i < 4; ++i) {
        double denom = 1.0;
        double others[3];
        int k = 0;
        for (int j = 0; j < 4; ++j) {
            if (j == i) continue;
            denom *= nodes[i] - nodes[j];
            others[k++] = nodes[j];
        }
        const double p = s - others[0], q = s - others[1], r = s - others[2];
        v[i] = p * q * r / denom;
        d1[i] = (q * r + p * r + p * q) / denom;
        d2[i] = 2.0 * (p + q + r) / denom;
    }
}

} // namespace

CubicStencil cubic_stencil(double a, double b, std::size_t m, double x) {
    const double h = (b - a) / static_cast<double>(m - 1);
    const double slack = 1e-12 * (b - a);
    if (x < a - slack || x > b + slack || std::isnan(x)) {
        throw Error(ErrorCode::OutOfDomain,
                    "evaluation point " + std::to_string(x) + " outside [" + std::to_string(a) + ", " +
                        std::to_string(b) + "]");
    }
    x = std::clamp(x, a, b);
    double pos = (x - a) / h;
    if (std::abs(pos - std::round(pos)) < 1e-10) pos = std::round(pos);
    auto cell = static_cast<long long>(std::floor(pos));
    cell = std::clamp<long long>(cell, 0, static_cast<long long>(m) - 2);
    const long long first = std::clamp<long long>(cell - 1, 0, static_cast<long long>(m) - 4);
    CubicStencil st{};
    st.first = static_cast<std::size_t>(first);
    lagrange4(pos - static_cast<double>(first), st.value, st.d1, st.d2);
    for (int i = 0; i < 4; ++i) {
        st.d1[i] /= h;
        st.d2[i] /= h * h;
    }
    return st;
}

Eigen::RowVectorXd interval_interpolation_row(double a, double b, std::size_t m, double x) {
    const CubicStencil st = cubic_stencil(a, b, m, x);
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(m));
    for (int i = 0; i < 4; ++i) row[static_cast<Eigen::Index>(st.first) + i] = st.value[i];
    return row;
}

IntervalFunction::IntervalFunction(double a, double b, std::vector<double> samples)
    : a_(a), b_(b), samples_(std::move(samples)) {
    validate(a_, b_, samples_.size());
}

IntervalFunction::IntervalFunction(double a, double b, const Eigen::VectorXd& samples)
    : IntervalFunction(a, b, std::vector<double>(samples.data(), samples.data() + samples.size())) {}

IntervalFunction IntervalFunction::from_function(double a, double b, std::size_t m,
                                                 const std::function<double(double)>& f) {
    validate(a, b, m);
    std::vector<double> s(m);
    const double h = (b - a) / static_cast<double>(m - 1);
    for (std::size_t j = 0; j < m; ++j) s[j] = f(j + 1 == m ? b : a + h * static_cast<double>(j));
    return IntervalFunction(a, b, std::move(s));
}

Eigen::VectorXd IntervalFunction::to_vector() const {
    return Eigen::Map<const Eigen::VectorXd>(samples_.data(), static_cast<Eigen::Index>(samples_.size()));
}

double IntervalFunction::eval(double x) const {
    const CubicStencil st = cubic_stencil(a_, b_, size(), x);
    const double pos = (std::clamp(x, a_, b_) - a_) / spacing();
    const double nearest = std::round(pos);
    if (std::abs(pos - nearest) < 1e-13) return samples_[static_cast<std::size_t>(nearest)];
    double acc = 0.0;
    for (int i = 0; i < 4; ++i) acc += st.value[i] * samples_[st.first + static_cast<std::size_t>(i)];
    return acc;
}

double IntervalFunction::eval_derivative(double x) const {
    const CubicStencil st = cubic_stencil(a_, b_, size(), x);
    double acc = 0.0;
    for (int i = 0; i < 4; ++i) acc += st.d1[i] * samples_[st.first + static_cast<std::size_t>(i)];
    return acc;
}

double IntervalFunction::eval_second_derivative(double x) const {
    const CubicStencil st = cubic_stencil(a_, b_, size(), x);
    double acc = 0.0;
    for (int i = 0; i < 4; ++i) acc += st.d2[i] * samples_[st.first + static_cast<std::size_t>(i)];
    return acc;
}

double IntervalFunction::sup_norm() const noexcept {
    double m = 0.0;
    for (double v : samples_) m = std::max(m, std::abs(v));
    return m;
}

IntervalFunction differentiate(const IntervalFunction& f) {
    std::vector<double> d(f.size());
    for (std::size_t j = 0; j < f.size(); ++j) d[j] = f.eval_derivative(f.node(j));
    return IntervalFunction(f.lower(), f.upper(), std::move(d));
}

} // namespace fpdiff
