#include "fpdiff/grid_function.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fpdiff/error.hpp"

namespace fpdiff {

namespace {

constexpr double kPi = std::numbers::pi;

// Offsets from a node below this (in units of the grid spacing) snap to the node.
constexpr double kNodeSnap = 1e-12;
// Below this offset the barycentric derivative loses digits to cancellation,
// so the Fourier-sum form is used instead.
constexpr double kDerivativeSwitch = 1e-3;

void validate_resolution(std::size_t n) {
    if (n < 8 || n % 2 != 0) {
        throw Error(ErrorCode::InvalidArgument,
                    "grid resolution must be even and >= 8, got " + std::to_string(n));
    }
}

struct NodeLocation {
    double scaled;      // y * n, y in [0, 1)
    std::size_t nearest; // nearest node index mod n
    double offset;      // scaled - nearest node, in grid units
};

NodeLocation locate(std::size_t n, double y) {
    const double w = wrap_unit(y);
    const double s = w * static_cast<double>(n);
    const double m = std::round(s);
    const auto idx = static_cast<std::size_t>(m) % n;
    return {s, idx, s - m};
}

double alternating(std::size_t j) { return (j % 2 == 0) ? 1.0 : -1.0; }

Eigen::RowVectorXd derivative_row_fourier(std::size_t n, double y) {
    // c_j'(y) = (1/n) [ sum_{k=1}^{n/2-1} -4 pi k sin(2 pi k (y - x_j)) - pi n sin(pi n (y - x_j)) ]
    const std::size_t half = n / 2;
    std::vector<double> cos_table(n), sin_table(n);
    for (std::size_t m = 0; m < n; ++m) {
        const double a = 2.0 * kPi * static_cast<double>(m) / static_cast<double>(n);
        cos_table[m] = std::cos(a);
        sin_table[m] = std::sin(a);
    }
    std::vector<double> ck(half), sk(half);
    for (std::size_t k = 1; k < half; ++k) {
        ck[k] = std::cos(2.0 * kPi * static_cast<double>(k) * y);
        sk[k] = std::sin(2.0 * kPi * static_cast<double>(k) * y);
    }
    const double nyq = std::sin(kPi * static_cast<double>(n) * y);
    Eigen::RowVectorXd row(static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t k = 1; k < half; ++k) {
            const std::size_t m = (k * j) % n;
            // sin(2 pi k y - 2 pi k j / n)
            const double s = sk[k] * cos_table[m] - ck[k] * sin_table[m];
            acc -= 4.0 * kPi * static_cast<double>(k) * s;
        }
        acc -= kPi * static_cast<double>(n) * alternating(j) * nyq;
        row[static_cast<Eigen::Index>(j)] = acc / static_cast<double>(n);
    }
    return row;
}

struct FourierCoefficients {
    std::vector<double> a; // cosine, k = 0..n/2
    std::vector<double> b; // sine, k = 0..n/2
};

FourierCoefficients real_dft(std::span<const double> f) {
    const std::size_t n = f.size();
    const std::size_t half = n / 2;
    FourierCoefficients c{std::vector<double>(half + 1, 0.0), std::vector<double>(half + 1, 0.0)};
    for (std::size_t k = 0; k <= half; ++k) {
        double sa = 0.0, sb = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double ang = 2.0 * kPi * static_cast<double>((k * j) % n) / static_cast<double>(n);
            sa += f[j] * std::cos(ang);
            sb += f[j] * std::sin(ang);
        }
        const double scale = (k == 0 || k == half) ? 1.0 : 2.0;
        c.a[k] = scale * sa / static_cast<double>(n);
        c.b[k] = scale * sb / static_cast<double>(n);
    }
    return c;
}

} // namespace

double wrap_unit(double x) noexcept {
    double w = x - std::floor(x);
    if (w >= 1.0) w = 0.0;
    return w;
}

double circle_distance(double x, double y) noexcept {
    const double d = std::abs(wrap_unit(x) - wrap_unit(y));
    return std::min(d, 1.0 - d);
}

GridFunction::GridFunction(std::vector<double> samples) : samples_(std::move(samples)) {
    validate_resolution(samples_.size());
}

GridFunction::GridFunction(const Eigen::VectorXd& samples)
    : GridFunction(std::vector<double>(samples.data(), samples.data() + samples.size())) {}

GridFunction GridFunction::from_function(std::size_t n, const std::function<double(double)>& f) {
    validate_resolution(n);
    std::vector<double> s(n);
    for (std::size_t j = 0; j < n; ++j) s[j] = f(static_cast<double>(j) / static_cast<double>(n));
    return GridFunction(std::move(s));
}

GridFunction GridFunction::constant(std::size_t n, double value) {
    validate_resolution(n);
    return GridFunction(std::vector<double>(n, value));
}

Eigen::VectorXd GridFunction::to_vector() const {
    return Eigen::Map<const Eigen::VectorXd>(samples_.data(), static_cast<Eigen::Index>(samples_.size()));
}

double GridFunction::eval(double x) const {
    const std::size_t n = size();
    const NodeLocation loc = locate(n, x);
    if (std::abs(loc.offset) < kNodeSnap) return samples_[loc.nearest];
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double w = alternating(j) / std::tan(kPi * (loc.scaled - static_cast<double>(j)) / static_cast<double>(n));
        num += w * (samples_[j] - samples_[0]);
        den += w;
    }
    return samples_[0] + num / den;
}

double GridFunction::eval_derivative(double x) const {
    return derivative_row(size(), x).dot(to_vector());
}

double GridFunction::sup_norm() const noexcept {
    double m = 0.0;
    for (double v : samples_) m = std::max(m, std::abs(v));
    return m;
}

double GridFunction::mean() const noexcept {
    double s = 0.0;
    for (double v : samples_) s += v;
    return s / static_cast<double>(samples_.size());
}

GridFunction& GridFunction::operator+=(const GridFunction& other) {
    if (other.size() != size()) throw Error(ErrorCode::InvalidArgument, "resolution mismatch in +=");
    for (std::size_t j = 0; j < size(); ++j) samples_[j] += other.samples_[j];
    return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& other) {
    if (other.size() != size()) throw Error(ErrorCode::InvalidArgument, "resolution mismatch in -=");
    for (std::size_t j = 0; j < size(); ++j) samples_[j] -= other.samples_[j];
    return *this;
}

GridFunction& GridFunction::operator*=(double s) {
    for (double& v : samples_) v *= s;
    return *this;
}

GridFunction operator*(const GridFunction& a, const GridFunction& b) {
    if (a.size() != b.size()) throw Error(ErrorCode::InvalidArgument, "resolution mismatch in product");
    std::vector<double> s(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) s[j] = a[j] * b[j];
    return GridFunction(std::move(s));
}

DualFunctional::DualFunctional(std::vector<double> weights) : weights_(std::move(weights)) {
    validate_resolution(weights_.size());
}

DualFunctional::DualFunctional(const Eigen::VectorXd& weights)
    : DualFunctional(std::vector<double>(weights.data(), weights.data() + weights.size())) {}

DualFunctional DualFunctional::lebesgue(std::size_t n) {
    validate_resolution(n);
    return DualFunctional(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

Eigen::VectorXd DualFunctional::to_vector() const {
    return Eigen::Map<const Eigen::VectorXd>(weights_.data(), static_cast<Eigen::Index>(weights_.size()));
}

double DualFunctional::pair(const GridFunction& f) const {
    if (f.size() != size()) throw Error(ErrorCode::InvalidArgument, "resolution mismatch in pairing");
    double s = 0.0;
    for (std::size_t j = 0; j < size(); ++j) s += weights_[j] * f[j];
    return s;
}

double DualFunctional::pair(const Eigen::VectorXd& samples) const {
    if (static_cast<std::size_t>(samples.size()) != size()) {
        throw Error(ErrorCode::InvalidArgument, "resolution mismatch in pairing");
    }
    return to_vector().dot(samples);
}

Eigen::RowVectorXd interpolation_row(std::size_t n, double y) {
    validate_resolution(n);
    const NodeLocation loc = locate(n, y);
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(n));
    if (std::abs(loc.offset) < kNodeSnap) {
        row[static_cast<Eigen::Index>(loc.nearest)] = 1.0;
        return row;
    }
    double den = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double w = alternating(j) / std::tan(kPi * (loc.scaled - static_cast<double>(j)) / static_cast<double>(n));
        row[static_cast<Eigen::Index>(j)] = w;
        den += w;
    }
    return row / den;
}

Eigen::RowVectorXd derivative_row(std::size_t n, double y) {
    validate_resolution(n);
    const NodeLocation loc = locate(n, y);
    const auto ni = static_cast<Eigen::Index>(n);
    if (std::abs(loc.offset) < kNodeSnap) {
        Eigen::RowVectorXd row(ni);
        const std::size_t m = loc.nearest;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == m) {
                row[static_cast<Eigen::Index>(j)] = 0.0;
                continue;
            }
            const auto diff = static_cast<long long>(m) - static_cast<long long>(j);
            const double sign = (diff % 2 == 0) ? 1.0 : -1.0;
            row[static_cast<Eigen::Index>(j)] = kPi * sign / std::tan(kPi * static_cast<double>(diff) / static_cast<double>(n));
        }
        return row;
    }
    if (std::abs(loc.offset) < kDerivativeSwitch) return derivative_row_fourier(n, wrap_unit(y));

    Eigen::RowVectorXd w(ni), dw(ni);
    double b = 0.0, db = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double kappa = 1.0 / std::tan(kPi * (loc.scaled - static_cast<double>(j)) / static_cast<double>(n));
        const double s = alternating(j);
        w[static_cast<Eigen::Index>(j)] = s * kappa;
        dw[static_cast<Eigen::Index>(j)] = -s * kPi * (1.0 + kappa * kappa);
        b += s * kappa;
        db += dw[static_cast<Eigen::Index>(j)];
    }
    const Eigen::RowVectorXd c = w / b;
    return (dw - c * db) / b;
}

Eigen::MatrixXd differentiation_matrix(std::size_t n) {
    validate_resolution(n);
    const auto ni = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(ni, ni);
    for (std::size_t m = 0; m < n; ++m) {
        for (std::size_t j = 0; j < n; ++j) {
            if (m == j) continue;
            const auto diff = static_cast<long long>(m) - static_cast<long long>(j);
            const double sign = (diff % 2 == 0) ? 1.0 : -1.0;
            d(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(j)) =
                kPi * sign / std::tan(kPi * static_cast<double>(diff) / static_cast<double>(n));
        }
    }
    return d;
}

GridFunction differentiate(const GridFunction& f) {
    // Shifting by a sample keeps constants exactly in the kernel.
    const Eigen::VectorXd d = differentiation_matrix(f.size()) * (f.to_vector().array() - f[0]).matrix();
    return GridFunction(d);
}

GridFunction antiderivative(const GridFunction& f) {
    const std::size_t n = f.size();
    const FourierCoefficients c = real_dft(f.samples());
    std::vector<double> out(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t k = 1; k < n / 2; ++k) {
            const double ang = 2.0 * kPi * static_cast<double>((k * j) % n) / static_cast<double>(n);
            acc += (c.a[k] * std::sin(ang) - c.b[k] * std::cos(ang)) / (2.0 * kPi * static_cast<double>(k));
        }
        out[j] = acc;
    }
    return GridFunction(std::move(out));
}

GridFunction compose(const GridFunction& f, const GridFunction& g) {
    std::vector<double> s(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) s[j] = f.eval(g[j]);
    return GridFunction(std::move(s));
}

} // namespace fpdiff
