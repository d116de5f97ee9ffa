#include "fpdiff/fit.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "fpdiff/error.hpp"

namespace fpdiff {

namespace {

ExponentFit linear_regression(const std::vector<double>& xs, const std::vector<double>& ys) {
    ExponentFit fit;
    fit.points = xs.size();
    if (xs.size() < 2) throw Error(ErrorCode::DegenerateFit, "fewer than two usable points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(xs.size());
    my /= static_cast<double>(ys.size());
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (sxx <= 0.0) throw Error(ErrorCode::DegenerateFit, "abscissae coincide; no regression possible");
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return fit;
}

} // namespace

ExponentFit fit_loglog(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw Error(ErrorCode::InvalidArgument, "fit_loglog: length mismatch");
    bool all_zero = !y.empty();
    for (double v : y) all_zero = all_zero && v == 0.0;
    if (all_zero) {
        ExponentFit fit;
        fit.identically_zero = true;
        fit.slope = std::numeric_limits<double>::infinity();
        fit.points = y.size();
        return fit;
    }
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] > 0.0 && y[i] > 0.0) {
            lx.push_back(std::log(x[i]));
            ly.push_back(std::log(y[i]));
        }
    }
    return linear_regression(lx, ly);
}

ExponentFit fit_loglinear(std::span<const double> n, std::span<const double> y) {
    if (n.size() != y.size()) throw Error(ErrorCode::InvalidArgument, "fit_loglinear: length mismatch");
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < n.size(); ++i) {
        if (y[i] > 0.0) {
            lx.push_back(n[i]);
            ly.push_back(std::log(y[i]));
        }
    }
    return linear_regression(lx, ly);
}

} // namespace fpdiff
