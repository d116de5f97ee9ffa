#pragma once

// Central differences with one Richardson step. `f` maps an offset t to a
// value (double or an Eigen vector) and is sampled at t in {±step, ±2 step}
// (plus t = 0 for second differences).

#include <type_traits>

namespace fpdiff {

namespace detail {

// Forces Eigen expression templates into a value; passes scalars through.
template <typename T>
auto materialize(T&& x) {
    if constexpr (std::is_arithmetic_v<std::decay_t<T>>) {
        return x;
    } else {
        return x.eval();
    }
}

} // namespace detail

template <typename Fn>
auto central_difference(const Fn& f, double step) {
    return detail::materialize((f(step) - f(-step)) / (2.0 * step));
}

/// (4 D(step) - D(2 step)) / 3 with D the central first difference; O(step^4).
template <typename Fn>
auto richardson_first(const Fn& f, double step) {
    const auto fp1 = f(step), fm1 = f(-step), fp2 = f(2.0 * step), fm2 = f(-2.0 * step);
    const auto d1 = (fp1 - fm1) / (2.0 * step);
    const auto d2 = (fp2 - fm2) / (4.0 * step);
    return detail::materialize((4.0 * d1 - d2) / 3.0);
}

template <typename Fn>
auto second_difference(const Fn& f, double step) {
    return detail::materialize((f(step) - 2.0 * f(0.0) + f(-step)) / (step * step));
}

/// (4 S(step) - S(2 step)) / 3 with S the central second difference; O(step^4).
template <typename Fn>
auto richardson_second(const Fn& f, double step) {
    const auto f0 = f(0.0);
    const auto fp1 = f(step), fm1 = f(-step), fp2 = f(2.0 * step), fm2 = f(-2.0 * step);
    const auto s1 = (fp1 - 2.0 * f0 + fm1) / (step * step);
    const auto s2 = (fp2 - 2.0 * f0 + fm2) / (4.0 * step * step);
    return detail::materialize((4.0 * s1 - s2) / 3.0);
}

} // namespace fpdiff
