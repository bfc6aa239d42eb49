#pragma once

#include <array>
#include <cmath>
#include <cstdlib>

#include "homsim/errors.hpp"

// Angular-momentum algebra for dipole couplings between Zeeman manifolds.
// Half-integer quantum numbers are carried as doubled integers (twice_j,
// twice_m) so that everything stays exact.

namespace homsim {

namespace detail {

// log(n!) for small n, cached.
inline double log_factorial(int n) {
    static const auto table = [] {
        std::array<double, 64> t{};
        t[0] = 0.0;
        for (std::size_t i = 1; i < t.size(); ++i)
            t[i] = t[i - 1] + std::log(static_cast<double>(i));
        return t;
    }();
    return table[static_cast<std::size_t>(n)];
}

}  // namespace detail

// Clebsch-Gordan coefficient <j1 m1; j2 m2 | J M> in the Condon-Shortley
// phase convention, with all quantum numbers doubled.  Returns 0 for
// non-conserving or out-of-range arguments.
inline double clebsch_gordan(int twice_j1, int twice_m1, int twice_j2,
                             int twice_m2, int twice_J, int twice_M) {
    if (twice_M != twice_m1 + twice_m2) return 0.0;
    if (std::abs(twice_m1) > twice_j1 || std::abs(twice_m2) > twice_j2 ||
        std::abs(twice_M) > twice_J)
        return 0.0;
    // triangle condition
    if (twice_J < std::abs(twice_j1 - twice_j2) || twice_J > twice_j1 + twice_j2)
        return 0.0;
    // integrality: j1 + j2 + J must be an integer
    if ((twice_j1 + twice_j2 + twice_J) % 2 != 0) return 0.0;

    using detail::log_factorial;
    const auto f = [](int twice) { return twice / 2; };

    // All the factorial arguments below are integers when the conditions
    // above hold.
    const int a = f(twice_j1 + twice_j2 - twice_J);
    const int b = f(twice_j1 - twice_j2 + twice_J);
    const int c = f(-twice_j1 + twice_j2 + twice_J);
    const int d = f(twice_j1 + twice_j2 + twice_J) + 1;

    double log_prefactor =
        std::log(static_cast<double>(twice_J + 1)) + log_factorial(a) +
        log_factorial(b) + log_factorial(c) - log_factorial(d) +
        log_factorial(f(twice_j1 + twice_m1)) +
        log_factorial(f(twice_j1 - twice_m1)) +
        log_factorial(f(twice_j2 + twice_m2)) +
        log_factorial(f(twice_j2 - twice_m2)) +
        log_factorial(f(twice_J + twice_M)) + log_factorial(f(twice_J - twice_M));

    double sum = 0.0;
    const int k_min = std::max(
        0, std::max(f(twice_j2 - twice_m1 - twice_J), f(twice_j1 + twice_m2 - twice_J)));
    const int k_max = std::min(
        a, std::min(f(twice_j1 - twice_m1), f(twice_j2 + twice_m2)));
    for (int k = k_min; k <= k_max; ++k) {
        double log_term = log_factorial(k) + log_factorial(a - k) +
                          log_factorial(f(twice_j1 - twice_m1) - k) +
                          log_factorial(f(twice_j2 + twice_m2) - k) +
                          log_factorial(f(twice_J - twice_j2 + twice_m1) + k) +
                          log_factorial(f(twice_J - twice_j1 - twice_m2) + k);
        const double term = std::exp(0.5 * log_prefactor - log_term);
        sum += (k % 2 == 0) ? term : -term;
    }
    return sum;
}

// Angular weight of the (upper, q) -> (lower = upper - q) dipole decay path:
// <j_l m_l; 1 q | j_u m_u> with m_l = m_u - q.  q in {-1, 0, +1} counts the
// spherical photon polarization, q = mJ(upper) - mJ(lower).
inline double dipole_coupling(int twice_j_lower, int twice_j_upper,
                              int twice_m_upper, int q) {
    if (q < -1 || q > 1) throw InvalidInput("polarization index q must be in {-1,0,+1}");
    const int twice_m_lower = twice_m_upper - 2 * q;
    return clebsch_gordan(twice_j_lower, twice_m_lower, 2, 2 * q, twice_j_upper,
                          twice_m_upper);
}

}  // namespace homsim
