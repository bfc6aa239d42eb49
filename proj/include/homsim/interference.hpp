#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "homsim/dynamics.hpp"
#include "homsim/errors.hpp"

namespace homsim {

namespace detail {

inline void require_same_grid(const CorrelationSeries& a, const CorrelationSeries& b) {
    if (a.tau_ns != b.tau_ns)
        throw InvalidInput("correlation series must share the same tau grid");
}

inline void require_kind(const CorrelationSeries& s, CorrelationKind k, const char* what) {
    if (s.kind != k || !s.normalized)
        throw InvalidInput(std::string("expected a normalized ") + what + " series");
}

}  // namespace detail

// Cross-detector coincidence law behind a 50/50 beam splitter fed by two
// identical, independent emitters whose polarizations subtend an angle phi:
//   g2_tot(tau, phi) = 1/2 g2(tau) + 1/2 [1 - cos^2(phi) |g1(tau)|^2].
inline CorrelationSeries hom_g2_tot(const CorrelationSeries& g1s, const CorrelationSeries& g2s,
                                    double phi_rad) {
    detail::require_kind(g1s, CorrelationKind::G1, "g1");
    detail::require_kind(g2s, CorrelationKind::G2, "g2");
    detail::require_same_grid(g1s, g2s);
    if (!std::isfinite(phi_rad)) throw InvalidInput("polarization angle must be finite");

    const double c2 = std::cos(phi_rad) * std::cos(phi_rad);
    CorrelationSeries out{g1s.tau_ns, {}, CorrelationKind::G2Tot, true};
    out.values.resize(g1s.size());
    for (std::size_t i = 0; i < g1s.size(); ++i) {
        const double g1sq = std::norm(g1s.values[i]);
        out.values[i] = 0.5 * g2s.values[i].real() + 0.5 * (1.0 - c2 * g1sq);
    }
    return out;
}

// General two-emitter form (distinct spectra and rates allowed), normalized
// by the product of the mean detector rates:
//   G2_tot = 1/4 (G2_a + G2_b) + 1/2 n_a n_b - 1/2 cos^2(phi) Re[G1_a conj(G1_b)]
// with G1_i = n_i g1_i and G2_i = n_i^2 g2_i.
inline CorrelationSeries hom_g2_tot_pair(const CorrelationSeries& g1a, const CorrelationSeries& g2a,
                                         double rate_a, const CorrelationSeries& g1b,
                                         const CorrelationSeries& g2b, double rate_b,
                                         double phi_rad) {
    detail::require_kind(g1a, CorrelationKind::G1, "g1");
    detail::require_kind(g1b, CorrelationKind::G1, "g1");
    detail::require_kind(g2a, CorrelationKind::G2, "g2");
    detail::require_kind(g2b, CorrelationKind::G2, "g2");
    detail::require_same_grid(g1a, g2a);
    detail::require_same_grid(g1b, g2b);
    detail::require_same_grid(g1a, g1b);
    if (!(rate_a > 0.0) || !(rate_b > 0.0)) throw NoSignal("emitter rates must be positive");
    if (!std::isfinite(phi_rad)) throw InvalidInput("polarization angle must be finite");

    const double c2 = std::cos(phi_rad) * std::cos(phi_rad);
    const double mean = 0.5 * (rate_a + rate_b);  // rate at each detector
    CorrelationSeries out{g1a.tau_ns, {}, CorrelationKind::G2Tot, true};
    out.values.resize(g1a.size());
    for (std::size_t i = 0; i < g1a.size(); ++i) {
        const double auto_term = 0.25 * (rate_a * rate_a * g2a.values[i].real() +
                                         rate_b * rate_b * g2b.values[i].real());
        const double cross = 0.5 * rate_a * rate_b;
        const double interf =
            0.5 * c2 * rate_a * rate_b * (g1a.values[i] * std::conj(g1b.values[i])).real();
        out.values[i] = (auto_term + cross - interf) / (mean * mean);
    }
    return out;
}

// Average of a G2Tot series over |tau| <= window about zero; window 0 picks
// the tau = 0 sample.  The grid is one-sided, matching an even correlation.
inline double g2_tot_near_zero(const CorrelationSeries& s, double window_ns) {
    if (s.kind != CorrelationKind::G2Tot) throw InvalidInput("expected a g2_tot series");
    if (!(window_ns >= 0.0)) throw InvalidInput("window must be >= 0");
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s.tau_ns[i] > window_ns) break;
        sum += s.values[i].real();
        ++n;
    }
    if (n == 0) throw InvalidInput("window contains no grid points");
    return sum / static_cast<double>(n);
}

struct PolarizationScanPoint {
    double phi_rad = 0.0;
    double g2_tot = 0.0;
};

// g2_tot near tau = 0 versus polarization angle; the ideal continuous-wave
// law for a dim coherent emitter is 1/2 sin^2(phi).
inline std::vector<PolarizationScanPoint> polarization_scan(const CorrelationSeries& g1s,
                                                            const CorrelationSeries& g2s,
                                                            const std::vector<double>& phis_rad,
                                                            double window_ns = 0.0) {
    std::vector<PolarizationScanPoint> out;
    out.reserve(phis_rad.size());
    for (double phi : phis_rad) {
        const CorrelationSeries tot = hom_g2_tot(g1s, g2s, phi);
        out.push_back({phi, g2_tot_near_zero(tot, window_ns)});
    }
    return out;
}

struct ContrastResult {
    double value = 0.0;
    double sigma = 0.0;  // propagated statistical error; 0 for model inputs
};

// Interference contrast C = 1 - parallel/perpendicular with first-order
// error propagation of the two inputs.
inline ContrastResult contrast(double parallel, double sigma_parallel, double perpendicular,
                               double sigma_perpendicular) {
    if (!(perpendicular > 0.0))
        throw UndefinedContrast("perpendicular coincidence level is not positive");
    if (parallel < 0.0) throw InvalidInput("parallel coincidence level is negative");
    const double ratio = parallel / perpendicular;
    ContrastResult out;
    out.value = 1.0 - ratio;
    const double rel_p = parallel > 0.0 ? sigma_parallel / parallel : 0.0;
    const double rel_q = sigma_perpendicular / perpendicular;
    out.sigma = (parallel > 0.0)
                    ? ratio * std::sqrt(rel_p * rel_p + rel_q * rel_q)
                    : sigma_parallel / perpendicular;
    return out;
}

inline ContrastResult contrast(const CorrelationSeries& g1s, const CorrelationSeries& g2s,
                               double window_ns = 0.0) {
    const double par = g2_tot_near_zero(hom_g2_tot(g1s, g2s, 0.0), window_ns);
    const double perp = g2_tot_near_zero(hom_g2_tot(g1s, g2s, kTwoPi / 4.0), window_ns);
    return contrast(par, 0.0, perp, 0.0);
}

// Location of the Rabi-nutation peak: the highest interior local maximum of
// the g2 series.  Flat or monotone series have none.
inline std::optional<std::size_t> nutation_peak_index(const CorrelationSeries& g2s) {
    detail::require_kind(g2s, CorrelationKind::G2, "g2");
    std::optional<std::size_t> best;
    for (std::size_t i = 1; i + 1 < g2s.size(); ++i) {
        const double v = g2s.values[i].real();
        if (v > g2s.values[i - 1].real() && v >= g2s.values[i + 1].real()) {
            if (!best || v > g2s.values[*best].real()) best = i;
        }
    }
    return best;
}

// Fractional suppression of the nutation peak by first-order coherence:
//   1 - g2_tot(tau_pk, 0) / g2_tot(tau_pk, 90 deg) = |g1|^2 / (1 + g2)
// evaluated at the peak.  Empty when no nutation peak exists.
inline std::optional<double> nutation_reduction(const CorrelationSeries& g1s,
                                                const CorrelationSeries& g2s) {
    detail::require_kind(g1s, CorrelationKind::G1, "g1");
    detail::require_same_grid(g1s, g2s);
    const auto peak = nutation_peak_index(g2s);
    if (!peak) return std::nullopt;
    const double g2v = g2s.values[*peak].real();
    const double g1sq = std::norm(g1s.values[*peak]);
    return g1sq / (1.0 + g2v);
}

}  // namespace homsim
