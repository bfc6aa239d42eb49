#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "homsim/dynamics.hpp"
#include "homsim/errors.hpp"
#include "homsim/system_config.hpp"
#include "homsim/units.hpp"

namespace homsim {

// Optical path from the ion to the detector face.
struct CollectionChain {
    double solid_angle_fraction = 0.04;
    double fiber_coupling = 1.0;
    double optical_transmission = 1.0;

    void validate() const {
        for (double f : {solid_angle_fraction, fiber_coupling, optical_transmission})
            if (!(f > 0.0) || f > 1.0)
                throw InvalidInput("collection chain factors must lie in (0, 1]");
    }
    double efficiency() const { return solid_angle_fraction * fiber_coupling * optical_transmission; }
};

struct DetectorModel {
    double quantum_efficiency = 0.25;
    double response_fwhm = 1.5;  // ns, pairwise Gaussian timing response
    double dark_rate = 0.0;      // counts/s
    double dead_time = 0.0;      // ns

    void validate() const {
        if (!(quantum_efficiency > 0.0) || quantum_efficiency > 1.0)
            throw InvalidInput("quantum efficiency must lie in (0, 1]");
        if (!(response_fwhm >= 0.0)) throw InvalidInput("response FWHM must be >= 0");
        if (!(dark_rate >= 0.0)) throw InvalidInput("dark rate must be >= 0");
        if (!(dead_time >= 0.0)) throw InvalidInput("dead time must be >= 0");
    }
};

// Detected rate of the strong transition in counts/s: total scatter rate into
// the ground state times every efficiency factor in the chain.
inline double detected_rate_from_population(double p_population, const SystemConfig& config,
                                            const CollectionChain& chain, const DetectorModel& det) {
    chain.validate();
    det.validate();
    double gamma_p = 0.0, branch_s = 0.0;
    for (const auto& ch : config.scheme.decay_channels) {
        if (ch.lower == Term::S12) {
            gamma_p = ch.rate;  // rate field stores the total upper-state rate
            branch_s = ch.branching;
        }
    }
    if (gamma_p <= 0.0) throw InvalidInput("scheme has no decay channel to the ground state");
    const double scatter_per_us = gamma_p * branch_s * p_population;
    return scatter_per_us * 1e6 * chain.efficiency() * det.quantum_efficiency;
}

inline double effective_count_rate(const SystemConfig& config, const CollectionChain& chain,
                                   const DetectorModel& det) {
    config.validate();
    const DensityMatrix rho = steady_state(liouvillian_for(config));
    double pop = 0.0;
    for (int idx : config.scheme.indices_of_term(Term::P12)) pop += rho.rho(idx, idx).real();
    return detected_rate_from_population(pop, config, chain, det);
}

namespace detail {

inline double uniform_spacing(const std::vector<double>& grid) {
    if (grid.size() < 2) throw InvalidInput("grid needs at least two points");
    const double h = grid[1] - grid[0];
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (std::abs((grid[i] - grid[i - 1]) - h) > 1e-9)
            throw InvalidInput("convolution requires a uniform tau grid");
    return h;
}

}  // namespace detail

// Gaussian smoothing with the detector's pairwise timing response.  The
// one-sided series is extended to negative tau by its parity (even for the
// intensity correlations, conjugate-even for g1) and by edge replication at
// the far end, which keeps a settled plateau exact.
inline CorrelationSeries convolve_response(const CorrelationSeries& series, const DetectorModel& det) {
    det.validate();
    series.check_grid();
    if (det.response_fwhm == 0.0) return series;

    const double h = detail::uniform_spacing(series.tau_ns);
    const double required = det.response_fwhm / 4.0;
    if (h > required + 1e-12) {
        char msg[160];
        std::snprintf(msg, sizeof msg,
                      "grid spacing %.6g ns too coarse for %.6g ns FWHM response; need <= %.6g ns",
                      h, det.response_fwhm, required);
        throw InvalidInput(msg);
    }

    const double sigma = sigma_from_fwhm(det.response_fwhm);
    const long half = std::lround(std::ceil(5.0 * sigma / h));
    std::vector<double> kernel(2 * half + 1);
    double norm = 0.0;
    for (long k = -half; k <= half; ++k) {
        const double x = static_cast<double>(k) * h / sigma;
        kernel[static_cast<std::size_t>(k + half)] = std::exp(-0.5 * x * x);
        norm += kernel[static_cast<std::size_t>(k + half)];
    }
    for (double& w : kernel) w /= norm;

    const long n = static_cast<long>(series.size());
    const bool conj_even = series.kind == CorrelationKind::G1;
    auto sample = [&](long idx) -> std::complex<double> {
        if (idx < 0) {
            const auto v = series.values[static_cast<std::size_t>(-idx)];
            return conj_even ? std::conj(v) : v;
        }
        if (idx >= n) return series.values[static_cast<std::size_t>(n - 1)];
        return series.values[static_cast<std::size_t>(idx)];
    };

    CorrelationSeries out{series.tau_ns, {}, series.kind, series.normalized};
    out.values.resize(series.size());
    for (long i = 0; i < n; ++i) {
        std::complex<double> acc = 0.0;
        for (long k = -half; k <= half; ++k)
            acc += kernel[static_cast<std::size_t>(k + half)] * sample(i + k);
        out.values[static_cast<std::size_t>(i)] = acc;
    }
    return out;
}

// Uncorrelated background (dark counts, stray light) mixed into a normalized
// correlation: g_meas = (1-b)^2 g + 1 - (1-b)^2 with b the background share
// of the total count rate.
struct BackgroundMix {
    double b = 0.0;

    double apply(double g) const {
        const double s = (1.0 - b) * (1.0 - b);
        return s * g + (1.0 - s);
    }
    CorrelationSeries apply(const CorrelationSeries& series) const {
        if (series.kind == CorrelationKind::G1)
            throw InvalidInput("background mixing applies to intensity correlations");
        CorrelationSeries out = series;
        for (auto& v : out.values) v = apply(v.real());
        return out;
    }
};

inline BackgroundMix accidental_floor(double signal_rate, double dark_rate, double stray_rate) {
    if (!(signal_rate >= 0.0) || !(dark_rate >= 0.0) || !(stray_rate >= 0.0))
        throw InvalidInput("rates must be >= 0");
    const double background = dark_rate + stray_rate;
    const double total = signal_rate + background;
    if (total <= 0.0) throw NoSignal("all rates are zero; background fraction undefined");
    return BackgroundMix{background / total};
}

}  // namespace homsim
