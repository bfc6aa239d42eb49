#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "homsim/errors.hpp"
#include "homsim/timetag.hpp"

namespace homsim {

enum class HistogramMode { Multistop, TacStartStop };

inline const char* histogram_mode_name(HistogramMode m) {
    return m == HistogramMode::Multistop ? "multistop" : "tac_startstop";
}

// Lag histogram layout.  tau = t_stop - t_start with half-open bins
// [lo, hi); the window must be an integer number of bins so that binning
// stays exact in integer picoseconds.  `start_channel` selects which
// recorded channel plays the start role (I3 by default, so tau is
// t(I4) - t(I3)).
struct HistogramConfig {
    double bin_width_ns = 1.0;
    double window_ns = 50.0;
    HistogramMode mode = HistogramMode::Multistop;
    int start_channel = 0;  // 0 = I3, 1 = I4

    void validate() const {
        if (!(bin_width_ns > 0.0)) throw InvalidInput("bin width must be > 0");
        if (!(window_ns > 0.0)) throw InvalidInput("window must be > 0");
        const double ratio = window_ns / bin_width_ns;
        if (std::abs(ratio - std::round(ratio)) > 1e-9)
            throw InvalidInput("window must be an integer multiple of the bin width");
        const double bin_ps_f = bin_width_ns * 1e3;
        if (std::abs(bin_ps_f - std::round(bin_ps_f)) > 1e-6 || std::llround(bin_ps_f) < 1)
            throw InvalidInput("bin width must be a whole (positive) number of picoseconds");
        if (start_channel != 0 && start_channel != 1)
            throw InvalidInput("start channel must be 0 (I3) or 1 (I4)");
    }

    std::int64_t bin_ps() const { return std::llround(bin_width_ns * 1e3); }
    std::int64_t window_ps() const { return bin_ps() * static_cast<std::int64_t>(std::llround(window_ns / bin_width_ns)); }
    std::size_t bin_count() const { return static_cast<std::size_t>(2 * std::llround(window_ns / bin_width_ns)); }
};

struct HistogramResult {
    std::vector<double> bin_centers_ns;
    std::vector<std::uint64_t> counts;
    std::vector<double> g2;            // rate-product normalization
    std::vector<double> g2_err;        // Poisson stderr under the same normalization
    std::vector<double> g2_plateau;    // far-bin plateau normalization, empty if unavailable
    bool plateau_available = false;
    double duration_s = 0.0;
    double rate_a = 0.0;  // counts/s
    double rate_b = 0.0;
    HistogramMode mode = HistogramMode::Multistop;
    double bin_width_ns = 0.0;
    double window_ns = 0.0;

    std::uint64_t total_counts() const {
        std::uint64_t n = 0;
        for (auto c : counts) n += c;
        return n;
    }
};

namespace detail {

inline HistogramResult make_histogram_shell(const HistogramConfig& cfg) {
    HistogramResult r;
    r.mode = cfg.mode;
    r.bin_width_ns = cfg.bin_width_ns;
    r.window_ns = cfg.window_ns;
    const std::size_t n = cfg.bin_count();
    r.counts.assign(n, 0);
    r.bin_centers_ns.resize(n);
    const std::int64_t bin = cfg.bin_ps();
    const std::int64_t lo = -cfg.window_ps();
    for (std::size_t i = 0; i < n; ++i)
        r.bin_centers_ns[i] = (static_cast<double>(lo) + (static_cast<double>(i) + 0.5) * static_cast<double>(bin)) * 1e-3;
    return r;
}

inline void require_sorted(const std::vector<std::uint64_t>& v, const char* name) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] < v[i - 1]) throw InvalidInput(std::string(name) + " channel is not sorted");
}

}  // namespace detail

// Counts every pair (a, b) with t_b - t_a in [-window, +window) — the
// multi-stop estimator.  Two-pointer sliding window, so the cost is linear
// in events plus pairs actually inside the window.
inline HistogramResult correlate_multistop(const std::vector<std::uint64_t>& ch_a,
                                           const std::vector<std::uint64_t>& ch_b,
                                           const HistogramConfig& cfg) {
    cfg.validate();
    if (ch_a.empty() || ch_b.empty()) throw NoData("a correlation channel is empty");
    detail::require_sorted(ch_a, "start");
    detail::require_sorted(ch_b, "stop");

    HistogramResult r = detail::make_histogram_shell(cfg);
    const std::int64_t w = cfg.window_ps();
    const std::int64_t bin = cfg.bin_ps();

    std::size_t lo = 0, hi = 0;
    for (const std::uint64_t ta : ch_a) {
        const std::int64_t t = static_cast<std::int64_t>(ta);
        while (lo < ch_b.size() && static_cast<std::int64_t>(ch_b[lo]) - t < -w) ++lo;
        if (hi < lo) hi = lo;
        while (hi < ch_b.size() && static_cast<std::int64_t>(ch_b[hi]) - t < w) ++hi;
        for (std::size_t j = lo; j < hi; ++j) {
            const std::int64_t tau = static_cast<std::int64_t>(ch_b[j]) - t;
            r.counts[static_cast<std::size_t>((tau + w) / bin)] += 1;
        }
    }
    return r;
}

// TAC start-stop estimator: a start arms the converter, which then accepts
// only the first stop strictly after it; until that stop arrives (or the
// ramp runs off the window) further starts are ignored.  Only positive lags
// are physical in this mode; negative bins stay empty.  At high rates early
// stops preempt later ones, so far bins undercount relative to multistop —
// the classic TAC pile-up bias, which vanishes as rates go to zero.
inline HistogramResult correlate_tac(const std::vector<std::uint64_t>& ch_start,
                                     const std::vector<std::uint64_t>& ch_stop,
                                     const HistogramConfig& cfg) {
    cfg.validate();
    if (ch_start.empty() || ch_stop.empty()) throw NoData("a correlation channel is empty");
    detail::require_sorted(ch_start, "start");
    detail::require_sorted(ch_stop, "stop");

    HistogramResult r = detail::make_histogram_shell(cfg);
    const std::int64_t w = cfg.window_ps();
    const std::int64_t bin = cfg.bin_ps();

    std::size_t j = 0;
    std::int64_t busy_until = -1;  // converter dead while ramping
    for (const std::uint64_t ts : ch_start) {
        const std::int64_t t = static_cast<std::int64_t>(ts);
        if (t < busy_until) continue;
        while (j < ch_stop.size() && static_cast<std::int64_t>(ch_stop[j]) <= t) ++j;
        if (j < ch_stop.size()) {
            const std::int64_t tau = static_cast<std::int64_t>(ch_stop[j]) - t;
            if (tau < w) {
                r.counts[static_cast<std::size_t>((tau + w) / bin)] += 1;
                busy_until = static_cast<std::int64_t>(ch_stop[j]);
                continue;
            }
        }
        busy_until = t + w;  // ramp ran to full scale without a stop
    }
    return r;
}

// Fills in both normalizations: (a) rate product r_a * r_b * bin * duration
// (unbiased for stationary streams, used for g2 and its stderr) and (b) the
// mean of the outer quarter of bins on each side (the operational
// plateau-at-large-lag definition).  TAC histograms normalize over positive
// lags only, since their negative side is structurally empty.
inline HistogramResult normalize(HistogramResult hist, double rate_a, double rate_b,
                                 double duration_s) {
    if (!(duration_s > 0.0)) throw NoData("duration must be > 0");
    if (!(rate_a > 0.0) || !(rate_b > 0.0)) throw NoData("channel rates must be > 0");
    hist.duration_s = duration_s;
    hist.rate_a = rate_a;
    hist.rate_b = rate_b;

    const double bin_s = hist.bin_width_ns * 1e-9;
    const double expected = rate_a * rate_b * bin_s * duration_s;
    const std::size_t n = hist.counts.size();
    hist.g2.resize(n);
    hist.g2_err.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        hist.g2[i] = static_cast<double>(hist.counts[i]) / expected;
        hist.g2_err[i] = std::sqrt(static_cast<double>(hist.counts[i])) / expected;
    }

    const bool positive_only = hist.mode == HistogramMode::TacStartStop;
    double plateau_sum = 0.0;
    std::size_t plateau_n = 0;
    const double edge = 0.75 * hist.window_ns;
    for (std::size_t i = 0; i < n; ++i) {
        const double c = hist.bin_centers_ns[i];
        if (positive_only && c < 0.0) continue;
        if (std::abs(c) >= edge) {
            plateau_sum += static_cast<double>(hist.counts[i]);
            ++plateau_n;
        }
    }
    if (plateau_n > 0 && plateau_sum > 0.0) {
        const double plateau = plateau_sum / static_cast<double>(plateau_n);
        hist.g2_plateau.resize(n);
        for (std::size_t i = 0; i < n; ++i)
            hist.g2_plateau[i] = static_cast<double>(hist.counts[i]) / plateau;
        hist.plateau_available = true;
    } else {
        hist.g2_plateau.clear();
        hist.plateau_available = false;
    }
    return hist;
}

// One-call path from a loaded time-tag file: I3 starts, I4 stops, rates
// from the record counts over the metadata duration.
inline HistogramResult correlate_timetags(const TimeTagData& data, const HistogramConfig& cfg,
                                          double duration_s_override = 0.0) {
    double duration = duration_s_override;
    if (duration <= 0.0 && data.meta) duration = data.meta->duration_s;
    if (duration <= 0.0) throw NoData("no duration available; pass one explicitly");
    const auto& starts = cfg.start_channel == 0 ? data.i3 : data.i4;
    const auto& stops = cfg.start_channel == 0 ? data.i4 : data.i3;
    HistogramResult h = cfg.mode == HistogramMode::Multistop
                            ? correlate_multistop(starts, stops, cfg)
                            : correlate_tac(starts, stops, cfg);
    const double ra = static_cast<double>(starts.size()) / duration;
    const double rb = static_cast<double>(stops.size()) / duration;
    return normalize(std::move(h), ra, rb, duration);
}

}  // namespace homsim
