#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <vector>

#include "homsim/detection.hpp"
#include "homsim/dynamics.hpp"
#include "homsim/errors.hpp"
#include "homsim/liouvillian.hpp"
#include "homsim/operators.hpp"
#include "homsim/rng.hpp"
#include "homsim/units.hpp"

namespace homsim {

enum class Channel : std::uint8_t { I1 = 0, I2 = 1, I3 = 2, I4 = 3 };
enum class Origin : std::uint8_t { Ion1 = 0, Ion2 = 1, Dark = 2 };

struct PhotonRecord {
    std::uint64_t time_ps;
    Channel channel;
    Origin origin;
};

struct TrajectoryConfig {
    double duration_s = 1.0;
    std::uint64_t seed = 1;
    std::int64_t time_quantum_ps = 1;

    void validate() const {
        if (!(duration_s > 0.0)) throw InvalidInput("trajectory duration must be > 0");
        if (time_quantum_ps < 1) throw InvalidInput("time quantum must be >= 1 ps");
    }
};

namespace detail {

// Unitary with a prescribed first row (Gram-Schmidt completion).
inline Eigen::MatrixXcd unitary_from_first_row(const Eigen::VectorXcd& row) {
    const Eigen::Index n = row.size();
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(n, n);
    u.row(0) = row.transpose() / row.norm();
    Eigen::Index filled = 1;
    for (Eigen::Index j = 0; j < n && filled < n; ++j) {
        Eigen::VectorXcd v = Eigen::VectorXcd::Unit(n, j);
        for (Eigen::Index r = 0; r < filled; ++r)
            v -= u.row(r).conjugate().transpose() * (u.row(r) * v)(0);
        const double norm = v.norm();
        if (norm > 1e-8) u.row(filled++) = (v / norm).transpose();
    }
    if (filled != n) throw Error("unitary completion failed");
    return u;
}

}  // namespace detail

// Collapse channels for the jump unraveling.  The green (P -> S) operators
// are mixed by a unitary chosen so that channel 0 is exactly the fluorescence
// mode the collection optics sees; such a mixing leaves the Lindblad
// generator unchanged, so jumps of channel 0 are collected-photon emissions.
// `weights` are the (sigma-, pi, sigma+) collection amplitudes; components
// for polarizations the scheme cannot emit are dropped before normalizing.
struct CollapseChannels {
    std::vector<Eigen::MatrixXcd> ops;  // ops[0] = collected channel
    Eigen::MatrixXcd collected;         // alias of ops[0]
};

inline CollapseChannels collapse_channels(const SystemConfig& config,
                                          const Eigen::Vector3cd& weights) {
    const auto jumps = build_jump_operators(config);
    std::vector<const TransitionOperator*> greens;
    for (const auto& op : jumps)
        if (op.upper == Term::P12 && op.lower == Term::S12) greens.push_back(&op);
    if (greens.empty()) throw ConfigError("scheme has no P1/2 -> S1/2 decay channel to collect");

    Eigen::VectorXcd u(static_cast<Eigen::Index>(greens.size()));
    for (std::size_t i = 0; i < greens.size(); ++i) u(static_cast<Eigen::Index>(i)) = weights(greens[i]->q + 1);
    if (u.norm() == 0.0)
        throw ConfigError("collection weights have no overlap with the emitted polarizations");
    const Eigen::MatrixXcd mix = detail::unitary_from_first_row(u);

    CollapseChannels out;
    const int d = static_cast<int>(config.scheme.dim());
    for (Eigen::Index r = 0; r < mix.rows(); ++r) {
        Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(d, d);
        for (std::size_t c = 0; c < greens.size(); ++c)
            b += mix(r, static_cast<Eigen::Index>(c)) * greens[c]->matrix;
        out.ops.push_back(std::move(b));
    }
    for (const auto& op : jumps)
        if (!(op.upper == Term::P12 && op.lower == Term::S12)) out.ops.push_back(op.matrix);
    for (const auto& a : dephasing_operators(config)) out.ops.push_back(a);
    out.collected = out.ops.front();
    return out;
}

// Quantum-jump (Monte Carlo wave function) unraveling of the master
// equation.  Between jumps the state evolves under the non-Hermitian
// H_eff = H - i/2 sum A^+A; the next jump happens when the squared norm
// crosses a uniform draw.  Because H_eff is time independent, evolution over
// 2^k time quanta is a cached matrix power, and the crossing time is located
// to one quantum by a greedy binary descent (the norm decays monotonically).
// Only jumps of the collected channel produce records.
inline std::vector<PhotonRecord> mcwf_photon_stream(
    const SystemConfig& config, const TrajectoryConfig& traj, Channel channel = Channel::I1,
    Origin origin = Origin::Ion1, const Eigen::Vector3cd& weights = default_collection_weights()) {
    config.validate();
    traj.validate();
    if (channel != Channel::I1 && channel != Channel::I2)
        throw InvalidInput("emission streams are I1 or I2");

    const int d = static_cast<int>(config.scheme.dim());
    const auto channels = collapse_channels(config, weights);
    const Eigen::MatrixXcd h = build_hamiltonian(config);

    Eigen::MatrixXcd h_eff = h;
    for (const auto& a : channels.ops)
        h_eff -= std::complex<double>(0.0, 0.5) * (a.adjoint() * a);

    const std::uint64_t total_quanta =
        static_cast<std::uint64_t>(traj.duration_s * 1e12 / static_cast<double>(traj.time_quantum_ps));
    if (total_quanta == 0) throw InvalidInput("duration shorter than one time quantum");

    int k_max = 0;
    while ((1ULL << k_max) < total_quanta && k_max < 62) ++k_max;

    // exp(-i H_eff dt 2^k) ladder; all entries are contractions, so repeated
    // squaring is numerically tame.
    const double quantum_us = static_cast<double>(traj.time_quantum_ps) * 1e-6;
    std::vector<Eigen::MatrixXcd> steps(static_cast<std::size_t>(k_max) + 1);
    steps[0] = (std::complex<double>(0.0, -1.0) * h_eff * quantum_us).exp();
    for (int k = 1; k <= k_max; ++k) steps[static_cast<std::size_t>(k)] = steps[static_cast<std::size_t>(k - 1)] * steps[static_cast<std::size_t>(k - 1)];

    Rng rng(derive_seed(traj.seed, static_cast<std::uint64_t>(origin)));

    // Start from a pure state drawn from the steady state so the stream is
    // stationary from t = 0.  Undriven configs have no unique steady state;
    // they start in the first level and simply never scatter.
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(d);
    bool seeded_from_steady_state = false;
    try {
        const DensityMatrix rho = steady_state(liouvillian_for(config));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho.rho);
        std::vector<double> cdf(static_cast<std::size_t>(d));
        double acc = 0.0;
        for (int i = 0; i < d; ++i) {
            acc += std::max(es.eigenvalues()(i), 0.0);
            cdf[static_cast<std::size_t>(i)] = acc;
        }
        const double pick = rng.uniform() * acc;
        int which = d - 1;
        for (int i = 0; i < d; ++i)
            if (pick < cdf[static_cast<std::size_t>(i)]) { which = i; break; }
        psi = es.eigenvectors().col(which);
        seeded_from_steady_state = true;
    } catch (const DegenerateSteadyState&) {
        psi(0) = 1.0;
    }
    (void)seeded_from_steady_state;

    std::vector<PhotonRecord> out;
    std::vector<double> jump_weights(channels.ops.size());
    Eigen::VectorXcd candidate(d), buffer(d);

    std::uint64_t t = 0;  // quanta
    while (t < total_quanta) {
        const double target = rng.uniform_positive();

        // greedy binary descent: after the loop `gap` is the largest number
        // of quanta (within the run) keeping the squared norm above target
        std::uint64_t gap = 0;
        for (int k = k_max; k >= 0; --k) {
            const std::uint64_t stride = 1ULL << k;
            if (t + gap + stride > total_quanta) continue;
            candidate.noalias() = steps[static_cast<std::size_t>(k)] * psi;
            if (candidate.squaredNorm() > target) {
                psi.swap(candidate);
                gap += stride;
            }
        }
        if (t + gap >= total_quanta) break;  // survived to the end of the run

        t += gap + 1;
        buffer.noalias() = steps[0] * psi;  // state just before the jump
        psi.swap(buffer);

        double total_weight = 0.0;
        for (std::size_t c = 0; c < channels.ops.size(); ++c) {
            candidate.noalias() = channels.ops[c] * psi;
            jump_weights[c] = candidate.squaredNorm();
            total_weight += jump_weights[c];
        }
        if (!(total_weight > 0.0))
            throw Error("jump with no available collapse channel at t = " +
                        std::to_string(t * static_cast<std::uint64_t>(traj.time_quantum_ps)) + " ps");

        double pick = rng.uniform() * total_weight;
        std::size_t chosen = channels.ops.size() - 1;
        for (std::size_t c = 0; c < channels.ops.size(); ++c) {
            if (pick < jump_weights[c]) { chosen = c; break; }
            pick -= jump_weights[c];
        }

        buffer.noalias() = channels.ops[chosen] * psi;
        psi = buffer / buffer.norm();

        if (chosen == 0)
            out.push_back({t * static_cast<std::uint64_t>(traj.time_quantum_ps), channel, origin});
    }
    return out;
}

// |g1|^2 lookup with linear interpolation, used for the veto probability.
class CoherenceProfile {
  public:
    explicit CoherenceProfile(const CorrelationSeries& g1s, double floor = 1e-3) {
        if (g1s.kind != CorrelationKind::G1 || !g1s.normalized)
            throw InvalidInput("veto needs a normalized g1 series");
        g1s.check_grid();
        tau_ns_ = g1s.tau_ns;
        mag2_.reserve(g1s.size());
        for (const auto& v : g1s.values) mag2_.push_back(std::norm(v));
        if (mag2_.back() >= floor)
            throw InvalidInput("g1 grid does not cover the interference window: |g1|^2 at the "
                               "last grid point is still above the cutoff");
        std::size_t last = 0;
        for (std::size_t i = 0; i < mag2_.size(); ++i)
            if (mag2_[i] >= floor) last = i;
        window_ns_ = tau_ns_[std::min(last + 1, tau_ns_.size() - 1)];
    }

    double window_ns() const { return window_ns_; }

    double mag2(double tau_ns) const {
        tau_ns = std::abs(tau_ns);
        if (tau_ns >= tau_ns_.back()) return 0.0;
        const auto it = std::upper_bound(tau_ns_.begin(), tau_ns_.end(), tau_ns);
        const std::size_t hi = static_cast<std::size_t>(it - tau_ns_.begin());
        if (hi == 0) return mag2_.front();
        const double t0 = tau_ns_[hi - 1], t1 = tau_ns_[hi];
        const double f = (tau_ns - t0) / (t1 - t0);
        return (1.0 - f) * mag2_[hi - 1] + f * mag2_[hi];
    }

  private:
    std::vector<double> tau_ns_;
    std::vector<double> mag2_;
    double window_ns_ = 0.0;
};

struct RoutingResult {
    std::vector<PhotonRecord> i3;
    std::vector<PhotonRecord> i4;
    std::uint64_t routed_input = 0;   // |I1| + |I2|
    std::uint64_t vetoed = 0;         // photons removed by the interference veto
    double window_ns = 0.0;           // lag window the veto acted on
};

namespace detail {

inline void require_stream_sorted(const std::vector<PhotonRecord>& s, const char* name) {
    for (std::size_t i = 1; i < s.size(); ++i)
        if (s[i].time_ps < s[i - 1].time_ps)
            throw InvalidInput(std::string(name) + " stream is not sorted");
}

}  // namespace detail

// Binomial thinning of a photon stream: every photon independently survives
// with probability `keep`.  This models optical losses between the ion and
// the beam splitter (collection solid angle, fiber coupling, spectral
// filters), which act before two-photon interference and therefore before
// routing.  Keeping the splitter input in the low-flux regime is also what
// makes the pairwise interference veto below a faithful model.
inline std::vector<PhotonRecord> thin_stream(const std::vector<PhotonRecord>& stream, double keep,
                                             std::uint64_t seed) {
    if (!(keep >= 0.0 && keep <= 1.0))
        throw InvalidInput("survival probability must be in [0, 1]");
    if (keep == 1.0) return stream;
    std::vector<PhotonRecord> out;
    if (keep == 0.0) return out;
    Rng rng(derive_seed(seed, 30));
    out.reserve(static_cast<std::size_t>(static_cast<double>(stream.size()) * keep * 1.1) + 16);
    for (const auto& p : stream)
        if (rng.bernoulli(keep)) out.push_back(p);
    return out;
}

// 50/50 beam-splitter routing with two-photon interference as pairwise
// thinning: every cross-ion pair that lands on opposite output ports within
// the coherence window is vetoed with probability cos^2(phi) |g1(dt)|^2
// (times kappa, a calibration constant that is 1 for this veto definition),
// by deleting the later photon.  This reproduces the Eq.-(5)-style
// cross-port coincidence deficit in the low-flux regime.  No detector
// effects are applied here.
inline RoutingResult route_and_veto(const std::vector<PhotonRecord>& stream1,
                                    const std::vector<PhotonRecord>& stream2, double phi_deg,
                                    const CorrelationSeries& g1s, std::uint64_t seed,
                                    double kappa = 1.0) {
    detail::require_stream_sorted(stream1, "ion 1");
    detail::require_stream_sorted(stream2, "ion 2");
    if (!std::isfinite(phi_deg)) throw InvalidInput("polarization angle must be finite");
    if (!(kappa >= 0.0)) throw InvalidInput("kappa must be >= 0");

    const CoherenceProfile profile(g1s);
    const double c2 = std::pow(std::cos(phi_deg * kTwoPi / 360.0), 2);
    const std::uint64_t window_ps = static_cast<std::uint64_t>(ps_from_ns(profile.window_ns()));

    Rng route_rng(derive_seed(seed, 10));
    Rng veto_rng(derive_seed(seed, 11));

    RoutingResult out;
    out.window_ns = profile.window_ns();
    out.routed_input = stream1.size() + stream2.size();

    struct Routed {
        std::uint64_t t;
        Origin origin;
        bool to_i3;
    };
    std::deque<Routed> recent;  // retained photons within the veto window

    std::size_t a = 0, b = 0;
    while (a < stream1.size() || b < stream2.size()) {
        const bool take_a =
            b >= stream2.size() || (a < stream1.size() && stream1[a].time_ps <= stream2[b].time_ps);
        const PhotonRecord& src = take_a ? stream1[a++] : stream2[b++];
        Routed p{src.time_ps, src.origin, route_rng.bernoulli(0.5)};

        while (!recent.empty() && recent.front().t + window_ps < p.t) recent.pop_front();

        bool dead = false;
        if (c2 > 0.0 && kappa > 0.0) {
            for (const Routed& e : recent) {
                if (e.origin == p.origin || e.to_i3 == p.to_i3) continue;
                const double prob =
                    c2 * kappa * profile.mag2(ns_from_ps(static_cast<double>(p.t - e.t)));
                if (prob > 0.0 && veto_rng.bernoulli(prob)) {
                    dead = true;
                    break;
                }
            }
        }
        if (dead) {
            ++out.vetoed;
            continue;
        }
        recent.push_back(p);
        auto& port = p.to_i3 ? out.i3 : out.i4;
        port.push_back({p.t, p.to_i3 ? Channel::I3 : Channel::I4, p.origin});
    }
    return out;
}

// Detector effects on one output port, in physical order: quantum-efficiency
// thinning, dark-count injection, per-event Gaussian timing jitter (the
// pairwise response FWHM divided by sqrt(2) per detector), then
// non-paralyzable dead time on the jittered arrival order.
inline std::vector<PhotonRecord> apply_detection(const std::vector<PhotonRecord>& port,
                                                 Channel channel, const DetectorModel& det,
                                                 double duration_s, std::uint64_t seed) {
    det.validate();
    if (!(duration_s > 0.0)) throw InvalidInput("duration must be > 0");

    Rng thin_rng(derive_seed(seed, 20));
    Rng dark_rng(derive_seed(seed, 21));
    Rng jitter_rng(derive_seed(seed, 22));

    std::vector<PhotonRecord> kept;
    kept.reserve(port.size());
    for (const auto& p : port)
        if (thin_rng.bernoulli(det.quantum_efficiency)) kept.push_back(p);

    if (det.dark_rate > 0.0) {
        const double duration_ps = duration_s * 1e12;
        double t = 0.0;
        for (;;) {
            t += dark_rng.exponential(det.dark_rate * 1e-12);
            if (t >= duration_ps) break;
            kept.push_back({static_cast<std::uint64_t>(t), channel, Origin::Dark});
        }
    }

    if (det.response_fwhm > 0.0) {
        const double sigma_ps = ps_from_ns(sigma_from_fwhm(det.response_fwhm)) / std::sqrt(2.0);
        for (auto& p : kept) {
            const double shifted = static_cast<double>(p.time_ps) + sigma_ps * jitter_rng.normal();
            p.time_ps = shifted <= 0.0 ? 0 : static_cast<std::uint64_t>(std::llround(shifted));
        }
    }

    std::sort(kept.begin(), kept.end(),
              [](const PhotonRecord& x, const PhotonRecord& y) { return x.time_ps < y.time_ps; });

    if (det.dead_time > 0.0) {
        const std::uint64_t dead_ps = static_cast<std::uint64_t>(ps_from_ns(det.dead_time));
        std::vector<PhotonRecord> alive;
        alive.reserve(kept.size());
        std::uint64_t open_at = 0;
        for (const auto& p : kept) {
            if (!alive.empty() && p.time_ps < open_at) continue;
            alive.push_back(p);
            open_at = p.time_ps + dead_ps;
        }
        kept.swap(alive);
    }
    for (auto& p : kept) p.channel = channel;
    return kept;
}

// Full beam-splitter + detection pipeline (the measured I3/I4 streams).
inline RoutingResult route_and_interfere(const std::vector<PhotonRecord>& stream1,
                                         const std::vector<PhotonRecord>& stream2, double phi_deg,
                                         const CorrelationSeries& g1s, const DetectorModel& det,
                                         double duration_s, std::uint64_t seed,
                                         double kappa = 1.0) {
    RoutingResult routed = route_and_veto(stream1, stream2, phi_deg, g1s, seed, kappa);
    routed.i3 = apply_detection(routed.i3, Channel::I3, det, duration_s, derive_seed(seed, 3));
    routed.i4 = apply_detection(routed.i4, Channel::I4, det, duration_s, derive_seed(seed, 4));
    return routed;
}

inline std::vector<std::uint64_t> times_of(const std::vector<PhotonRecord>& stream) {
    std::vector<std::uint64_t> out;
    out.reserve(stream.size());
    for (const auto& p : stream) out.push_back(p.time_ps);
    return out;
}

}  // namespace homsim
