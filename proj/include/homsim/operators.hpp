#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "homsim/angular.hpp"
#include "homsim/errors.hpp"
#include "homsim/system_config.hpp"

namespace homsim {

// One Zeeman-resolved jump operator: all decay paths of a (channel, q)
// combination.  matrix entries are sqrt(rate_weight) * C(q) with C the
// angular coupling coefficients; rate_weight is the channel partial rate
// (total upper-term rate times branching fraction).
struct TransitionOperator {
    Eigen::MatrixXcd matrix;
    Term upper;
    Term lower;
    int q;
    double rate_weight;
};

// Rotating-frame Hamiltonian: Zeeman shifts plus detunings on the diagonal,
// (Omega/2) * C(q) * pol_q laser couplings off the diagonal.  The frame
// rotates with both lasers; it is time independent because the two drives
// address disjoint transitions.
inline Eigen::MatrixXcd build_hamiltonian(const SystemConfig& config) {
    config.validate();
    const auto& scheme = config.scheme;
    const int d = static_cast<int>(scheme.dim());
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(d, d);

    const LaserDrive* green = config.laser_on(Term::S12);
    const LaserDrive* red = config.laser_on(Term::D32);
    const double delta_g = green ? green->detuning : 0.0;
    const double delta_r = red ? red->detuning : 0.0;

    for (int i = 0; i < d; ++i) {
        const Level& l = scheme.levels[static_cast<std::size_t>(i)];
        const double g = scheme.lande_g.count(l.term) ? scheme.lande_g.at(l.term) : 0.0;
        double e = g * (0.5 * l.twice_mj) * config.field.zeeman_unit * config.field.gauss;
        if (l.term == Term::P12) e -= delta_g;
        if (l.term == Term::D32) e -= delta_g - delta_r;
        h(i, i) = e;
    }

    for (const auto& laser : config.lasers) {
        const int twice_j_l = scheme.twice_j_of(laser.lower);
        const int twice_j_u = scheme.twice_j_of(laser.upper);
        for (int q = -1; q <= 1; ++q) {
            const std::complex<double> pol = laser.polarization(q + 1);
            if (pol == 0.0) continue;
            for (const Level& lu : scheme.levels) {
                if (lu.term != laser.upper) continue;
                const int iu = scheme.index_of(laser.upper, lu.twice_mj);
                const int il = scheme.index_of(laser.lower, lu.twice_mj - 2 * q);
                if (il < 0) continue;
                const double c = dipole_coupling(twice_j_l, twice_j_u, lu.twice_mj, q);
                const std::complex<double> v = 0.5 * laser.rabi * c * pol;
                h(iu, il) += v;
                h(il, iu) += std::conj(v);
            }
        }
    }
    return h;
}

// One operator per (decay channel, q) with at least one allowed mJ pair.
inline std::vector<TransitionOperator> build_jump_operators(const SystemConfig& config) {
    config.validate();
    const auto& scheme = config.scheme;
    const int d = static_cast<int>(scheme.dim());
    std::vector<TransitionOperator> ops;

    for (const auto& channel : scheme.decay_channels) {
        const int twice_j_u = scheme.twice_j_of(channel.upper);
        const int twice_j_l = scheme.twice_j_of(channel.lower);
        const double partial_rate = channel.rate * channel.branching;
        for (int q = -1; q <= 1; ++q) {
            Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(d, d);
            bool nonzero = false;
            for (const Level& lu : scheme.levels) {
                if (lu.term != channel.upper) continue;
                const int iu = scheme.index_of(channel.upper, lu.twice_mj);
                const int il = scheme.index_of(channel.lower, lu.twice_mj - 2 * q);
                if (il < 0) continue;
                const double c = dipole_coupling(twice_j_l, twice_j_u, lu.twice_mj, q);
                if (c == 0.0) continue;
                a(il, iu) = std::sqrt(partial_rate) * c;
                nonzero = true;
            }
            if (nonzero) ops.push_back({std::move(a), channel.upper, channel.lower, q, partial_rate});
        }
    }
    return ops;
}

// The fluorescence operator actually seen by the collection optics: a
// weighted coherent sum over the green (P->S) polarization components.
// weights index q = -1, 0, +1; the overall scale is irrelevant and is
// normalized away.
inline Eigen::MatrixXcd collection_operator(const SystemConfig& config,
                                            const Eigen::Vector3cd& weights) {
    if (!weights.allFinite() || weights.norm() == 0.0)
        throw ConfigError("collection weights must be finite and not all zero");
    const Eigen::Vector3cd w = weights / weights.norm();
    const auto jumps = build_jump_operators(config);
    const int d = static_cast<int>(config.scheme.dim());
    Eigen::MatrixXcd sigma = Eigen::MatrixXcd::Zero(d, d);
    bool found = false;
    for (const auto& op : jumps) {
        if (op.upper != Term::P12 || op.lower != Term::S12) continue;
        sigma += w(op.q + 1) * op.matrix;
        found = true;
    }
    if (!found) throw ConfigError("scheme has no P1/2 -> S1/2 decay channel to collect");
    return sigma;
}

inline Eigen::Vector3cd default_collection_weights() {
    return Eigen::Vector3cd::Constant(1.0 / std::sqrt(3.0));
}

}  // namespace homsim
