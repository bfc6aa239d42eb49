#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <cmath>
#include <complex>
#include <map>
#include <optional>
#include <vector>

#include "homsim/errors.hpp"
#include "homsim/liouvillian.hpp"
#include "homsim/units.hpp"

namespace homsim {

struct DensityMatrix {
    Eigen::MatrixXcd rho;

    void validate() const {
        if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
            throw InvalidInput("density matrix not Hermitian within 1e-10");
        if (std::abs(rho.trace() - 1.0) > 1e-10)
            throw InvalidInput("density matrix trace differs from 1 by more than 1e-10");
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -1e-8)
            throw InvalidInput("density matrix has eigenvalue below -1e-8");
    }
};

enum class CorrelationKind { G1, G2, G2Tot };

// Correlation values on a tau grid (ns).  G1 values are complex; the G2
// family is real and non-negative (stored in the real part).
struct CorrelationSeries {
    std::vector<double> tau_ns;
    std::vector<std::complex<double>> values;
    CorrelationKind kind = CorrelationKind::G1;
    bool normalized = true;

    std::size_t size() const { return tau_ns.size(); }
    double real_at(std::size_t i) const { return values[i].real(); }

    void check_grid() const {
        if (tau_ns.empty()) throw InvalidInput("empty tau grid");
        if (tau_ns.front() != 0.0) throw InvalidInput("tau grid must start at 0");
        for (std::size_t i = 1; i < tau_ns.size(); ++i)
            if (!(tau_ns[i] > tau_ns[i - 1]))
                throw InvalidInput("tau grid must be strictly increasing");
    }
};

// Applies exp(L t) to vectorized states, caching the matrix exponential per
// distinct time step so that uniform tau grids cost one factorization.
class Propagator {
  public:
    explicit Propagator(const Liouvillian& l) : l_(&l) {}

    const Eigen::MatrixXcd& step(double dt_us) {
        // quantize to femtoseconds for the cache key
        const long long key = std::llround(dt_us * 1e9);
        auto it = cache_.find(key);
        if (it == cache_.end()) {
            Eigen::MatrixXcd e = (l_->matrix * dt_us).exp();
            it = cache_.emplace(key, std::move(e)).first;
        }
        return it->second;
    }

    Eigen::VectorXcd apply(const Eigen::VectorXcd& v, double dt_us) {
        if (dt_us == 0.0) return v;
        return step(dt_us) * v;
    }

  private:
    const Liouvillian* l_;
    std::map<long long, Eigen::MatrixXcd> cache_;
};

// Unique steady state of L, selected as the trace-normalized kernel vector.
// A kernel of dimension > 1 (optical pumping into dark manifolds, no drive)
// raises DegenerateSteadyState rather than silently picking one.
inline DensityMatrix steady_state(const Liouvillian& l) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(l.matrix, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double cutoff = sv(0) * 1e-10;
    int kernel_dim = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) <= cutoff) ++kernel_dim;
    if (kernel_dim == 0) kernel_dim = 1;  // smallest singular value is the kernel direction
    if (kernel_dim > 1)
        throw DegenerateSteadyState("Liouvillian kernel has dimension " +
                                    std::to_string(kernel_dim) + "; steady state not unique");

    Eigen::MatrixXcd rho = unvec(svd.matrixV().col(sv.size() - 1), l.dim);
    rho = 0.5 * (rho + rho.adjoint()).eval();
    const std::complex<double> tr = rho.trace();
    if (std::abs(tr) < 1e-8)
        throw DegenerateSteadyState("kernel vector is traceless; no normalizable steady state");
    rho /= tr;

    const double residual = (l.matrix * vec(rho)).norm();
    if (residual > 1e-9)
        throw Error("steady-state residual " + std::to_string(residual) + " exceeds 1e-9");
    DensityMatrix out{std::move(rho)};
    out.validate();
    return out;
}

// exp(L t) rho0 for t in ns.
inline DensityMatrix propagate(const Liouvillian& l, const DensityMatrix& rho0, double t_ns) {
    if (!(t_ns >= 0.0)) throw InvalidInput("propagation time must be >= 0");
    if (t_ns == 0.0) return rho0;
    Propagator prop(l);
    Eigen::VectorXcd v = prop.apply(vec(rho0.rho), us_from_ns(t_ns));
    Eigen::MatrixXcd rho = unvec(v, l.dim);
    rho = 0.5 * (rho + rho.adjoint()).eval();
    return DensityMatrix{std::move(rho)};
}

namespace detail {

inline double emission_rate_or_throw(const Eigen::MatrixXcd& collect,
                                     const Eigen::MatrixXcd& rho_ss) {
    const double rate = (collect.adjoint() * collect * rho_ss).trace().real();
    const double scale = collect.squaredNorm();
    if (!(rate > 0.0) || rate < 1e-14 * std::max(scale, 1.0))
        throw NoSignal("steady-state emission rate through the collection operator is zero");
    return rate;
}

template <typename ValueFn>
void regression_sweep(const Liouvillian& l, Eigen::VectorXcd x,
                      const std::vector<double>& tau_ns, ValueFn&& value_at) {
    Propagator prop(l);
    value_at(0, x);
    for (std::size_t i = 1; i < tau_ns.size(); ++i) {
        x = prop.apply(x, us_from_ns(tau_ns[i] - tau_ns[i - 1]));
        value_at(i, x);
    }
}

}  // namespace detail

// First-order field correlation by the quantum regression theorem:
// g1(tau) = Tr[ S exp(L tau)(rho_ss S^+) ] / Tr[ S^+ S rho_ss ].
inline CorrelationSeries g1(const Liouvillian& l, const DensityMatrix& rho_ss,
                            const Eigen::MatrixXcd& collect, std::vector<double> tau_ns) {
    CorrelationSeries out{std::move(tau_ns), {}, CorrelationKind::G1, true};
    out.check_grid();
    const double rate = detail::emission_rate_or_throw(collect, rho_ss.rho);
    out.values.resize(out.tau_ns.size());
    Eigen::VectorXcd x0 = vec((rho_ss.rho * collect.adjoint()).eval());
    detail::regression_sweep(l, std::move(x0), out.tau_ns, [&](std::size_t i, const Eigen::VectorXcd& x) {
        out.values[i] = (collect * unvec(x, l.dim)).trace() / rate;
    });
    return out;
}

// Intensity correlation g2(tau) = Tr[ S^+S exp(L tau)(S rho_ss S^+) ] / rate^2.
// The tau=0 value comes straight from the conditional post-jump state, so a
// single collected channel gives exactly zero.
inline CorrelationSeries g2(const Liouvillian& l, const DensityMatrix& rho_ss,
                            const Eigen::MatrixXcd& collect, std::vector<double> tau_ns) {
    CorrelationSeries out{std::move(tau_ns), {}, CorrelationKind::G2, true};
    out.check_grid();
    const double rate = detail::emission_rate_or_throw(collect, rho_ss.rho);
    out.values.resize(out.tau_ns.size());
    const Eigen::MatrixXcd number_op = collect.adjoint() * collect;
    Eigen::VectorXcd x0 = vec((collect * rho_ss.rho * collect.adjoint()).eval());
    detail::regression_sweep(l, std::move(x0), out.tau_ns, [&](std::size_t i, const Eigen::VectorXcd& x) {
        out.values[i] = (number_op * unvec(x, l.dim)).trace().real() / (rate * rate);
    });
    return out;
}

// Steady-state excitation spectrum: total P1/2 population against the
// detuning of one laser.  Degenerate grid points are reported, not dropped.
struct Spectrum {
    std::vector<double> detuning;  // rad/us
    std::vector<double> p_population;
    std::vector<bool> degenerate;
    std::size_t scanned_laser = 0;
};

inline Spectrum excitation_spectrum(const SystemConfig& config, std::size_t laser_index,
                                    const std::vector<double>& detuning_grid) {
    config.validate();
    if (laser_index >= config.lasers.size()) throw InvalidInput("laser index out of range");
    for (double d : detuning_grid)
        if (!std::isfinite(d)) throw InvalidInput("detuning grid must be finite");

    Spectrum spec;
    spec.detuning = detuning_grid;
    spec.scanned_laser = laser_index;
    spec.p_population.resize(detuning_grid.size(), 0.0);
    spec.degenerate.resize(detuning_grid.size(), false);

    SystemConfig scan = config;
    const auto p_indices = config.scheme.indices_of_term(Term::P12);
    for (std::size_t i = 0; i < detuning_grid.size(); ++i) {
        scan.lasers[laser_index].detuning = detuning_grid[i];
        try {
            const DensityMatrix rho = steady_state(liouvillian_for(scan));
            double pop = 0.0;
            for (int idx : p_indices) pop += rho.rho(idx, idx).real();
            spec.p_population[i] = pop;
        } catch (const DegenerateSteadyState&) {
            spec.degenerate[i] = true;
            spec.p_population[i] = std::numeric_limits<double>::quiet_NaN();
        }
    }
    return spec;
}

}  // namespace homsim
