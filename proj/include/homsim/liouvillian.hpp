#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "homsim/errors.hpp"
#include "homsim/operators.hpp"

namespace homsim {

// The Lindblad generator as a d^2 x d^2 matrix acting on column-stacked
// density matrices.
struct Liouvillian {
    Eigen::MatrixXcd matrix;
    int dim;  // Hilbert-space dimension d
};

inline Eigen::VectorXcd vec(const Eigen::MatrixXcd& m) {
    return Eigen::Map<const Eigen::VectorXcd>(m.data(), m.size());
}

inline Eigen::MatrixXcd unvec(const Eigen::VectorXcd& v, int d) {
    return Eigen::Map<const Eigen::MatrixXcd>(v.data(), d, d);
}

namespace detail {

inline Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

// vec(A rho B) = kron(B^T, A) vec(rho) for column stacking.
inline void add_dissipator(Eigen::MatrixXcd& l, const Eigen::MatrixXcd& a) {
    const int d = static_cast<int>(a.rows());
    const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(d, d);
    const Eigen::MatrixXcd ada = a.adjoint() * a;
    l += kron(a.conjugate(), a);
    l -= 0.5 * kron(eye, ada);
    l -= 0.5 * kron(ada.transpose(), eye);
}

}  // namespace detail

// Assembles rho_dot = -i[H,rho] + sum_k (A rho A^+ - 1/2 {A^+A, rho}) from
// the Lindblad template only.  `extra_collapse` carries optional dephasing
// operators (see dephasing_operators).
inline Liouvillian build_liouvillian(const Eigen::MatrixXcd& h,
                                     const std::vector<TransitionOperator>& jumps,
                                     const std::vector<Eigen::MatrixXcd>& extra_collapse = {}) {
    const int d = static_cast<int>(h.rows());
    if (h.cols() != d) throw InvalidInput("Hamiltonian must be square");
    if ((h - h.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
        throw InvalidInput("Hamiltonian must be Hermitian within 1e-10");

    const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(d, d);
    const std::complex<double> i1(0.0, 1.0);
    Eigen::MatrixXcd l = -i1 * (detail::kron(eye, h) - detail::kron(h.transpose(), eye));

    for (const auto& op : jumps) {
        if (op.matrix.rows() != d || op.matrix.cols() != d)
            throw InvalidInput("jump operator dimension mismatch");
        detail::add_dissipator(l, op.matrix);
    }
    for (const auto& a : extra_collapse) {
        if (a.rows() != d || a.cols() != d)
            throw InvalidInput("collapse operator dimension mismatch");
        detail::add_dissipator(l, a);
    }
    return {std::move(l), d};
}

// Laser-linewidth dephasing as Hermitian collapse operators.  In the frame
// rotating with both lasers the green phase rides on the P and D manifolds
// and the red phase on D alone, so
//   sqrt(gamma_green) (P_P + P_D)   damps S-P and S-D coherences, and
//   sqrt(gamma_red)   P_D           damps P-D and S-D coherences,
// each at half the Lorentzian FWHM.
inline std::vector<Eigen::MatrixXcd> dephasing_operators(const SystemConfig& config) {
    const int d = static_cast<int>(config.scheme.dim());
    std::vector<Eigen::MatrixXcd> ops;
    for (const auto& laser : config.lasers) {
        if (laser.linewidth <= 0.0) continue;
        Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(d, d);
        for (int i = 0; i < d; ++i) {
            const Term t = config.scheme.levels[static_cast<std::size_t>(i)].term;
            const bool tagged = laser.lower == Term::S12 ? (t != Term::S12) : (t == Term::D32);
            if (tagged) a(i, i) = std::sqrt(laser.linewidth);
        }
        ops.push_back(std::move(a));
    }
    return ops;
}

// Convenience: full generator for a system config.
inline Liouvillian liouvillian_for(const SystemConfig& config) {
    return build_liouvillian(build_hamiltonian(config), build_jump_operators(config),
                             dephasing_operators(config));
}

}  // namespace homsim
