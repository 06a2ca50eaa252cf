#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>

#include "heomstark/units.hpp"

namespace heomstark {

using cplx = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using RealMat2 = Eigen::Matrix2d;

inline constexpr cplx kI{0.0, 1.0};

namespace pauli {
inline Mat2 x() { Mat2 m; m << 0, 1, 1, 0; return m; }
inline Mat2 y() { Mat2 m; m << 0, -kI, kI, 0; return m; }
inline Mat2 z() { Mat2 m; m << 1, 0, 0, -1; return m; }
}  // namespace pauli

// Diabatic two-level parameters in atomic units. omega0 is the field-free
// adiabatic gap and is kept in sync by make().
struct SystemParams {
    double delta{0.0};       // half the diabatic gap
    double w_coupling{0.0};  // interstate coupling W
    double mu0{1.0};         // diagonal dipole magnitude
    double omega0{0.0};

    static SystemParams make(double delta, double w_coupling, double mu0) {
        if (!std::isfinite(delta) || !std::isfinite(w_coupling) || !std::isfinite(mu0)) {
            throw std::invalid_argument("SystemParams: non-finite parameter");
        }
        return {delta, w_coupling, mu0, 2.0 * std::hypot(delta, w_coupling)};
    }

    // Inputs in eV: the full diabatic gap 2*delta and the coupling W.
    static SystemParams from_ev(double diabatic_gap_ev, double w_ev, double mu0) {
        return make(0.5 * units::ev_to_au(diabatic_gap_ev), units::ev_to_au(w_ev), mu0);
    }

    // Heterojunction at R = 2.5 Angstrom.
    static SystemParams heterojunction() { return from_ev(0.517, 0.2, 1.0); }

    // W = 0 is allowed; the adiabatic and diabatic frames then coincide.
    bool decoupled() const noexcept { return w_coupling == 0.0; }
};

// delta*sz + W*sx - mu0*E*sz. The bath renormalization energy is a multiple
// of the identity for sigma_z coupling and is left out.
inline Mat2 system_hamiltonian(const SystemParams& p, double field) {
    const double diag = p.delta - p.mu0 * field;
    Mat2 h;
    h << diag, p.w_coupling, p.w_coupling, -diag;
    return h;
}

inline double dressed_gap(const SystemParams& p, double field) {
    return 2.0 * std::hypot(p.delta - p.mu0 * field, p.w_coupling);
}

// Real orthogonal U whose columns are the field-free eigenvectors, ascending
// eigenvalue, each with its first nonzero component positive.
inline RealMat2 adiabatic_frame(const SystemParams& p) {
    RealMat2 h;
    h << p.delta, p.w_coupling, p.w_coupling, -p.delta;
    Eigen::SelfAdjointEigenSolver<RealMat2> solver(h);
    RealMat2 u = solver.eigenvectors();
    for (int c = 0; c < 2; ++c) {
        const double lead = std::abs(u(0, c)) > 1e-14 ? u(0, c) : u(1, c);
        if (lead < 0) u.col(c) = -u.col(c);
    }
    return u;
}

}  // namespace heomstark
