// Lorentzian spectral density and the exponential expansion of its thermal
// correlation function. CorrelationQuadrature evaluates C(t) directly in
// frequency space and is used to check the expansion.

#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "heomstark/units.hpp"

namespace heomstark::bath {

using cplx = std::complex<double>;

struct Lorentzian {
    double p{0.0};      // strength
    double omega{0.0};  // centre Omega_k
    double gamma{0.0};  // half width Gamma_k
};

// How the Gamma column of the heterojunction fit is read: the printed 1e+4
// exponent or the 1e-4 reading that reproduces the peaked density.
enum class GammaReading { scaled_1e_minus4, as_printed_1e4 };

struct LorentzianSet {
    std::vector<Lorentzian> terms;

    std::size_t size() const noexcept { return terms.size(); }

    void validate() const {
        if (terms.empty()) throw std::invalid_argument("LorentzianSet: at least one term required");
        for (std::size_t k = 0; k < terms.size(); ++k) {
            const auto& t = terms[k];
            if (!(t.p > 0) || !(t.omega > 0) || !(t.gamma > 0)) {
                throw std::invalid_argument("LorentzianSet: term " + std::to_string(k) +
                                            " needs p, Omega, Gamma > 0");
            }
        }
    }

    // Five-term fit for the fullerene/oligothiophene heterojunction.
    static LorentzianSet heterojunction(GammaReading reading = GammaReading::scaled_1e_minus4) {
        const double g = reading == GammaReading::scaled_1e_minus4 ? 1e-4 : 1e4;
        return {{{3.72e-10, 6.99e-3, 5.86 * g},
                 {1.90e-11, 3.05e-3, 5.50 * g},
                 {7.80e-12, 4.00e-3, 4.70 * g},
                 {5.80e-12, 1.94e-3, 6.83 * g},
                 {8.00e-12, 5.20e-3, 7.00 * g}}};
    }
};

struct BathSpec {
    LorentzianSet lorentzians{LorentzianSet::heterojunction()};
    double temperature{300.0};  // K
    int n_matsubara{4};

    double beta() const { return units::kelvin_to_beta(temperature); }

    void validate() const {
        lorentzians.validate();
        if (!(temperature > 0) || !std::isfinite(temperature)) {
            throw std::invalid_argument("BathSpec: temperature must be positive");
        }
        if (n_matsubara < 0) throw std::invalid_argument("BathSpec: n_matsubara must be >= 0");
    }
};

// ---------------------------------------------------------------------------

inline double spectral_density(double omega, const LorentzianSet& set) {
    double j = 0.0;
    for (const auto& t : set.terms) {
        const double a = omega - t.omega;
        const double b = omega + t.omega;
        const double g2 = t.gamma * t.gamma;
        j += omega * t.p / ((a * a + g2) * (b * b + g2));
    }
    return j;
}

// J(omega)/omega, regular at the origin.
inline double spectral_density_over_omega(double omega, const LorentzianSet& set) {
    double j = 0.0;
    for (const auto& t : set.terms) {
        const double a = omega - t.omega;
        const double b = omega + t.omega;
        const double g2 = t.gamma * t.gamma;
        j += t.p / ((a * a + g2) * (b * b + g2));
    }
    return j;
}

inline cplx spectral_density(cplx z, const LorentzianSet& set) {
    cplx j = 0.0;
    for (const auto& t : set.terms) {
        const cplx a = z - t.omega;
        const cplx b = z + t.omega;
        const double g2 = t.gamma * t.gamma;
        j += z * t.p / ((a * a + g2) * (b * b + g2));
    }
    return j;
}

// Global maximum of J on (0, omega_hi]: coarse scan, then Brent refinement in
// the bracketing cell.
inline double spectral_peak(const LorentzianSet& set, double omega_hi = 0.05, std::size_t scan = 4000) {
    set.validate();
    std::size_t best = 1;
    for (std::size_t i = 1; i <= scan; ++i) {
        if (spectral_density(omega_hi * i / scan, set) > spectral_density(omega_hi * best / scan, set)) best = i;
    }
    const double lo = omega_hi * (best - 1) / scan;
    const double hi = omega_hi * std::min(best + 1, scan) / scan;
    auto r = boost::math::tools::brent_find_minima([&](double w) { return -spectral_density(w, set); }, lo, hi, 52);
    return r.first;
}

// ---------------------------------------------------------------------------

// C(t) = sum_k alpha_k exp(i zeta_k t), conj(C(t)) = sum_k alpha_tilde_k exp(i zeta_k t).
struct CorrelationExpansion {
    struct Term {
        cplx alpha;
        cplx alpha_tilde;
        cplx zeta;
    };
    std::vector<Term> terms;
    int n_matsubara{0};

    std::size_t size() const noexcept { return terms.size(); }

    cplx value(double t) const {
        cplx c = 0.0;
        for (const auto& k : terms) c += k.alpha * std::exp(kI() * k.zeta * t);
        return c;
    }
    cplx conj_value(double t) const {
        cplx c = 0.0;
        for (const auto& k : terms) c += k.alpha_tilde * std::exp(kI() * k.zeta * t);
        return c;
    }

private:
    static constexpr cplx kI() { return {0.0, 1.0}; }
};

inline cplx bose_factor(cplx omega, double beta) { return 1.0 / (1.0 - std::exp(-beta * omega)); }

inline double matsubara_frequency(int n, double beta) {
    return 2.0 * std::numbers::pi * n / beta;
}

// Closes the frequency integral in the lower half plane. Per Lorentzian the
// poles Omega - i Gamma and -Omega - i Gamma give two terms (stored in that
// order, zeta = -pole); the Bose factor adds one real term per Matsubara
// frequency.
inline CorrelationExpansion decompose_correlation(const BathSpec& spec) {
    spec.validate();
    const double beta = spec.beta();
    const cplx i{0.0, 1.0};
    CorrelationExpansion out;
    out.n_matsubara = spec.n_matsubara;

    for (int n = 1; n <= spec.n_matsubara; ++n) {
        const double nu = matsubara_frequency(n, beta);
        for (const auto& l : spec.lorentzians.terms) {
            if (std::abs(nu - l.gamma) < 1e-12) {
                throw std::invalid_argument("decompose_correlation: Matsubara frequency " +
                                            std::to_string(n) + " collides with a Lorentzian pole (Gamma = " +
                                            std::to_string(l.gamma) + "); residue is degenerate");
            }
        }
    }

    for (const auto& l : spec.lorentzians.terms) {
        const std::array<cplx, 4> roots{cplx{l.omega, l.gamma}, cplx{l.omega, -l.gamma},
                                        cplx{-l.omega, l.gamma}, cplx{-l.omega, -l.gamma}};
        std::array<cplx, 2> alpha{};
        std::array<cplx, 2> zeta{};
        int slot = 0;
        for (std::size_t r = 0; r < roots.size(); ++r) {
            if (roots[r].imag() > 0) continue;
            cplx denom = 1.0;
            for (std::size_t q = 0; q < roots.size(); ++q) {
                if (q != r) denom *= roots[r] - roots[q];
            }
            const cplx residue = roots[r] * l.p / denom;
            alpha[slot] = -2.0 * i * residue * bose_factor(roots[r], beta);
            zeta[slot] = -roots[r];
            ++slot;
        }
        // zeta_0 = -conj(zeta_1): the conjugate series swaps the pair.
        out.terms.push_back({alpha[0], std::conj(alpha[1]), zeta[0]});
        out.terms.push_back({alpha[1], std::conj(alpha[0]), zeta[1]});
    }

    for (int n = 1; n <= spec.n_matsubara; ++n) {
        const double nu = matsubara_frequency(n, beta);
        // J(-i nu) is purely imaginary, so the residue is real
        const double a = (-2.0 * i * spectral_density(cplx{0.0, -nu}, spec.lorentzians) / beta).real();
        out.terms.push_back({cplx{a, 0.0}, cplx{a, 0.0}, cplx{0.0, nu}});
    }
    return out;
}

// ---------------------------------------------------------------------------

struct QuadratureError : std::runtime_error {
    double achieved;
    QuadratureError(const std::string& what, double achieved_tol)
        : std::runtime_error(what), achieved(achieved_tol) {}
};

// Direct evaluation of (1/pi) * Int dw exp(-i w t) J(w) / (1 - exp(-beta w)),
// folded onto w >= 0 as
//   Re C = (1/pi) Int J coth(beta w / 2) cos(w t),  Im C = -(1/pi) Int J sin(w t).
// The frequency cutoff is chosen so the dropped tail is below tail_rel * C(0).
class CorrelationQuadrature {
public:
    explicit CorrelationQuadrature(const BathSpec& spec, double tail_rel = 1e-6, double rel_tol = 1e-10)
        : set_(spec.lorentzians), beta_(spec.beta()), rel_tol_(rel_tol) {
        spec.validate();
        double omega_hi = 0.0, p_sum = 0.0;
        for (const auto& l : set_.terms) {
            omega_hi = std::max(omega_hi, l.omega + 10.0 * l.gamma);
            p_sum += l.p;
        }
        base_cutoff_ = 20.0 * omega_hi;
        build_breakpoints(base_cutoff_);
        scale_ = 1.0;
        const double c0 = integrate_segments(0.0, true);
        scale_ = std::abs(c0);
        // J(w) <= 1.05 sum p / w^3 for w beyond 20x the largest centre.
        const double cutoff = std::sqrt(1.05 * p_sum / (2.0 * std::numbers::pi * tail_rel * scale_));
        if (cutoff > base_cutoff_) build_breakpoints(cutoff);
        c0_ = integrate_segments(0.0, true);
    }

    double cutoff() const noexcept { return breaks_.back(); }
    double c0() const noexcept { return c0_; }

    cplx operator()(double t) const {
        return {integrate_segments(t, true), integrate_segments(t, false)};
    }

    // g(t) = (1/pi) Int J(w)/w^2 coth(beta w/2) (1 - cos w t): the double time
    // integral of Re C, which sets the exact pure-dephasing decay.
    double lineshape(double t) const {
        return integrate([&](double w) {
            const double half = 0.5 * w * t;
            const double s = std::abs(half) < 1e-8 ? 0.5 * t * t : 2.0 * std::sin(half) * std::sin(half) / (w * w);
            return spectral_density_over_omega(w, set_) * w_coth(w) * s;
        }, t);
    }

private:
    void build_breakpoints(double cutoff) {
        breaks_ = {0.0, cutoff};
        for (const auto& l : set_.terms) {
            for (double s : {-8.0, -2.0, 0.0, 2.0, 8.0}) {
                const double w = l.omega + s * l.gamma;
                if (w > 0 && w < cutoff) breaks_.push_back(w);
            }
        }
        for (double w = base_cutoff_; w < cutoff; w *= 2.0) breaks_.push_back(w);
        std::sort(breaks_.begin(), breaks_.end());
        breaks_.erase(std::unique(breaks_.begin(), breaks_.end()), breaks_.end());
    }

    double integrate_segments(double t, bool real_part) const {
        if (real_part) {
            return integrate([&](double w) {
                return spectral_density_over_omega(w, set_) * w_coth(w) * std::cos(w * t);
            }, t);
        }
        return integrate([&](double w) { return -spectral_density(w, set_) * std::sin(w * t); }, t);
    }

    // w coth(beta w / 2), finite at w = 0
    double w_coth(double w) const {
        const double x = 0.5 * beta_ * w;
        return std::abs(x) < 1e-8 ? 2.0 / beta_ : w / std::tanh(x);
    }

    // (1/pi) Int_0^cutoff f, with f oscillating at frequency t
    template <class F>
    double integrate(F f, double t) const {
        using boost::math::quadrature::gauss_kronrod;
        // Chunks no longer than two periods of the oscillating factor.
        const double chunk = t != 0.0 ? 4.0 * std::numbers::pi / std::abs(t) : 1e300;
        double total = 0.0, err_total = 0.0;
        for (std::size_t s = 0; s + 1 < breaks_.size(); ++s) {
            const double a = breaks_[s], b = breaks_[s + 1];
            const auto pieces = static_cast<std::size_t>(std::ceil((b - a) / chunk));
            const double h = (b - a) / static_cast<double>(std::max<std::size_t>(pieces, 1));
            for (std::size_t c = 0; c < std::max<std::size_t>(pieces, 1); ++c) {
                const double lo = a + h * static_cast<double>(c);
                const double hi = c + 1 == pieces ? b : lo + h;
                double err = 0.0;
                total += gauss_kronrod<double, 31>::integrate(f, lo, hi, 10, rel_tol_, &err);
                err_total += err;
            }
        }
        total /= std::numbers::pi;
        err_total /= std::numbers::pi;
        const double ref = std::max(scale_, std::abs(total));
        if (err_total > 1e-7 * ref) {
            throw QuadratureError("correlation quadrature did not converge (t = " + std::to_string(t) +
                                      ", estimated relative error " + std::to_string(err_total / ref) + ")",
                                  err_total / ref);
        }
        return total;
    }

    LorentzianSet set_;
    double beta_;
    double rel_tol_;
    double base_cutoff_{0.0};
    double scale_{1.0};
    double c0_{0.0};
    std::vector<double> breaks_;
};

inline cplx correlation_numeric(double t, const BathSpec& spec) { return CorrelationQuadrature(spec)(t); }

// Exact coherence for W = 0, E = 0 with sigma_z coupling: the two diabatic
// energies see the bath with opposite sign, so the reorganization phases
// cancel and rho_12(t) = rho_12(0) exp(-2 i delta t) exp(-4 g(t)).
class PureDephasing {
public:
    PureDephasing(const BathSpec& spec, double delta) : quad_(spec), delta_(delta) {}

    cplx coherence(double t, cplx rho12_0) const {
        return rho12_0 * std::exp(cplx(-4.0 * quad_.lineshape(t), -2.0 * delta_ * t));
    }

    const CorrelationQuadrature& quadrature() const { return quad_; }

private:
    CorrelationQuadrature quad_;
    double delta_;
};

// ---------------------------------------------------------------------------

struct ExpansionCheck {
    std::vector<double> times;  // a.u.
    std::vector<cplx> numeric;
    std::vector<cplx> expansion;
    double max_rel_error{0.0};  // max |dC| / |C_numeric(0)|
};

inline std::vector<cplx> sample_numeric(const BathSpec& spec, const std::vector<double>& times) {
    CorrelationQuadrature quad(spec);
    std::vector<cplx> out;
    out.reserve(times.size());
    for (double t : times) out.push_back(quad(t));
    return out;
}

inline ExpansionCheck compare_expansion(const CorrelationExpansion& exp, const std::vector<double>& times,
                                        const std::vector<cplx>& numeric) {
    ExpansionCheck chk{times, numeric, {}, 0.0};
    const double scale = std::abs(numeric.front());
    for (std::size_t i = 0; i < times.size(); ++i) {
        chk.expansion.push_back(exp.value(times[i]));
        chk.max_rel_error = std::max(chk.max_rel_error, std::abs(chk.expansion[i] - numeric[i]) / scale);
    }
    return chk;
}

// Uniform grid on [0, t_max_fs] in atomic units.
inline std::vector<double> time_grid_au(double t_max_fs, std::size_t points) {
    std::vector<double> t(points);
    for (std::size_t i = 0; i < points; ++i) {
        t[i] = units::fs_to_au(t_max_fs * static_cast<double>(i) / static_cast<double>(points - 1));
    }
    return t;
}

struct AutoDecomposition {
    CorrelationExpansion expansion;
    int n_matsubara{0};
    double max_rel_error{0.0};
};

// Smallest Matsubara count whose expansion matches the quadrature to target
// over [0, window_fs]; starts at spec.n_matsubara = 0 regardless of input.
inline AutoDecomposition decompose_correlation_auto(BathSpec spec, double target = 1e-3,
                                                    double window_fs = 100.0, int n_max = 64,
                                                    std::size_t grid_points = 201) {
    const auto times = time_grid_au(window_fs, grid_points);
    const auto numeric = sample_numeric(spec, times);
    AutoDecomposition best;
    for (int n = 0; n <= n_max; ++n) {
        spec.n_matsubara = n;
        auto exp = decompose_correlation(spec);
        const double err = compare_expansion(exp, times, numeric).max_rel_error;
        best = {std::move(exp), n, err};
        if (err <= target) return best;
    }
    throw std::runtime_error("decompose_correlation_auto: target " + std::to_string(target) +
                             " not reached with " + std::to_string(n_max) + " Matsubara terms (error " +
                             std::to_string(best.max_rel_error) + ")");
}

}  // namespace heomstark::bath
