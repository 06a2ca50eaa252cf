// Hierarchical equations of motion for a sigma_z-coupled two-level system.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "heomstark/bath.hpp"
#include "heomstark/fields.hpp"
#include "heomstark/hierarchy.hpp"
#include "heomstark/model.hpp"
#include "heomstark/units.hpp"

namespace heomstark::heom {

// Raised when the state stops being finite or the adaptive step collapses.
struct NumericalAbort : std::runtime_error {
    double time_au;
    NumericalAbort(const std::string& what, double t) : std::runtime_error(what), time_au(t) {}
};

struct HierarchyState {
    std::vector<Mat2> ados;
    double time{0.0};  // a.u.
    bool scaled{false};

    const Mat2& rho() const { return ados.front(); }
};

struct PropagationConfig {
    int l_max{6};
    double dt_au{0.5};
    double t_final_fs{100.0};
    double output_stride_fs{0.1};
    bool rescaling{false};
    bool adaptive{false};
    double rel_tol{1e-8};
    double abs_tol{1e-10};
    double min_step_au{1e-6};
    int threads{1};
    bool check_consistency{false};

    void validate() const {
        if (l_max < 1) throw std::invalid_argument("propagation.l_max must be >= 1");
        if (!(dt_au > 0)) throw std::invalid_argument("propagation.dt_au must be > 0");
        if (!(t_final_fs > 0)) throw std::invalid_argument("propagation.t_final_fs must be > 0");
        if (!(output_stride_fs > 0)) throw std::invalid_argument("propagation.output_stride_fs must be > 0");
        if (adaptive && (!(rel_tol > 0) || !(abs_tol > 0))) {
            throw std::invalid_argument("propagation.rel_tol and abs_tol must be > 0");
        }
        if (threads < 1) throw std::invalid_argument("propagation.threads must be >= 1");
    }
};

inline bool is_density_matrix(const Mat2& rho, double tol = 1e-10) {
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > tol) return false;
    if (std::abs(rho.trace() - 1.0) > tol) return false;
    Eigen::SelfAdjointEigenSolver<Mat2> es(rho);
    return es.eigenvalues().minCoeff() >= -tol;
}

// ---------------------------------------------------------------------------

// Precomputed coupling structure of the hierarchy for one bath expansion. In
// the rescaled variant each ADO is divided by prod_k sqrt(n_k! |alpha_k|^n_k);
// the level-0 matrix is the same in both variants.
class HeomGenerator {
public:
    HeomGenerator(const Hierarchy& h, const bath::CorrelationExpansion& exp, const SystemParams& params,
                  bool rescaled = false)
        : hierarchy_(&h), params_(params), rescaled_(rescaled) {
        if (exp.size() != h.k_modes()) {
            throw std::invalid_argument("HeomGenerator: expansion has " + std::to_string(exp.size()) +
                                        " terms but the hierarchy has K = " + std::to_string(h.k_modes()));
        }
        const std::size_t n = h.size();
        const std::size_t k_modes = h.k_modes();
        std::vector<double> mag(k_modes, 1.0);
        if (rescaled) {
            for (std::size_t k = 0; k < k_modes; ++k) {
                const double a = std::abs(exp.terms[k].alpha);
                mag[k] = a > 0 ? a : 1.0;
            }
        }
        damping_.resize(n);
        scale_.resize(n);
        up_ptr_.assign(n + 1, 0);
        down_ptr_.assign(n + 1, 0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto occ = h.occupations(i);
            cplx damp = 0.0;
            double log_scale = 0.0;
            for (std::size_t k = 0; k < k_modes; ++k) {
                const double nk = occ[k];
                damp += kI * nk * exp.terms[k].zeta;
                if (rescaled && nk > 0) log_scale += 0.5 * (std::lgamma(nk + 1.0) + nk * std::log(mag[k]));

                if (const auto j = h.raise(i, k); j != kAbsent) {
                    up_target_.push_back(j);
                    up_coef_.push_back(rescaled ? std::sqrt((nk + 1.0) * mag[k]) : 1.0);
                }
                if (const auto j = h.lower(i, k); j != kAbsent) {
                    const double c = rescaled ? std::sqrt(nk / mag[k]) : nk;
                    const auto& t = exp.terms[k];
                    down_target_.push_back(j);
                    down_plus_.push_back(c * (t.alpha + t.alpha_tilde));
                    down_minus_.push_back(c * (t.alpha - t.alpha_tilde));
                }
            }
            damping_[i] = damp;
            scale_[i] = std::exp(log_scale);
            up_ptr_[i + 1] = up_target_.size();
            down_ptr_[i + 1] = down_target_.size();
        }
    }

    const Hierarchy& hierarchy() const noexcept { return *hierarchy_; }
    const SystemParams& params() const noexcept { return params_; }
    bool rescaled() const noexcept { return rescaled_; }
    std::size_t size() const noexcept { return damping_.size(); }

    // Physical ADO = stored ADO * scale(i).
    double scale(std::size_t i) const { return scale_[i]; }

    // d/dt of ADOs [begin, end) given the instantaneous field. Each output
    // slot depends only on its own input and its fixed neighbours, so
    // disjoint ranges can be evaluated concurrently.
    // Kept out of line so serial and threaded callers run the same machine code
    // (inlined copies may contract multiply-adds differently).
    [[gnu::noinline]] void rhs(double field, std::span<const Mat2> in, std::span<Mat2> out, std::size_t begin,
                               std::size_t end) const {
        const double h0 = params_.delta - params_.mu0 * field;
        const double w = params_.w_coupling;
        for (std::size_t i = begin; i < end; ++i) {
            const Mat2& r = in[i];
            const cplx r00 = r(0, 0), r01 = r(0, 1), r10 = r(1, 0), r11 = r(1, 1);
            const cplx d = damping_[i];
            // -i[H, rho] + i sum_k n_k zeta_k rho
            cplx o00 = -kI * (w * (r10 - r01)) + d * r00;
            cplx o01 = -kI * (2.0 * h0 * r01 + w * (r11 - r00)) + d * r01;
            cplx o10 = -kI * (-2.0 * h0 * r10 + w * (r00 - r11)) + d * r10;
            cplx o11 = -kI * (w * (r01 - r10)) + d * r11;

            // -i[sigma_z, sum_k rho_{n+e_k}]
            cplx s01 = 0.0, s10 = 0.0;
            for (std::size_t l = up_ptr_[i]; l < up_ptr_[i + 1]; ++l) {
                const Mat2& u = in[static_cast<std::size_t>(up_target_[l])];
                s01 += up_coef_[l] * u(0, 1);
                s10 += up_coef_[l] * u(1, 0);
            }
            o01 += -2.0 * kI * s01;
            o10 += 2.0 * kI * s10;

            // -i sum_k n_k (alpha_k sz rho_{n-e_k} - alpha~_k rho_{n-e_k} sz)
            for (std::size_t l = down_ptr_[i]; l < down_ptr_[i + 1]; ++l) {
                const Mat2& m = in[static_cast<std::size_t>(down_target_[l])];
                const cplx cp = down_plus_[l], cm = down_minus_[l];
                o00 -= kI * cm * m(0, 0);
                o01 -= kI * cp * m(0, 1);
                o10 += kI * cp * m(1, 0);
                o11 += kI * cm * m(1, 1);
            }
            Mat2& o = out[i];
            o(0, 0) = o00;
            o(0, 1) = o01;
            o(1, 0) = o10;
            o(1, 1) = o11;
        }
    }

    void rhs(double field, std::span<const Mat2> in, std::span<Mat2> out) const {
        rhs(field, in, out, 0, size());
    }

    // X1 = -sum of physical level-1 ADOs.
    Mat2 first_moment(std::span<const Mat2> ados) const {
        Mat2 x = Mat2::Zero();
        const auto& h = *hierarchy_;
        for (std::size_t k = 0; k < h.k_modes(); ++k) {
            const auto j = h.raise(0, k);
            if (j == kAbsent) continue;
            x -= scale_[static_cast<std::size_t>(j)] * ados[static_cast<std::size_t>(j)];
        }
        return x;
    }

private:
    const Hierarchy* hierarchy_;
    SystemParams params_;
    bool rescaled_;
    std::vector<cplx> damping_;
    std::vector<double> scale_;
    std::vector<std::size_t> up_ptr_, down_ptr_;
    std::vector<std::int32_t> up_target_, down_target_;
    std::vector<double> up_coef_;
    std::vector<cplx> down_plus_, down_minus_;
};

// ---------------------------------------------------------------------------

inline HierarchyState initial_state(const Hierarchy& h, const Mat2& rho0, bool scaled = false) {
    HierarchyState s;
    s.ados.assign(h.size(), Mat2::Zero());
    s.ados[0] = rho0;
    s.scaled = scaled;
    return s;
}

// Unscaled derivative of a full state (allocates a generator per call).
inline HierarchyState heom_rhs(double t, const HierarchyState& state, const Hierarchy& h,
                               const bath::CorrelationExpansion& exp, const SystemParams& params,
                               const fields::PulseSpec& field) {
    if (state.ados.size() != h.size()) throw std::invalid_argument("heom_rhs: state size mismatch");
    for (const auto& m : state.ados) {
        if (!m.allFinite()) throw NumericalAbort("heom_rhs: non-finite ADO entry", t);
    }
    HeomGenerator gen(h, exp, params, state.scaled);
    HierarchyState out{std::vector<Mat2>(h.size()), t, state.scaled};
    gen.rhs(fields::field_amplitude(t, field), state.ados, out.ados);
    return out;
}

// First moment of the collective mode from an unscaled state.
inline Mat2 first_moment(const HierarchyState& state, const Hierarchy& h) {
    if (state.scaled) throw std::invalid_argument("first_moment: state is rescaled; use HeomGenerator::first_moment");
    Mat2 x = Mat2::Zero();
    for (auto i : h.indices_at_level(1)) x -= state.ados[i];
    return x;
}

// -i[H, rho] + i[sigma_z, X1], written with full matrix products.
inline Mat2 first_moment_equation(const SystemParams& params, double field, const Mat2& rho, const Mat2& x1) {
    const Mat2 h = system_hamiltonian(params, field);
    const Mat2 sz = pauli::z();
    return -kI * (h * rho - rho * h) + kI * (sz * x1 - x1 * sz);
}

// ---------------------------------------------------------------------------

struct Trajectory {
    std::vector<double> t_fs;
    std::vector<double> field;
    std::vector<Mat2> rho;
    std::vector<Mat2> x1;

    double max_trace_dev{0.0};
    double max_herm_dev{0.0};
    double min_eigenvalue{1.0};
    double max_consistency_residual{0.0};
    std::size_t steps{0};
    std::size_t rejected{0};
    HierarchyState final_state;

    bool positivity_warning(double tol = 1e-6) const { return min_eigenvalue < -tol; }
};

namespace detail {

inline void axpy(std::span<Mat2> out, std::span<const Mat2> x, cplx a, std::span<const Mat2> y) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + a * y[i];
}

// Output sample times and field breakpoints merged into segment boundaries.
inline std::vector<double> segment_bounds(double t0, double t_final, const std::vector<double>& samples,
                                          const std::vector<double>& breaks) {
    std::vector<double> b{t0};
    for (double s : samples) if (s > t0 && s <= t_final) b.push_back(s);
    for (double s : breaks) if (s > t0 && s < t_final) b.push_back(s);
    b.push_back(t_final);
    std::sort(b.begin(), b.end());
    std::vector<double> out;
    for (double v : b) {
        if (out.empty() || v - out.back() > 1e-9 * std::max(1.0, std::abs(v))) out.push_back(v);
        else out.back() = std::max(out.back(), v);
    }
    return out;
}

inline bool is_sample_time(double t, const std::vector<double>& samples) {
    auto it = std::lower_bound(samples.begin(), samples.end(), t - 1e-9 * std::max(1.0, std::abs(t)));
    return it != samples.end() && std::abs(*it - t) <= 1e-9 * std::max(1.0, std::abs(t));
}

}  // namespace detail

inline std::vector<double> sample_times_au(const PropagationConfig& cfg, double t0_au = 0.0) {
    const double stride = units::fs_to_au(cfg.output_stride_fs);
    const double t_final = units::fs_to_au(cfg.t_final_fs);
    std::vector<double> out;
    const auto count = static_cast<std::size_t>(std::floor(t_final / stride + 1e-9));
    for (std::size_t k = 0; k <= count; ++k) {
        const double t = stride * static_cast<double>(k);
        if (t >= t0_au - 1e-9) out.push_back(t);
    }
    if (t_final - out.back() > 1e-9 * t_final) out.push_back(t_final);
    return out;
}

// Integrates the hierarchy from state.time to t_final. Steps never straddle a
// field breakpoint or an output time; inside each segment the field is read
// one-sidedly so the dc flash jumps are exact.
class Propagator {
public:
    Propagator(const HeomGenerator& gen, const fields::PulseSpec& field, PropagationConfig cfg)
        : gen_(gen), field_(field), cfg_(std::move(cfg)) {
        cfg_.validate();
        field_.validate();
        const std::size_t n = gen_.size();
        for (auto* v : {&k1_, &k2_, &k3_, &k4_, &k5_, &k6_, &k7_, &tmp_, &y_new_}) v->assign(n, Mat2::Zero());
    }

    Trajectory run(HierarchyState state) {
        if (state.ados.size() != gen_.size()) throw std::invalid_argument("propagate: state size mismatch");
        if (state.scaled != gen_.rescaled()) throw std::invalid_argument("propagate: state scaling mismatch");
        const auto samples = sample_times_au(cfg_, state.time);
        const auto bounds = detail::segment_bounds(state.time, units::fs_to_au(cfg_.t_final_fs), samples,
                                                   fields::breakpoints(field_));
        Trajectory traj;
        record(traj, state);
        double h_adapt = cfg_.dt_au;
        for (std::size_t s = 0; s + 1 < bounds.size(); ++s) {
            const double a = bounds[s], b = bounds[s + 1];
            seg_lo_ = a;
            seg_hi_ = b;
            if (cfg_.adaptive) {
                h_adapt = integrate_adaptive(state, a, b, h_adapt, traj);
            } else {
                const auto sub = std::max<std::size_t>(
                    1, static_cast<std::size_t>(std::ceil((b - a) / cfg_.dt_au - 1e-9)));
                const double h = (b - a) / static_cast<double>(sub);
                for (std::size_t q = 0; q < sub; ++q) {
                    const double t = a + h * static_cast<double>(q);
                    rk4_step(state, t, q + 1 == sub ? b - t : h);
                    state.time = q + 1 == sub ? b : t + h;
                    after_step(state, traj);
                }
            }
            state.time = b;
            if (detail::is_sample_time(b, samples)) {
                for (const auto& m : state.ados) {
                    if (!m.allFinite()) throw NumericalAbort("propagate: non-finite ADO at t = " +
                                                                 std::to_string(units::au_to_fs(b)) + " fs",
                                                             b);
                }
                record(traj, state);
            }
        }
        traj.final_state = std::move(state);
        return traj;
    }

private:
    double field_at(double t) const {
        const double eps = 1e-9 * std::max(1.0, seg_hi_ - seg_lo_);
        return fields::field_amplitude(std::clamp(t, seg_lo_ + eps, seg_hi_ - eps), field_);
    }

    void eval(double t, std::span<const Mat2> in, std::span<Mat2> out) {
        const double e = field_at(t);
        const int threads = cfg_.threads;
        if (threads <= 1 || in.size() < 4096) {
            gen_.rhs(e, in, out);
            return;
        }
        std::vector<std::jthread> pool;
        const std::size_t n = in.size();
        const std::size_t chunk = (n + static_cast<std::size_t>(threads) - 1) / static_cast<std::size_t>(threads);
        for (std::size_t lo = 0; lo < n; lo += chunk) {
            pool.emplace_back([&, lo] { gen_.rhs(e, in, out, lo, std::min(n, lo + chunk)); });
        }
    }

    void rk4_step(HierarchyState& s, double t, double h) {
        auto& y = s.ados;
        eval(t, y, k1_);
        detail::axpy(tmp_, y, 0.5 * h, k1_);
        eval(t + 0.5 * h, tmp_, k2_);
        detail::axpy(tmp_, y, 0.5 * h, k2_);
        eval(t + 0.5 * h, tmp_, k3_);
        detail::axpy(tmp_, y, h, k3_);
        eval(t + h, tmp_, k4_);
        const double c = h / 6.0;
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += c * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
    }

    // Dormand-Prince 5(4) with FSAL; returns the step to try next.
    double integrate_adaptive(HierarchyState& s, double a, double b, double h, Trajectory& traj) {
        static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
        static constexpr double a21 = 1.0 / 5;
        static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
        static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
        static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                                a54 = -212.0 / 729;
        static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                                a65 = -5103.0 / 18656;
        static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                                b6 = 11.0 / 84;
        static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                                e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
        auto& y = s.ados;
        const std::size_t n = y.size();
        double t = a;
        eval(t, y, k1_);
        while (t < b) {
            h = std::min(h, b - t);
            if (h < cfg_.min_step_au && b - t > cfg_.min_step_au) {
                throw NumericalAbort("propagate: adaptive step size underflow at t = " +
                                         std::to_string(units::au_to_fs(t)) + " fs",
                                     t);
            }
            for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + h * a21 * k1_[i];
            eval(t + c2 * h, tmp_, k2_);
            for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + h * (a31 * k1_[i] + a32 * k2_[i]);
            eval(t + c3 * h, tmp_, k3_);
            for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + h * (a41 * k1_[i] + a42 * k2_[i] + a43 * k3_[i]);
            eval(t + c4 * h, tmp_, k4_);
            for (std::size_t i = 0; i < n; ++i)
                tmp_[i] = y[i] + h * (a51 * k1_[i] + a52 * k2_[i] + a53 * k3_[i] + a54 * k4_[i]);
            eval(t + c5 * h, tmp_, k5_);
            for (std::size_t i = 0; i < n; ++i)
                tmp_[i] = y[i] + h * (a61 * k1_[i] + a62 * k2_[i] + a63 * k3_[i] + a64 * k4_[i] + a65 * k5_[i]);
            eval(t + h, tmp_, k6_);
            for (std::size_t i = 0; i < n; ++i)
                y_new_[i] = y[i] + h * (b1 * k1_[i] + b3 * k3_[i] + b4 * k4_[i] + b5 * k5_[i] + b6 * k6_[i]);
            eval(t + h, y_new_, k7_);
            double err = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const Mat2 e = h * (e1 * k1_[i] + e3 * k3_[i] + e4 * k4_[i] + e5 * k5_[i] + e6 * k6_[i] +
                                    e7 * k7_[i]);
                const double sc_base = cfg_.abs_tol;
                for (int r = 0; r < 4; ++r) {
                    const double sc = sc_base + cfg_.rel_tol * std::max(std::abs(y[i](r)), std::abs(y_new_[i](r)));
                    err = std::max(err, std::abs(e(r)) / sc);
                }
            }
            if (!std::isfinite(err)) throw NumericalAbort("propagate: non-finite error estimate", t);
            if (err <= 1.0) {
                t = (b - (t + h) < 1e-12 * std::max(1.0, b)) ? b : t + h;
                std::swap(y, y_new_);
                std::swap(k1_, k7_);
                s.time = t;
                after_step(s, traj);
            } else {
                ++traj.rejected;
            }
            const double factor = err > 0 ? 0.9 * std::pow(err, -0.2) : 5.0;
            h *= std::clamp(factor, 0.2, 5.0);
        }
        return h;
    }

    void after_step(const HierarchyState& s, Trajectory& traj) {
        ++traj.steps;
        const Mat2& r = s.ados.front();
        if (!r.allFinite()) {
            throw NumericalAbort("propagate: non-finite density matrix at t = " +
                                     std::to_string(units::au_to_fs(s.time)) + " fs",
                                 s.time);
        }
        if (cfg_.check_consistency) {
            Mat2 d0;
            gen_.rhs(field_at(s.time), s.ados, std::span<Mat2>(&d0, 1), 0, 1);
            const Mat2 alt = first_moment_equation(gen_.params(), field_at(s.time), r, gen_.first_moment(s.ados));
            traj.max_consistency_residual = std::max(traj.max_consistency_residual, (d0 - alt).cwiseAbs().maxCoeff());
        }
    }

    void record(Trajectory& traj, const HierarchyState& s) const {
        const Mat2& r = s.ados.front();
        traj.t_fs.push_back(units::au_to_fs(s.time));
        traj.field.push_back(fields::field_amplitude(s.time, field_));
        traj.rho.push_back(r);
        traj.x1.push_back(gen_.first_moment(s.ados));
        traj.max_trace_dev = std::max(traj.max_trace_dev, std::abs(r.trace() - 1.0));
        traj.max_herm_dev = std::max(traj.max_herm_dev, (r - r.adjoint()).cwiseAbs().maxCoeff());
        Eigen::SelfAdjointEigenSolver<Mat2> es(0.5 * (r + r.adjoint()), Eigen::EigenvaluesOnly);
        traj.min_eigenvalue = std::min(traj.min_eigenvalue, es.eigenvalues().minCoeff());
    }

    const HeomGenerator& gen_;
    fields::PulseSpec field_;
    PropagationConfig cfg_;
    double seg_lo_{0.0}, seg_hi_{0.0};
    std::vector<Mat2> k1_, k2_, k3_, k4_, k5_, k6_, k7_, tmp_, y_new_;
};

inline Trajectory propagate(const Mat2& rho0, const PropagationConfig& cfg, const HeomGenerator& gen,
                            const fields::PulseSpec& field) {
    if (!is_density_matrix(rho0)) {
        throw std::invalid_argument("propagate: rho0 must be Hermitian, unit trace and positive semidefinite");
    }
    return Propagator(gen, field, cfg).run(initial_state(gen.hierarchy(), rho0, gen.rescaled()));
}

inline Trajectory propagate(const Mat2& rho0, const PropagationConfig& cfg, const Hierarchy& h,
                            const bath::CorrelationExpansion& exp, const SystemParams& params,
                            const fields::PulseSpec& field) {
    HeomGenerator gen(h, exp, params, cfg.rescaling);
    return propagate(rho0, cfg, gen, field);
}

// ---------------------------------------------------------------------------
// Checkpoint layout (little-endian):
//   char[8]  "HEOMCKPT"
//   u32      format version (1)
//   u32      K
//   u32      L_max
//   u32      flags (bit 0: rescaled ADOs)
//   u64      enumeration order hash (Hierarchy::order_hash)
//   u64      ADO count
//   f64      time (a.u.)
//   then per ADO, row-major: re/im of (0,0), (0,1), (1,0), (1,1) as f64

inline constexpr char kCheckpointMagic[8] = {'H', 'E', 'O', 'M', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

inline void save_checkpoint(const std::string& path, const HierarchyState& s, const Hierarchy& h) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path);
    auto put = [&out](const auto& v) { out.write(reinterpret_cast<const char*>(&v), sizeof(v)); };
    out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
    put(kCheckpointVersion);
    put(static_cast<std::uint32_t>(h.k_modes()));
    put(static_cast<std::uint32_t>(h.l_max()));
    put(static_cast<std::uint32_t>(s.scaled ? 1u : 0u));
    put(h.order_hash());
    put(static_cast<std::uint64_t>(s.ados.size()));
    put(s.time);
    for (const auto& m : s.ados) {
        for (int r = 0; r < 2; ++r) {
            for (int c = 0; c < 2; ++c) {
                put(m(r, c).real());
                put(m(r, c).imag());
            }
        }
    }
    if (!out) throw std::runtime_error("save_checkpoint: write failed for " + path);
}

inline HierarchyState load_checkpoint(const std::string& path, const Hierarchy& h) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path);
    auto get = [&in](auto& v) { in.read(reinterpret_cast<char*>(&v), sizeof(v)); };
    char magic[8];
    in.read(magic, sizeof(magic));
    std::uint32_t version = 0, k = 0, l = 0, flags = 0;
    std::uint64_t hash = 0, count = 0;
    HierarchyState s;
    get(version);
    get(k);
    get(l);
    get(flags);
    get(hash);
    get(count);
    get(s.time);
    if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
        throw std::runtime_error("load_checkpoint: " + path + " is not a checkpoint");
    }
    if (version != kCheckpointVersion) throw std::runtime_error("load_checkpoint: unsupported version");
    if (k != h.k_modes() || static_cast<int>(l) != h.l_max() || hash != h.order_hash() || count != h.size()) {
        throw std::runtime_error("load_checkpoint: hierarchy layout does not match " + path);
    }
    s.scaled = (flags & 1u) != 0;
    s.ados.resize(count);
    for (auto& m : s.ados) {
        for (int r = 0; r < 2; ++r) {
            for (int c = 0; c < 2; ++c) {
                double re = 0, im = 0;
                get(re);
                get(im);
                m(r, c) = {re, im};
            }
        }
    }
    if (!in) throw std::runtime_error("load_checkpoint: truncated file " + path);
    return s;
}

}  // namespace heomstark::heom
