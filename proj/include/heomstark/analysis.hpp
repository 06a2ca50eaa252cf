// Dynamical-map tomography on the Bloch ball and what we read off it.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "heomstark/heom.hpp"
#include "heomstark/model.hpp"
#include "heomstark/parallel.hpp"
#include "heomstark/units.hpp"

namespace heomstark::analysis {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

struct BlochVector {
    double x{0.0}, y{0.0}, z{0.0};

    Vec3 vec() const { return {x, y, z}; }
    double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

// x = 2 Re rho12, y = 2 Im rho12, z = rho22 - rho11.
inline BlochVector bloch_coords(const Mat2& rho) {
    return {2.0 * rho(0, 1).real(), 2.0 * rho(0, 1).imag(), (rho(1, 1) - rho(0, 0)).real()};
}

inline Mat2 density_from_bloch(const Vec3& r) {
    Mat2 rho;
    rho << 0.5 * (1.0 - r.z()), 0.5 * cplx(r.x(), r.y()), 0.5 * cplx(r.x(), -r.y()), 0.5 * (1.0 + r.z());
    return rho;
}

// ---------------------------------------------------------------------------

struct EntropyError : std::domain_error {
    using std::domain_error::domain_error;
};

// von Neumann entropy in bits.
inline double entropy(const Mat2& rho) {
    Eigen::SelfAdjointEigenSolver<Mat2> es(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
    double s = 0.0;
    for (int i = 0; i < 2; ++i) {
        double l = es.eigenvalues()(i);
        if (l < -1e-6 || l > 1.0 + 1e-6) {
            throw EntropyError("entropy: eigenvalue " + std::to_string(l) + " outside [0, 1]");
        }
        l = std::clamp(l, 0.0, 1.0);
        if (l > 0.0) s -= l * std::log2(l);
    }
    return s;
}

// rho in the field-free eigenbasis (index 0 = ground state).
inline Mat2 adiabatic_density(const Mat2& rho, const SystemParams& params) {
    const Mat2 u = adiabatic_frame(params).cast<cplx>();
    return u.adjoint() * rho * u;
}

// ---------------------------------------------------------------------------

struct AffineBlochMap {
    Mat3 linear{Mat3::Identity()};
    Vec3 translation{Vec3::Zero()};
    double time_fs{0.0};

    Vec3 apply(const Vec3& r) const { return linear * r + translation; }
};

// det of the linear block; the unit ball has V(0) = 1 in these units.
inline double volume(const AffineBlochMap& map) { return map.linear.determinant(); }

struct Ellipsoid {
    Vec3 center;
    Vec3 semi_axes;  // descending
    Mat3 axes;       // column j is the direction of semi_axes(j)
};

inline Ellipsoid ellipsoid(const AffineBlochMap& map) {
    Eigen::JacobiSVD<Mat3> svd(map.linear, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return {map.translation, svd.singularValues(), svd.matrixU()};
}

// Probe states: |1>, |2>, |+>, |+i>, then identity/2 for the linearity check.
inline std::array<Mat2, 5> tomography_states() {
    std::array<Mat2, 5> s;
    s[0] << 1, 0, 0, 0;
    s[1] << 0, 0, 0, 1;
    s[2] << 0.5, 0.5, 0.5, 0.5;
    s[3] << 0.5, cplx(0, -0.5), cplx(0, 0.5), 0.5;
    s[4] << 0.5, 0, 0, 0.5;
    return s;
}

// Solves A r_j + b = r'_j exactly for four affinely independent probes.
inline AffineBlochMap solve_affine(const std::array<Vec3, 4>& in, const std::array<Vec3, 4>& out, double t_fs = 0) {
    Eigen::Matrix4d p;
    Eigen::Matrix<double, 4, 3> q;
    for (int j = 0; j < 4; ++j) {
        p.row(j) << in[j].transpose(), 1.0;
        q.row(j) = out[j].transpose();
    }
    const Eigen::Matrix<double, 4, 3> m = p.fullPivLu().solve(q);
    AffineBlochMap map;
    map.linear = m.topRows<3>().transpose();
    map.translation = m.row(3).transpose();
    map.time_fs = t_fs;
    return map;
}

struct MapSeries {
    std::vector<AffineBlochMap> maps;
    std::array<heom::Trajectory, 5> trajectories;
    double linearity_error{0.0};
    bool reliable{true};

    std::vector<double> times_fs() const {
        std::vector<double> t;
        for (const auto& m : maps) t.push_back(m.time_fs);
        return t;
    }
};

inline constexpr double kLinearityTolerance = 1e-6;

// Propagates the five probe states (concurrently when threads > 1) and
// rebuilds the affine Bloch map at each output time.
inline MapSeries reconstruct_map(const heom::PropagationConfig& cfg, const heom::HeomGenerator& gen,
                                 const fields::PulseSpec& field, int threads = 1) {
    const auto states = tomography_states();
    MapSeries out;
    const int outer = std::min(threads, 5);
    heom::PropagationConfig inner = cfg;
    inner.threads = std::max(1, threads / std::max(outer, 1));
    parallel_for(states.size(), outer, [&](std::size_t i) {
        out.trajectories[i] = heom::propagate(states[i], inner, gen, field);
    });

    std::array<Vec3, 4> in;
    for (int j = 0; j < 4; ++j) in[j] = bloch_coords(states[j]).vec();
    const auto& ref = out.trajectories[0];
    for (std::size_t s = 0; s < ref.t_fs.size(); ++s) {
        std::array<Vec3, 4> img;
        for (int j = 0; j < 4; ++j) img[j] = bloch_coords(out.trajectories[j].rho[s]).vec();
        out.maps.push_back(solve_affine(in, img, ref.t_fs[s]));
        const Vec3 probe = bloch_coords(out.trajectories[4].rho[s]).vec();
        const Vec3 predicted = out.maps.back().apply(Vec3::Zero());
        out.linearity_error = std::max(out.linearity_error, (probe - predicted).cwiseAbs().maxCoeff());
    }
    out.reliable = out.linearity_error <= kLinearityTolerance;
    return out;
}

inline MapSeries reconstruct_map(const heom::PropagationConfig& cfg, const heom::Hierarchy& h,
                                 const bath::CorrelationExpansion& exp, const SystemParams& params,
                                 const fields::PulseSpec& field, int threads = 1) {
    heom::HeomGenerator gen(h, exp, params, cfg.rescaling);
    return reconstruct_map(cfg, gen, field, threads);
}

// ---------------------------------------------------------------------------

inline constexpr double kVolumeFloor = 1e-12;

// Gamma = -(1/2) d ln V / dt in a.u.^-1 (times in fs); centered differences
// inside, one-sided at the ends. NaN from the first sample where V <= floor.
inline std::vector<double> decoherence_rate(const std::vector<double>& times_fs, const std::vector<double>& v) {
    const std::size_t n = v.size();
    if (times_fs.size() != n) throw std::invalid_argument("decoherence_rate: size mismatch");
    std::vector<double> rate(n, std::numeric_limits<double>::quiet_NaN());
    if (n < 2) return rate;
    std::size_t valid = n;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(v[i] > kVolumeFloor)) {
            valid = i;
            break;
        }
    }
    auto lnv = [&](std::size_t i) { return std::log(v[i]); };
    auto t = [&](std::size_t i) { return units::fs_to_au(times_fs[i]); };
    for (std::size_t i = 0; i < valid; ++i) {
        double d;
        if (i == 0) {
            if (valid < 2) break;
            d = (lnv(1) - lnv(0)) / (t(1) - t(0));
        } else if (i + 1 >= valid) {
            d = (lnv(i) - lnv(i - 1)) / (t(i) - t(i - 1));
        } else {
            d = (lnv(i + 1) - lnv(i - 1)) / (t(i + 1) - t(i - 1));
        }
        rate[i] = -0.5 * d;
    }
    return rate;
}

// V(0) exp(-2 cumulative trapezoid of Gamma); NaN once Gamma is undefined.
inline std::vector<double> volume_from_rate(const std::vector<double>& times_fs, const std::vector<double>& rate,
                                            double v0 = 1.0) {
    std::vector<double> v(rate.size(), std::numeric_limits<double>::quiet_NaN());
    if (rate.empty()) return v;
    double integral = 0.0;
    v[0] = v0;
    for (std::size_t i = 1; i < rate.size(); ++i) {
        if (std::isnan(rate[i]) || std::isnan(rate[i - 1])) break;
        integral += 0.5 * (rate[i] + rate[i - 1]) * units::fs_to_au(times_fs[i] - times_fs[i - 1]);
        v[i] = v0 * std::exp(-2.0 * integral);
    }
    return v;
}

struct Bump {
    double t_fs;
    double value;
    double prominence;
};

struct NonMarkovianity {
    std::vector<Bump> bumps;
    bool non_markovian{false};
    double max_increase{0.0};  // largest V[i+1] - V[i]
};

inline constexpr double kDefaultProminence = 0.005;
inline constexpr double kDefaultIncreaseTolerance = 1e-8;

// Local maxima with their topographic prominence (drop to the higher of the
// two surrounding minima before a higher sample is reached).
inline std::vector<Bump> find_bumps(const std::vector<double>& times_fs, const std::vector<double>& v,
                                    double min_prominence) {
    std::vector<Bump> out;
    const std::size_t n = v.size();
    std::size_t i = 1;
    while (i + 1 < n) {
        if (!(v[i - 1] < v[i])) {
            ++i;
            continue;
        }
        std::size_t ahead = i;
        while (ahead + 1 < n && v[ahead + 1] == v[i]) ++ahead;
        if (ahead + 1 < n && v[ahead + 1] < v[i]) {
            const std::size_t peak = (i + ahead) / 2;
            double left_min = v[i];
            for (std::size_t j = i; j-- > 0;) {
                if (v[j] > v[i]) break;
                left_min = std::min(left_min, v[j]);
            }
            double right_min = v[i];
            for (std::size_t j = ahead + 1; j < n; ++j) {
                if (v[j] > v[i]) break;
                right_min = std::min(right_min, v[j]);
            }
            const double prominence = v[i] - std::max(left_min, right_min);
            if (prominence >= min_prominence) out.push_back({times_fs[peak], v[peak], prominence});
        }
        i = ahead + 1;
    }
    return out;
}

inline NonMarkovianity detect_nonmarkovianity(const std::vector<double>& times_fs, const std::vector<double>& v,
                                              double min_prominence = kDefaultProminence,
                                              double increase_tol = kDefaultIncreaseTolerance) {
    NonMarkovianity out;
    out.bumps = find_bumps(times_fs, v, min_prominence);
    for (std::size_t i = 0; i + 1 < v.size(); ++i) out.max_increase = std::max(out.max_increase, v[i + 1] - v[i]);
    out.non_markovian = out.max_increase > increase_tol;
    return out;
}

struct VolumeSeries {
    std::vector<double> times_fs;
    std::vector<double> volume;
    std::vector<double> rate;
    NonMarkovianity nm;
};

inline VolumeSeries volume_series(const MapSeries& maps, double min_prominence = kDefaultProminence) {
    VolumeSeries s;
    s.times_fs = maps.times_fs();
    for (const auto& m : maps.maps) s.volume.push_back(volume(m));
    s.rate = decoherence_rate(s.times_fs, s.volume);
    s.nm = detect_nonmarkovianity(s.times_fs, s.volume, min_prominence);
    return s;
}

}  // namespace heomstark::analysis
