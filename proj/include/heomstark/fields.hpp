// Zero-area control pulses.

#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "heomstark/units.hpp"

namespace heomstark::fields {

enum class Shape { none, dc_flash, single_cycle_sine };

inline std::string to_string(Shape s) {
    switch (s) {
        case Shape::none: return "none";
        case Shape::dc_flash: return "dc_flash";
        case Shape::single_cycle_sine: return "single_cycle_sine";
    }
    return "?";
}

inline Shape shape_from_string(const std::string& s) {
    if (s == "none") return Shape::none;
    if (s == "dc_flash") return Shape::dc_flash;
    if (s == "single_cycle_sine") return Shape::single_cycle_sine;
    throw std::invalid_argument("unknown field shape '" + s + "'");
}

// amplitude_e0 is signed: a negative value starts the pulse with a negative lobe.
struct PulseSpec {
    Shape shape{Shape::none};
    double amplitude_e0{0.0};  // a.u.
    double period_fs{120.0};
    double start_fs{0.0};

    void validate() const {
        if (shape != Shape::none && !(period_fs > 0.0)) {
            throw std::invalid_argument("PulseSpec: period_fs must be > 0");
        }
        if (!std::isfinite(amplitude_e0) || !std::isfinite(start_fs)) {
            throw std::invalid_argument("PulseSpec: non-finite amplitude or start");
        }
    }

    double start_au() const { return units::fs_to_au(start_fs); }
    double period_au() const { return units::fs_to_au(period_fs); }
};

inline double field_amplitude(double t, const PulseSpec& spec) {
    if (spec.shape == Shape::none) return 0.0;
    const double t0 = spec.start_au();
    const double period = spec.period_au();
    const double tau = t - t0;
    switch (spec.shape) {
        case Shape::dc_flash:
            if (tau < 0.0 || tau >= period) return 0.0;
            return tau < 0.5 * period ? spec.amplitude_e0 : -spec.amplitude_e0;
        case Shape::single_cycle_sine:
            if (tau < 0.0 || tau > period) return 0.0;
            return spec.amplitude_e0 * std::sin(2.0 * std::numbers::pi * tau / period);
        case Shape::none: break;
    }
    return 0.0;
}

// Times (a.u.) where the waveform or its derivative is not smooth; the
// propagator places step boundaries on them.
inline std::vector<double> breakpoints(const PulseSpec& spec) {
    if (spec.shape == Shape::none || spec.amplitude_e0 == 0.0) return {};
    const double t0 = spec.start_au();
    const double period = spec.period_au();
    if (spec.shape == Shape::dc_flash) return {t0, t0 + 0.5 * period, t0 + period};
    return {t0, t0 + period};
}

// Composite Gauss-Legendre over each smooth piece; exact for the flash and
// accurate to round-off for the sine.
template <class Field>
double integrate_piecewise(Field&& field, const std::vector<double>& pieces, int panels = 64) {
    static constexpr double x[5] = {0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640,
                                    0.9061798459386640};
    static constexpr double w[5] = {0.5688888888888889, 0.4786286704993665, 0.4786286704993665,
                                    0.2369268850561891, 0.2369268850561891};
    double area = 0.0;
    for (std::size_t s = 0; s + 1 < pieces.size(); ++s) {
        const double h = (pieces[s + 1] - pieces[s]) / panels;
        for (int p = 0; p < panels; ++p) {
            const double mid = pieces[s] + (p + 0.5) * h;
            for (int q = 0; q < 5; ++q) area += 0.5 * h * w[q] * field(mid + 0.5 * h * x[q]);
        }
    }
    return area;
}

template <class Field>
bool has_zero_area(Field&& field, const std::vector<double>& pieces, double e0, double period,
                   double quadrature_tol) {
    const double area = integrate_piecewise(std::forward<Field>(field), pieces);
    return std::abs(area) <= quadrature_tol * std::abs(e0) * period;
}

// |Int E dt| <= tol * |E0| * T over the pulse window.
inline bool validate_zero_area(const PulseSpec& spec, double quadrature_tol = 1e-10) {
    if (spec.shape == Shape::none) return true;
    return has_zero_area([&](double t) { return field_amplitude(t, spec); }, breakpoints(spec),
                         spec.amplitude_e0, spec.period_au(), quadrature_tol);
}

}  // namespace heomstark::fields
