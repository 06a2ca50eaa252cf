// Atomic units throughout the engine; conversions live here.

#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace heomstark::units {

// CODATA 2018 values; the intensity unit is the one quoted for a field
// amplitude of 1 a.u. (E = 5.142e9 V/cm).
struct UnitSystem {
    double hartree_per_ev{1.0 / 27.211386245988};
    double au_time_per_fs{1.0 / 0.024188843265857};
    double au_intensity{3.50945e16};   // W/cm^2
    double boltzmann_au{3.166811563e-6};  // hartree / K

    bool valid() const noexcept {
        return hartree_per_ev > 0 && au_time_per_fs > 0 && au_intensity > 0 && boltzmann_au > 0;
    }
};

inline constexpr UnitSystem kUnits{};

enum class Unit { eV, fs, kelvin_to_beta };

inline double to_atomic_units(double value, Unit unit, const UnitSystem& u = kUnits) {
    if (!std::isfinite(value)) {
        throw std::invalid_argument("to_atomic_units: non-finite input");
    }
    switch (unit) {
        case Unit::eV: return value * u.hartree_per_ev;
        case Unit::fs: return value * u.au_time_per_fs;
        case Unit::kelvin_to_beta:
            if (value <= 0.0) {
                throw std::invalid_argument("to_atomic_units: temperature must be positive, got " +
                                            std::to_string(value) + " K");
            }
            return 1.0 / (u.boltzmann_au * value);
    }
    throw std::invalid_argument("to_atomic_units: unknown unit");
}

inline double ev_to_au(double ev) { return to_atomic_units(ev, Unit::eV); }
inline double fs_to_au(double fs) { return to_atomic_units(fs, Unit::fs); }
inline double au_to_fs(double t_au, const UnitSystem& u = kUnits) { return t_au / u.au_time_per_fs; }
inline double au_to_ev(double e_au, const UnitSystem& u = kUnits) { return e_au / u.hartree_per_ev; }
inline double kelvin_to_beta(double kelvin) { return to_atomic_units(kelvin, Unit::kelvin_to_beta); }

// Peak field amplitude (a.u.) for a given intensity in W/cm^2.
inline double intensity_to_amplitude(double intensity, const UnitSystem& u = kUnits) {
    if (!(intensity >= 0.0) || !std::isfinite(intensity)) {
        throw std::invalid_argument("intensity_to_amplitude: intensity must be finite and >= 0");
    }
    return std::sqrt(intensity / u.au_intensity);
}

}  // namespace heomstark::units
