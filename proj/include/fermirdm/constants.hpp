// constants.hpp — unit conventions and physical constants

#pragma once

#include <complex>

namespace fermirdm {

// Atomic units throughout: energies in hartree, times in atomic time units,
// hbar = 1. Temperatures are the one exception and are always in kelvin.
inline constexpr double k_boltzmann = 3.166811563e-6;  // hartree / K

using cxd = std::complex<double>;

inline double inverse_temperature(double temperature_kelvin) {
    return 1.0 / (k_boltzmann * temperature_kelvin);
}

}  // namespace fermirdm
