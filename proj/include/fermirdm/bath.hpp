// bath.hpp — Drude-Lorentz spectral densities and the one-sided bath rate
// Gamma(omega) with its detailed-balance structure

#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "fermirdm/constants.hpp"
#include "fermirdm/model.hpp"

namespace fermirdm::bath {

struct DrudeLorentzPeak {
    double width{0.0};      // au
    double amplitude{0.0};  // au
    double center{0.0};     // au
};

using PeakList = std::vector<DrudeLorentzPeak>;

// The strong high-frequency bath used by every canned scenario.
inline PeakList default_peaks() {
    return {{0.0001, 0.00001, 0.0001},
            {0.001, 0.0017, 0.0017},
            {0.013, 0.023, 0.027},
            {0.01, 0.017, 0.017}};
}

struct BathSpec {
    double temperature{0.0};               // kelvin
    std::vector<PeakList> peaks_per_site;  // one list per site

    static BathSpec uniform(int n_sites, double temperature, const PeakList& peaks) {
        BathSpec spec;
        spec.temperature = temperature;
        spec.peaks_per_site.assign(static_cast<std::size_t>(n_sites), peaks);
        return spec;
    }

    int n_sites() const { return static_cast<int>(peaks_per_site.size()); }

    void validate() const {
        if (temperature <= 0.0) throw std::invalid_argument("BathSpec: temperature must be > 0");
        for (const auto& peaks : peaks_per_site) {
            for (const auto& p : peaks) {
                if (p.width <= 0.0) throw std::invalid_argument("BathSpec: peak width must be > 0");
                if (p.amplitude < 0.0 || p.center < 0.0) {
                    throw std::invalid_argument("BathSpec: amplitude and center must be >= 0");
                }
            }
        }
    }
};

// J(omega) = sum_k A_k g_k omega / ((omega - w0_k)^2 + g_k^2); vanishes
// linearly at omega = 0 so the zero-frequency rate stays finite.
inline double spectral_density(double omega, std::span<const DrudeLorentzPeak> peaks) {
    if (omega < 0.0) throw std::invalid_argument("spectral_density: omega must be >= 0");
    double j = 0.0;
    for (const auto& p : peaks) {
        const double d = omega - p.center;
        j += p.amplitude * p.width * omega / (d * d + p.width * p.width);
    }
    return j;
}

inline double bose_occupation(double omega, double temperature) {
    if (temperature <= 0.0) throw std::invalid_argument("bose_occupation: T must be > 0");
    if (omega == 0.0) throw std::invalid_argument("bose_occupation: omega must be nonzero");
    return 1.0 / std::expm1(inverse_temperature(temperature) * omega);
}

// slope of J at omega -> 0+, used for the zero-frequency limit of Gamma
inline double spectral_density_slope0(std::span<const DrudeLorentzPeak> peaks) {
    double s = 0.0;
    for (const auto& p : peaks) {
        s += p.amplitude * p.width / (p.center * p.center + p.width * p.width);
    }
    return s;
}

// One-sided bath rate (real, dissipative part only):
//   omega > 0: J(omega) (n_B + 1)   (emission into the bath)
//   omega < 0: J(|omega|) n_B       (absorption from the bath)
//   omega = 0: k_B T dJ/domega|_0+  (classical limit)
// which ties uphill and downhill rates by Gamma(w) = e^{beta w} Gamma(-w).
inline double gamma_rate(double omega, double temperature,
                         std::span<const DrudeLorentzPeak> peaks) {
    if (temperature <= 0.0) throw std::invalid_argument("gamma_rate: T must be > 0");
    if (omega > 0.0) {
        return spectral_density(omega, peaks) * (bose_occupation(omega, temperature) + 1.0);
    }
    if (omega < 0.0) {
        return spectral_density(-omega, peaks) * bose_occupation(-omega, temperature);
    }
    return k_boltzmann * temperature * spectral_density_slope0(peaks);
}

// Gamma_nu(omega_ij) tabulated for every site and eigenstate pair.
struct RateTable {
    std::vector<Eigen::MatrixXd> site_rates;  // site_rates[nu](i,j) = Gamma_nu(w_ij)
    double temperature{0.0};

    int n_sites() const { return static_cast<int>(site_rates.size()); }

    double max_rate() const {
        double m = 0.0;
        for (const auto& g : site_rates) m = std::max(m, g.maxCoeff());
        return m;
    }
};

inline RateTable build_rate_table(const model::EigenSystem& es, const BathSpec& spec) {
    spec.validate();
    if (spec.n_sites() != es.size()) {
        throw std::invalid_argument("build_rate_table: bath/site count mismatch");
    }
    const int n = es.size();
    RateTable table;
    table.temperature = spec.temperature;
    table.site_rates.reserve(spec.peaks_per_site.size());
    for (const auto& peaks : spec.peaks_per_site) {
        Eigen::MatrixXd g(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                g(i, j) = gamma_rate(es.frequencies(i, j), spec.temperature, peaks);
        table.site_rates.push_back(std::move(g));
    }
    return table;
}

}  // namespace fermirdm::bath
