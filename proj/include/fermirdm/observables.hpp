// observables.hpp — derived quantities: site-basis density, ground-state
// probability, effective relaxation rate, coherence-localization map

#pragma once

#include <algorithm>
#include <cmath>
#include <iostream>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fermirdm/constants.hpp"
#include "fermirdm/model.hpp"

namespace fermirdm::observables {

// gamma_site = U gamma U^T: same trace, same spectrum, atom-resolved.
inline Eigen::MatrixXcd site_density(const Eigen::MatrixXcd& gamma_eigen,
                                     const model::EigenSystem& es) {
    if (gamma_eigen.rows() != es.size() || gamma_eigen.cols() != es.size()) {
        throw std::invalid_argument("site_density: dimension mismatch");
    }
    const Eigen::MatrixXcd u = es.orbitals.cast<cxd>();
    return u * gamma_eigen * u.transpose();
}

// P_g = prod_i (1 - |n_i - s_i|) against the zero-temperature step filling
// s_i = 1 for eps_i < mu. Populations are clipped to [0,1] first so that
// integrator-level noise cannot push a factor negative.
inline double ground_state_probability(const Eigen::MatrixXcd& gamma,
                                       const Eigen::VectorXd& energies, double mu) {
    const int n = static_cast<int>(energies.size());
    if (gamma.rows() != n) throw std::invalid_argument("ground_state_probability: size mismatch");
    double p = 1.0;
    for (int i = 0; i < n; ++i) {
        if (std::abs(energies(i) - mu) < 1e-12) {
            std::cerr << "ground_state_probability: level " << i
                      << " lies on the chemical potential; counting it unoccupied\n";
        }
        const double target = energies(i) < mu ? 1.0 : 0.0;
        const double occ = std::clamp(gamma(i, i).real(), 0.0, 1.0);
        p *= 1.0 - std::abs(occ - target);
    }
    return p;
}

// r(t) = (dP_g/dt) / (1 - P_g) by centered differences on the (possibly
// nonuniform) sample grid; samples with 1 - P_g below 1e-12 are skipped.
// Returns (t, r) pairs for the interior samples.
inline std::vector<std::pair<double, double>> effective_rate(const std::vector<double>& time,
                                                             const std::vector<double>& p_g) {
    if (time.size() != p_g.size()) throw std::invalid_argument("effective_rate: size mismatch");
    std::vector<std::pair<double, double>> out;
    for (std::size_t k = 1; k + 1 < time.size(); ++k) {
        const double denom = 1.0 - p_g[k];
        if (denom <= 1e-12) continue;
        const double hl = time[k] - time[k - 1];
        const double hr = time[k + 1] - time[k];
        if (hl <= 0.0 || hr <= 0.0) throw std::invalid_argument("effective_rate: time not increasing");
        const double dp = (p_g[k + 1] - p_g[k]) / hr * (hl / (hl + hr)) +
                          (p_g[k] - p_g[k - 1]) / hl * (hr / (hl + hr));
        out.emplace_back(time[k], dp / denom);
    }
    if (out.empty()) {
        throw std::domain_error("effective_rate: window degenerate (P_g ~ 1 everywhere)");
    }
    return out;
}

// -1/log|gamma(x,x')| with a floor guard; blows up where coherence survives,
// tends to 0+ where it has died. Diagonal (populations) passed through as is.
inline Eigen::MatrixXd localization_map(const Eigen::MatrixXcd& gamma_site) {
    const Eigen::Index n = gamma_site.rows();
    Eigen::MatrixXd map(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j) {
                map(i, j) = gamma_site(i, j).real();
            } else {
                map(i, j) = -1.0 / std::log(std::abs(gamma_site(i, j)) + 1e-300);
            }
        }
    }
    return map;
}

// Per-sample record of everything the scenario runner writes out.
struct ObservableSeries {
    std::vector<double> time;
    std::vector<Eigen::VectorXd> eigen_populations;
    std::vector<Eigen::VectorXd> site_populations;
    std::vector<double> ground_state_prob;
    std::vector<double> trace_real;
    std::vector<double> hermiticity_residual;
    std::vector<std::pair<double, Eigen::MatrixXcd>> snapshots;  // eigenbasis gamma

    std::size_t size() const { return time.size(); }

    void validate() const {
        const std::size_t n = time.size();
        if (eigen_populations.size() != n || site_populations.size() != n ||
            ground_state_prob.size() != n || trace_real.size() != n ||
            hermiticity_residual.size() != n) {
            throw std::invalid_argument("ObservableSeries: column lengths differ");
        }
        for (std::size_t k = 1; k < n; ++k) {
            if (time[k] <= time[k - 1]) {
                throw std::invalid_argument("ObservableSeries: time must be strictly increasing");
            }
        }
    }
};

}  // namespace fermirdm::observables
