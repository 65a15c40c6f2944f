// model.hpp — tight-binding chains, their eigensystems, site coupling
// projectors, and the Fermi-Dirac occupation machinery

#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "fermirdm/constants.hpp"
#include "fermirdm/density.hpp"

namespace fermirdm::model {

struct ChainSpec {
    int n_sites{0};
    double site_energy{0.0};  // hartree
    double hopping{0.0};      // hartree, nearest neighbor
    int n_electrons{0};       // spinless fermions, one orbital per site

    void validate() const {
        if (n_sites < 2) throw std::invalid_argument("ChainSpec: n_sites must be >= 2");
        if (n_electrons < 0 || n_electrons > n_sites) {
            throw std::invalid_argument("ChainSpec: n_electrons must lie in [0, n_sites]");
        }
    }
};

// Open-boundary Hueckel chain: uniform site energies on the diagonal,
// hopping on the first off-diagonals, no periodic wrap.
inline Eigen::MatrixXd build_chain(const ChainSpec& spec) {
    spec.validate();
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(spec.n_sites, spec.n_sites);
    for (int k = 0; k < spec.n_sites; ++k) {
        h(k, k) = spec.site_energy;
        if (k + 1 < spec.n_sites) {
            h(k, k + 1) = spec.hopping;
            h(k + 1, k) = spec.hopping;
        }
    }
    return h;
}

// Eigendecomposition of the chain Hamiltonian. orbitals(nu, i) is the
// amplitude of eigenstate i on site nu (columns are eigenvectors, ascending
// energy); frequencies(a, b) = energies(a) - energies(b).
struct EigenSystem {
    Eigen::VectorXd energies;
    Eigen::MatrixXd orbitals;
    Eigen::MatrixXd frequencies;

    int size() const { return static_cast<int>(energies.size()); }
};

inline EigenSystem diagonalize(const Eigen::MatrixXd& hamiltonian) {
    if (hamiltonian.rows() != hamiltonian.cols()) {
        throw std::invalid_argument("diagonalize: matrix must be square");
    }
    const double asym = (hamiltonian - hamiltonian.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12) {
        throw std::invalid_argument("diagonalize: matrix not symmetric, residual " +
                                    std::to_string(asym));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(hamiltonian);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("diagonalize: eigensolver did not converge");
    }

    EigenSystem es;
    es.energies = solver.eigenvalues();  // ascending
    es.orbitals = solver.eigenvectors();

    // Sign convention: the largest-magnitude component of every eigenvector is
    // positive (first such index wins), so repeated runs give identical U.
    const int n = es.size();
    for (int j = 0; j < n; ++j) {
        int arg = 0;
        double best = 0.0;
        for (int i = 0; i < n; ++i) {
            const double mag = std::abs(es.orbitals(i, j));
            if (mag > best) {
                best = mag;
                arg = i;
            }
        }
        if (es.orbitals(arg, j) < 0.0) es.orbitals.col(j) *= -1.0;
    }

    es.frequencies.resize(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) es.frequencies(a, b) = es.energies(a) - es.energies(b);
    return es;
}

// One rank-one projector per site: V^nu_{ij} = U(nu,i) U(nu,j). They resolve
// the identity, sum_nu V^nu = I.
struct CouplingSet {
    std::vector<Eigen::MatrixXd> projectors;

    int n_sites() const { return static_cast<int>(projectors.size()); }
};

inline CouplingSet coupling_matrices(const EigenSystem& es) {
    CouplingSet set;
    set.projectors.reserve(es.size());
    for (int nu = 0; nu < es.size(); ++nu) {
        const Eigen::VectorXd w = es.orbitals.row(nu).transpose();
        set.projectors.push_back(w * w.transpose());
    }
    return set;
}

inline double fd_occupation(double energy, double mu, double temperature) {
    const double x = inverse_temperature(temperature) * (energy - mu);
    return 1.0 / (1.0 + std::exp(x));
}

// Bisection for the chemical potential fixing sum_i n_i = n_electrons.
// The occupation sum is strictly increasing in mu, and the bracket
// [eps_min - 50 kT, eps_max + 50 kT] always straddles the root for
// 0 < n_electrons < n_levels.
inline double chemical_potential(const Eigen::VectorXd& energies, int n_electrons,
                                 double temperature) {
    const int n = static_cast<int>(energies.size());
    if (temperature <= 0.0) throw std::invalid_argument("chemical_potential: T must be > 0");
    if (n_electrons <= 0 || n_electrons >= n) {
        throw std::invalid_argument("chemical_potential: need 0 < n_electrons < n_levels");
    }
    const double kt = k_boltzmann * temperature;
    auto excess = [&](double mu) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += fd_occupation(energies(i), mu, temperature);
        return s - static_cast<double>(n_electrons);
    };
    double lo = energies.minCoeff() - 50.0 * kt;
    double hi = energies.maxCoeff() + 50.0 * kt;
    double mid = 0.5 * (lo + hi);
    for (int iter = 0; iter < 200; ++iter) {
        mid = 0.5 * (lo + hi);
        const double f = excess(mid);
        if (std::abs(f) <= 1e-12) return mid;
        if (f < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return mid;
}

// Diagonal equilibrium density, gamma_ii = 1/(1 + e^{beta(eps_i - mu)}).
inline DensityMatrix fd_density(const Eigen::VectorXd& energies, double mu, double temperature) {
    if (temperature <= 0.0) throw std::invalid_argument("fd_density: T must be > 0");
    const int n = static_cast<int>(energies.size());
    DensityMatrix dm;
    dm.gamma = Eigen::MatrixXcd::Zero(n, n);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        const double occ = fd_occupation(energies(i), mu, temperature);
        dm.gamma(i, i) = occ;
        total += occ;
    }
    dm.electron_count = total;
    return dm;
}

}  // namespace fermirdm::model
