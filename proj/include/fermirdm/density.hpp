// density.hpp — one-particle reduced density matrix in the energy eigenbasis

#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "fermirdm/constants.hpp"

namespace fermirdm {

// gamma(a,b) = <a†_a a_b> in the energy eigenbasis. Diagonal entries are
// orbital occupations; the matrix is Hermitian with eigenvalues in [0,1].
struct DensityMatrix {
    Eigen::MatrixXcd gamma;
    double electron_count{0.0};

    int size() const { return static_cast<int>(gamma.rows()); }
};

// eta = I - gamma; its diagonal carries the Pauli blocking factors (1 - n_i).
inline Eigen::MatrixXcd hole_matrix(const Eigen::MatrixXcd& gamma) {
    return Eigen::MatrixXcd::Identity(gamma.rows(), gamma.cols()) - gamma;
}

inline double hermiticity_residual(const Eigen::MatrixXcd& m) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

struct OccupationBounds {
    double min_eigenvalue;
    double max_eigenvalue;
};

inline OccupationBounds occupation_bounds(const Eigen::MatrixXcd& gamma) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(gamma, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("occupation_bounds: eigensolver failed");
    }
    return {solver.eigenvalues().minCoeff(), solver.eigenvalues().maxCoeff()};
}

// Checks the DensityMatrix contract: Hermiticity to 1e-10, trace equal to the
// electron count to 1e-8, occupation eigenvalues inside [-1e-8, 1+1e-8].
inline void validate(const DensityMatrix& dm) {
    if (dm.gamma.rows() != dm.gamma.cols()) {
        throw std::invalid_argument("DensityMatrix: gamma must be square");
    }
    const double herm = hermiticity_residual(dm.gamma);
    if (herm > 1e-10) {
        throw std::invalid_argument("DensityMatrix: Hermiticity residual " + std::to_string(herm));
    }
    const cxd tr = dm.gamma.trace();
    if (std::abs(tr.real() - dm.electron_count) > 1e-8 || std::abs(tr.imag()) > 1e-10) {
        throw std::invalid_argument("DensityMatrix: trace does not match electron count");
    }
    const auto bounds = occupation_bounds(dm.gamma);
    if (bounds.min_eigenvalue < -1e-8 || bounds.max_eigenvalue > 1.0 + 1e-8) {
        throw std::invalid_argument("DensityMatrix: occupation eigenvalue outside [0,1]");
    }
}

}  // namespace fermirdm
