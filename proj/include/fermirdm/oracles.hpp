// oracles.hpp — independent correctness anchors: exact Fock-space fermion
// algebra (sign-string construction), seeded correlated mixed states, the
// double-commutator expectation identity, and an independently coded
// textbook secular Redfield generator

#pragma once

#include <complex>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "fermirdm/constants.hpp"
#include "fermirdm/generator.hpp"

namespace fermirdm::oracles {

// Dense 2^n x 2^n matrices for n <= 6 fermionic modes. Annihilation
// operators carry the Jordan-Wigner sign string, so all anticommutation
// relations hold exactly in integer arithmetic.
class FockSpace {
public:
    explicit FockSpace(int n_modes) : n_modes_(n_modes) {
        if (n_modes < 1 || n_modes > 6) {
            throw std::invalid_argument("FockSpace: n_modes must be in [1, 6]");
        }
        const Eigen::Matrix2cd sz = (Eigen::Matrix2cd() << 1, 0, 0, -1).finished();
        const Eigen::Matrix2cd lower = (Eigen::Matrix2cd() << 0, 1, 0, 0).finished();
        const Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();

        annihilation_.reserve(n_modes);
        for (int j = 0; j < n_modes; ++j) {
            Eigen::MatrixXcd op = Eigen::MatrixXcd::Identity(1, 1);
            for (int k = 0; k < n_modes; ++k) {
                const Eigen::Matrix2cd& factor = (k < j) ? sz : (k == j ? lower : id);
                op = kron(op, factor);
            }
            annihilation_.push_back(op);
        }
        transition_.assign(static_cast<std::size_t>(n_modes) * n_modes, {});
        for (int x = 0; x < n_modes; ++x) {
            for (int y = 0; y < n_modes; ++y) {
                transition_[static_cast<std::size_t>(x) * n_modes + y] =
                    annihilation_[x].adjoint() * annihilation_[y];
            }
        }
    }

    int n_modes() const { return n_modes_; }
    Eigen::Index dim() const { return Eigen::Index(1) << n_modes_; }

    const Eigen::MatrixXcd& annihilation(int j) const { return annihilation_.at(j); }
    Eigen::MatrixXcd creation(int j) const { return annihilation_.at(j).adjoint(); }

    // a†_x a_y
    const Eigen::MatrixXcd& transition(int x, int y) const {
        return transition_.at(static_cast<std::size_t>(x) * n_modes_ + y);
    }

    Eigen::MatrixXcd one_rdm(const Eigen::MatrixXcd& rho) const {
        Eigen::MatrixXcd gamma(n_modes_, n_modes_);
        for (int x = 0; x < n_modes_; ++x)
            for (int y = 0; y < n_modes_; ++y) gamma(x, y) = (rho * transition(x, y)).trace();
        return gamma;
    }

private:
    static Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
        Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            for (Eigen::Index j = 0; j < a.cols(); ++j)
                out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        return out;
    }

    int n_modes_;
    std::vector<Eigen::MatrixXcd> annihilation_;
    std::vector<Eigen::MatrixXcd> transition_;
};

// rho = M M† / tr(M M†) for a seeded complex Gaussian M: positive
// semidefinite, unit trace, and generically carrying two-body correlations.
inline Eigen::MatrixXcd random_mixed_state(int n_modes, std::uint64_t seed) {
    if (n_modes < 1 || n_modes > 6) {
        throw std::invalid_argument("random_mixed_state: n_modes must be in [1, 6]");
    }
    const Eigen::Index dim = Eigen::Index(1) << n_modes;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXcd m(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i)
        for (Eigen::Index j = 0; j < dim; ++j) m(i, j) = cxd(gauss(rng), gauss(rng));
    Eigen::MatrixXcd rho = m * m.adjoint();
    rho /= rho.trace().real();
    return rho;
}

struct MkIdentity {
    cxd lhs;  // exact trace of rho times the nested commutator
    cxd rhs;  // the same expectation assembled from gamma and eta alone
    double deviation() const { return std::abs(lhs - rhs); }
};

// <[[a†_a a_b, a†_c a_d], a†_e a_f]> depends on rho only through its 1-RDM:
//   d_cb (g_af h_ed - h_af g_ed) + d_ad (g_eb h_cf - h_eb g_cf)
// with h = I - g. Indices are 0-based here.
inline MkIdentity mk_identity_check(int a, int b, int c, int d, int e, int f,
                                    const Eigen::MatrixXcd& rho, const FockSpace& fock) {
    if (rho.rows() != fock.dim() || rho.cols() != fock.dim()) {
        throw std::invalid_argument("mk_identity_check: rho dimension mismatch");
    }
    if (std::abs(rho.trace() - cxd(1.0, 0.0)) > 1e-10) {
        throw std::invalid_argument("mk_identity_check: rho must have unit trace");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(rho, Eigen::EigenvaluesOnly);
    if (solver.eigenvalues().minCoeff() < -1e-10) {
        throw std::invalid_argument("mk_identity_check: rho must be positive semidefinite");
    }

    const Eigen::MatrixXcd& ab = fock.transition(a, b);
    const Eigen::MatrixXcd& cd = fock.transition(c, d);
    const Eigen::MatrixXcd& ef = fock.transition(e, f);
    const Eigen::MatrixXcd inner = ab * cd - cd * ab;
    const Eigen::MatrixXcd outer = inner * ef - ef * inner;

    const Eigen::MatrixXcd gamma = fock.one_rdm(rho);
    const Eigen::MatrixXcd eta =
        Eigen::MatrixXcd::Identity(gamma.rows(), gamma.cols()) - gamma;

    MkIdentity result;
    result.lhs = (rho * outer).trace();
    result.rhs = (b == c ? 1.0 : 0.0) * (gamma(a, f) * eta(e, d) - eta(a, f) * gamma(e, d)) +
                 (a == d ? 1.0 : 0.0) * (gamma(e, b) * eta(c, f) - eta(e, b) * gamma(c, f));
    return result;
}

// Standard secular Redfield generator for distinguishable levels, written
// from the golden-rule rate expressions. Shares no code with the blocked
// generator; used to pin down its unblocked limit.
inline Eigen::MatrixXcd textbook_redfield_rhs(const Eigen::MatrixXcd& gamma,
                                              const generator::GeneratorContext& ctx) {
    const int n = ctx.size();
    if (gamma.rows() != n || gamma.cols() != n) {
        throw std::invalid_argument("textbook_redfield_rhs: dimension mismatch");
    }
    const auto& v = ctx.couplings.projectors;
    const auto& g = ctx.rates.site_rates;

    // W(a,c): population transfer rate c -> a
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
    for (int a = 0; a < n; ++a) {
        for (int c = 0; c < n; ++c) {
            if (a == c) continue;
            double sum = 0.0;
            for (int nu = 0; nu < n; ++nu) sum += v[nu](a, c) * v[nu](a, c) * g[nu](c, a);
            w(a, c) = 2.0 * sum;
        }
    }
    const Eigen::VectorXd outflow = w.colwise().sum();

    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(n, n);
    for (int a = 0; a < n; ++a) {
        cxd gain{0.0, 0.0};
        for (int c = 0; c < n; ++c) {
            if (c != a) gain += w(a, c) * gamma(c, c);
        }
        out(a, a) = gain - outflow(a) * gamma(a, a);
    }
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            if (a == b) continue;
            double pure = 0.0;
            for (int nu = 0; nu < n; ++nu) {
                const double diff = v[nu](a, a) - v[nu](b, b);
                pure += g[nu](0, 0) * diff * diff;
            }
            const double decay = 0.5 * (outflow(a) + outflow(b)) + pure;
            out(a, b) = (cxd(0.0, -1.0) * ctx.eigensystem.frequencies(a, b) - decay) * gamma(a, b);
        }
    }
    return out;
}

}  // namespace fermirdm::oracles
