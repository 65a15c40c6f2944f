// generator.hpp — right-hand side of the Pauli-blocked secular master
// equation for the 1-RDM, in reference (literal sum) and fast (rank-one
// collapsed) forms, plus the diagonal blocked-kinetics oracle form

#pragma once

#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "fermirdm/bath.hpp"
#include "fermirdm/constants.hpp"
#include "fermirdm/density.hpp"
#include "fermirdm/model.hpp"

namespace fermirdm::generator {

enum class BlockingMode { blocked, unblocked };
enum class DephasingMode { full, populations_only };

// Secular selector S(a,b,c,d) = d_ab d_cd + d_bc d_ad (1 - d_ab d_cd):
// keeps population-population couplings and each coherence's own decay,
// discards everything that would mix the two sectors.
inline int secular_mask(int a, int b, int c, int d) {
    const int dab = a == b ? 1 : 0;
    const int dcd = c == d ? 1 : 0;
    const int dbc = b == c ? 1 : 0;
    const int dad = a == d ? 1 : 0;
    return dab * dcd + dbc * dad * (1 - dab * dcd);
}

// Immutable bundle of everything the generator contracts against. The
// complex caches exist so the hot path never mixes real/complex scalars.
struct GeneratorContext {
    model::EigenSystem eigensystem;
    model::CouplingSet couplings;
    bath::RateTable rates;
    BlockingMode blocking{BlockingMode::blocked};
    DephasingMode dephasing{DephasingMode::full};

    Eigen::MatrixXcd minus_i_omega;             // -i (eps_a - eps_b)
    std::vector<Eigen::VectorXcd> site_w;       // orbital row of each site
    std::vector<Eigen::VectorXcd> site_w2;      // its elementwise square
    std::vector<Eigen::MatrixXcd> site_rates;   // complex copy of the rate table
    std::vector<cxd> site_rate0;                // Gamma_nu(0)

    GeneratorContext(model::EigenSystem es, model::CouplingSet cs, bath::RateTable rt,
                     BlockingMode block = BlockingMode::blocked,
                     DephasingMode deph = DephasingMode::full)
        : eigensystem(std::move(es)),
          couplings(std::move(cs)),
          rates(std::move(rt)),
          blocking(block),
          dephasing(deph) {
        const int n = eigensystem.size();
        if (couplings.n_sites() != n || rates.n_sites() != n) {
            throw std::invalid_argument("GeneratorContext: inconsistent dimensions");
        }
        minus_i_omega = cxd(0.0, -1.0) * eigensystem.frequencies.cast<cxd>();
        site_w.reserve(n);
        site_w2.reserve(n);
        site_rates.reserve(n);
        site_rate0.reserve(n);
        for (int nu = 0; nu < n; ++nu) {
            Eigen::VectorXcd w = eigensystem.orbitals.row(nu).transpose().cast<cxd>();
            site_w.push_back(w);
            site_w2.push_back(w.cwiseProduct(w));
            site_rates.push_back(rates.site_rates[nu].cast<cxd>());
            site_rate0.push_back(cxd(rates.site_rates[nu](0, 0), 0.0));
        }
    }

    int size() const { return eigensystem.size(); }

    double dissipative_rate_scale() const { return rates.max_rate(); }
};

namespace detail {

// Dissipator input: the full matrix, or just its diagonal when only
// populations are allowed to relax.
inline Eigen::MatrixXcd dissipator_input(const Eigen::MatrixXcd& gamma,
                                         const GeneratorContext& ctx) {
    if (ctx.dephasing == DephasingMode::populations_only) {
        return Eigen::MatrixXcd(gamma.diagonal().asDiagonal());
    }
    return gamma;
}

inline Eigen::MatrixXcd hole_input(const Eigen::MatrixXcd& input, const GeneratorContext& ctx) {
    if (ctx.blocking == BlockingMode::unblocked) {
        return Eigen::MatrixXcd::Identity(input.rows(), input.cols());
    }
    return hole_matrix(input);
}

}  // namespace detail

// Literal contraction of the four masked dissipative terms, kept as close
// to the tensor expression as possible. The two daggered terms are the
// Hermitian conjugates of the two plain ones — the conjugate applies to the
// scalar rate-coupling prefactor and the hole matrix enters transposed in
// the second term — which is what makes the dissipator a Hermitian,
// traceless map for every Hermitian input. Cost O(n_sites * N^5): this is
// the correctness anchor, not the propagation path.
inline Eigen::MatrixXcd rhs_reference(const Eigen::MatrixXcd& gamma,
                                      const GeneratorContext& ctx) {
    const int n = ctx.size();
    if (gamma.rows() != n || gamma.cols() != n) {
        throw std::invalid_argument("rhs_reference: dimension mismatch");
    }
    const Eigen::MatrixXcd in = detail::dissipator_input(gamma, ctx);
    const Eigen::MatrixXcd eta = detail::hole_input(in, ctx);

    Eigen::MatrixXcd diss = Eigen::MatrixXcd::Zero(n, n);
    for (int nu = 0; nu < n; ++nu) {
        const Eigen::MatrixXd& v = ctx.couplings.projectors[nu];
        const Eigen::MatrixXd& g = ctx.rates.site_rates[nu];
        for (int a = 0; a < n; ++a) {
            for (int b = 0; b < n; ++b) {
                cxd t1{0.0, 0.0}, t2{0.0, 0.0}, t3{0.0, 0.0}, t4{0.0, 0.0};
                for (int c = 0; c < n; ++c) {
                    for (int e = 0; e < n; ++e) {
                        for (int f = 0; f < n; ++f) {
                            if (secular_mask(a, f, f, c)) {
                                t1 += g(c, f) * v(a, e) * v(f, c) * in(c, b) * eta(e, f);
                            }
                        }
                    }
                }
                for (int d = 0; d < n; ++d) {
                    for (int e = 0; e < n; ++e) {
                        for (int f = 0; f < n; ++f) {
                            if (secular_mask(b, f, f, d)) {
                                t2 += std::conj(cxd(g(d, f) * v(b, e) * v(f, d), 0.0)) *
                                      in(a, d) * eta(f, e);
                            }
                        }
                    }
                }
                for (int c = 0; c < n; ++c) {
                    for (int d = 0; d < n; ++d) {
                        for (int e = 0; e < n; ++e) {
                            if (secular_mask(d, b, a, c)) {
                                t3 += g(c, a) * v(d, e) * v(a, c) * in(c, d) * eta(e, b);
                            }
                        }
                    }
                }
                for (int c = 0; c < n; ++c) {
                    for (int d = 0; d < n; ++d) {
                        for (int e = 0; e < n; ++e) {
                            if (secular_mask(c, a, b, d)) {
                                t4 += std::conj(cxd(g(d, b) * v(c, e) * v(b, d), 0.0)) *
                                      in(c, d) * eta(a, e);
                            }
                        }
                    }
                }
                diss(a, b) += t1 + t2 - t3 - t4;
            }
        }
    }
    return ctx.minus_i_omega.cwiseProduct(gamma) - diss;
}

// Fast path. The masks collapse (S_{a,f,f,c} -> d_ac and the two gain masks
// to their two delta branches), and every V^nu is the rank-one projector
// w w^T, so each site contributes a few matrix-vector products:
//   u_f   = sum_e w_e eta(e,f)          q = w .* u
//   c1_a  = sum_f G(a,f) q_f            (coherence/population loss weight)
//   gn_a  = sum_c G(c,a) w_c^2 in_cc    (population gain weight)
// accumulated into X = T1 - T3; the dissipator is X + X^dagger, so the
// output is Hermitian by construction. Cost O(n_sites * N^2).
inline Eigen::MatrixXcd rhs_fast(const Eigen::MatrixXcd& gamma, const GeneratorContext& ctx) {
    const int n = ctx.size();
    if (gamma.rows() != n || gamma.cols() != n) {
        throw std::invalid_argument("rhs_fast: dimension mismatch");
    }
    const Eigen::MatrixXcd in = detail::dissipator_input(gamma, ctx);
    const Eigen::MatrixXcd eta = detail::hole_input(in, ctx);
    const Eigen::VectorXcd in_diag = in.diagonal();

    Eigen::MatrixXcd x = Eigen::MatrixXcd::Zero(n, n);
    for (int nu = 0; nu < n; ++nu) {
        const Eigen::VectorXcd& w = ctx.site_w[nu];
        const Eigen::VectorXcd& w2 = ctx.site_w2[nu];
        const Eigen::MatrixXcd& g = ctx.site_rates[nu];
        const cxd g0 = ctx.site_rate0[nu];

        const Eigen::VectorXcd u = eta.transpose() * w;
        const Eigen::VectorXcd q = w.cwiseProduct(u);
        const Eigen::VectorXcd c1 = g * q;
        const Eigen::VectorXcd gn = g.transpose() * w2.cwiseProduct(in_diag);

        x.noalias() += Eigen::MatrixXcd(w2.cwiseProduct(c1).asDiagonal()) * in;
        x.noalias() -= g0 * (Eigen::MatrixXcd(w2.asDiagonal()) * in * Eigen::MatrixXcd(q.asDiagonal()));
        x.diagonal() -= q.cwiseProduct(gn) - g0 * w2.cwiseProduct(q).cwiseProduct(in_diag);
    }
    Eigen::MatrixXcd out = ctx.minus_i_omega.cwiseProduct(gamma);
    out -= x + x.adjoint();
    return out;
}

// Production entry point used by the propagator.
inline Eigen::MatrixXcd rhs(const Eigen::MatrixXcd& gamma, const GeneratorContext& ctx) {
    return rhs_fast(gamma, ctx);
}

// Gain-minus-loss kinetics on occupations only:
//   dn_i/dt = sum_j [ K_ij (1 - n_i) n_j - K_ji (1 - n_j) n_i ]
// the form any rate equation must take for Fermi-Dirac detailed balance.
inline Eigen::VectorXd pauli_kinetics_rhs(const Eigen::VectorXd& occupations,
                                          const Eigen::MatrixXd& k) {
    const int n = static_cast<int>(occupations.size());
    if (k.rows() != n || k.cols() != n) {
        throw std::invalid_argument("pauli_kinetics_rhs: dimension mismatch");
    }
    if (k.minCoeff() < 0.0) {
        throw std::invalid_argument("pauli_kinetics_rhs: rates must be non-negative");
    }
    Eigen::VectorXd dn = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            dn(i) += k(i, j) * (1.0 - occupations(i)) * occupations(j) -
                     k(j, i) * (1.0 - occupations(j)) * occupations(i);
        }
    }
    return dn;
}

// The population rate matrix the full generator reduces to on diagonal
// input: K_ij = 2 sum_nu (V^nu_ij)^2 Gamma_nu(w_ji).
inline Eigen::MatrixXd kinetic_rate_matrix(const GeneratorContext& ctx) {
    const int n = ctx.size();
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            double sum = 0.0;
            for (int nu = 0; nu < n; ++nu) {
                const double vij = ctx.couplings.projectors[nu](i, j);
                sum += vij * vij * ctx.rates.site_rates[nu](j, i);
            }
            k(i, j) = 2.0 * sum;
        }
    }
    return k;
}

}  // namespace fermirdm::generator
