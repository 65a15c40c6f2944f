// verify.hpp — property suites behind the `verify` subcommand: exact
// operator algebra, detailed balance, stationarity, and the dual-route
// generator equivalences

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fermirdm/bath.hpp"
#include "fermirdm/generator.hpp"
#include "fermirdm/model.hpp"
#include "fermirdm/oracles.hpp"
#include "fermirdm/scenarios.hpp"

namespace fermirdm::verify {

struct SuiteResult {
    std::string name;
    bool pass{false};
    double max_deviation{0.0};
    double tolerance{0.0};
    long trials{0};
};

struct Options {
    int modes{4};    // Fock-space suites run every mode count in [2, modes]
    int tuples{200};                  // index tuples per state
    int states{25};                   // mixed states per mode count
    std::uint64_t seed{20240901ULL};
};

// Hermitian matrix with spectrum inside [0,1]: 0.5 (I + A / |A|_2).
inline Eigen::MatrixXcd random_physical_density(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXcd a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = cxd(gauss(rng), gauss(rng));
    a = (a + a.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(a, Eigen::EigenvaluesOnly);
    const double radius = solver.eigenvalues().cwiseAbs().maxCoeff();
    return 0.5 * (Eigen::MatrixXcd::Identity(n, n) + a / radius);
}

inline generator::GeneratorContext make_test_context(
    int n, double temperature, double hopping,
    generator::BlockingMode blocking = generator::BlockingMode::blocked,
    generator::DephasingMode dephasing = generator::DephasingMode::full) {
    model::ChainSpec chain{n, 1.0, hopping, n / 2};
    model::EigenSystem es = model::diagonalize(model::build_chain(chain));
    model::CouplingSet cs = model::coupling_matrices(es);
    bath::RateTable rates =
        bath::build_rate_table(es, bath::BathSpec::uniform(n, temperature, bath::default_peaks()));
    return generator::GeneratorContext(std::move(es), std::move(cs), std::move(rates), blocking,
                                       dephasing);
}

// {a_i, a_j} = 0 and {a_i, a†_j} = delta_ij, exact in the sign-string
// construction; also 1-RDMs of random states stay Hermitian with spectrum
// in [0,1].
inline SuiteResult anticommutator_suite(const Options& opt) {
    SuiteResult r{"fermion_anticommutators", false, 0.0, 0.0, 0};
    const int top = std::min(opt.modes, 6);
    for (int n = 2; n <= top; ++n) {
        oracles::FockSpace fock(n);
        const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(fock.dim(), fock.dim());
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                const auto& ai = fock.annihilation(i);
                const auto& aj = fock.annihilation(j);
                const Eigen::MatrixXcd anti = ai * aj + aj * ai;
                const Eigen::MatrixXcd mixed = ai * aj.adjoint() + aj.adjoint() * ai -
                                               (i == j ? 1.0 : 0.0) * id;
                r.max_deviation = std::max({r.max_deviation, anti.cwiseAbs().maxCoeff(),
                                            mixed.cwiseAbs().maxCoeff()});
                ++r.trials;
            }
        }
    }
    r.pass = r.max_deviation <= r.tolerance;
    return r;
}

inline SuiteResult one_rdm_suite(const Options& opt) {
    SuiteResult r{"one_rdm_physicality", false, 0.0, 1e-12, 0};
    const int top = std::min(opt.modes, 6);
    for (int n = 2; n <= top; ++n) {
        oracles::FockSpace fock(n);
        for (int s = 0; s < std::max(1, opt.states / 4); ++s) {
            const Eigen::MatrixXcd rho =
                oracles::random_mixed_state(n, opt.seed + 977 * n + s);
            const Eigen::MatrixXcd gamma = fock.one_rdm(rho);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(gamma, Eigen::EigenvaluesOnly);
            const double lo = solver.eigenvalues().minCoeff();
            const double hi = solver.eigenvalues().maxCoeff();
            r.max_deviation = std::max({r.max_deviation, hermiticity_residual(gamma),
                                        std::max(0.0, -lo), std::max(0.0, hi - 1.0)});
            ++r.trials;
        }
    }
    r.pass = r.max_deviation <= r.tolerance;
    return r;
}

// The double-commutator expectation equals its gamma/eta closed form on
// correlated mixed states.
inline SuiteResult mk_identity_suite(const Options& opt) {
    SuiteResult r{"mk_identity", false, 0.0, 1e-10, 0};
    const int top = std::min(opt.modes, 6);
    for (int n = 2; n <= top; ++n) {
        oracles::FockSpace fock(n);
        std::mt19937_64 rng(opt.seed + 131 * static_cast<std::uint64_t>(n));
        std::uniform_int_distribution<int> pick(0, n - 1);
        for (int s = 0; s < opt.states; ++s) {
            const Eigen::MatrixXcd rho = oracles::random_mixed_state(n, opt.seed + 7919 * n + s);
            for (int k = 0; k < opt.tuples; ++k) {
                const auto res = oracles::mk_identity_check(pick(rng), pick(rng), pick(rng),
                                                            pick(rng), pick(rng), pick(rng), rho,
                                                            fock);
                r.max_deviation = std::max(r.max_deviation, res.deviation());
                ++r.trials;
            }
        }
    }
    r.pass = r.max_deviation <= r.tolerance;
    return r;
}

inline SuiteResult detailed_balance_suite(const Options&) {
    SuiteResult r{"detailed_balance", false, 0.0, 1e-12, 0};
    for (const auto& s : scenarios::builtin_scenarios()) {
        const model::EigenSystem es = model::diagonalize(model::build_chain(s.chain));
        const bath::RateTable table = bath::build_rate_table(es, s.bath_spec());
        const double beta = inverse_temperature(s.temperature);
        const int n = es.size();
        for (int nu = 0; nu < n; ++nu) {
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) {
                    const double lhs = table.site_rates[nu](i, j);
                    const double rhs = std::exp(beta * es.frequencies(i, j)) *
                                       table.site_rates[nu](j, i);
                    r.max_deviation = std::max(r.max_deviation, std::abs(lhs - rhs) / lhs);
                    ++r.trials;
                }
            }
        }
    }
    r.pass = r.max_deviation <= r.tolerance;
    return r;
}

inline SuiteResult rate_positivity_suite(const Options&) {
    SuiteResult r{"rate_positivity", false, 0.0, 0.0, 0};
    for (const auto& s : scenarios::builtin_scenarios()) {
        const model::EigenSystem es = model::diagonalize(model::build_chain(s.chain));
        const bath::RateTable table = bath::build_rate_table(es, s.bath_spec());
        for (const auto& g : table.site_rates) {
            r.max_deviation = std::max(r.max_deviation, std::max(0.0, -g.minCoeff()));
            r.trials += g.size();
        }
    }
    r.pass = r.max_deviation <= r.tolerance;
    return r;
}

// |rhs(fd)|_inf below 1e-13 of the largest tabulated rate.
inline SuiteResult fd_stationarity_suite(const Options&) {
    SuiteResult r{"fd_stationarity", false, 0.0, 1e-13, 0};
    for (int n : {2, 8, 12}) {
        for (double t : {300.0, 500.0, 5000.0}) {
            const auto ctx = make_test_context(n, t, 0.005);
            const double mu = model::chemical_potential(ctx.eigensystem.energies, n / 2, t);
            const DensityMatrix fd = model::fd_density(ctx.eigensystem.energies, mu, t);
            const double residual = generator::rhs_fast(fd.gamma, ctx).cwiseAbs().maxCoeff();
            r.max_deviation =
                std::max(r.max_deviation, residual / ctx.dissipative_rate_scale());
            ++r.trials;
        }
    }
    r.pass = r.max_deviation <= r.tolerance;
    return r;
}

inline SuiteResult trace_preservation_suite(const Options& opt) {
    SuiteResult r{"trace_preservation", false, 0.0, 1e-13, 0};
    std::mt19937_64 rng(opt.seed + 5);
    for (int n : {2, 4, 8, 12}) {
        for (auto blocking : {generator::BlockingMode::blocked, generator::BlockingMode::unblocked}) {
            for (auto deph : {generator::DephasingMode::full,
                              generator::DephasingMode::populations_only}) {
                const auto ctx = make_test_context(n, 500.0, 0.05, blocking, deph);
                for (int k = 0; k < 8; ++k) {
                    const Eigen::MatrixXcd gamma = random_physical_density(n, rng);
                    const Eigen::MatrixXcd out = generator::rhs_fast(gamma, ctx);
                    const double scale = n * out.cwiseAbs().maxCoeff() + 1e-300;
                    r.max_deviation =
                        std::max(r.max_deviation, std::abs(out.trace()) / scale);
                    ++r.trials;
                }
            }
        }
    }
    r.pass = r.max_deviation <= r.tolerance;
    return r;
}

inline SuiteResult hermiticity_suite(const Options& opt) {
    SuiteResult r{"hermiticity_preservation", false, 0.0, 1e-12, 0};
    std::mt19937_64 rng(opt.seed + 6);
    for (int n : {2, 4, 8, 12}) {
        const auto ctx = make_test_context(n, 500.0, 0.05);
        for (int k = 0; k < 10; ++k) {
            const Eigen::MatrixXcd gamma = random_physical_density(n, rng);
            r.max_deviation = std::max({r.max_deviation,
                                        hermiticity_residual(generator::rhs_fast(gamma, ctx)),
                                        hermiticity_residual(generator::rhs_reference(gamma, ctx))});
            ++r.trials;
        }
    }
    r.pass = r.max_deviation <= r.tolerance;
    return r;
}

// Diagonal input must produce exactly diagonal output (secular decoupling).
inline SuiteResult diagonal_closure_suite(const Options& opt) {
    SuiteResult r{"diagonal_closure", false, 0.0, 0.0, 0};
    std::mt19937_64 rng(opt.seed + 7);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int n : {2, 4, 8, 12}) {
        const auto ctx = make_test_context(n, 500.0, 0.05);
        for (int k = 0; k < 5; ++k) {
            Eigen::MatrixXcd gamma = Eigen::MatrixXcd::Zero(n, n);
            for (int i = 0; i < n; ++i) gamma(i, i) = unit(rng);
            for (const auto& out :
                 {generator::rhs_fast(gamma, ctx), generator::rhs_reference(gamma, ctx)}) {
                Eigen::MatrixXcd off = out;
                off.diagonal().setZero();
                r.max_deviation = std::max(r.max_deviation, off.cwiseAbs().maxCoeff());
                ++r.trials;
            }
        }
    }
    r.pass = r.max_deviation <= r.tolerance;
    return r;
}

inline SuiteResult oracle_equivalence_suite(const Options& opt) {
    SuiteResult r{"oracle_equivalence", false, 0.0, 1e-12, 0};
    std::mt19937_64 rng(opt.seed + 8);
    for (int n : {2, 4, 8, 12}) {
        for (auto blocking : {generator::BlockingMode::blocked, generator::BlockingMode::unblocked}) {
            const auto ctx = make_test_context(n, 500.0, 0.05, blocking);
            const int trials = blocking == generator::BlockingMode::blocked ? 50 : 10;
            for (int k = 0; k < trials; ++k) {
                const Eigen::MatrixXcd gamma = random_physical_density(n, rng);
                const double dev = (generator::rhs_fast(gamma, ctx) -
                                    generator::rhs_reference(gamma, ctx))
                                       .cwiseAbs()
                                       .maxCoeff();
                r.max_deviation = std::max(r.max_deviation, dev);
                ++r.trials;
            }
        }
    }
    r.pass = r.max_deviation <= r.tolerance;
    return r;
}

inline SuiteResult unblocked_textbook_suite(const Options& opt) {
    SuiteResult r{"unblocked_textbook_equivalence", false, 0.0, 1e-12, 0};
    std::mt19937_64 rng(opt.seed + 9);
    for (int n : {2, 4, 8}) {
        const auto ctx = make_test_context(n, 500.0, 0.05, generator::BlockingMode::unblocked);
        for (int k = 0; k < 20; ++k) {
            const Eigen::MatrixXcd gamma = random_physical_density(n, rng);
            const double dev =
                (generator::rhs_fast(gamma, ctx) - oracles::textbook_redfield_rhs(gamma, ctx))
                    .cwiseAbs()
                    .maxCoeff();
            r.max_deviation = std::max(r.max_deviation, dev);
            ++r.trials;
        }
    }
    r.pass = r.max_deviation <= r.tolerance;
    return r;
}

inline std::vector<SuiteResult> run_all(const Options& opt) {
    return {anticommutator_suite(opt),  one_rdm_suite(opt),
            mk_identity_suite(opt),     detailed_balance_suite(opt),
            rate_positivity_suite(opt), fd_stationarity_suite(opt),
            trace_preservation_suite(opt), hermiticity_suite(opt),
            diagonal_closure_suite(opt), oracle_equivalence_suite(opt),
            unblocked_textbook_suite(opt)};
}

inline bool all_passed(const std::vector<SuiteResult>& results) {
    for (const auto& r : results) {
        if (!r.pass) return false;
    }
    return true;
}

}  // namespace fermirdm::verify
