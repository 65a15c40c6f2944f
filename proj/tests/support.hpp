// support.hpp — test-side oracles, independent of the library code paths
// they are used to check

#pragma once

#include <cmath>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>

namespace testsupport {

// Symmetric eigenvalues by plain QR iteration with Wilkinson shifts and
// deflation (Givens rotations, no Eigen solver involved). Good enough for
// the small dense matrices the tests feed it.
inline Eigen::VectorXd qr_iteration_eigenvalues(Eigen::MatrixXd a, int max_sweeps = 100000) {
    const int n = static_cast<int>(a.rows());
    int m = n;
    int sweeps = 0;
    while (m > 1) {
        // deflate rows whose subdiagonal has converged
        while (m > 1) {
            double off = 0.0;
            for (int j = 0; j < m - 1; ++j) off = std::max(off, std::abs(a(m - 1, j)));
            if (off <= 1e-14 * (std::abs(a(m - 1, m - 1)) + std::abs(a(m - 2, m - 2)) + 1e-300)) {
                --m;
            } else {
                break;
            }
        }
        if (m <= 1) break;
        if (++sweeps > max_sweeps) {
            throw std::runtime_error("qr_iteration_eigenvalues: no convergence");
        }

        const double amm = a(m - 1, m - 1);
        const double am1 = a(m - 2, m - 2);
        const double b = a(m - 1, m - 2);
        const double d = 0.5 * (am1 - amm);
        const double sign = d >= 0.0 ? 1.0 : -1.0;
        const double mu = amm - sign * b * b / (std::abs(d) + std::hypot(d, b));

        Eigen::MatrixXd r = a.topLeftCorner(m, m);
        for (int k = 0; k < m; ++k) r(k, k) -= mu;
        Eigen::MatrixXd q = Eigen::MatrixXd::Identity(m, m);
        for (int j = 0; j < m; ++j) {
            for (int i = j + 1; i < m; ++i) {
                const double x = r(j, j);
                const double y = r(i, j);
                if (std::abs(y) < 1e-300) continue;
                const double norm = std::hypot(x, y);
                const double c = x / norm;
                const double s = y / norm;
                const Eigen::RowVectorXd rj = r.row(j);
                const Eigen::RowVectorXd ri = r.row(i);
                r.row(j) = c * rj + s * ri;
                r.row(i) = -s * rj + c * ri;
                const Eigen::VectorXd qj = q.col(j);
                const Eigen::VectorXd qi = q.col(i);
                q.col(j) = c * qj + s * qi;
                q.col(i) = -s * qj + c * qi;
            }
        }
        a.topLeftCorner(m, m) = r * q;
        for (int k = 0; k < m; ++k) a(k, k) += mu;
    }
    Eigen::VectorXd lams = a.diagonal();
    std::sort(lams.data(), lams.data() + lams.size());
    return lams;
}

inline Eigen::MatrixXd random_symmetric(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = gauss(rng);
    return 0.5 * (a + a.transpose());
}

}  // namespace testsupport
