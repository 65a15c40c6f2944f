// integrator.hpp — adaptive Runge-Kutta-Fehlberg 4(5) propagation with
// mixed absolute/relative error control, invariant guards, and
// equilibration detection; fixed-step variant for order studies

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "fermirdm/density.hpp"

namespace fermirdm::integrator {

struct IntegratorConfig {
    double rtol{1e-8};
    double atol{1e-10};
    double initial_step{1.0};   // au time
    double min_step{1e-10};
    double max_step{1e7};
    double safety{0.9};
    long max_steps{5000000};
    bool rehermitize{false};    // off by default so drift is measured, not masked

    // invariant guards applied on accepted steps
    bool check_trace{true};
    double trace_abort{1e-6};
    bool check_occupations{true};
    double occupation_abort{1e-6};

    // stop once |rhs|_inf < stationarity_rel * max(initial |rhs|_inf, rate_scale_hint);
    // 0 disables equilibration detection
    double stationarity_rel{1e-12};
    double rate_scale_hint{0.0};

    void validate() const {
        if (rtol <= 0.0 || atol <= 0.0) {
            throw std::invalid_argument("IntegratorConfig: tolerances must be > 0");
        }
        if (min_step >= max_step) {
            throw std::invalid_argument("IntegratorConfig: min_step must be < max_step");
        }
    }
};

struct StepResult {
    Eigen::MatrixXcd state;  // fifth-order advance
    double error;            // scaled norm; acceptable when <= 1
};

struct InvariantViolation : std::runtime_error {
    double time;
    InvariantViolation(const std::string& what, double t)
        : std::runtime_error(what + " at t = " + std::to_string(t)), time(t) {}
};

enum class StopReason { stationary, time_limit };

struct PropagationStats {
    StopReason stop{StopReason::time_limit};
    double final_time{0.0};
    long steps_accepted{0};
    long steps_rejected{0};
    double max_trace_drift{0.0};
    double max_hermiticity_residual{0.0};
    double min_occupation{std::numeric_limits<double>::infinity()};
    double max_occupation{-std::numeric_limits<double>::infinity()};
    double max_accepted_error{0.0};
    double initial_rhs_norm{0.0};
    double stationarity_threshold{0.0};
};

namespace detail {

inline double scaled_error(const Eigen::MatrixXcd& delta, const Eigen::MatrixXcd& y_old,
                           const Eigen::MatrixXcd& y_new, double rtol, double atol) {
    double err = 0.0;
    for (Eigen::Index j = 0; j < delta.cols(); ++j) {
        for (Eigen::Index i = 0; i < delta.rows(); ++i) {
            const double scale =
                atol + rtol * std::max(std::abs(y_old(i, j)), std::abs(y_new(i, j)));
            err = std::max(err, std::abs(delta(i, j)) / scale);
        }
    }
    return err;
}

// Classical Fehlberg tableau; the returned state is the fifth-order
// solution (local extrapolation), the error estimate is |y5 - y4|.
template <class Rhs>
StepResult rkf45_step_from_k1(const Eigen::MatrixXcd& y, double t, double h,
                              const Eigen::MatrixXcd& k1, Rhs&& rhs, double rtol, double atol) {
    const Eigen::MatrixXcd k2 = rhs(t + h / 4.0, y + (h / 4.0) * k1);
    const Eigen::MatrixXcd k3 =
        rhs(t + 3.0 * h / 8.0, y + h * (3.0 / 32.0 * k1 + 9.0 / 32.0 * k2));
    const Eigen::MatrixXcd k4 =
        rhs(t + 12.0 * h / 13.0,
            y + h * (1932.0 / 2197.0 * k1 - 7200.0 / 2197.0 * k2 + 7296.0 / 2197.0 * k3));
    const Eigen::MatrixXcd k5 =
        rhs(t + h, y + h * (439.0 / 216.0 * k1 - 8.0 * k2 + 3680.0 / 513.0 * k3 -
                            845.0 / 4104.0 * k4));
    const Eigen::MatrixXcd k6 =
        rhs(t + h / 2.0, y + h * (-8.0 / 27.0 * k1 + 2.0 * k2 - 3544.0 / 2565.0 * k3 +
                                  1859.0 / 4104.0 * k4 - 11.0 / 40.0 * k5));

    StepResult result;
    result.state = y + h * (16.0 / 135.0 * k1 + 6656.0 / 12825.0 * k3 +
                            28561.0 / 56430.0 * k4 - 9.0 / 50.0 * k5 + 2.0 / 55.0 * k6);
    const Eigen::MatrixXcd y4 = y + h * (25.0 / 216.0 * k1 + 1408.0 / 2565.0 * k3 +
                                         2197.0 / 4104.0 * k4 - 1.0 / 5.0 * k5);
    if (!result.state.allFinite()) {
        result.error = std::numeric_limits<double>::infinity();
        return result;
    }
    result.error = scaled_error(result.state - y4, y, result.state, rtol, atol);
    return result;
}

}  // namespace detail

template <class Rhs>
StepResult rkf45_step(const Eigen::MatrixXcd& y, double t, double h, Rhs&& rhs, double rtol,
                      double atol) {
    if (!y.allFinite()) {
        throw InvariantViolation("rkf45_step: non-finite state", t);
    }
    const Eigen::MatrixXcd k1 = rhs(t, y);
    return detail::rkf45_step_from_k1(y, t, h, k1, rhs, rtol, atol);
}

// Fixed-step fifth-order advance over [t0, t1]; no error control.
template <class Rhs>
Eigen::MatrixXcd integrate_fixed(Eigen::MatrixXcd y, double t0, double t1, long n_steps,
                                 Rhs&& rhs) {
    const double h = (t1 - t0) / static_cast<double>(n_steps);
    double t = t0;
    for (long k = 0; k < n_steps; ++k) {
        const Eigen::MatrixXcd k1 = rhs(t, y);
        y = detail::rkf45_step_from_k1(y, t, h, k1, rhs, 1.0, 1.0).state;
        t = t0 + static_cast<double>(k + 1) * h;
    }
    return y;
}

// Adaptive accept/reject loop. The observer is called with (t, state) at t0,
// then on accepted steps whenever at least `cadence` time has elapsed since
// the previous sample, and once more with the final state. Aborts with
// InvariantViolation on trace drift, occupation excursions, or step-size
// underflow; gamma is updated in place.
template <class Rhs, class Observer>
PropagationStats propagate(Eigen::MatrixXcd& gamma, double t0, double t_max,
                           const IntegratorConfig& config, Rhs&& rhs, Observer&& observer,
                           double cadence = 0.0) {
    config.validate();
    if (!gamma.allFinite()) throw InvariantViolation("propagate: non-finite initial state", t0);

    PropagationStats stats;
    const double trace0 = gamma.trace().real();
    double t = t0;
    double h = std::clamp(config.initial_step, config.min_step, config.max_step);

    Eigen::MatrixXcd k1 = rhs(t, gamma);
    stats.initial_rhs_norm = k1.cwiseAbs().maxCoeff();
    stats.stationarity_threshold =
        config.stationarity_rel * std::max(stats.initial_rhs_norm, config.rate_scale_hint);

    auto track_state = [&](double when) {
        const double drift = std::abs(gamma.trace().real() - trace0);
        stats.max_trace_drift = std::max(stats.max_trace_drift, drift);
        if (config.check_trace && drift > config.trace_abort) {
            throw InvariantViolation("trace drift " + std::to_string(drift), when);
        }
        stats.max_hermiticity_residual =
            std::max(stats.max_hermiticity_residual, hermiticity_residual(gamma));
        const auto bounds = occupation_bounds(gamma);
        stats.min_occupation = std::min(stats.min_occupation, bounds.min_eigenvalue);
        stats.max_occupation = std::max(stats.max_occupation, bounds.max_eigenvalue);
        if (config.check_occupations &&
            (bounds.min_eigenvalue < -config.occupation_abort ||
             bounds.max_eigenvalue > 1.0 + config.occupation_abort)) {
            throw InvariantViolation("occupation eigenvalue outside [0,1]: [" +
                                         std::to_string(bounds.min_eigenvalue) + ", " +
                                         std::to_string(bounds.max_eigenvalue) + "]",
                                     when);
        }
    };

    track_state(t);
    observer(t, gamma);
    double last_sample = t;

    if (config.stationarity_rel > 0.0 && stats.initial_rhs_norm < stats.stationarity_threshold) {
        stats.stop = StopReason::stationary;
        stats.final_time = t;
        return stats;
    }

    const double t_end_guard = t_max - 1e-12 * std::max(1.0, std::abs(t_max));
    long attempts = 0;
    while (t < t_end_guard) {
        if (++attempts > config.max_steps) {
            throw InvariantViolation("maximum step count exceeded", t);
        }
        const double h_try = std::min(h, t_max - t);
        StepResult trial = detail::rkf45_step_from_k1(gamma, t, h_try, k1, rhs, config.rtol,
                                                      config.atol);

        if (trial.error <= 1.0) {
            t += h_try;
            gamma = std::move(trial.state);
            if (config.rehermitize) gamma = 0.5 * (gamma + gamma.adjoint().eval());
            ++stats.steps_accepted;
            stats.max_accepted_error = std::max(stats.max_accepted_error, trial.error);
            track_state(t);

            if (cadence <= 0.0 || t - last_sample >= cadence) {
                observer(t, gamma);
                last_sample = t;
            }

            k1 = rhs(t, gamma);
            if (config.stationarity_rel > 0.0 &&
                k1.cwiseAbs().maxCoeff() < stats.stationarity_threshold) {
                stats.stop = StopReason::stationary;
                break;
            }
        } else {
            ++stats.steps_rejected;
        }

        double factor = config.safety *
                        (trial.error > 0.0 ? std::pow(trial.error, -0.2)
                                           : 5.0 / config.safety);
        factor = std::clamp(factor, 0.2, 5.0);
        h = std::clamp(h_try * factor, config.min_step, config.max_step);
        if (trial.error > 1.0 && h <= config.min_step) {
            throw InvariantViolation("step size underflow (error estimate " +
                                         std::to_string(trial.error) + ")",
                                     t);
        }
    }

    stats.final_time = t;
    if (t > last_sample) observer(t, gamma);
    return stats;
}

}  // namespace fermirdm::integrator
