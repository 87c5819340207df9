#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "delayosc/classical.hpp"
#include "delayosc/delay_solver.hpp"
#include "delayosc/delayed_exp.hpp"
#include "delayosc/errors.hpp"
#include "delayosc/history.hpp"
#include "delayosc/operator.hpp"
#include "delayosc/quadrature.hpp"
#include "delayosc/types.hpp"

namespace delayosc {

/// The constants of the tau -> 0 estimates:
///   alpha      = 1 + ||Omega|| e^{tau0 ||Omega||}
///   beta(T)    = 2 (1 + ||Omega||)(1 + ||Omega^-1||) e^{alpha (T + 2 tau) ||Omega||}
///   delta(T)   = ||Omega||^2 (2 + ||Omega^-1|| + ||Omega^-1|| T) e^{||Omega|| T}
///   kappa      = 1 + (1 + 2 tau)(1 + ||Omega||^2)
struct BoundsConstants {
    double alpha = 0.0;
    double beta = 0.0;
    double delta = 0.0;
    double kappa = 0.0;
    double tau = 0.0;
    double tau0 = 0.0;
    double T = 0.0;
};

[[nodiscard]] inline BoundsConstants bounds_constants(const Operator& omega, double tau, double tau0,
                                                      double T) {
    if (!(tau > 0.0) || !(tau0 > 0.0) || !(T > 0.0)) {
        throw DomainError("bounds_constants: tau, tau0 and T must be positive");
    }
    BoundsConstants c;
    c.tau = tau;
    c.tau0 = tau0;
    c.T = T;
    const double norm = omega.norm();
    const double inv_norm = omega.inverse().norm();
    c.alpha = 1.0 + norm * std::exp(tau0 * norm);
    c.beta = 2.0 * (1.0 + norm) * (1.0 + inv_norm) * std::exp(c.alpha * (T + 2.0 * tau) * norm);
    c.delta = norm * norm * (2.0 + inv_norm + inv_norm * T) * std::exp(norm * T);
    c.kappa = 1.0 + (1.0 + 2.0 * tau) * (1.0 + norm * norm);
    return c;
}

/// One grid check of a delayed-exponential approximation bound.
struct BoundCheckRow {
    double tau = 0.0;
    double gamma = 0.0;
    double alpha = 0.0;
    double observed = 0.0;
    double bound = 0.0;
    bool satisfied = false;
};

namespace detail {

[[nodiscard]] inline double spectral_norm(const Matrix& m) {
    if (m.isZero(0.0)) {
        return 0.0;
    }
    return Eigen::JacobiSVD<Matrix>(m).singularValues()(0);
}

/// Uniform grid over [a, b] merged with all multiples of tau inside.
[[nodiscard]] inline std::vector<double> supremum_grid(double a, double b, int points, double tau) {
    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(points) + 8);
    for (int i = 0; i <= points; ++i) {
        grid.push_back(a + (b - a) * static_cast<double>(i) / static_cast<double>(points));
    }
    for (long k = static_cast<long>(std::ceil(a / tau)); k * tau <= b; ++k) {
        grid.push_back(static_cast<double>(k) * tau);
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

}  // namespace detail

/// max_t ||exp_tau(t - tau; Omega) - e^{Omega t}|| over a grid on [0, T]
/// against the bound tau e^{alpha T ||Omega||}.
[[nodiscard]] inline BoundCheckRow lemma_check(const Operator& omega, double tau, double tau0, double T,
                                               int grid) {
    if (!(tau > 0.0) || tau > tau0) {
        throw DomainError("lemma_check: requires 0 < tau <= tau0");
    }
    if (grid < 16) {
        throw DomainError("lemma_check: grid must be >= 16");
    }
    const double norm = omega.norm();
    BoundCheckRow row;
    row.tau = tau;
    row.alpha = 1.0 + norm * std::exp(tau0 * norm);
    row.bound = tau * std::exp(row.alpha * T * norm);
    DelayedExpEvaluator ev(omega, tau);
    for (double t : detail::supremum_grid(0.0, T, grid, tau)) {
        const Matrix diff = delayed_exp(ev, t - tau) - matrix_exp(omega, t);
        row.observed = std::max(row.observed, detail::spectral_norm(diff));
    }
    row.satisfied = row.observed <= row.bound * (1.0 + 1e-12);
    return row;
}

/// Shifted variant: max_t ||exp_tau(t + gamma; Omega) - e^{Omega t}||
/// against (gamma + tau)(1 + ||Omega||) e^{alpha (T + gamma + tau) ||Omega||}.
[[nodiscard]] inline BoundCheckRow corollary_check(const Operator& omega, double tau, double tau0,
                                                   double gamma, double T, int grid) {
    if (!(tau > 0.0) || tau > tau0) {
        throw DomainError("corollary_check: requires 0 < tau <= tau0");
    }
    if (gamma < 0.0) {
        throw DomainError("corollary_check: gamma must be nonnegative");
    }
    if (grid < 16) {
        throw DomainError("corollary_check: grid must be >= 16");
    }
    const double norm = omega.norm();
    BoundCheckRow row;
    row.tau = tau;
    row.gamma = gamma;
    row.alpha = 1.0 + norm * std::exp(tau0 * norm);
    row.bound = (gamma + tau) * (1.0 + norm) * std::exp(row.alpha * (T + gamma + tau) * norm);
    DelayedExpEvaluator ev(omega, tau);
    for (double t : detail::supremum_grid(0.0, T, grid, tau)) {
        const Matrix diff = delayed_exp(ev, t + gamma) - matrix_exp(omega, t);
        row.observed = std::max(row.observed, detail::spectral_norm(diff));
    }
    row.satisfied = row.observed <= row.bound * (1.0 + 1e-12);
    return row;
}

/// One tau of a solution-convergence study. sup_error_c0 is the grid sup of
/// the value error; sup_error_c1 the C1 norm (max of value and derivative
/// sups).
struct ConvergenceRow {
    double tau = 0.0;
    double sup_error_c0 = 0.0;
    double sup_error_c1 = 0.0;
    double lemma_bound = 0.0;
    double c0_bound = 0.0;
    double c1_bound = 0.0;
    bool satisfied = false;
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;
    std::optional<double> fitted_slope;
    bool exact_agreement = false;
};

using HistoryBuilder = std::function<HistoryFunction(double tau)>;

/// The default tau-family: phi(t) = x0 + t x1, so phi(-2 tau) - x0 is
/// O(tau) and phi'(0) = x1 exactly.
[[nodiscard]] inline HistoryBuilder linear_consistent_history(const Vector& x0, const Vector& x1) {
    return [x0, x1](double tau) {
        return HistoryFunction::analytic(
            tau, x0.size(), [x0, x1](double t) { return Vector(x0 + t * x1); },
            [x1](double) { return x1; }, [n = x0.size()](double) { return Vector(Vector::Zero(n)); });
    };
}

/// Empirical tau -> 0 study: solves the delay problem for each tau, measures
/// C0/C1 distances to the classical solution on a grid over [0, T], checks
/// both printed bounds and fits the log-log slope of the C0 error.
[[nodiscard]] inline ConvergenceTable solution_convergence_study(const ClassicalProblem& base,
                                                                 std::vector<double> taus,
                                                                 const HistoryBuilder& history_builder,
                                                                 int grid_points, double tau0,
                                                                 const QuadratureRule& rule = {}) {
    if (taus.size() < 3) {
        throw SlopeUndefined("solution_convergence_study: need >= 3 tau values for a slope, got " +
                             std::to_string(taus.size()));
    }
    std::sort(taus.begin(), taus.end(), std::greater<>());
    const double T = base.horizon;

    ConvergenceTable table;
    for (double tau : taus) {
        if (!(tau > 0.0) || tau > tau0) {
            throw DomainError("solution_convergence_study: requires 0 < tau <= tau0 for every tau");
        }
        HistoryFunction phi = history_builder(tau);
        DelayProblem dp(base.omega, tau, phi, base.forcing, T);
        DelaySolver solver(dp, rule);
        const bool classical_route = phi.smoothness() == Smoothness::C2;

        ConvergenceRow row;
        row.tau = tau;
        double deriv_err = 0.0;
        for (double t : detail::supremum_grid(0.0, T, grid_points, tau)) {
            const Vector delay_value = classical_route ? solver.solve_classical(t) : solver.solve_mild(t);
            const Vector delay_deriv =
                classical_route ? solver.velocity_classical(t) : solver.velocity_mild(t);
            row.sup_error_c0 =
                std::max(row.sup_error_c0, (delay_value - classical_solution(base, t, rule)).norm());
            deriv_err = std::max(deriv_err, (delay_deriv - classical_velocity(base, t, rule)).norm());
        }
        row.sup_error_c1 = std::max(row.sup_error_c0, deriv_err);

        if (row.sup_error_c0 < 1e-13 && row.sup_error_c1 < 1e-13) {
            row.lemma_bound = tau;
            row.c0_bound = std::numeric_limits<double>::infinity();
            row.c1_bound = std::numeric_limits<double>::infinity();
            row.satisfied = true;
        } else {
            const BoundsConstants c = bounds_constants(base.omega, tau, tau0, T);
            const double norm = base.omega.norm();
            double phi_c1 = 0.0;
            for (double t : detail::supremum_grid(-2.0 * tau, 0.0, 64, tau)) {
                phi_c1 = std::max(phi_c1, std::max(phi.value(t).norm(), phi.deriv1(t).norm()));
            }
            double f_l1 = 0.0;
            if (!base.forcing.is_zero()) {
                Vector one = integrate(
                    [&](double t) {
                        Vector v(1);
                        v(0) = base.forcing.value(t).norm();
                        return v;
                    },
                    0.0, T, base.forcing.kinks(), rule);
                f_l1 = one(0);
            }
            const double ic_gap =
                (phi.value(-2.0 * tau) - base.x0).norm() + (phi.deriv1(0.0) - base.x1).norm();
            row.lemma_bound = tau * std::exp(c.alpha * T * norm);
            row.c0_bound = 3.0 * c.beta * ic_gap + 3.0 * c.beta * tau * (phi_c1 + f_l1);
            row.c1_bound = 3.0 * (1.0 + c.beta) * (1.0 + c.delta) * (1.0 + T) *
                           (ic_gap + tau * (phi_c1 + f_l1 + base.x0.norm() + base.x1.norm()));
            row.satisfied = row.sup_error_c0 <= row.c0_bound * (1.0 + 1e-12) &&
                            row.sup_error_c1 <= row.c1_bound * (1.0 + 1e-12);
        }
        table.rows.push_back(row);
    }

    std::vector<std::pair<double, double>> points;
    for (const ConvergenceRow& row : table.rows) {
        if (row.sup_error_c0 >= 1e-13) {
            points.emplace_back(std::log(row.tau), std::log(row.sup_error_c0));
        }
    }
    if (points.empty()) {
        table.exact_agreement = true;
    } else if (points.size() >= 2) {
        double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
        for (auto [x, y] : points) {
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        const double n = static_cast<double>(points.size());
        table.fitted_slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    }
    return table;
}

}  // namespace delayosc
