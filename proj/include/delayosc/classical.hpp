#pragma once

#include <cmath>
#include <string>
#include <utility>

#include "delayosc/errors.hpp"
#include "delayosc/history.hpp"
#include "delayosc/operator.hpp"
#include "delayosc/quadrature.hpp"
#include "delayosc/types.hpp"

namespace delayosc {

/// cosh(t Omega) = (e^{t Omega} + e^{-t Omega}) / 2.
[[nodiscard]] inline Matrix cosh_part(const Operator& omega, double t) {
    return 0.5 * (matrix_exp(omega, t) + matrix_exp(omega, -t));
}

/// The Duhamel kernel Omega^{-1} sinh(t Omega), evaluated from the entire
/// even-power series t * sum_k (t Omega)^{2k} / (2k+1)! with argument
/// doubling S(2t) = 2 S(t) C(t). Only even powers of Omega appear, so the
/// kernel is well defined for singular (including zero) Omega.
[[nodiscard]] inline Matrix sinh_kernel(const Operator& omega, double t) {
    if (!std::isfinite(t)) {
        throw NonFiniteInput("sinh_kernel: t = " + std::to_string(t));
    }
    const Index n = omega.dim();
    const double scale = omega.norm() * std::abs(t);
    int doublings = 0;
    while (scale / std::pow(2.0, doublings) > 0.5) {
        ++doublings;
    }
    const double th = t / std::pow(2.0, doublings);
    const Matrix b2 = (th * th) * (omega.entries() * omega.entries());
    Matrix term_c = Matrix::Identity(n, n);
    Matrix c = term_c;
    Matrix term_s = Matrix::Identity(n, n);
    Matrix s_over_t = term_s;
    for (int k = 1; k <= 7; ++k) {
        term_c = (term_c * b2) / static_cast<double>((2 * k - 1) * (2 * k));
        c += term_c;
        term_s = (term_s * b2) / static_cast<double>((2 * k) * (2 * k + 1));
        s_over_t += term_s;
    }
    Matrix s = th * s_over_t;
    for (int j = 0; j < doublings; ++j) {
        Matrix s_next = 2.0 * (s * c);
        c = 2.0 * (c * c) - Matrix::Identity(n, n);
        s = std::move(s_next);
    }
    return s;
}

/// Cauchy problem for the no-delay oscillator xdd - Omega^2 x = f.
struct ClassicalProblem {
    Operator omega;
    Vector x0;
    Vector x1;
    ForcingFunction forcing;
    double horizon;

    ClassicalProblem(Operator omega_in, Vector x0_in, Vector x1_in, ForcingFunction forcing_in,
                     double horizon_in)
        : omega(std::move(omega_in)),
          x0(std::move(x0_in)),
          x1(std::move(x1_in)),
          forcing(std::move(forcing_in)),
          horizon(horizon_in) {
        if (x0.size() != omega.dim() || x1.size() != omega.dim() || forcing.dim() != omega.dim()) {
            throw DomainError("ClassicalProblem: dimension mismatch between omega, x0, x1, forcing");
        }
        if (!(horizon > 0.0) || !std::isfinite(horizon)) {
            throw DomainError("ClassicalProblem: horizon must be positive and finite");
        }
    }
};

namespace detail {
inline void check_classical_time(const ClassicalProblem& p, double t) {
    const double slack = 1e-12 * (1.0 + p.horizon);
    if (t < -slack || t > p.horizon + slack) {
        throw OutOfHorizon("classical solution query at t = " + std::to_string(t) + " outside [0, " +
                           std::to_string(p.horizon) + "]");
    }
}
}  // namespace detail

/// Mild solution cosh(t Omega) x0 + S(t) x1 + int_0^t S(t-s) f(s) ds with
/// S the sinh kernel; the Duhamel integral splits at forcing kinks.
[[nodiscard]] inline Vector classical_solution(const ClassicalProblem& p, double t,
                                               const QuadratureRule& rule = {}) {
    detail::check_classical_time(p, t);
    Vector out = cosh_part(p.omega, t) * p.x0 + sinh_kernel(p.omega, t) * p.x1;
    if (!p.forcing.is_zero() && t > 0.0) {
        out += integrate([&](double s) { return Vector(sinh_kernel(p.omega, t - s) * p.forcing.value(s)); },
                         0.0, t, p.forcing.kinks(), rule);
    }
    return out;
}

/// Time derivative of classical_solution.
[[nodiscard]] inline Vector classical_velocity(const ClassicalProblem& p, double t,
                                               const QuadratureRule& rule = {}) {
    detail::check_classical_time(p, t);
    const Matrix omega2 = p.omega.entries() * p.omega.entries();
    Vector out = omega2 * (sinh_kernel(p.omega, t) * p.x0) + cosh_part(p.omega, t) * p.x1;
    if (!p.forcing.is_zero() && t > 0.0) {
        out += integrate([&](double s) { return Vector(cosh_part(p.omega, t - s) * p.forcing.value(s)); },
                         0.0, t, p.forcing.kinks(), rule);
    }
    return out;
}

}  // namespace delayosc
