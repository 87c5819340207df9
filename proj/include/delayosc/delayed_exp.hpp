#pragma once

#include <atomic>
#include <cmath>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <string>

#include "delayosc/errors.hpp"
#include "delayosc/operator.hpp"
#include "delayosc/types.hpp"

namespace delayosc {

/// Evaluation refuses arguments beyond this many delay intervals; the term
/// count (and every bound constant downstream) explodes long before memory
/// or overflow become an issue, so this is a scope guard, not a numerical
/// limit.
inline constexpr int kMaxHorizonMultiples = 128;

/// Knot-aware evaluator for the delayed exponential exp_tau(.; Omega) and
/// the fundamental solutions built from it.
///
/// Piecewise structure: exp_tau is the zero operator below -tau, the
/// identity on [-tau, 0), and gains one polynomial term
/// Omega^j (t - (j-1) tau)^j / j! per delay interval. All evaluators return
/// the right-hand limit at knots.
///
/// The power cache Omega^k grows on demand; growth is mutex-guarded and
/// published with release semantics, so concurrent queries are safe.
class DelayedExpEvaluator {
public:
    DelayedExpEvaluator(Operator omega, double tau) : omega_(std::move(omega)), tau_(tau) {
        if (!(tau > 0.0) || !std::isfinite(tau)) {
            throw DomainError("DelayedExpEvaluator: tau must be positive and finite");
        }
        if (!omega_.has_finite_entries()) {
            throw NonFiniteInput("DelayedExpEvaluator: operator has non-finite entries");
        }
        powers_.push_back(Matrix::Identity(omega_.dim(), omega_.dim()));
        ready_.store(1, std::memory_order_release);
    }

    DelayedExpEvaluator(const DelayedExpEvaluator&) = delete;
    DelayedExpEvaluator& operator=(const DelayedExpEvaluator&) = delete;

    [[nodiscard]] const Operator& omega() const { return omega_; }
    [[nodiscard]] double tau() const { return tau_; }
    [[nodiscard]] Index dim() const { return omega_.dim(); }

    /// Omega^k, cached. References stay valid while the evaluator lives.
    [[nodiscard]] const Matrix& power(int k) const {
        const auto want = static_cast<std::size_t>(k) + 1;
        if (ready_.load(std::memory_order_acquire) < want) {
            std::lock_guard<std::mutex> lock(grow_mutex_);
            while (powers_.size() < want) {
                powers_.push_back(powers_.back() * omega_.entries());
            }
            ready_.store(powers_.size(), std::memory_order_release);
        }
        return powers_[static_cast<std::size_t>(k)];
    }

    void check_horizon(double t) const {
        if (!std::isfinite(t)) {
            throw NonFiniteInput("delayed exponential: t = " + std::to_string(t));
        }
        if (t > kMaxHorizonMultiples * tau_) {
            throw ExcessiveHorizon("delayed exponential: t = " + std::to_string(t) + " exceeds " +
                                   std::to_string(kMaxHorizonMultiples) + " * tau");
        }
    }

private:
    Operator omega_;
    double tau_;
    mutable std::deque<Matrix> powers_;
    mutable std::atomic<std::size_t> ready_{0};
    mutable std::mutex grow_mutex_;
};

/// exp_tau(t; sign * Omega): zero below -tau, then the segment polynomial
/// with top index k = floor(t / tau) + 1. Each term coefficient
/// (t - (j-1) tau)^j / j! is accumulated as a running product u/1 * u/2 * ...
/// so no explicit factorial or power is ever formed.
[[nodiscard]] inline Matrix delayed_exp(const DelayedExpEvaluator& ev, double t, int sign = +1) {
    ev.check_horizon(t);
    const Index n = ev.dim();
    const double tau = ev.tau();
    if (t < -tau) {
        return Matrix::Zero(n, n);
    }
    const int top = static_cast<int>(std::floor(t / tau)) + 1;
    Matrix acc = Matrix::Identity(n, n);
    for (int j = 1; j <= top; ++j) {
        const double u = t - (j - 1) * tau;
        double coeff = 1.0;
        for (int i = 1; i <= j; ++i) {
            coeff *= u / i;
        }
        if (sign < 0 && (j % 2 == 1)) {
            coeff = -coeff;
        }
        acc += coeff * ev.power(j);
    }
    return acc;
}

/// d^order/dt^order exp_tau(t; sign * Omega) = (sign * Omega)^order *
/// exp_tau(t - order * tau; sign * Omega); right-hand limit at knots.
[[nodiscard]] inline Matrix delayed_exp_derivative(const DelayedExpEvaluator& ev, double t, int sign,
                                                   int order) {
    if (order != 1 && order != 2) {
        throw DomainError("delayed_exp_derivative: order must be 1 or 2, got " + std::to_string(order));
    }
    ev.check_horizon(t);
    Matrix shifted = delayed_exp(ev, t - order * ev.tau(), sign);
    Matrix result = ev.power(order) * shifted;
    if (sign < 0 && order == 1) {
        result = -result;
    }
    return result;
}

/// First fundamental solution x1_tau(t; Omega), evaluated from its explicit
/// even-power expansion so the symmetry in Omega is structural. Zero below
/// -tau, identity on [-tau, tau).
[[nodiscard]] inline Matrix fundamental_x1(const DelayedExpEvaluator& ev, double t) {
    ev.check_horizon(t);
    const Index n = ev.dim();
    const double tau = ev.tau();
    if (t < -tau) {
        return Matrix::Zero(n, n);
    }
    const int top = std::max(0, static_cast<int>(std::floor(0.5 * (t / tau + 1.0))));
    Matrix acc = Matrix::Identity(n, n);
    for (int m = 1; m <= top; ++m) {
        const double u = t - (2 * m - 1) * tau;
        double coeff = 1.0;
        for (int i = 1; i <= 2 * m; ++i) {
            coeff *= u / i;
        }
        acc += coeff * ev.power(2 * m);
    }
    return acc;
}

/// Second fundamental solution x2_tau(t; Omega) from the odd-degree
/// even-power expansion; no inverse of Omega is required. Zero for t < 0,
/// t * identity on [0, 2 tau].
[[nodiscard]] inline Matrix fundamental_x2(const DelayedExpEvaluator& ev, double t) {
    ev.check_horizon(t);
    const Index n = ev.dim();
    const double tau = ev.tau();
    if (t < 0.0) {
        return Matrix::Zero(n, n);
    }
    const int top = static_cast<int>(std::floor(t / (2.0 * tau)));
    Matrix acc = t * Matrix::Identity(n, n);
    for (int m = 1; m <= top; ++m) {
        const double u = t - 2 * m * tau;
        double coeff = 1.0;
        for (int i = 1; i <= 2 * m + 1; ++i) {
            coeff *= u / i;
        }
        acc += coeff * ev.power(2 * m);
    }
    return acc;
}

/// d/dt x1_tau(t; Omega) = Omega^2 x2_tau(t - tau; Omega).
[[nodiscard]] inline Matrix fundamental_x1_derivative(const DelayedExpEvaluator& ev, double t) {
    return ev.power(2) * fundamental_x2(ev, t - ev.tau());
}

/// d/dt x2_tau(t; Omega) = x1_tau(t - tau; Omega).
[[nodiscard]] inline Matrix fundamental_x2_derivative(const DelayedExpEvaluator& ev, double t) {
    return fundamental_x1(ev, t - ev.tau());
}

/// The pair (x1, x2) backed by one shared evaluator.
struct FundamentalPair {
    std::function<Matrix(double)> x1_eval;
    std::function<Matrix(double)> x2_eval;
};

[[nodiscard]] inline FundamentalPair make_fundamental_pair(std::shared_ptr<DelayedExpEvaluator> ev) {
    FundamentalPair pair;
    pair.x1_eval = [ev](double t) { return fundamental_x1(*ev, t); };
    pair.x2_eval = [ev](double t) { return fundamental_x2(*ev, t); };
    return pair;
}

}  // namespace delayosc
