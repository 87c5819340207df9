#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "delayosc/errors.hpp"
#include "delayosc/types.hpp"

namespace delayosc {

enum class Smoothness { C1, C2 };
enum class ForcingContinuity { C0, L1 };

using VectorFn = std::function<Vector(double)>;

/// Initial function phi on [-2 tau, 0] with derivatives up to order 2.
///
/// Analytic histories carry callables; sampled histories carry a uniform
/// grid of (value, deriv1) pairs joined by cubic Hermite interpolation,
/// whose second derivative is piecewise linear with jumps at the sample
/// nodes (exposed through sample_knots so quadrature can split there).
class HistoryFunction {
public:
    static HistoryFunction analytic(double tau, Index dim, VectorFn value, VectorFn deriv1,
                                    VectorFn deriv2 = nullptr) {
        HistoryFunction h;
        h.tau_ = check_tau(tau);
        h.dim_ = dim;
        h.value_ = std::move(value);
        h.deriv1_ = std::move(deriv1);
        h.deriv2_ = std::move(deriv2);
        h.smoothness_ = h.deriv2_ ? Smoothness::C2 : Smoothness::C1;
        return h;
    }

    /// Uniform samples over [-2 tau, 0]: values[i], derivs[i] at
    /// t_i = -2 tau + i * spacing. Requires >= 5 points and spacing <= tau/2.
    static HistoryFunction sampled(double tau, std::vector<Vector> values, std::vector<Vector> derivs) {
        HistoryFunction h;
        h.tau_ = check_tau(tau);
        if (values.size() < 5) {
            throw DomainError("sampled history needs at least 5 grid points, got " +
                              std::to_string(values.size()));
        }
        if (values.size() != derivs.size()) {
            throw DomainError("sampled history: values and derivs must have equal length");
        }
        h.dim_ = values.front().size();
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (values[i].size() != h.dim_ || derivs[i].size() != h.dim_) {
                throw DomainError("sampled history: inconsistent sample dimension at index " +
                                  std::to_string(i));
            }
        }
        h.samples_ = std::move(values);
        h.sample_derivs_ = std::move(derivs);
        h.spacing_ = 2.0 * tau / static_cast<double>(h.samples_.size() - 1);
        if (h.spacing_ > tau / 2.0 + 1e-12 * tau) {
            throw DomainError("sampled history: grid spacing " + std::to_string(h.spacing_) +
                              " exceeds tau/2");
        }
        // Hermite phi'' exists piecewise; the classical representation may
        // use it with quadrature split at the sample nodes.
        h.smoothness_ = Smoothness::C2;
        return h;
    }

    [[nodiscard]] double tau() const { return tau_; }
    [[nodiscard]] Index dim() const { return dim_; }
    [[nodiscard]] Smoothness smoothness() const { return smoothness_; }
    [[nodiscard]] bool is_sampled() const { return !samples_.empty(); }

    [[nodiscard]] Vector value(double t) const {
        const double s = clamp_domain(t);
        if (is_sampled()) {
            return hermite(s, 0);
        }
        return value_(s);
    }

    [[nodiscard]] Vector deriv1(double t) const {
        const double s = clamp_domain(t);
        if (is_sampled()) {
            return hermite(s, 1);
        }
        return deriv1_(s);
    }

    [[nodiscard]] Vector deriv2(double t) const {
        if (smoothness_ != Smoothness::C2) {
            throw SmoothnessError("history provides no second derivative (smoothness C1)");
        }
        const double s = clamp_domain(t);
        if (is_sampled()) {
            return hermite(s, 2);
        }
        return deriv2_(s);
    }

    /// Interior quadrature knots: sample nodes for sampled histories.
    [[nodiscard]] std::vector<double> sample_knots() const {
        std::vector<double> knots;
        if (is_sampled()) {
            for (std::size_t i = 1; i + 1 < samples_.size(); ++i) {
                knots.push_back(-2.0 * tau_ + static_cast<double>(i) * spacing_);
            }
        }
        return knots;
    }

private:
    static double check_tau(double tau) {
        if (!(tau > 0.0) || !std::isfinite(tau)) {
            throw DomainError("history: tau must be positive and finite");
        }
        return tau;
    }

    [[nodiscard]] double clamp_domain(double t) const {
        const double slack = 1e-9 * (1.0 + 2.0 * tau_);
        if (t < -2.0 * tau_ - slack || t > slack) {
            throw DomainError("history query at t = " + std::to_string(t) + " outside [-2 tau, 0]");
        }
        return std::min(0.0, std::max(-2.0 * tau_, t));
    }

    [[nodiscard]] Vector hermite(double t, int order) const {
        const double offset = t + 2.0 * tau_;
        auto cell = static_cast<std::ptrdiff_t>(std::floor(offset / spacing_));
        cell = std::max<std::ptrdiff_t>(0, std::min<std::ptrdiff_t>(cell, static_cast<std::ptrdiff_t>(samples_.size()) - 2));
        const double u = (offset - static_cast<double>(cell) * spacing_) / spacing_;
        const auto i = static_cast<std::size_t>(cell);
        const Vector& p0 = samples_[i];
        const Vector& p1 = samples_[i + 1];
        const Vector m0 = spacing_ * sample_derivs_[i];
        const Vector m1 = spacing_ * sample_derivs_[i + 1];
        switch (order) {
            case 0: {
                const double h00 = (1.0 + 2.0 * u) * (1.0 - u) * (1.0 - u);
                const double h10 = u * (1.0 - u) * (1.0 - u);
                const double h01 = u * u * (3.0 - 2.0 * u);
                const double h11 = u * u * (u - 1.0);
                return h00 * p0 + h10 * m0 + h01 * p1 + h11 * m1;
            }
            case 1: {
                const double d00 = 6.0 * u * (u - 1.0);
                const double d10 = (1.0 - u) * (1.0 - 3.0 * u);
                const double d01 = -d00;
                const double d11 = u * (3.0 * u - 2.0);
                return (d00 * p0 + d10 * m0 + d01 * p1 + d11 * m1) / spacing_;
            }
            default: {
                const double s00 = 12.0 * u - 6.0;
                const double s10 = 6.0 * u - 4.0;
                const double s01 = -s00;
                const double s11 = 6.0 * u - 2.0;
                return (s00 * p0 + s10 * m0 + s01 * p1 + s11 * m1) / (spacing_ * spacing_);
            }
        }
    }

    double tau_ = 0.0;
    Index dim_ = 0;
    Smoothness smoothness_ = Smoothness::C1;
    VectorFn value_;
    VectorFn deriv1_;
    VectorFn deriv2_;
    std::vector<Vector> samples_;
    std::vector<Vector> sample_derivs_;
    double spacing_ = 0.0;
};

/// Right-hand side f on [0, T] with its known non-smooth points.
class ForcingFunction {
public:
    static ForcingFunction zero(Index dim) {
        ForcingFunction f;
        f.dim_ = dim;
        f.zero_ = true;
        f.fn_ = [dim](double) { return Vector::Zero(dim); };
        return f;
    }

    static ForcingFunction from(Index dim, VectorFn fn, std::vector<double> kink_times = {},
                                ForcingContinuity continuity = ForcingContinuity::C0) {
        ForcingFunction f;
        f.dim_ = dim;
        f.fn_ = std::move(fn);
        f.kinks_ = std::move(kink_times);
        std::sort(f.kinks_.begin(), f.kinks_.end());
        f.continuity_ = continuity;
        return f;
    }

    [[nodiscard]] Index dim() const { return dim_; }
    [[nodiscard]] bool is_zero() const { return zero_; }
    [[nodiscard]] const std::vector<double>& kinks() const { return kinks_; }
    [[nodiscard]] ForcingContinuity continuity() const { return continuity_; }

    [[nodiscard]] Vector value(double t) const { return fn_(t); }

private:
    Index dim_ = 0;
    bool zero_ = false;
    VectorFn fn_;
    std::vector<double> kinks_;
    ForcingContinuity continuity_ = ForcingContinuity::C0;
};

}  // namespace delayosc
