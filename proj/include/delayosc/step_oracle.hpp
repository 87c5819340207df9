#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "delayosc/delay_solver.hpp"
#include "delayosc/errors.hpp"
#include "delayosc/history.hpp"
#include "delayosc/operator.hpp"
#include "delayosc/quadrature.hpp"
#include "delayosc/types.hpp"

namespace delayosc {

/// One 2 tau segment of the method-of-steps solution: uniform grid over
/// s in [-2 tau, 0] with values and first derivatives. Segment 0 holds the
/// sampled history; segment n >= 1 starts exactly at the previous segment's
/// endpoint (the matching conditions hold by construction).
struct SegmentSolution {
    int index = 0;
    double tau = 0.0;
    double h = 0.0;
    std::vector<double> s;
    std::vector<Vector> x;
    std::vector<Vector> xdot;
};

/// Per-segment a priori estimate report: observed C1 norms against
/// kappa^n (||phi||_C1 + ||f||_L1).
struct AprioriReport {
    struct Row {
        int n = 0;
        double observed = 0.0;
        double bound = 0.0;
        bool satisfied = false;
    };
    double kappa = 0.0;
    std::vector<Row> per_segment;
    bool all_satisfied = true;
};

namespace detail {

/// Cumulative integral of a grid function with known derivatives:
/// corrected trapezoid h/2 (g_{i-1} + g_i) + h^2/12 (g'_{i-1} - g'_i),
/// local O(h^5), strictly increment-by-increment.
inline std::vector<Vector> cumulative_corrected_trapezoid(const std::vector<Vector>& g,
                                                          const std::vector<Vector>& gdot, double h) {
    std::vector<Vector> out(g.size());
    out[0] = Vector::Zero(g[0].size());
    const double c = h * h / 12.0;
    for (std::size_t i = 1; i < g.size(); ++i) {
        out[i] = out[i - 1] + 0.5 * h * (g[i - 1] + g[i]) + c * (gdot[i - 1] - gdot[i]);
    }
    return out;
}

}  // namespace detail

/// Method-of-steps integration of the mild velocity equation
///   xdot_n(s) = xdot_{n-1}(0) + Omega^2 int_{-2 tau}^s x_{n-1}
///             + int_{2(n-1) tau}^{2 n tau + s} f,
/// then x_n by cumulative quadrature of xdot_n. Independent of the
/// delayed-exponential representation.
[[nodiscard]] inline std::vector<SegmentSolution> integrate_segments(const DelayProblem& p, int n_segments,
                                                                     double h,
                                                                     const QuadratureRule& f_rule = {}) {
    if (n_segments < 1) {
        throw DomainError("integrate_segments: n_segments must be >= 1");
    }
    const double tau = p.tau;
    const double seg_len = 2.0 * tau;
    const double ratio = seg_len / h;
    const auto cells = static_cast<long>(std::llround(ratio));
    if (cells < 2 || std::abs(ratio - static_cast<double>(cells)) > 1e-9) {
        throw GridMismatch("integrate_segments: h = " + std::to_string(h) + " does not divide 2 tau = " +
                           std::to_string(seg_len));
    }
    if (n_segments * seg_len > p.horizon * (1.0 + 1e-12) + 1e-12) {
        throw DomainError("integrate_segments: n_segments * 2 tau exceeds the horizon");
    }
    const auto n_points = static_cast<std::size_t>(cells) + 1;
    const double step = seg_len / static_cast<double>(cells);
    const Matrix omega2 = p.omega.entries() * p.omega.entries();

    std::vector<double> grid(n_points);
    for (std::size_t i = 0; i < n_points; ++i) {
        grid[i] = -seg_len + seg_len * static_cast<double>(i) / static_cast<double>(cells);
    }
    grid.back() = 0.0;

    std::vector<SegmentSolution> segments;
    segments.reserve(static_cast<std::size_t>(n_segments) + 1);

    SegmentSolution seg0;
    seg0.index = 0;
    seg0.tau = tau;
    seg0.h = step;
    seg0.s = grid;
    seg0.x.resize(n_points);
    seg0.xdot.resize(n_points);
    for (std::size_t i = 0; i < n_points; ++i) {
        seg0.x[i] = p.history.value(grid[i]);
        seg0.xdot[i] = p.history.deriv1(grid[i]);
    }
    segments.push_back(std::move(seg0));

    for (int n = 1; n <= n_segments; ++n) {
        const SegmentSolution& prev = segments.back();
        SegmentSolution seg;
        seg.index = n;
        seg.tau = tau;
        seg.h = step;
        seg.s = grid;
        seg.x.resize(n_points);
        seg.xdot.resize(n_points);

        const std::vector<Vector> prev_integral =
            detail::cumulative_corrected_trapezoid(prev.x, prev.xdot, step);

        std::vector<Vector> f_prefix(n_points, Vector::Zero(p.omega.dim()));
        if (!p.forcing.is_zero()) {
            const double t_base = 2.0 * tau * static_cast<double>(n);
            for (std::size_t i = 1; i < n_points; ++i) {
                f_prefix[i] = f_prefix[i - 1] +
                              integrate([&](double t) { return p.forcing.value(t); }, t_base + grid[i - 1],
                                        t_base + grid[i], p.forcing.kinks(), f_rule);
            }
        }

        const Vector& v_anchor = prev.xdot.back();
        for (std::size_t i = 0; i < n_points; ++i) {
            seg.xdot[i] = v_anchor + omega2 * prev_integral[i] + f_prefix[i];
        }

        // x_n by cumulative quadrature of xdot_n; its derivative
        // xdd_n(s) = Omega^2 x_{n-1}(s) + f(2 n tau + s) is known exactly.
        std::vector<Vector> xdd(n_points);
        for (std::size_t i = 0; i < n_points; ++i) {
            xdd[i] = omega2 * prev.x[i];
            if (!p.forcing.is_zero()) {
                xdd[i] += p.forcing.value(2.0 * tau * static_cast<double>(n) + grid[i]);
            }
        }
        const std::vector<Vector> v_integral = detail::cumulative_corrected_trapezoid(seg.xdot, xdd, step);
        const Vector& x_anchor = prev.x.back();
        for (std::size_t i = 0; i < n_points; ++i) {
            seg.x[i] = x_anchor + v_integral[i];
        }
        segments.push_back(std::move(seg));
    }
    return segments;
}

/// Observed-vs-predicted C1 norms per segment. The C1 norm is the grid
/// maximum of max(||x||, ||xdot||).
[[nodiscard]] inline AprioriReport apriori_check(const DelayProblem& p,
                                                 const std::vector<SegmentSolution>& segments,
                                                 const QuadratureRule& rule = {}) {
    if (segments.empty()) {
        throw DomainError("apriori_check: no segments");
    }
    AprioriReport report;
    const double norm = p.omega.norm();
    report.kappa = 1.0 + (1.0 + 2.0 * p.tau) * (1.0 + norm * norm);

    auto c1_norm = [](const SegmentSolution& seg) {
        double m = 0.0;
        for (std::size_t i = 0; i < seg.x.size(); ++i) {
            m = std::max(m, std::max(seg.x[i].norm(), seg.xdot[i].norm()));
        }
        return m;
    };
    const double phi_c1 = c1_norm(segments.front());

    for (const SegmentSolution& seg : segments) {
        if (seg.index == 0) {
            continue;
        }
        double f_l1 = 0.0;
        if (!p.forcing.is_zero()) {
            Vector one = integrate(
                [&](double t) {
                    Vector v(1);
                    v(0) = p.forcing.value(t).norm();
                    return v;
                },
                0.0, 2.0 * p.tau * seg.index, p.forcing.kinks(), rule);
            f_l1 = one(0);
        }
        AprioriReport::Row row;
        row.n = seg.index;
        row.observed = c1_norm(seg);
        row.bound = std::pow(report.kappa, seg.index) * (phi_c1 + f_l1);
        row.satisfied = row.observed <= row.bound * (1.0 + 1e-12) + 1e-12;
        report.all_satisfied = report.all_satisfied && row.satisfied;
        report.per_segment.push_back(row);
    }
    return report;
}

/// Evaluate the stitched method-of-steps trajectory anywhere in
/// [-2 tau, 2 n tau] by cubic Hermite interpolation on the stored grid.
class OracleTrajectory {
public:
    explicit OracleTrajectory(std::vector<SegmentSolution> segments) : segments_(std::move(segments)) {
        if (segments_.empty()) {
            throw DomainError("OracleTrajectory: no segments");
        }
        tau_ = segments_.front().tau;
    }

    [[nodiscard]] double t_max() const {
        return 2.0 * tau_ * static_cast<double>(segments_.size() - 1);
    }

    [[nodiscard]] Vector value(double t) const { return eval(t, 0); }
    [[nodiscard]] Vector deriv(double t) const { return eval(t, 1); }

private:
    [[nodiscard]] Vector eval(double t, int order) const {
        const double seg_len = 2.0 * tau_;
        if (t < -seg_len - 1e-12 * (1.0 + seg_len) || t > t_max() + 1e-12 * (1.0 + t_max())) {
            throw DomainError("OracleTrajectory: t = " + std::to_string(t) + " outside stored range");
        }
        auto n = static_cast<std::size_t>(std::max(0.0, std::ceil(t / seg_len - 1e-12)));
        n = std::min(n, segments_.size() - 1);
        const SegmentSolution& seg = segments_[n];
        const double s = t - seg_len * static_cast<double>(n);
        const auto cells = seg.s.size() - 1;
        auto cell = static_cast<std::size_t>(
            std::max(0.0, std::min(std::floor((s + seg_len) / seg.h), static_cast<double>(cells - 1))));
        const double u = (s - seg.s[cell]) / seg.h;
        const Vector& p0 = seg.x[cell];
        const Vector& p1 = seg.x[cell + 1];
        const Vector m0 = seg.h * seg.xdot[cell];
        const Vector m1 = seg.h * seg.xdot[cell + 1];
        if (order == 0) {
            const double h00 = (1.0 + 2.0 * u) * (1.0 - u) * (1.0 - u);
            const double h10 = u * (1.0 - u) * (1.0 - u);
            const double h01 = u * u * (3.0 - 2.0 * u);
            const double h11 = u * u * (u - 1.0);
            return h00 * p0 + h10 * m0 + h01 * p1 + h11 * m1;
        }
        const double d00 = 6.0 * u * (u - 1.0);
        const double d10 = (1.0 - u) * (1.0 - 3.0 * u);
        const double d11 = u * (3.0 * u - 2.0);
        return (d00 * p0 + d10 * m0 - d00 * p1 + d11 * m1) / seg.h;
    }

    std::vector<SegmentSolution> segments_;
    double tau_ = 0.0;
};

}  // namespace delayosc
