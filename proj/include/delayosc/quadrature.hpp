#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <mutex>
#include <string>
#include <vector>

#include "delayosc/errors.hpp"
#include "delayosc/types.hpp"

namespace delayosc {

enum class QuadScheme { gauss_legendre, simpson };

/// Composite quadrature policy. Cells never straddle supplied knots and
/// are further capped at max_cell_width so long smooth stretches keep
/// spectral accuracy.
struct QuadratureRule {
    QuadScheme scheme = QuadScheme::gauss_legendre;
    int nodes_per_cell = 8;
    double max_cell_width = 0.5;

    void validate() const {
        if (nodes_per_cell < 2 || nodes_per_cell > 64) {
            throw DomainError("QuadratureRule: nodes_per_cell must be in [2, 64], got " +
                              std::to_string(nodes_per_cell));
        }
        if (!(max_cell_width > 0.0)) {
            throw DomainError("QuadratureRule: max_cell_width must be positive");
        }
    }
};

namespace detail {

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on the
/// Legendre recurrence. Results are cached per node count.
inline const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre_table(int n) {
    static std::array<std::once_flag, 65> flags;
    static std::array<std::pair<std::vector<double>, std::vector<double>>, 65> tables;
    std::call_once(flags[static_cast<std::size_t>(n)], [n] {
        std::vector<double> x(static_cast<std::size_t>(n));
        std::vector<double> w(static_cast<std::size_t>(n));
        const int m = (n + 1) / 2;
        for (int i = 0; i < m; ++i) {
            double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
            double pp = 0.0;
            for (int iter = 0; iter < 100; ++iter) {
                double p1 = 1.0;
                double p2 = 0.0;
                for (int j = 1; j <= n; ++j) {
                    const double p3 = p2;
                    p2 = p1;
                    p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
                }
                pp = n * (z * p1 - p2) / (z * z - 1.0);
                const double dz = p1 / pp;
                z -= dz;
                if (std::abs(dz) < 1e-15) {
                    break;
                }
            }
            x[static_cast<std::size_t>(i)] = -z;
            x[static_cast<std::size_t>(n - 1 - i)] = z;
            w[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - z * z) * pp * pp);
            w[static_cast<std::size_t>(n - 1 - i)] = w[static_cast<std::size_t>(i)];
        }
        tables[static_cast<std::size_t>(n)] = {std::move(x), std::move(w)};
    });
    return tables[static_cast<std::size_t>(n)];
}

inline Vector integrate_cell(const std::function<Vector(double)>& g, double a, double b,
                             const QuadratureRule& rule) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    Vector acc;
    auto sample = [&](double t, double weight) {
        Vector v = g(t);
        if (!v.allFinite()) {
            throw NonFiniteValue("integrand returned a non-finite sample at t = " + std::to_string(t));
        }
        if (acc.size() == 0) {
            acc = weight * v;
        } else {
            acc += weight * v;
        }
    };
    if (rule.scheme == QuadScheme::gauss_legendre) {
        const auto& [nodes, weights] = gauss_legendre_table(rule.nodes_per_cell);
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            sample(mid + half * nodes[i], half * weights[i]);
        }
    } else {
        // Composite Simpson inside the cell; force an odd point count >= 3.
        int points = std::max(3, rule.nodes_per_cell);
        if (points % 2 == 0) {
            ++points;
        }
        const int panels = points - 1;
        const double h = (b - a) / panels;
        for (int i = 0; i <= panels; ++i) {
            double w = (i == 0 || i == panels) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
            sample(a + i * h, w * h / 3.0);
        }
    }
    return acc;
}

}  // namespace detail

/// Merge, clamp and deduplicate knots into the open interval (a, b).
inline std::vector<double> clamp_knots(const std::vector<double>& knots, double a, double b) {
    std::vector<double> out;
    for (double k : knots) {
        if (k > a && k < b) {
            out.push_back(k);
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end(),
                          [&](double x, double y) { return std::abs(x - y) < 1e-14 * (1.0 + std::abs(b - a)); }),
              out.end());
    return out;
}

/// Integral of a vector-valued callable over [a, b], split at every knot so
/// no quadrature cell straddles a kink.
inline Vector integrate(const std::function<Vector(double)>& g, double a, double b,
                        const std::vector<double>& knots, const QuadratureRule& rule = {}) {
    rule.validate();
    if (!std::isfinite(a) || !std::isfinite(b)) {
        throw NonFiniteInput("integrate: interval [" + std::to_string(a) + ", " + std::to_string(b) + "]");
    }
    if (a > b) {
        throw InvalidInterval("integrate: a = " + std::to_string(a) + " > b = " + std::to_string(b));
    }
    if (a == b) {
        Vector probe = g(a);
        return Vector::Zero(probe.size());
    }
    std::vector<double> cuts = clamp_knots(knots, a, b);
    cuts.insert(cuts.begin(), a);
    cuts.push_back(b);

    Vector acc;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double lo = cuts[i];
        const double hi = cuts[i + 1];
        if (hi - lo < 1e-15 * (1.0 + std::abs(hi))) {
            continue;
        }
        const int cells = std::max(1, static_cast<int>(std::ceil((hi - lo) / rule.max_cell_width)));
        const double width = (hi - lo) / cells;
        for (int c = 0; c < cells; ++c) {
            Vector part = detail::integrate_cell(g, lo + c * width, lo + (c + 1) * width, rule);
            if (acc.size() == 0) {
                acc = part;
            } else {
                acc += part;
            }
        }
    }
    if (acc.size() == 0) {
        Vector probe = g(a);
        return Vector::Zero(probe.size());
    }
    return acc;
}

}  // namespace delayosc
