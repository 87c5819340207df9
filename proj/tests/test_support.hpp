#pragma once

// Test-only helpers: independent oracles and generators. Everything here is
// deliberately written against the definitions directly (plain powers,
// factorials, segment scans) so it shares no code path with the library
// evaluators it checks.

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "delayosc/types.hpp"

namespace testsupport {

using delayosc::Index;
using delayosc::Matrix;
using delayosc::Vector;

/// Term-by-term symbolic-sum oracle for the delayed exponential: locate the
/// segment by scanning knots, then sum (sign Omega)^j (t - (j-1) tau)^j / j!
/// with explicit pow and long-double factorial, smallest term first.
inline Matrix naive_delayed_exp(const Matrix& omega, double tau, double t, int sign = +1) {
    const Index n = omega.rows();
    if (t < -tau) {
        return Matrix::Zero(n, n);
    }
    int top = 0;
    while (!(t < top * tau)) {
        ++top;
    }
    // t in [(top-1) tau, top tau)
    std::vector<Matrix> terms;
    Matrix power = Matrix::Identity(n, n);
    long double factorial = 1.0L;
    for (int j = 0; j <= top; ++j) {
        if (j > 0) {
            power = power * omega;
            factorial *= j;
        }
        const double base = t - (j - 1) * tau;
        const double coeff = static_cast<double>(std::pow(static_cast<long double>(base), j) / factorial);
        const double s = (sign < 0 && j % 2 == 1) ? -1.0 : 1.0;
        terms.push_back(s * coeff * power);
    }
    Matrix acc = Matrix::Zero(n, n);
    for (auto it = terms.rbegin(); it != terms.rend(); ++it) {
        acc += *it;
    }
    return acc;
}

/// Derivative of order `order` of the segment polynomial with top index
/// `top`, evaluated at t. Used for one-sided limits at knots, where the
/// segment index is chosen explicitly rather than from t.
inline Matrix segment_poly_derivative(const Matrix& omega, double tau, double t, int sign, int top,
                                      int order) {
    const Index n = omega.rows();
    Matrix acc = Matrix::Zero(n, n);
    Matrix power = Matrix::Identity(n, n);
    long double factorial = 1.0L;
    for (int j = 0; j <= top; ++j) {
        if (j > 0) {
            power = power * omega;
            factorial *= j;
        }
        if (j < order) {
            continue;
        }
        long double falling = 1.0L;
        for (int d = 0; d < order; ++d) {
            falling *= (j - d);
        }
        const double base = t - (j - 1) * tau;
        const double coeff =
            static_cast<double>(falling * std::pow(static_cast<long double>(base), j - order) / factorial);
        const double s = (sign < 0 && j % 2 == 1) ? -1.0 : 1.0;
        acc += s * coeff * power;
    }
    return acc;
}

inline double spectral_norm(const Matrix& m) {
    if (m.isZero(0.0)) {
        return 0.0;
    }
    return Eigen::JacobiSVD<Matrix>(m).singularValues()(0);
}

/// Random dense matrix rescaled to a prescribed spectral norm.
inline Matrix random_matrix_with_norm(std::mt19937& rng, Index n, double norm) {
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    Matrix m(n, n);
    do {
        for (Index r = 0; r < n; ++r) {
            for (Index c = 0; c < n; ++c) {
                m(r, c) = unit(rng);
            }
        }
    } while (spectral_norm(m) < 1e-3);
    return m * (norm / spectral_norm(m));
}

inline Vector random_vector(std::mt19937& rng, Index n, double scale = 1.0) {
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    Vector v(n);
    for (Index i = 0; i < n; ++i) {
        v(i) = scale * unit(rng);
    }
    return v;
}

inline Vector central_second_difference(const std::function<Vector(double)>& f, double t, double h) {
    return (f(t + h) - 2.0 * f(t) + f(t - h)) / (h * h);
}

inline Vector central_first_difference(const std::function<Vector(double)>& f, double t, double h) {
    return (f(t + h) - f(t - h)) / (2.0 * h);
}

/// One-sided finite-difference estimate of the j-th derivative from j+1
/// equispaced samples starting at `start` with step `step` (signed), via
/// divided differences: f[x0..xj] * j!.
inline Matrix one_sided_derivative(const std::function<Matrix(double)>& f, double start, double step,
                                   int order) {
    std::vector<Matrix> table;
    table.reserve(static_cast<std::size_t>(order) + 1);
    for (int i = 0; i <= order; ++i) {
        table.push_back(f(start + i * step));
    }
    for (int level = 1; level <= order; ++level) {
        for (int i = 0; i <= order - level; ++i) {
            table[static_cast<std::size_t>(i)] =
                (table[static_cast<std::size_t>(i + 1)] - table[static_cast<std::size_t>(i)]) /
                (level * step);
        }
    }
    double factorial = 1.0;
    for (int i = 2; i <= order; ++i) {
        factorial *= i;
    }
    return factorial * table[0];
}

}  // namespace testsupport
