#pragma once

#include <cmath>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "delayosc/errors.hpp"
#include "delayosc/types.hpp"

namespace delayosc {

/// Dense square operator on R^n with lazily cached spectral norm and inverse.
///
/// The entries are immutable after construction; copies share the cache
/// block, so the norm and inverse are computed at most once per value.
/// Cache population is guarded by a mutex and therefore safe to trigger
/// from several threads.
class Operator {
public:
    explicit Operator(Matrix entries) : entries_(std::move(entries)), cache_(std::make_shared<Cache>()) {
        if (entries_.rows() != entries_.cols()) {
            throw DomainError("Operator requires a square matrix, got " + std::to_string(entries_.rows()) +
                              "x" + std::to_string(entries_.cols()));
        }
        if (entries_.size() == 0) {
            throw DomainError("Operator requires dimension >= 1");
        }
    }

    static Operator identity(Index n) { return Operator(Matrix::Identity(n, n)); }
    static Operator zero(Index n) { return Operator(Matrix::Zero(n, n)); }
    static Operator diagonal(const Vector& d) { return Operator(Matrix(d.asDiagonal())); }

    [[nodiscard]] Index dim() const { return entries_.rows(); }
    [[nodiscard]] const Matrix& entries() const { return entries_; }

    [[nodiscard]] bool has_finite_entries() const { return entries_.allFinite(); }

    /// Induced Euclidean 2-norm (largest singular value).
    [[nodiscard]] double norm() const {
        std::lock_guard<std::mutex> lock(cache_->mutex);
        return norm_locked();
    }

    /// Inverse via full-pivot LU. Throws SingularOperator when a pivot
    /// magnitude falls below 1e-12 * ||A||.
    [[nodiscard]] const Operator& inverse() const {
        std::lock_guard<std::mutex> lock(cache_->mutex);
        if (!cache_->inverse) {
            const double norm = norm_locked();
            if (norm == 0.0) {
                throw SingularOperator("zero operator has no inverse");
            }
            Eigen::FullPivLU<Matrix> lu(entries_);
            const double threshold = 1e-12 * norm;
            const Matrix& u = lu.matrixLU();
            for (Index i = 0; i < u.rows(); ++i) {
                if (std::abs(u(i, i)) < threshold) {
                    throw SingularOperator("pivot " + std::to_string(std::abs(u(i, i))) +
                                           " below threshold " + std::to_string(threshold));
                }
            }
            cache_->inverse = std::make_shared<Operator>(Matrix(lu.inverse()));
        }
        return *cache_->inverse;
    }

    [[nodiscard]] bool is_invertible() const {
        try {
            (void)inverse();
            return true;
        } catch (const SingularOperator&) {
            return false;
        }
    }

private:
    struct Cache {
        std::mutex mutex;
        std::optional<double> norm;
        std::shared_ptr<Operator> inverse;
    };

    double norm_locked() const {
        if (!cache_->norm) {
            if (entries_.isZero(0.0)) {
                cache_->norm = 0.0;
            } else {
                Eigen::JacobiSVD<Matrix> svd(entries_);
                cache_->norm = svd.singularValues()(0);
            }
        }
        return *cache_->norm;
    }

    Matrix entries_;
    std::shared_ptr<Cache> cache_;
};

/// Largest singular value of A.
[[nodiscard]] inline double operator_norm(const Operator& a) { return a.norm(); }

/// Inverse of A; throws SingularOperator when A is numerically singular.
[[nodiscard]] inline Operator inverse(const Operator& a) { return a.inverse(); }

/// Matrix exponential e^{tA} by scaling and squaring with a 13-term
/// truncated Taylor series; the squaring count s is chosen so that
/// ||A|| |t| / 2^s <= 0.5.
[[nodiscard]] inline Matrix matrix_exp(const Operator& a, double t) {
    if (!std::isfinite(t)) {
        throw NonFiniteInput("matrix_exp: t = " + std::to_string(t));
    }
    if (!a.has_finite_entries()) {
        throw NonFiniteInput("matrix_exp: operator has non-finite entries");
    }
    const Index n = a.dim();
    const double scale = a.norm() * std::abs(t);
    if (t == 0.0 || scale == 0.0) {
        return Matrix::Identity(n, n);
    }
    int squarings = 0;
    while (scale / std::pow(2.0, squarings) > 0.5) {
        ++squarings;
    }
    const Matrix b = a.entries() * (t / std::pow(2.0, squarings));
    Matrix term = Matrix::Identity(n, n);
    Matrix sum = term;
    for (int j = 1; j <= 13; ++j) {
        term = (term * b) / static_cast<double>(j);
        sum += term;
    }
    for (int j = 0; j < squarings; ++j) {
        sum = sum * sum;
    }
    return sum;
}

}  // namespace delayosc
