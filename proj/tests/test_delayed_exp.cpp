#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "delayosc/delayed_exp.hpp"
#include "test_support.hpp"

using namespace delayosc;
namespace ts = testsupport;

namespace {
Matrix scalar_op(double v) {
    Matrix m(1, 1);
    m(0, 0) = v;
    return m;
}
}  // namespace

TEST_CASE("delayed exponential on hand-checked points") {
    std::mt19937 rng(3);
    DelayedExpEvaluator any(Operator(ts::random_matrix_with_norm(rng, 3, 1.4)), 1.0);
    CHECK((delayed_exp(any, -0.5) - Matrix::Identity(3, 3)).norm() == 0.0);
    CHECK((delayed_exp(any, -1.5) - Matrix::Zero(3, 3)).norm() == 0.0);

    DelayedExpEvaluator zero(Operator::zero(2), 1.0);
    CHECK((delayed_exp(zero, 7.3) - Matrix::Identity(2, 2)).norm() == 0.0);

    // 1 + t + (t - tau)^2/2 at tau = 0.5, t = 0.75
    DelayedExpEvaluator one(Operator(scalar_op(1.0)), 0.5);
    CHECK(delayed_exp(one, 0.75)(0, 0) == doctest::Approx(1.78125).epsilon(1e-15));
}

TEST_CASE("delayed exponential matches the term-by-term oracle") {
    std::mt19937 rng(41);
    std::uniform_real_distribution<double> tau_dist(0.25, 1.0);
    std::uniform_real_distribution<double> norm_dist(0.1, 2.0);
    for (int trial = 0; trial < 100; ++trial) {
        const Index n = 1 + static_cast<Index>(rng() % 4);
        const double tau = tau_dist(rng);
        const Matrix m = ts::random_matrix_with_norm(rng, n, norm_dist(rng));
        DelayedExpEvaluator ev(Operator(m), tau);
        std::uniform_real_distribution<double> t_dist(-2.0 * tau, 8.0 * tau);
        const int sign = (trial % 2 == 0) ? +1 : -1;
        for (int k = 0; k < 4; ++k) {
            const double t = t_dist(rng);
            const Matrix got = delayed_exp(ev, t, sign);
            const Matrix want = ts::naive_delayed_exp(m, tau, t, sign);
            CHECK(ts::spectral_norm(got - want) <= 1e-12 * (1.0 + ts::spectral_norm(want)));
        }
    }
}

TEST_CASE("derivative identities on hand-checked points") {
    DelayedExpEvaluator one(Operator(scalar_op(1.0)), 1.0);
    CHECK(delayed_exp_derivative(one, 0.5, +1, 1)(0, 0) == doctest::Approx(1.0).epsilon(1e-15));

    DelayedExpEvaluator zero(Operator::zero(2), 0.7);
    CHECK(delayed_exp_derivative(zero, 2.0, +1, 1).norm() == 0.0);

    DelayedExpEvaluator two(Operator(scalar_op(2.0)), 1.0);
    CHECK(delayed_exp_derivative(two, 2.5, +1, 2)(0, 0) == doctest::Approx(8.0).epsilon(1e-15));
}

TEST_CASE("central differences confirm the derivative recurrence") {
    std::mt19937 rng(43);
    const double h = 1e-5;
    for (int trial = 0; trial < 20; ++trial) {
        const Index n = 1 + static_cast<Index>(rng() % 3);
        const double tau = 0.4 + 0.2 * (trial % 3);
        const Matrix m = ts::random_matrix_with_norm(rng, n, 0.3 + 1.7 * (trial % 4) / 3.0);
        DelayedExpEvaluator ev(Operator(m), tau);
        std::uniform_real_distribution<double> t_dist(0.1 * tau, 6.0 * tau);
        for (int k = 0; k < 5; ++k) {
            double t = t_dist(rng);
            // stay away from knots so the central stencil sees one polynomial
            const double frac = t / tau - std::floor(t / tau);
            if (frac < 0.05 || frac > 0.95) {
                t += 0.1 * tau;
            }
            const Matrix fd = (delayed_exp(ev, t + h) - delayed_exp(ev, t - h)) / (2.0 * h);
            const Matrix identity_rhs = m * ts::naive_delayed_exp(m, tau, t - tau);
            CHECK(ts::spectral_norm(fd - identity_rhs) <= 1e-6);
        }
    }
}

TEST_CASE("knot smoothness: one-sided divided differences agree to O(h)") {
    std::mt19937 rng(47);
    const double tau = 0.75;
    const Matrix m = ts::random_matrix_with_norm(rng, 2, 1.3);
    DelayedExpEvaluator ev(Operator(m), tau);
    auto f = [&](double t) { return delayed_exp(ev, t); };
    for (int knot = 0; knot <= 6; ++knot) {
        const double t0 = knot * tau;
        for (int order = 0; order <= knot; ++order) {
            const double h = 1e-3 * tau;
            const Matrix right = ts::one_sided_derivative(f, t0 + h, h, order);
            const Matrix left = ts::one_sided_derivative(f, t0 - h, -h, order);
            // truncation is O(h) per side; rounding grows like eps / h^order
            const double tol = 50.0 * h + 1e-13 / std::pow(h, order);
            CHECK(ts::spectral_norm(right - left) <= tol);
        }
    }
}

TEST_CASE("exact one-sided limits at knots match for guaranteed orders") {
    std::mt19937 rng(53);
    const double tau = 0.6;
    const Matrix m = ts::random_matrix_with_norm(rng, 3, 1.8);
    for (int knot = 0; knot <= 6; ++knot) {
        const double t0 = knot * tau;
        for (int order = 0; order <= knot; ++order) {
            // segment polynomial indices left and right of the knot
            const Matrix left = ts::segment_poly_derivative(m, tau, t0, +1, knot, order);
            const Matrix right = ts::segment_poly_derivative(m, tau, t0, +1, knot + 1, order);
            CHECK(ts::spectral_norm(right - left) <= 1e-12 * (1.0 + ts::spectral_norm(left)));
        }
    }
}

TEST_CASE("fundamental x1 on hand-checked points") {
    std::mt19937 rng(59);
    const double tau = 0.8;
    DelayedExpEvaluator any(Operator(ts::random_matrix_with_norm(rng, 3, 1.9)), tau);
    CHECK((fundamental_x1(any, 0.3 * tau) - Matrix::Identity(3, 3)).norm() == 0.0);

    DelayedExpEvaluator one(Operator(scalar_op(1.0)), 1.0);
    CHECK(fundamental_x1(one, 1.5)(0, 0) == doctest::Approx(1.125).epsilon(1e-15));

    const Matrix avg = 0.5 * (delayed_exp(one, -0.5, +1) + delayed_exp(one, -0.5, -1));
    CHECK(std::abs(fundamental_x1(one, -0.5)(0, 0) - avg(0, 0)) <= 1e-15);
}

TEST_CASE("fundamental x2 on hand-checked points") {
    std::mt19937 rng(61);
    const double tau = 0.7;
    DelayedExpEvaluator any(Operator(ts::random_matrix_with_norm(rng, 2, 1.1)), tau);
    const double t = 1.2 * tau;
    CHECK((fundamental_x2(any, t) - t * Matrix::Identity(2, 2)).norm() <= 1e-15);
    CHECK(fundamental_x2(any, -0.5 * tau).norm() == 0.0);

    DelayedExpEvaluator one(Operator(scalar_op(1.0)), 1.0);
    CHECK(fundamental_x2(one, 2.5)(0, 0) == doctest::Approx(2.5208333333333333).epsilon(1e-15));
}

TEST_CASE("x2 satisfies the delay ODE via second differences") {
    std::mt19937 rng(67);
    const double h = 1e-4;
    for (int trial = 0; trial < 12; ++trial) {
        const Index n = 1 + static_cast<Index>(rng() % 3);
        const double tau = 0.5 + 0.25 * (trial % 3);
        const Matrix m = ts::random_matrix_with_norm(rng, n, 0.4 + 1.6 * (trial % 4) / 3.0);
        DelayedExpEvaluator ev(Operator(m), tau);
        const Matrix omega2 = m * m;
        std::uniform_real_distribution<double> t_dist(1.1 * tau, 7.0 * tau);
        for (int k = 0; k < 5; ++k) {
            double t = t_dist(rng);
            const double frac = t / tau - std::floor(t / tau);
            if (frac < 0.05 || frac > 0.95) {
                t += 0.2 * tau;
            }
            auto f = [&](double s) { return fundamental_x2(ev, s); };
            const Matrix fd = (f(t + h) - 2.0 * f(t) + f(t - h)) / (h * h);
            CHECK(ts::spectral_norm(fd - omega2 * fundamental_x2(ev, t - 2.0 * tau)) <= 1e-5);
        }
    }
}

TEST_CASE("x1 and x2 are bit-identical under Omega -> -Omega") {
    std::mt19937 rng(71);
    const double tau = 0.45;
    const Matrix m = ts::random_matrix_with_norm(rng, 4, 1.7);
    DelayedExpEvaluator plus(Operator(m), tau);
    DelayedExpEvaluator minus(Operator(Matrix(-m)), tau);
    for (double t : {-0.2, 0.3, 0.9, 1.7, 2.8, 3.3}) {
        const Matrix a1 = fundamental_x1(plus, t);
        const Matrix b1 = fundamental_x1(minus, t);
        const Matrix a2 = fundamental_x2(plus, t);
        const Matrix b2 = fundamental_x2(minus, t);
        CHECK((a1 - b1).cwiseAbs().maxCoeff() == 0.0);
        CHECK((a2 - b2).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("even-power series agrees with the averaged exp_tau definitions") {
    std::mt19937 rng(73);
    for (int trial = 0; trial < 15; ++trial) {
        const Index n = 1 + static_cast<Index>(rng() % 3);
        const double tau = 0.3 + 0.35 * (trial % 3);
        Matrix m = ts::random_matrix_with_norm(rng, n, 0.3 + 1.7 * (trial % 4) / 3.0);
        m += 0.5 * Matrix::Identity(n, n);  // keep invertible for the x2 route
        const Operator omega(m);
        if (!omega.is_invertible()) {
            continue;
        }
        DelayedExpEvaluator ev(omega, tau);
        const Matrix inv = omega.inverse().entries();
        std::uniform_real_distribution<double> t_dist(-tau, 8.0 * tau);
        for (int k = 0; k < 6; ++k) {
            const double t = t_dist(rng);
            const Matrix x1_avg = 0.5 * (delayed_exp(ev, t, +1) + delayed_exp(ev, t, -1));
            const Matrix x2_avg = 0.5 * inv * (delayed_exp(ev, t, +1) - delayed_exp(ev, t, -1));
            CHECK(ts::spectral_norm(fundamental_x1(ev, t) - x1_avg) <= 1e-10);
            CHECK(ts::spectral_norm(fundamental_x2(ev, t) - x2_avg) <= 1e-10);
        }
    }
}

TEST_CASE("power cache holds true powers and guards hold") {
    std::mt19937 rng(79);
    const Matrix m = ts::random_matrix_with_norm(rng, 3, 1.2);
    DelayedExpEvaluator ev(Operator(m), 0.5);
    Matrix direct = Matrix::Identity(3, 3);
    for (int k = 0; k <= 12; ++k) {
        CHECK((ev.power(k) - direct).norm() <= 1e-12 * (1.0 + direct.norm()));
        direct = direct * m;
    }
    CHECK_THROWS_AS((void)delayed_exp(ev, 0.5 * (kMaxHorizonMultiples + 1)), ExcessiveHorizon);
    CHECK_THROWS_AS((void)delayed_exp(ev, std::nan("")), NonFiniteInput);
    CHECK_THROWS_AS((void)delayed_exp_derivative(ev, 1.0, +1, 3), DomainError);
}

TEST_CASE("fundamental pair wraps one evaluator") {
    auto ev = std::make_shared<DelayedExpEvaluator>(Operator(scalar_op(1.3)), 0.5);
    const FundamentalPair pair = make_fundamental_pair(ev);
    CHECK(pair.x1_eval(0.2)(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(pair.x2_eval(0.6)(0, 0) == doctest::Approx(0.6).epsilon(1e-15));
}
