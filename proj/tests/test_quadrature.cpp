#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "delayosc/quadrature.hpp"
#include "test_support.hpp"

using namespace delayosc;

namespace {
Vector scalar(double v) {
    Vector out(1);
    out(0) = v;
    return out;
}
}  // namespace

TEST_CASE("hand-checked integrals") {
    const Vector linear = integrate([](double t) { return scalar(t); }, 0.0, 1.0, {});
    CHECK(linear(0) == doctest::Approx(0.5).epsilon(1e-14));

    const Vector kinked = integrate([](double t) { return scalar(std::abs(t)); }, -1.0, 1.0, {0.0});
    CHECK(kinked(0) == doctest::Approx(1.0).epsilon(1e-14));

    const Vector expo = integrate([](double t) { return scalar(std::exp(t)); }, 0.0, 1.0, {});
    CHECK(expo(0) == doctest::Approx(1.718281828459045).epsilon(1e-10));
}

TEST_CASE("gauss-legendre is exact on polynomials below 2k per cell") {
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> coeff(-2.0, 2.0);
    for (int nodes : {2, 3, 4, 8}) {
        QuadratureRule rule;
        rule.nodes_per_cell = nodes;
        rule.max_cell_width = 10.0;  // single cell: the per-cell exactness claim
        const int degree = 2 * nodes - 1;
        for (int trial = 0; trial < 10; ++trial) {
            std::vector<double> c(static_cast<std::size_t>(degree) + 1);
            for (double& v : c) {
                v = coeff(rng);
            }
            const double a = -1.3;
            const double b = 1.7;
            auto poly = [&](double t) {
                double acc = 0.0;
                double p = 1.0;
                for (double v : c) {
                    acc += v * p;
                    p *= t;
                }
                return scalar(acc);
            };
            double exact = 0.0;
            for (std::size_t i = 0; i < c.size(); ++i) {
                exact += c[i] * (std::pow(b, static_cast<double>(i) + 1) - std::pow(a, static_cast<double>(i) + 1)) /
                         (static_cast<double>(i) + 1);
            }
            const Vector got = integrate(poly, a, b, {}, rule);
            CHECK(std::abs(got(0) - exact) <= 1e-12 * (1.0 + std::abs(exact)));
        }
    }
}

TEST_CASE("simpson scheme converges on smooth integrands") {
    QuadratureRule rule;
    rule.scheme = QuadScheme::simpson;
    rule.nodes_per_cell = 9;
    rule.max_cell_width = 0.25;
    const Vector got = integrate([](double t) { return scalar(std::sin(t)); }, 0.0, 2.0, {}, rule);
    CHECK(got(0) == doctest::Approx(1.0 - std::cos(2.0)).epsilon(1e-8));
}

TEST_CASE("interval and sample validation") {
    CHECK_THROWS_AS((void)integrate([](double t) { return scalar(t); }, 1.0, 0.0, {}), InvalidInterval);
    CHECK_THROWS_AS((void)integrate([](double) { return scalar(std::nan("")); }, 0.0, 1.0, {}),
                    NonFiniteValue);
    QuadratureRule bad;
    bad.nodes_per_cell = 1;
    CHECK_THROWS_AS((void)integrate([](double t) { return scalar(t); }, 0.0, 1.0, {}, bad), DomainError);
    bad.nodes_per_cell = 65;
    CHECK_THROWS_AS((void)integrate([](double t) { return scalar(t); }, 0.0, 1.0, {}, bad), DomainError);

    const Vector empty = integrate([](double t) { return scalar(t); }, 1.0, 1.0, {});
    CHECK(empty(0) == 0.0);
}

TEST_CASE("knots restore accuracy across kinks") {
    // |sin| has a kink at pi; without the knot the default rule still sees
    // it because cells are capped, but accuracy degrades by orders.
    auto f = [](double t) { return scalar(std::abs(std::sin(t))); };
    const double exact = 4.0;  // integral of |sin| over [0, 2 pi]
    const Vector with_knot = integrate(f, 0.0, 2.0 * M_PI, {M_PI});
    CHECK(std::abs(with_knot(0) - exact) < 1e-9);
}
