#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <thread>
#include <vector>

#include "delayosc/operator.hpp"
#include "test_support.hpp"

using namespace delayosc;
namespace ts = testsupport;

TEST_CASE("operator norm on hand-checked matrices") {
    CHECK(operator_norm(Operator::identity(3)) == doctest::Approx(1.0).epsilon(1e-12));

    Vector d(2);
    d << 3.0, -2.0;
    CHECK(operator_norm(Operator::diagonal(d)) == doctest::Approx(3.0).epsilon(1e-12));

    CHECK(operator_norm(Operator::zero(2)) == 0.0);
}

TEST_CASE("operator norm is absolutely homogeneous") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> scale(-3.0, 3.0);
    for (int trial = 0; trial < 50; ++trial) {
        const Index n = 1 + static_cast<Index>(rng() % 4);
        const Matrix m = ts::random_matrix_with_norm(rng, n, 1.0 + 0.5 * trial / 50.0);
        const double alpha = scale(rng);
        const double lhs = operator_norm(Operator(alpha * m));
        const double rhs = std::abs(alpha) * operator_norm(Operator(m));
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    }
}

TEST_CASE("norm agrees with the symmetrized eigenproblem route") {
    std::mt19937 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const Index n = 2 + static_cast<Index>(rng() % 3);
        const Matrix m = ts::random_matrix_with_norm(rng, n, 0.5 + trial * 0.1);
        Eigen::SelfAdjointEigenSolver<Matrix> es(m.transpose() * m);
        const double via_gram = std::sqrt(es.eigenvalues().maxCoeff());
        CHECK(operator_norm(Operator(m)) == doctest::Approx(via_gram).epsilon(1e-10));
    }
}

TEST_CASE("inverse on hand-checked matrices") {
    const Operator id2 = Operator::identity(2);
    CHECK((inverse(id2).entries() - Matrix::Identity(2, 2)).norm() == doctest::Approx(0.0).epsilon(1e-14));

    Vector d(2);
    d << 2.0, 4.0;
    const Operator inv = inverse(Operator::diagonal(d));
    CHECK(inv.entries()(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(inv.entries()(1, 1) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(inv.entries()(0, 1) == 0.0);

    CHECK_THROWS_AS((void)inverse(Operator::zero(2)), SingularOperator);
}

TEST_CASE("inverse residual and double inverse") {
    std::mt19937 rng(13);
    for (int trial = 0; trial < 30; ++trial) {
        const Index n = 1 + static_cast<Index>(rng() % 4);
        Matrix m = ts::random_matrix_with_norm(rng, n, 1.5);
        m += 2.0 * Matrix::Identity(n, n);  // keep well conditioned
        const Operator a(m);
        const Operator b = inverse(a);
        CHECK(ts::spectral_norm(a.entries() * b.entries() - Matrix::Identity(n, n)) <=
              1e-10 * static_cast<double>(n));
        const Operator back = inverse(b);
        CHECK(ts::spectral_norm(back.entries() - a.entries()) <= 1e-9 * (1.0 + ts::spectral_norm(m)));
    }
}

TEST_CASE("matrix exponential on hand-checked cases") {
    std::mt19937 rng(17);
    const Matrix any = ts::random_matrix_with_norm(rng, 3, 1.7);
    CHECK((matrix_exp(Operator(any), 0.0) - Matrix::Identity(3, 3)).norm() == 0.0);

    Vector d(2);
    d << 1.0, -1.0;
    const Matrix e = matrix_exp(Operator::diagonal(d), 1.0);
    CHECK(e(0, 0) == doctest::Approx(2.718281828459045).epsilon(1e-12));
    CHECK(e(1, 1) == doctest::Approx(0.36787944117144233).epsilon(1e-12));
    CHECK(std::abs(e(0, 1)) < 1e-15);

    CHECK((matrix_exp(Operator::zero(4), 5.0) - Matrix::Identity(4, 4)).norm() == 0.0);
}

TEST_CASE("matrix exponential group property") {
    std::mt19937 rng(19);
    std::uniform_real_distribution<double> time(-2.0, 2.0);
    for (int trial = 0; trial < 30; ++trial) {
        const Index n = 1 + static_cast<Index>(rng() % 4);
        const Operator a(ts::random_matrix_with_norm(rng, n, 0.3 + 1.7 * (trial % 5) / 4.0));
        const double s = time(rng);
        const double t = time(rng);
        const Matrix lhs = matrix_exp(a, s + t);
        const Matrix rhs = matrix_exp(a, s) * matrix_exp(a, t);
        CHECK(ts::spectral_norm(lhs - rhs) <= 1e-9);
    }
}

TEST_CASE("matrix exponential rejects non-finite input") {
    CHECK_THROWS_AS((void)matrix_exp(Operator::identity(2), std::nan("")), NonFiniteInput);
    Matrix bad = Matrix::Identity(2, 2);
    bad(0, 1) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS((void)matrix_exp(Operator(bad), 1.0), NonFiniteInput);
}

TEST_CASE("caches are idempotent under concurrent reads") {
    std::mt19937 rng(23);
    const Operator a(ts::random_matrix_with_norm(rng, 4, 1.2) + Matrix::Identity(4, 4));
    std::vector<double> norms(8, 0.0);
    std::vector<std::thread> threads;
    for (int i = 0; i < 8; ++i) {
        threads.emplace_back([&, i] { norms[static_cast<std::size_t>(i)] = a.norm() + a.inverse().norm(); });
    }
    for (auto& th : threads) {
        th.join();
    }
    for (double v : norms) {
        CHECK(v == norms[0]);
    }
}
