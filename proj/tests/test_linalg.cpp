#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "ospkit/dynamics.hpp"
#include "ospkit/linalg.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace ospkit;
using testing::error_kind;

TEST_CASE("mat_exp of zero is the identity") {
    CHECK(linalg::mat_exp(Matrix::Zero(3, 3), 0.5) == Matrix::Identity(3, 3));
}

TEST_CASE("mat_exp of a diagonal matrix") {
    Matrix d = Eigen::Vector3d(-10.0, -2.0, -1000.0).asDiagonal();
    Matrix e = linalg::mat_exp(d, 0.01);
    Matrix expected = Eigen::Vector3d(std::exp(-0.1), std::exp(-0.02), std::exp(-10.0)).asDiagonal();
    CHECK(oracle::rel(e, expected) < 1e-14);
    CHECK(std::abs(e(2, 2) - std::exp(-10.0)) < 1e-18);
}

TEST_CASE("mat_exp of the plant agrees with Taylor summation") {
    const Matrix a = config::plant_a();
    CHECK(oracle::rel(linalg::mat_exp(a, 0.01), oracle::taylor_exp(a, 0.01)) < 1e-10);
}

TEST_CASE("mat_exp matches Taylor on random matrices of varying norm") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> scale(0.01, 8.0);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 1 + trial % 6;
        Matrix m = Matrix::Random(n, n);
        const double t = scale(rng);
        CHECK(oracle::rel(linalg::mat_exp(m, t), oracle::taylor_exp_squared(m, t)) < 1e-11);
    }
}

TEST_CASE("mat_exp with negative time inverts") {
    const Matrix a = Matrix::Random(4, 4);
    Matrix prod = linalg::mat_exp(a, 0.7) * linalg::mat_exp(a, -0.7);
    CHECK(oracle::rel(prod, Matrix::Identity(4, 4)) < 1e-12);
}

TEST_CASE("mat_exp rejects bad input") {
    CHECK(error_kind([] { linalg::mat_exp(Matrix::Zero(2, 3), 1.0); }) == ErrorKind::Dimension);
    Matrix m = Matrix::Zero(2, 2);
    m(0, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK(error_kind([&] { linalg::mat_exp(m, 1.0); }) == ErrorKind::Domain);
    CHECK(error_kind([] { linalg::mat_exp(Matrix::Identity(2, 2), std::numeric_limits<double>::infinity()); }) ==
          ErrorKind::Domain);
}

TEST_CASE("require_covariance") {
    CHECK_NOTHROW(linalg::require_covariance(Matrix::Identity(2, 2), "P"));
    Matrix asym(2, 2);
    asym << 1, 0.5, 0.4, 1;
    CHECK(error_kind([&] { linalg::require_covariance(asym, "P"); }) == ErrorKind::Domain);
    Matrix indef(2, 2);
    indef << 1, 2, 2, 1;
    CHECK(error_kind([&] { linalg::require_covariance(indef, "P"); }) == ErrorKind::Domain);
    CHECK(error_kind([] { linalg::require_covariance(Matrix::Zero(2, 3), "P"); }) == ErrorKind::Dimension);
}

TEST_CASE("transition_phi") {
    const auto model = testing::plant_model(config::observation_c1(), config::noise_from_bits("000000"));
    CHECK(dynamics::transition_phi(model, 0.3, 0.3) == Matrix::Identity(3, 3));
    CHECK(dynamics::transition_phi(model, 0.0, 0.01) == linalg::mat_exp(config::plant_a(), 0.01));

    const auto s = testing::scalar_model(-3.0, 1.0, 1.0);
    CHECK(dynamics::transition_phi(s, 0.0, 0.4)(0, 0) == doctest::Approx(std::exp(-1.2)).epsilon(1e-14));

    CHECK(error_kind([&] { dynamics::transition_phi(model, 0.2, 0.1); }) == ErrorKind::Ordering);
}

TEST_CASE("input_lambda") {
    const auto model = testing::plant_model(config::observation_c1(), config::noise_from_bits("000000"));
    CHECK(dynamics::input_lambda(model, 0.1, 0.1, 0.3).isZero(0.0));

    SUBCASE("scalar closed form") {
        const double a = -4.0, b = 2.5, r = 0.1, s = 0.35, t = 0.6;
        const auto m = testing::scalar_model(a, 1.0, 1.0, b);
        const double expected = b / a * std::exp(a * (t - s)) * (std::exp(a * (s - r)) - 1.0);
        CHECK(dynamics::input_lambda(m, r, s, t)(0, 0) == doctest::Approx(expected).epsilon(1e-13));
    }
    SUBCASE("singular A") {
        Matrix b(2, 1);
        b << 1.5, -0.5;
        Matrix lam = dynamics::input_lambda(Matrix::Zero(2, 2), b, 0.2, 0.5, 0.9);
        CHECK(oracle::rel(lam, 0.3 * b) < 1e-14);
        // A nilpotent block, also singular: compare with quadrature.
        Matrix a(2, 2);
        a << 0, 1, 0, 0;
        Matrix expected = oracle::taylor_exp(a, 0.4) * oracle::input_integral(a, b, 0.3);
        CHECK(oracle::rel(dynamics::input_lambda(a, b, 0.2, 0.5, 0.9), expected) < 1e-10);
    }
    SUBCASE("invertible A matches A^-1 closed form") {
        std::mt19937_64 rng(3);
        for (int trial = 0; trial < 50; ++trial) {
            const int n = 1 + trial % 5;
            Matrix a = oracle::random_stable(rng, n);
            Matrix bm = Matrix::Random(n, 2);
            Matrix closed = a.inverse() * oracle::taylor_exp(a, 0.4) * (oracle::taylor_exp(a, 0.3) - Matrix::Identity(n, n)) * bm;
            CHECK(oracle::rel(dynamics::input_lambda(a, bm, 0.1, 0.4, 0.8), closed) < 1e-10);
        }
    }
    CHECK(error_kind([&] { dynamics::input_lambda(model, 0.2, 0.1, 0.3); }) == ErrorKind::Ordering);
    CHECK(error_kind([&] { dynamics::input_lambda(model, 0.1, 0.3, 0.2); }) == ErrorKind::Ordering);
}

TEST_CASE("process_noise_cov") {
    const auto model = testing::plant_model(config::observation_c1(), config::noise_from_bits("000000"));
    CHECK(dynamics::process_noise_cov(model, 0.2, 0.2).isZero(0.0));

    const auto flat = testing::scalar_model(0.0, 0.7, 1.0);
    CHECK(dynamics::process_noise_cov(flat, 0.1, 0.4)(0, 0) == doctest::Approx(0.7 * 0.3).epsilon(1e-14));

    SUBCASE("plant against quadrature") {
        Matrix q = config::kLowNoise * Matrix::Identity(3, 3);
        Matrix expected = oracle::noise_integral(config::plant_a(), q, 0.01);
        CHECK(oracle::rel(dynamics::process_noise_cov(model, 0.0, 0.01), expected) < 1e-8);
    }
    SUBCASE("random stable systems against quadrature") {
        std::mt19937_64 rng(11);
        for (int trial = 0; trial < 20; ++trial) {
            const int n = 1 + trial % 6;
            Matrix a = oracle::random_stable(rng, n, 3.0);
            Matrix q = oracle::random_psd(rng, n);
            Matrix expected = oracle::noise_integral(a, q, 0.5, 1e-13);
            CHECK(oracle::rel(dynamics::process_noise_cov(a, q, 1.0, 1.5), expected) < 1e-8);
        }
    }
    SUBCASE("long interval on the stiff plant stays accurate and PSD") {
        Matrix q = config::kLowNoise * Matrix::Identity(3, 3);
        Matrix p = dynamics::process_noise_cov(model, 0.0, 2.0);
        CHECK(oracle::rel(p, oracle::noise_integral(config::plant_a(), q, 2.0, 1e-12)) < 1e-8);
        CHECK(linalg::min_eigenvalue(p) >= -1e-10);
    }
    CHECK(error_kind([&] { dynamics::process_noise_cov(model, 0.3, 0.2); }) == ErrorKind::Ordering);
}

TEST_CASE("discretize returns consistent phi and noise") {
    const auto model = testing::plant_model(config::observation_c1(), config::noise_from_bits("000000"));
    auto d = dynamics::discretize(model, 0.013, 0.027);
    CHECK(oracle::rel(d.phi, dynamics::transition_phi(model, 0.013, 0.027)) < 1e-15);
    CHECK(oracle::rel(d.noise, dynamics::process_noise_cov(model, 0.013, 0.027)) < 1e-15);
}

TEST_CASE("semigroup, noise composition and PSD on random systems") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 1 + trial % 6;
        Matrix a = oracle::random_stable(rng, n, 2.0);
        Matrix q = oracle::random_psd(rng, n);
        double r = u(rng), s = r + u(rng), t = s + u(rng);
        Matrix phi_rt = dynamics::transition_phi(a, r, t);
        Matrix composed = dynamics::transition_phi(a, s, t) * dynamics::transition_phi(a, r, s);
        CHECK((phi_rt - composed).norm() <= 1e-9 * phi_rt.norm());

        Matrix q_rt = dynamics::process_noise_cov(a, q, r, t);
        Matrix phi_st = dynamics::transition_phi(a, s, t);
        Matrix split = phi_st * dynamics::process_noise_cov(a, q, r, s) * phi_st.transpose() +
                       dynamics::process_noise_cov(a, q, s, t);
        CHECK(oracle::rel(split, q_rt) <= 1e-9);
        CHECK(linalg::min_eigenvalue(q_rt) >= -1e-10);
        CHECK(linalg::symmetry_defect(q_rt) <= 1e-12);
    }
}
