#include <chrono>
#include <cmath>
#include <cstring>
#include <sstream>

#include "cfmimo/channel.hpp"
#include "cfmimo/errors.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace cfmimo;

namespace {

// J0 from its power series in extended precision.
double bessel_j0_series(double x) {
    long double term = 1.0L, sum = 1.0L;
    const long double q = static_cast<long double>(x) * x / 4.0L;
    for (int m = 1; m < 200; ++m) {
        term *= -q / (static_cast<long double>(m) * m);
        sum += term;
    }
    return static_cast<double>(sum);
}

double min_eigenvalue(const CMat& m) {
    return Eigen::SelfAdjointEigenSolver<CMat>(m).eigenvalues().minCoeff();
}

}  // namespace

TEST_SUITE("channel") {

TEST_CASE("jakes autocorrelation") {
    CHECK(jakes_autocorrelation(3.5e9, 0.0, 0.5) == 1.0);
    const double v = 3.0 / 3.6;
    const double arg = kPi * 2.0 * 3.5e9 * v / kSpeedOfLight * 0.5;
    const double rho = jakes_autocorrelation(3.5e9, v, 0.5);
    CHECK(rho == doctest::Approx(bessel_j0_series(arg)).epsilon(1e-6));
    CHECK(std::abs(rho) < 0.15);
    for (double ts : {0.01, 0.05, 0.1, 0.5, 1.0}) {
        const double a = kPi * 2.0 * 3.5e9 * v / kSpeedOfLight * ts;
        if (a > 10.0) CHECK(std::abs(jakes_autocorrelation(3.5e9, v, ts)) < 0.2);
    }
}

TEST_CASE("shadow correlation examples") {
    CHECK(shadow_correlation(0.05, 8.333, 0.5) == doctest::Approx(std::exp(-0.208325)).epsilon(1e-12));
    CHECK(shadow_correlation(0.05, 8.333, 0.5) == doctest::Approx(0.8120).epsilon(1e-4));
    CHECK(shadow_correlation(0.05, 0.8333, 0.5) == doctest::Approx(0.9794).epsilon(1e-4));
}

TEST_CASE("static shadow is frozen") {
    Rng rng(1);
    const ShadowState s0 = initial_shadow(4, 3, 4.0, 0.05, rng);
    const std::vector<double> speeds(3, 0.0);
    const ShadowState s1 = evolve_shadow(s0, speeds, 0.5, rng);
    CHECK(s1.values_db == s0.values_db);
}

TEST_CASE("shadow process is stationary with the right correlation") {
    Rng rng(2);
    const double v = 10.0;
    const double rho = shadow_correlation(0.05, v, 0.5);
    ShadowState s = initial_shadow(1, 1, 4.0, 0.05, rng);
    const int n = 100000;
    std::vector<double> x(n);
    const double sp[] = {v};
    for (int i = 0; i < n; ++i) {
        s = evolve_shadow(s, sp, 0.5, rng);
        x[static_cast<std::size_t>(i)] = s.values_db[0];
    }
    double m = 0.0;
    for (double a : x) m += a;
    m /= n;
    double c0 = 0.0, c1 = 0.0;
    for (int i = 0; i < n; ++i) {
        c0 += (x[i] - m) * (x[i] - m);
        if (i + 1 < n) c1 += (x[i] - m) * (x[i + 1] - m);
    }
    CHECK(std::abs(c1 / c0 - rho) < 3.0 * std::sqrt((1.0 - rho * rho) / n));
    const double var_se = std::sqrt(2.0 * 256.0 / n * (1.0 + rho * rho) / (1.0 - rho * rho));
    CHECK(std::abs(c0 / (n - 1) - 16.0) < 3.0 * var_se);
}

TEST_CASE("path loss examples") {
    CHECK(path_loss_db(1.0, 0.0) == doctest::Approx(-34.0));
    CHECK(path_loss_db(100.0, 0.0) == doctest::Approx(-110.0));
    CHECK(path_loss_db(10.0, 5.0) == doctest::Approx(-67.0));
    CHECK(path_loss_db(0.1, 0.0) == doctest::Approx(-34.0));
}

TEST_CASE("one-ring structural properties") {
    Rng rng(3);
    for (int t = 0; t < 200; ++t) {
        const double beta = std::pow(10.0, rng.uniform(-12.0, 0.0));
        const int n = 1 + static_cast<int>(rng.uniform() * 8);
        const auto cov = one_ring_covariance(beta, rng.uniform(-kPi, kPi), rng.uniform(0.0, 0.6), n, 0.5);
        for (int i = 0; i < n; ++i) CHECK(cov.R(i, i) == cplx(beta, 0.0));
        CHECK((cov.R - cov.R.adjoint()).cwiseAbs().maxCoeff() <= 1e-12 * beta);
        CHECK(min_eigenvalue(cov.R) >= -1e-9 * n * beta);
        CHECK(std::abs(cov.R.trace().real() - n * beta) <= 1e-9 * n * beta);
    }
}

TEST_CASE("one-ring point scatterer is rank one") {
    const auto cov = one_ring_covariance(2.0, 0.0, 0.0, 2, 0.5);
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) CHECK(std::abs(cov.R(i, j) - cplx(2.0, 0.0)) < 1e-12);
    }
}

TEST_CASE("one-ring matches a Monte-Carlo oracle") {
    Rng rng(4);
    const double xi = 10.0 * kPi / 180.0;
    const auto cov = one_ring_covariance(1.0, kPi / 4, xi, 4, 0.5);
    const CMat oracle = testing::monte_carlo_one_ring(rng, 1.0, kPi / 4, xi, 4, 0.5, 1000000);
    CHECK((cov.R - oracle).cwiseAbs().maxCoeff() < 1e-3);
}

TEST_CASE("one-ring reports quadrature failure") {
    CHECK_THROWS_AS(one_ring_covariance(1.0, 0.3, kPi, 64, 50.0), NumericalError);
}

TEST_CASE("covariance factor and sampling") {
    const CMat zero = CMat::Zero(3, 3);
    Rng rng(5);
    CHECK(sample_channel(covariance_factor(zero), rng).norm() == 0.0);

    const auto point = one_ring_covariance(1.0, 0.4, 0.0, 4, 0.5);
    const CMat a = covariance_factor(point.R);
    CHECK((a * a.adjoint() - point.R).norm() < 1e-9);
    CVec steer(4);
    for (int n = 0; n < 4; ++n) steer[n] = std::polar(1.0, -2.0 * kPi * 0.5 * n * std::sin(0.4));
    for (int t = 0; t < 20; ++t) {
        const CVec h = sample_channel(a, rng);
        const cplx c = steer.dot(h) / steer.squaredNorm();
        CHECK((h - c * steer).norm() <= 1e-6 * (1.0 + h.norm()));
    }

    CMat bad = CMat::Identity(2, 2);
    bad(1, 1) = -0.5;
    CHECK_THROWS_AS(covariance_factor(bad), NumericalError);

    const auto cov = one_ring_covariance(1.5, -0.7, 0.2, 4, 0.5);
    const CMat f = covariance_factor(cov.R);
    CMat acc = CMat::Zero(4, 4);
    const int draws = 100000;
    for (int t = 0; t < draws; ++t) {
        const CVec h = sample_channel(f, rng);
        acc += h * h.adjoint();
    }
    acc /= draws;
    CHECK((acc - cov.R).norm() / cov.R.norm() < 0.02);
}

TEST_CASE("statistics refresh") {
    Rng rng(6);
    DeploymentConfig dc;
    const Topology topo = generate_deployment(dc, rng);
    auto ues = place_ues(dc.num_ues, 1000, 0.0, rng);
    const ShadowState shadow = initial_shadow(36, 40, 4.0, 0.05, rng);
    ChannelParams params;

    const auto t0 = std::chrono::steady_clock::now();
    const LargeScaleStats a = refresh_statistics(topo, ues, shadow, params, 4);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    CHECK(secs < 1.0);
    const LargeScaleStats b = refresh_statistics(topo, ues, shadow, params, 4);
    CHECK(a.gains.db == b.gains.db);
    for (std::size_t i = 0; i < a.covariance.size(); ++i) CHECK(a.covariance[i] == b.covariance[i]);

    for (int l = 0; l < 36; ++l) {
        for (int k = 0; k < 40; ++k) {
            const double expected = path_loss_db(a.distance_m[a.index(l, k)], shadow.at(l, k), params.min_distance_m);
            CHECK(a.gains.at(l, k) == doctest::Approx(expected).epsilon(1e-12));
        }
    }
}

TEST_CASE("gain decreases as a UE moves away") {
    Topology topo;
    topo.grid_side_m = 1000;
    topo.num_odus = 1;
    topo.oru_positions = {{100, 100}};
    topo.odu_of_oru = {0};
    topo.array_orientation = {0.0};
    const ShadowState shadow{1, 1, 4.0, 0.05, {0.0}};
    UEState ue{{110, 100}, 10.0, 0.0};
    double last = 1e9;
    for (int t = 0; t < 30; ++t) {
        const std::vector<UEState> ues{ue};
        const auto stats = refresh_statistics(topo, ues, shadow, ChannelParams{}, 2);
        CHECK(stats.gains.at(0, 0) < last);
        last = stats.gains.at(0, 0);
        ue = step_ue(ue, 0.5, 1000);
    }
}

TEST_CASE("covariance dump layout") {
    Rng rng(7);
    DeploymentConfig dc;
    dc.num_orus = 4;
    dc.num_odus = 4;
    dc.num_ues = 2;
    dc.antennas_per_oru = 2;
    const Topology topo = generate_deployment(dc, rng);
    const auto ues = place_ues(2, 1000, 0.0, rng);
    const ShadowState shadow = initial_shadow(4, 2, 4.0, 0.05, rng);
    const auto stats = refresh_statistics(topo, ues, shadow, ChannelParams{}, 2);
    std::stringstream ss;
    write_covariance_dump(ss, stats);
    const std::string bytes = ss.str();
    REQUIRE(bytes.size() == 8 + 12 + 4 * 2 * 4 * 16);
    CHECK(bytes.substr(0, 8) == "CFMCOV01");
    std::uint32_t header[3];
    std::memcpy(header, bytes.data() + 8, sizeof header);
    CHECK(header[0] == 4);
    CHECK(header[1] == 2);
    CHECK(header[2] == 2);
    double first[2];
    std::memcpy(first, bytes.data() + 20, sizeof first);
    CHECK(first[0] == stats.R(0, 0)(0, 0).real());
    double last[2];
    std::memcpy(last, bytes.data() + bytes.size() - 16, sizeof last);
    CHECK(last[0] == stats.R(3, 1)(1, 1).real());
}

}
