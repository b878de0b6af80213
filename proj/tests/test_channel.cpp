#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "qfsk/channel.hpp"
#include "qfsk/rng.hpp"

using namespace qfsk;

TEST_CASE("log_i0 tracks the long-double series") {
    for (double z : {0.0, 1e-3, 0.1, 1.0, 5.0, 10.0, 25.0, 29.9, 30.1, 35.0,
                     50.0, 100.0, 250.0, 500.0, 1000.0, 2000.0}) {
        double got = log_i0(z);
        double want = oracle::log_i0_reference(z);
        CHECK(std::fabs(got - want) <= 1e-12 * std::max(1.0, std::fabs(want)));
    }
    CHECK_THROWS_AS(log_i0(-0.5), std::domain_error);
}

TEST_CASE("dB conversions round trip") {
    CHECK(esno_db_to_linear(0.0) == Catch::Approx(1.0));
    CHECK(esno_db_to_linear(10.0) == Catch::Approx(10.0));
    CHECK(linear_to_db(esno_db_to_linear(3.7)) == Catch::Approx(3.7).margin(1e-12));
}

TEST_CASE("sampled envelopes are positive and full length") {
    ChannelParams p{4, esno_db_to_linear(3.0)};
    auto rng = make_engine(42, 0, 0x74657374);
    for (int it = 0; it < 2000; ++it) {
        auto obs = sample_observation(p, static_cast<unsigned>(it % 4), rng);
        REQUIRE(obs.y.size() == 4);
        for (double v : obs.y) CHECK(v > 0);
    }
}

TEST_CASE("log-density differences collapse to Bessel terms") {
    // With mu = sigma^2 both density branches share every term except the
    // Bessel factor of the conditioning branch.
    ChannelParams p{4, esno_db_to_linear(2.0)};
    auto rng = make_engine(7, 0, 0x74657374);
    for (int it = 0; it < 500; ++it) {
        auto obs = sample_observation(p, 0, rng);
        for (unsigned i = 0; i < 4; ++i)
            for (unsigned j = 0; j < 4; ++j) {
                double lhs = log_density(p, obs, i) - log_density(p, obs, j);
                double rhs = log_i0(obs.y[i]) - log_i0(obs.y[j]);
                CHECK(std::fabs(lhs - rhs) < 1e-9);
            }
    }
}

TEST_CASE("densities are symmetric under branch permutation") {
    ChannelParams p{4, esno_db_to_linear(1.0)};
    auto rng = make_engine(11, 0, 0x74657374);
    unsigned perm[4] = {2, 0, 3, 1};
    for (int it = 0; it < 200; ++it) {
        auto obs = sample_observation(p, 1, rng);
        ObservationVector shuffled;
        shuffled.y.resize(4);
        for (unsigned i = 0; i < 4; ++i) shuffled.y[perm[i]] = obs.y[i];
        for (unsigned sent = 0; sent < 4; ++sent)
            CHECK(log_density(p, obs, sent) ==
                  Catch::Approx(log_density(p, shuffled, perm[sent])).margin(1e-10));
    }
}

TEST_CASE("branch statistics match the Rice and Rayleigh laws") {
    ChannelParams p{4, esno_db_to_linear(3.0)};
    const std::size_t n = 1'000'000;
    // 1e-3 significance threshold for the two-sided KS test at this n
    const double d_crit = 1.9495e-3;
    std::vector<double> rice, rayl;
    rice.reserve(n);
    rayl.reserve(n);
    auto rng = make_engine(2024, 0, 0x74657374);
    for (std::size_t i = 0; i < n; ++i) {
        auto obs = sample_observation(p, 1, rng);
        rice.push_back(obs.y[1]);
        rayl.push_back(obs.y[3]);
    }
    CHECK(oracle::ks_statistic(std::move(rayl), [&](double v) {
              return oracle::rayleigh_cdf(v, p.sigma_sq());
          }) < d_crit);
    oracle::RiceCdf rice_cdf(p.mu(), p.sigma_sq());
    CHECK(oracle::ks_statistic(std::move(rice), rice_cdf) < d_crit);
}

TEST_CASE("branch metrics read the selected envelope") {
    ObservationVector obs{{0.5, 1.25, 2.0, 0.75}};
    CHECK(branch_metric(obs, Gf4(2)) == 2.0);
    CHECK(branch_metric(obs, Gf4(1), BranchMetric::Envelope) == 1.25);
    CHECK(branch_metric(obs, Gf4(3), BranchMetric::SquareLaw) ==
          Catch::Approx(0.75 * 0.75));
}

TEST_CASE("invalid channel arguments are rejected") {
    ChannelParams bad{1, 1.0};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = {4, 0.0};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = {4, std::numeric_limits<double>::infinity()};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    ChannelParams p{4, 1.0};
    ObservationVector short_obs{{1.0, 2.0}};
    CHECK_THROWS_AS(log_density(p, short_obs, 0), std::invalid_argument);
    ObservationVector obs{{1.0, 2.0, 3.0, 4.0}};
    CHECK_THROWS_AS(log_density(p, obs, 4), std::invalid_argument);
    auto rng = make_engine(1, 0, 0x74657374);
    CHECK_THROWS_AS(sample_observation(p, 5, rng), std::invalid_argument);

    ObservationVector degenerate{{1.0, 0.0, 3.0, 4.0}};
    CHECK(log_density(p, degenerate, 0) ==
          -std::numeric_limits<double>::infinity());
}
