#include <random>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "tbandit/errors.hpp"
#include "tbandit/stats.hpp"

using tbandit::ArmStats;

namespace {

ArmStats feed(const std::vector<double>& xs) {
    ArmStats s;
    for (double x : xs) {
        s.record_pull_issued();
        s.record_reward(x);
    }
    return s;
}

} // namespace

TEST_CASE("record_reward examples") {
    SUBCASE("constant samples") {
        const auto s = feed({0.5, 0.5});
        CHECK(s.mean() == 0.5);
        CHECK(s.variance() == 0.0);
    }
    SUBCASE("two extremes") {
        const std::vector<double> xs{0.0, 1.0};
        const auto s = feed(xs);
        CHECK(s.mean() == doctest::Approx(oracle::batch_mean(xs)).epsilon(1e-15));
        CHECK(s.variance() == doctest::Approx(0.25).epsilon(1e-15));
        CHECK(s.sigma_hat() == doctest::Approx(0.5).epsilon(1e-15));
    }
    SUBCASE("three samples") {
        const std::vector<double> xs{0.2, 0.4, 0.9};
        const auto s = feed(xs);
        CHECK(oracle::batch_variance(xs) == doctest::Approx(0.26 / 3.0).epsilon(1e-14));
        CHECK(s.mean() == doctest::Approx(0.5).epsilon(1e-14));
        CHECK(s.variance() == doctest::Approx(0.26 / 3.0).epsilon(1e-14));
        CHECK(s.sigma_hat() == doctest::Approx(0.294392).epsilon(1e-6));
    }
}

TEST_CASE("sigma_hat uses the divide-by-t estimator") {
    CHECK(feed({1, 1, 1}).sigma_hat() == 0.0);
    CHECK(feed({0, 1}).sigma_hat() == doctest::Approx(0.5));
    // one sample: m2 is zero by construction
    CHECK(feed({0.3}).sigma_hat() == 0.0);
}

TEST_CASE("pending accounting") {
    ArmStats s = feed({0.1, 0.2, 0.3});
    CHECK(s.observed_count() == 3);
    CHECK(s.pending_count() == 0);
    s.record_pull_issued();
    CHECK(s.observed_count() == 3);
    CHECK(s.pending_count() == 1);
    const double mean_before = s.mean();
    CHECK(s.mean() == mean_before);
    s.record_reward(0.4);
    CHECK(s.observed_count() == 4);
    CHECK(s.pending_count() == 0);

    ArmStats fresh;
    fresh.record_pull_issued();
    CHECK(fresh.observed_count() == 0);
    CHECK(fresh.pending_count() == 1);
}

TEST_CASE("errors") {
    ArmStats s;
    CHECK_THROWS_AS(s.record_reward(0.5), tbandit::ProtocolError);
    CHECK_THROWS_AS(s.sigma_hat(), tbandit::PreconditionError);
    CHECK_THROWS_AS(s.mean(), tbandit::PreconditionError);
    s.record_pull_issued();
    CHECK_THROWS_AS(s.record_reward(1.5), tbandit::DomainError);
    CHECK_THROWS_AS(s.record_reward(-0.01), tbandit::DomainError);
    CHECK_THROWS_AS(s.record_reward(std::nan("")), tbandit::DomainError);
    // failed calls leave the pending pull in place
    CHECK(s.pending_count() == 1);
}

TEST_CASE("incremental matches batch on random sequences") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> len(1, 3000);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> xs(len(rng));
        // mix of continuous and {0,1} rewards
        for (auto& x : xs) x = trial % 2 ? u(rng) : (u(rng) < 0.3 ? 1.0 : 0.0);
        ArmStats s;
        for (double x : xs) {
            s.record_pull_issued();
            s.record_reward(x);
            CHECK(s.m2() >= 0.0);
            CHECK(s.mean() >= 0.0);
            CHECK(s.mean() <= 1.0);
            CHECK(s.variance() <= 0.25 + 1e-15);
        }
        CHECK(std::abs(s.mean() - oracle::batch_mean(xs)) < 1e-12);
        CHECK(std::abs(s.sigma_hat() - oracle::batch_sigma(xs)) < 1e-12);
        CHECK(s.observed_count() == xs.size());
    }
}
