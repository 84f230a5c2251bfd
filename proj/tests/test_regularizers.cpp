#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <stdexcept>

#include "pwd/core.hpp"
#include "pwd/regularizers.hpp"

using namespace pwd;

namespace {

std::int64_t ulp_distance(double a, double b) {
    std::int64_t ia, ib;
    std::memcpy(&ia, &a, sizeof a);
    std::memcpy(&ib, &b, sizeof b);
    if (ia < 0) ia = std::numeric_limits<std::int64_t>::min() - ia;
    if (ib < 0) ib = std::numeric_limits<std::int64_t>::min() - ib;
    return std::abs(ia - ib);
}

}  // namespace

TEST_CASE("pnorm penalty direct evaluations") {
    CHECK(pnorm_penalty({1.0, -1.0}, {2.0, 2.0}) == doctest::Approx(2.0));
    CHECK(pnorm_penalty({0.0, 0.0, 0.0}, {0.7, 3.0}) == 0.0);
    CHECK(pnorm_penalty({2.0}, {0.5, 1.0}) == doctest::Approx(2.0 * std::sqrt(2.0)));
    CHECK_THROWS_AS(pnorm_penalty({1.0}, {0.0, 1.0}), std::domain_error);
}

TEST_CASE("aux K closed form") {
    CHECK(aux_K(1.0, 1.0) == doctest::Approx(1.0));
    CHECK(aux_K(4.0, 1.0) == doctest::Approx(0.25));
    CHECK(aux_K(8.0, 0.5) == doctest::Approx(1.5));
    CHECK_THROWS_AS(aux_K(0.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(aux_K(-1.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(aux_K(1.0, 2.0), std::domain_error);
}

TEST_CASE("extended penalty evaluations") {
    CHECK(extended_penalty({2.0}, AuxVector::finite({0.5}), {1.0, 2.0}) == doctest::Approx(4.0));
    CHECK(pnorm_penalty({2.0}, {1.0, 2.0}) == doctest::Approx(4.0));
    CHECK(extended_penalty({1.0}, AuxVector::finite({1.0}), {1.0, 1.0}) == doctest::Approx(1.0));
    // suboptimal s upper-bounds the penalty
    CHECK(extended_penalty({1.0}, AuxVector::finite({2.0}), {1.0, 1.0}) == doctest::Approx(1.25));
    CHECK_THROWS_AS(extended_penalty({1.0, 2.0}, AuxVector::finite({1.0}), {1.0, 1.0}),
                    std::invalid_argument);
}

TEST_CASE("divergent s entries: zero weight contributes zero, nonzero weight errors") {
    const AuxVector div({std::nullopt});
    CHECK(extended_penalty({0.0}, div, {0.6, 1.0}) == 0.0);
    CHECK_THROWS_AS(extended_penalty({0.5}, div, {0.6, 1.0}), std::domain_error);
}

TEST_CASE("optimal s elementwise") {
    const auto s = optimal_s({1.0, -1.0}, 0.5);
    CHECK(s.value(0) == doctest::Approx(1.0));
    CHECK(s.value(1) == doctest::Approx(1.0));
    CHECK(optimal_s({2.0}, 1.0).value(0) == doctest::Approx(0.5));
    const auto sd = optimal_s({0.0}, 0.6);
    CHECK(sd.divergent(0));
    CHECK_THROWS_AS(sd.value(0), std::domain_error);
}

TEST_CASE("aux vector rejects nonpositive finite entries") {
    CHECK_THROWS_AS(AuxVector::finite({0.0}), std::invalid_argument);
    CHECK_THROWS_AS(AuxVector::finite({-2.0}), std::invalid_argument);
}

TEST_CASE("envelope property: extended >= pnorm with equality at optimal s") {
    Rng rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        const double p = 0.2 + 1.6 * rng.uniform();
        const PenaltySpec spec{p, 0.1 + 2.0 * rng.uniform()};
        ParamVector w(4);
        for (auto& x : w) x = 2.0 * rng.gaussian();
        std::vector<std::optional<double>> raw;
        for (std::size_t i = 0; i < w.size(); ++i) {
            raw.emplace_back(std::exp(3.0 * rng.gaussian()));
        }
        const double ext = extended_penalty(w, AuxVector(std::move(raw)), spec);
        const double exact = pnorm_penalty(w, spec);
        CHECK(ext >= exact - 1e-12 * (1.0 + std::abs(exact)));
        const double at_opt = extended_penalty(w, optimal_s(w, p), spec);
        CHECK(at_opt == doctest::Approx(exact).epsilon(1e-12));
    }
}

TEST_CASE("closed-form proximal operators") {
    CHECK(prox_l2(1.0, 0.0) == 1.0);
    CHECK(prox_l2(3.0, 2.0) == doctest::Approx(1.0));
    CHECK(prox_l2(-1.0, 1.0) == doctest::Approx(-0.5));

    CHECK(prox_l1(2.0, 0.5) == doctest::Approx(1.5));
    CHECK(prox_l1(-0.3, 0.5) == 0.0);
    CHECK(prox_l1(0.0, 0.7) == 0.0);
}

TEST_CASE("decay factor fixed values") {
    CHECK(pwd_decay_factor(0.0, 1.0, 0.1) == 0.0);
    CHECK(pwd_decay_factor(123.4, 2.0, 1.0) == doctest::Approx(0.5));
    CHECK(pwd_decay_factor(0.0, 2.0, 1.0) == doctest::Approx(0.5));
    CHECK(pwd_decay_factor(1.0, 1.0, 1.0) == doctest::Approx(0.5));
}

TEST_CASE("decay factor range, k=0 identity, and monotonicity in k") {
    Rng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const double w = 3.0 * rng.gaussian();
        const double p = 0.1 + 1.9 * rng.uniform();
        const double k = std::exp(2.0 * rng.gaussian());
        const double f = pwd_decay_factor(w, p, k);
        CHECK(f >= 0.0);
        CHECK(f <= 1.0);
        CHECK(pwd_decay_factor(w, p, 0.0) == 1.0);
        if (w != 0.0) {
            CHECK(pwd_decay_factor(w, p, 2.0 * k) < f);
        }
    }
}

TEST_CASE("p=2 factor reduces to the L2 prox shrinkage for any weight") {
    Rng rng(4);
    for (int trial = 0; trial < 100; ++trial) {
        const double w = 10.0 * rng.gaussian();
        const double k = std::exp(rng.gaussian());
        CHECK(pwd_decay_factor(w, 2.0, k) == prox_l2(1.0, k));
    }
}

TEST_CASE("zero weight is preserved bitwise for p < 2") {
    const double f = pwd_decay_factor(0.0, 0.7, 0.3);
    CHECK(f == 0.0);
    const double updated = f * (0.0 - 0.0);
    std::uint64_t bits;
    std::memcpy(&bits, &updated, sizeof updated);
    CHECK(bits == 0);
}

TEST_CASE("elastic factor fixed values") {
    CHECK(elastic_decay_factor(1.0, {{1.0, 1.0}}, 1.0) == doctest::Approx(0.5));
    CHECK(elastic_decay_factor(1.0, {{1.0, 1.0}, {2.0, 1.0}}, 1.0) == doctest::Approx(1.0 / 3.0));
    CHECK(elastic_decay_factor(0.0, {{0.5, 1.0}}, 0.1) == 0.0);
    CHECK(elastic_decay_factor(0.7, {}, 1.0) == 1.0);
    CHECK(elastic_decay_factor(0.7, {{1.0, 0.0}}, 1.0) == 1.0);
}

TEST_CASE("elastic rejects p outside (0, 2]") {
    CHECK_THROWS_AS(elastic_decay_factor(1.0, {{2.5, 1.0}}, 1.0), std::domain_error);
    CHECK_THROWS_AS(elastic_decay_factor(1.0, {{0.0, 1.0}}, 1.0), std::domain_error);
}

TEST_CASE("single elastic term matches pwd_decay_factor to <= 1 ulp") {
    Rng rng(11);
    for (int trial = 0; trial < 500; ++trial) {
        const double w = 5.0 * rng.gaussian();
        const double p = 0.1 + 1.9 * rng.uniform();
        const double lambda = std::exp(rng.gaussian());
        const double ea = std::exp(rng.gaussian() - 2.0);
        const double elastic = elastic_decay_factor(w, {{p, lambda}}, ea);
        const double single = pwd_decay_factor(w, p, ea * lambda);
        CHECK(ulp_distance(elastic, single) <= 1);
    }
}
