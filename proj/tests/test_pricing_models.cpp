#include <doctest.h>

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "sysnoise/pricing_models.hpp"
#include "sysnoise/random.hpp"

using namespace sysnoise::pricing;

namespace {

OptionContractSpec euro(OptionType t, double k, double tte) {
    return {t, ExerciseStyle::european, k, tte};
}
OptionContractSpec amer(OptionType t, double k, double tte) {
    return {t, ExerciseStyle::american, k, tte};
}

// Bisection on an independently coded put value-matching residual.
double bisect_put_boundary(double k, double r, double sigma, double t) {
    const double b = r;
    const double big_x = 1.0 - std::exp(-r * t);
    const double m = 2.0 * r / (sigma * sigma);
    const double n = 2.0 * b / (sigma * sigma);
    const double q1 = 0.5 * (-(n - 1.0) - std::sqrt((n - 1.0) * (n - 1.0) + 4.0 * m / big_x));
    auto residual = [&](double s) {
        const double d1 = (std::log(s / k) + (b + 0.5 * sigma * sigma) * t) / (sigma * std::sqrt(t));
        const double d2 = d1 - sigma * std::sqrt(t);
        const double put = k * std::exp(-r * t) * oracle::normal_cdf(-d2) -
                           s * std::exp((b - r) * t) * oracle::normal_cdf(-d1);
        const double premium = (1.0 - std::exp((b - r) * t) * oracle::normal_cdf(-d1)) * s / q1;
        return (k - s) - (put - premium);
    };
    double lo = 1e-8;
    double hi = k;
    while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        if (residual(lo) * residual(mid) <= 0.0) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("normal cdf matches quadrature") {
    for (double x : {-6.0, -3.2, -1.0, -0.25, 0.0, 0.3, 1.0, 1.96, 4.5}) {
        CHECK(std::abs(std_normal_cdf(x) - oracle::normal_cdf(x)) < 1e-12);
    }
    CHECK(std::abs(std_normal_cdf(1.0) - 0.8413447460685429) < 1e-15);
    CHECK_THROWS_AS((void)std_normal_cdf(std::numeric_limits<double>::quiet_NaN()), DomainError);
}

TEST_CASE("d1 and d2") {
    const auto at_money = bs_d_values(euro(OptionType::call, 100, 1), {100, 0.0, 0.0, 0.2});
    CHECK(at_money.d1 == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(at_money.d2 == doctest::Approx(-0.1).epsilon(1e-14));
    const auto textbook = bs_d_values(euro(OptionType::call, 100, 1), {100, 0.05, 0.0, 0.2});
    CHECK(textbook.d1 == doctest::Approx(0.35).epsilon(1e-14));
    CHECK(textbook.d2 == doctest::Approx(0.15).epsilon(1e-14));
    CHECK(textbook.d1 - textbook.d2 == doctest::Approx(0.2).epsilon(1e-15));
    CHECK_THROWS_AS((void)bs_d_values(euro(OptionType::call, 100, 0), {100, 0.05, 0, 0.2}),
                    DegenerateInputError);
    CHECK_THROWS_AS((void)bs_d_values(euro(OptionType::call, 100, 1), {100, 0.05, 0, 0.0}),
                    DegenerateInputError);
}

TEST_CASE("Black-Scholes closed form") {
    const MarketParams p{100, 0.05, 0.0, 0.2};
    const double call = bs_price(euro(OptionType::call, 100, 1), p);
    const double quad = oracle::lognormal_expectation(true, 100, 100, 0.05, 0.0, 0.2, 1);
    CHECK(std::abs(call - quad) < 1e-8);
    CHECK(std::abs(call - 10.450583572185565) < 1e-9);

    SUBCASE("expiry returns intrinsic") {
        CHECK(bs_price(euro(OptionType::call, 100, 0), {120, 0.05, 0, 0.2}) == 20.0);
        CHECK(bs_price(euro(OptionType::put, 100, 0), {120, 0.05, 0, 0.2}) == 0.0);
    }
    SUBCASE("vanishing volatility at the forward") {
        CHECK(std::abs(bs_price(euro(OptionType::put, 100, 1), {100, 0.0, 0.0, 1e-9})) < 1e-6);
    }
    SUBCASE("dividend-paying put against quadrature") {
        const double put = bs_price(euro(OptionType::put, 110, 0.5), {100, 0.03, 0.02, 0.3});
        CHECK(std::abs(put - oracle::lognormal_expectation(false, 100, 110, 0.03, 0.02, 0.3, 0.5)) <
              1e-8);
    }
    SUBCASE("domain errors") {
        CHECK_THROWS_AS((void)bs_price(euro(OptionType::call, -1, 1), p), DomainError);
        CHECK_THROWS_AS((void)bs_price(euro(OptionType::call, 100, 1), {-5, 0.05, 0, 0.2}),
                        DomainError);
        CHECK_THROWS_AS((void)bs_price(amer(OptionType::call, 100, 1), p), DomainError);
    }
}

TEST_CASE("BS monotonicity") {
    for (double sigma : {0.1, 0.3, 0.5}) {
        double prev_call = -1.0;
        double prev_put = std::numeric_limits<double>::infinity();
        for (double s = 60; s <= 140; s += 2.5) {
            const double c = bs_price(euro(OptionType::call, 100, 0.5), {s, 0.04, 0.01, sigma});
            const double q = bs_price(euro(OptionType::put, 100, 0.5), {s, 0.04, 0.01, sigma});
            CHECK(c >= prev_call);
            CHECK(q <= prev_put);
            prev_call = c;
            prev_put = q;
        }
    }
    double prev = -1.0;
    for (double sigma = 0.05; sigma <= 0.8; sigma += 0.05) {
        const double c = bs_price(euro(OptionType::call, 100, 1), {95, 0.04, 0.0, sigma});
        CHECK(c >= prev);
        prev = c;
    }
}

TEST_CASE("BAW q values") {
    const MarketParams p{100, 0.05, 0.0, 0.2};
    const auto q = baw_q_values(p, amer(OptionType::put, 100, 1));
    CHECK(q.big_x == doctest::Approx(1.0 - std::exp(-0.05)).epsilon(1e-15));
    CHECK(std::abs(q.big_x - 0.048771) < 1e-6);
    CHECK(q.q1 < 0.0);
    CHECK(q.q2 > 0.0);
    sysnoise::GaussianSource rng(7);
    for (int i = 0; i < 200; ++i) {
        const MarketParams r{100, 0.001 + 0.15 * rng.uniform(), 0.1 * rng.uniform(),
                             0.05 + 0.6 * rng.uniform()};
        const double t = 0.02 + 3.0 * rng.uniform();
        const auto v = baw_q_values(r, amer(OptionType::call, 100, t));
        const double s2 = r.volatility * r.volatility;
        const double product = -2.0 * r.rate / (s2 * v.big_x);
        const double sum = -(2.0 * r.cost_of_carry() / s2 - 1.0);
        CHECK(std::abs(v.q1 * v.q2 - product) <= 1e-10 * std::max(1.0, std::abs(product)));
        CHECK(std::abs(v.q1 + v.q2 - sum) <= 1e-10 * std::max(1.0, std::abs(sum)));
    }
    CHECK_THROWS_AS((void)baw_q_values({100, 0.0, 0.0, 0.2}, amer(OptionType::put, 100, 1)),
                    DegenerateInputError);
}

TEST_CASE("BAW critical prices") {
    const MarketParams p{100, 0.08, 0.0, 0.2};

    SUBCASE("no finite call boundary without dividends") {
        const auto cp = baw_critical_price(amer(OptionType::call, 100, 0.5), p);
        CHECK(std::isinf(cp.value));
        CHECK_FALSE(cp.is_finite());
    }
    SUBCASE("put boundary agrees with bisection") {
        const double expected = bisect_put_boundary(100, 0.08, 0.2, 0.25);
        CHECK(std::abs(expected - 89.36932551525283) < 1e-7);
        const auto cp = baw_critical_price(amer(OptionType::put, 100, 0.25), p);
        CHECK(std::abs(cp.value - expected) < 1e-3);
        CHECK(std::abs(cp.residual) < 1e-6 * 100);
        CHECK(cp.iterations > 0);
    }
    SUBCASE("dividend call boundary satisfies value matching") {
        const MarketParams d{100, 0.05, 0.04, 0.25};
        const auto spec = amer(OptionType::call, 100, 1.0);
        const auto cp = baw_critical_price(spec, d);
        REQUIRE(cp.is_finite());
        CHECK(cp.value > 100.0);
        CHECK(std::abs(baw_value_matching_residual(spec, d, cp.value)) < 1e-6 * 100);
    }
}

TEST_CASE("BAW prices") {
    SUBCASE("call without dividends equals BS") {
        for (double s : {80.0, 100.0, 120.0}) {
            const MarketParams p{s, 0.08, 0.0, 0.3};
            CHECK(std::abs(baw_price(amer(OptionType::call, 100, 0.5), p) -
                           bs_price(euro(OptionType::call, 100, 0.5), p)) <= 1e-12);
        }
    }
    SUBCASE("put beyond the boundary is intrinsic") {
        const MarketParams p89{89, 0.08, 0.0, 0.2};
        const auto eval = baw_evaluate(amer(OptionType::put, 100, 0.25), p89);
        REQUIRE(eval.intermediates.critical_price >= 89.0);
        CHECK(eval.exercised);
        CHECK(eval.price == 11.0);

        // S = 90 lies above S** = 89.37, so the premium branch applies
        const auto at90 = baw_evaluate(amer(OptionType::put, 100, 0.25), {90, 0.08, 0.0, 0.2});
        CHECK_FALSE(at90.exercised);
        CHECK(at90.price > 10.0);
    }
    SUBCASE("known values") {
        // Reference values from an independent implementation of the same approximation.
        CHECK(baw_price(amer(OptionType::put, 100, 1), {110, 0.05, 0.0, 0.2}) ==
              doctest::Approx(3.0315834).epsilon(1e-7));
        CHECK(baw_price(amer(OptionType::put, 100, 1), {120, 0.08, 0.0, 0.4}) ==
              doctest::Approx(6.8982322).epsilon(1e-7));
    }
    SUBCASE("zero rate falls back to European") {
        const MarketParams p{100, 0.0, 0.0, 0.2};
        const auto eval = baw_evaluate(amer(OptionType::put, 100, 1), p);
        CHECK(eval.degenerate);
        CHECK(eval.price == bs_price(euro(OptionType::put, 100, 1), p));
    }
    SUBCASE("expiry is intrinsic") {
        CHECK(baw_price(amer(OptionType::put, 100, 0), {90, 0.05, 0, 0.2}) == 10.0);
    }
    SUBCASE("dominance") {
        sysnoise::GaussianSource rng(11);
        for (int i = 0; i < 300; ++i) {
            const MarketParams p{50 + 100 * rng.uniform(), 0.001 + 0.1 * rng.uniform(),
                                 0.05 * rng.uniform(), 0.05 + 0.5 * rng.uniform()};
            const auto type = rng.uniform() < 0.5 ? OptionType::call : OptionType::put;
            const auto spec = amer(type, 100, 0.05 + 2 * rng.uniform());
            const double a = baw_price(spec, p);
            CHECK(a >= bs_price(european_twin(spec), p) - 1e-12);
            CHECK(a >= intrinsic_value(type, p.spot, 100) - 1e-12);
        }
    }
}

TEST_CASE("CRR binomial") {
    SUBCASE("one step by hand") {
        // u = 1.1, d = 1/1.1, r = 0: p = (1 - d)/(u - d) = 10/21, payoff 10 up, 0 down
        const double v = crr_binomial_price(euro(OptionType::call, 100, 1), {100, 0.0, 0.0, std::log(1.1)}, 1);
        CHECK(v == doctest::Approx(100.0 / 21.0).epsilon(1e-13));
    }
    SUBCASE("converges to BS") {
        const MarketParams p{100, 0.05, 0.0, 0.2};
        CHECK(std::abs(crr_binomial_price(euro(OptionType::call, 100, 1), p, 2000) - 10.450583572185565) < 5e-3);
    }
    SUBCASE("American at least European") {
        const MarketParams p{95, 0.06, 0.0, 0.25};
        for (int steps : {1, 2, 5, 50, 500}) {
            CHECK(crr_binomial_price(amer(OptionType::put, 100, 1), p, steps) >=
                  crr_binomial_price(euro(OptionType::put, 100, 1), p, steps));
        }
    }
    SUBCASE("invalid steps") {
        CHECK_THROWS_AS((void)crr_binomial_price(euro(OptionType::call, 100, 1), {100, 0.05, 0, 0.2}, 0),
                        DomainError);
    }
}
