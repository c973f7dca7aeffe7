#include "sysnoise/pricing_models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace sysnoise::pricing {

namespace {

constexpr int kMaxNewtonIterations = 100;
constexpr int kMaxBisectionIterations = 400;
constexpr double kResidualTolerance = 1e-6;  // relative to strike

bool finite(double x) { return std::isfinite(x); }

double carry_discount(const MarketParams& params, double tte) {
    return std::exp((params.cost_of_carry() - params.rate) * tte);
}

MarketParams at_spot(MarketParams params, double spot) {
    params.spot = spot;
    return params;
}

// Residual and its derivative with respect to the candidate boundary.
struct ResidualEval {
    double value;
    double slope;
};

ResidualEval value_matching(const OptionContractSpec& spec, const MarketParams& params,
                            const BawQValues& q, double candidate) {
    const OptionContractSpec twin = european_twin(spec);
    const MarketParams shifted = at_spot(params, candidate);
    const double tte = spec.time_to_expiry;
    const double vol_sqrt_t = params.volatility * std::sqrt(tte);
    const double carry = carry_discount(params, tte);
    const DValues d = bs_d_values(twin, shifted);
    const double euro = bs_price(twin, shifted);
    const double density = std::exp(-0.5 * d.d1 * d.d1) / std::sqrt(2.0 * std::numbers::pi);

    if (spec.type == OptionType::call) {
        const double nd1 = std::erfc(-d.d1 / std::numbers::sqrt2) * 0.5;
        const double value =
            euro + (1.0 - carry * nd1) * candidate / q.q2 - (candidate - spec.strike);
        const double slope = carry * nd1 * (1.0 - 1.0 / q.q2) + 1.0 / q.q2 -
                             carry * density / (q.q2 * vol_sqrt_t) - 1.0;
        return {value, slope};
    }
    const double nmd1 = std::erfc(d.d1 / std::numbers::sqrt2) * 0.5;
    const double value =
        euro - (1.0 - carry * nmd1) * candidate / q.q1 - (spec.strike - candidate);
    const double slope = -carry * nmd1 * (1.0 - 1.0 / q.q1) - 1.0 / q.q1 -
                         carry * density / (q.q1 * vol_sqrt_t) + 1.0;
    return {value, slope};
}

CriticalPrice bisect_boundary(const OptionContractSpec& spec, const MarketParams& params,
                              const BawQValues& q, int iterations_so_far) {
    const double tol = kResidualTolerance * spec.strike;
    double lo = 1e-8 * spec.strike;
    double hi = 10.0 * spec.strike;
    double f_lo = value_matching(spec, params, q, lo).value;
    double f_hi = value_matching(spec, params, q, hi).value;
    int iterations = iterations_so_far;

    for (int widen = 0; std::signbit(f_lo) == std::signbit(f_hi); ++widen) {
        if (widen > 60 || !finite(f_hi)) {
            throw SolverError("critical price: no sign change in bisection bracket", hi, f_hi,
                              iterations);
        }
        lo = hi;
        f_lo = f_hi;
        hi *= 2.0;
        f_hi = value_matching(spec, params, q, hi).value;
    }

    double mid = 0.5 * (lo + hi);
    double f_mid = value_matching(spec, params, q, mid).value;
    for (int i = 0; i < kMaxBisectionIterations; ++i) {
        ++iterations;
        if (std::abs(f_mid) < tol && (hi - lo) < 1e-9 * spec.strike) {
            return {mid, iterations, f_mid};
        }
        if (std::signbit(f_mid) == std::signbit(f_lo)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
        mid = 0.5 * (lo + hi);
        f_mid = value_matching(spec, params, q, mid).value;
    }
    if (std::abs(f_mid) < tol) {
        return {mid, iterations, f_mid};
    }
    throw SolverError("critical price: bisection did not converge", mid, f_mid, iterations);
}

}  // namespace

const char* to_string(OptionType type) noexcept {
    return type == OptionType::call ? "call" : "put";
}

const char* to_string(ExerciseStyle style) noexcept {
    return style == ExerciseStyle::european ? "european" : "american";
}

OptionContractSpec european_twin(OptionContractSpec spec) noexcept {
    spec.style = ExerciseStyle::european;
    return spec;
}

double intrinsic_value(OptionType type, double spot, double strike) noexcept {
    return type == OptionType::call ? std::max(spot - strike, 0.0)
                                    : std::max(strike - spot, 0.0);
}

void validate(const OptionContractSpec& spec) {
    if (!finite(spec.strike) || spec.strike <= 0.0) {
        throw DomainError("strike must be positive and finite");
    }
    if (!finite(spec.time_to_expiry) || spec.time_to_expiry < 0.0) {
        throw DomainError("time to expiry must be non-negative and finite");
    }
}

void validate(const MarketParams& params) {
    if (!finite(params.spot) || params.spot <= 0.0) {
        throw DomainError("spot must be positive and finite");
    }
    if (!finite(params.rate)) {
        throw DomainError("rate must be finite");
    }
    if (!finite(params.dividend_yield) || params.dividend_yield < 0.0) {
        throw DomainError("dividend yield must be non-negative and finite");
    }
    if (!finite(params.volatility) || params.volatility <= 0.0) {
        throw DomainError("volatility must be positive and finite");
    }
}

double std_normal_cdf(double x) {
    if (!finite(x)) {
        throw DomainError("std_normal_cdf: non-finite argument");
    }
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double std_normal_pdf(double x) noexcept {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

DValues bs_d_values(const OptionContractSpec& spec, const MarketParams& params) {
    if (spec.time_to_expiry == 0.0 || params.volatility == 0.0) {
        throw DegenerateInputError("d1/d2 undefined for zero time to expiry or zero volatility");
    }
    validate(spec);
    validate(params);
    const double vol_sqrt_t = params.volatility * std::sqrt(spec.time_to_expiry);
    const double d1 = (std::log(params.spot / spec.strike) +
                       (params.cost_of_carry() + 0.5 * params.volatility * params.volatility) *
                           spec.time_to_expiry) /
                      vol_sqrt_t;
    return {d1, d1 - vol_sqrt_t};
}

double bs_price(const OptionContractSpec& spec, const MarketParams& params) {
    if (spec.style != ExerciseStyle::european) {
        throw DomainError("bs_price requires a European contract; price its european_twin");
    }
    validate(spec);
    validate(params);
    if (spec.time_to_expiry == 0.0) {
        return intrinsic_value(spec.type, params.spot, spec.strike);
    }
    const auto [d1, d2] = bs_d_values(spec, params);
    const double tte = spec.time_to_expiry;
    const double fwd_spot = params.spot * carry_discount(params, tte);
    const double pv_strike = spec.strike * std::exp(-params.rate * tte);
    const double price = spec.type == OptionType::call
                             ? fwd_spot * std_normal_cdf(d1) - pv_strike * std_normal_cdf(d2)
                             : pv_strike * std_normal_cdf(-d2) - fwd_spot * std_normal_cdf(-d1);
    return std::max(price, 0.0);
}

BawQValues baw_q_values(const MarketParams& params, const OptionContractSpec& spec) {
    validate(spec);
    validate(params);
    if (params.rate < kMinBawRate) {
        throw DegenerateInputError("BAW q-values need a positive rate (2r/(sigma^2 X) is 0/0)");
    }
    if (spec.time_to_expiry == 0.0) {
        throw DegenerateInputError("BAW q-values need positive time to expiry");
    }
    const double var = params.volatility * params.volatility;
    const double big_x = 1.0 - std::exp(-params.rate * spec.time_to_expiry);
    const double n_minus_1 = 2.0 * params.cost_of_carry() / var - 1.0;
    const double m_over_x = 2.0 * params.rate / (var * big_x);
    const double root = std::sqrt(n_minus_1 * n_minus_1 + 4.0 * m_over_x);
    return {0.5 * (-n_minus_1 - root), 0.5 * (-n_minus_1 + root), big_x};
}

bool CriticalPrice::is_finite() const noexcept { return std::isfinite(value); }

double baw_value_matching_residual(const OptionContractSpec& spec, const MarketParams& params,
                                   double candidate) {
    if (!finite(candidate) || candidate <= 0.0) {
        throw DomainError("critical price candidate must be positive and finite");
    }
    const BawQValues q = baw_q_values(params, spec);
    return value_matching(spec, params, q, candidate).value;
}

CriticalPrice baw_critical_price(const OptionContractSpec& spec, const MarketParams& params) {
    if (spec.style != ExerciseStyle::american) {
        throw DomainError("critical price is only defined for American contracts");
    }
    const BawQValues q = baw_q_values(params, spec);
    if (spec.type == OptionType::call && params.cost_of_carry() >= params.rate) {
        return {std::numeric_limits<double>::infinity(), 0, 0.0};
    }

    const double tol = kResidualTolerance * spec.strike;
    double s = spec.strike;
    ResidualEval eval = value_matching(spec, params, q, s);
    for (int i = 1; i <= kMaxNewtonIterations; ++i) {
        if (std::abs(eval.value) < tol) {
            return {s, i - 1, eval.value};
        }
        const double next = s - eval.value / eval.slope;
        if (!finite(next) || next <= 0.0) {
            return bisect_boundary(spec, params, q, i);
        }
        s = next;
        eval = value_matching(spec, params, q, s);
    }
    if (std::abs(eval.value) < tol) {
        return {s, kMaxNewtonIterations, eval.value};
    }
    throw SolverError("critical price: Newton did not converge", s, eval.value,
                      kMaxNewtonIterations);
}

BawEvaluation baw_evaluate(const OptionContractSpec& spec, const MarketParams& params) {
    if (spec.style != ExerciseStyle::american) {
        throw DomainError("baw_price requires an American contract");
    }
    validate(spec);
    validate(params);

    BawEvaluation out;
    const OptionContractSpec twin = european_twin(spec);
    if (spec.time_to_expiry == 0.0) {
        out.price = out.european_price = intrinsic_value(spec.type, params.spot, spec.strike);
        out.degenerate = true;
        return out;
    }
    out.european_price = bs_price(twin, params);
    if (params.rate < kMinBawRate) {
        out.price = out.european_price;
        out.degenerate = true;
        return out;
    }

    const BawQValues q = baw_q_values(params, spec);
    out.intermediates.q1 = q.q1;
    out.intermediates.q2 = q.q2;
    out.intermediates.big_x = q.big_x;

    const CriticalPrice boundary = baw_critical_price(spec, params);
    out.intermediates.critical_price = boundary.value;
    out.intermediates.iterations_used = boundary.iterations;
    if (!boundary.is_finite()) {
        out.price = out.european_price;
        return out;
    }

    const double s_crit = boundary.value;
    const double carry = carry_discount(params, spec.time_to_expiry);
    const DValues d_crit = bs_d_values(twin, at_spot(params, s_crit));

    if (spec.type == OptionType::call) {
        const double a2 = (s_crit / q.q2) * (1.0 - carry * std_normal_cdf(d_crit.d1));
        out.intermediates.a2 = a2;
        if (params.spot < s_crit) {
            out.price = out.european_price + std::pow(params.spot / s_crit, q.q2) * a2;
        } else {
            out.price = params.spot - spec.strike;
            out.exercised = true;
        }
    } else {
        const double a1 = -(s_crit / q.q1) * (1.0 - carry * std_normal_cdf(-d_crit.d1));
        out.intermediates.a1 = a1;
        if (params.spot > s_crit) {
            out.price = out.european_price + std::pow(params.spot / s_crit, q.q1) * a1;
        } else {
            out.price = spec.strike - params.spot;
            out.exercised = true;
        }
    }
    return out;
}

double baw_price(const OptionContractSpec& spec, const MarketParams& params) {
    return baw_evaluate(spec, params).price;
}

double crr_binomial_price(const OptionContractSpec& spec, const MarketParams& params, int steps) {
    if (steps < 1) {
        throw DomainError("binomial tree needs at least one step");
    }
    validate(spec);
    validate(params);
    if (spec.time_to_expiry == 0.0) {
        return intrinsic_value(spec.type, params.spot, spec.strike);
    }

    const double dt = spec.time_to_expiry / steps;
    const double up = std::exp(params.volatility * std::sqrt(dt));
    const double down = 1.0 / up;
    const double p_up = (std::exp(params.cost_of_carry() * dt) - down) / (up - down);
    if (!(p_up > 0.0 && p_up < 1.0)) {
        throw DomainError("binomial tree: risk-neutral probability outside (0,1); add steps");
    }
    const double disc = std::exp(-params.rate * dt);
    const double w_up = disc * p_up;
    const double w_down = disc * (1.0 - p_up);
    const bool american = spec.style == ExerciseStyle::american;

    // spot_at[k + steps] = S u^k for k in [-steps, steps]
    const auto n = static_cast<std::size_t>(steps);
    std::vector<double> spot_at(2 * n + 1);
    spot_at[n] = params.spot;
    for (std::size_t k = 1; k <= n; ++k) {
        spot_at[n + k] = spot_at[n + k - 1] * up;
        spot_at[n - k] = spot_at[n - k + 1] * down;
    }

    std::vector<double> values(n + 1);
    for (std::size_t j = 0; j <= n; ++j) {
        values[j] = intrinsic_value(spec.type, spot_at[2 * j], spec.strike);
    }
    for (std::size_t level = n; level-- > 0;) {
        // node j at `level` sits at S u^(2j - level)
        for (std::size_t j = 0; j <= level; ++j) {
            double v = w_up * values[j + 1] + w_down * values[j];
            if (american) {
                v = std::max(v, intrinsic_value(spec.type, spot_at[n - level + 2 * j], spec.strike));
            }
            values[j] = v;
        }
    }
    return values[0];
}

}  // namespace sysnoise::pricing
