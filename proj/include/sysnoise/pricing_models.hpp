#pragma once

#include <stdexcept>
#include <string>

namespace sysnoise::pricing {

enum class OptionType { call, put };
enum class ExerciseStyle { european, american };

[[nodiscard]] const char* to_string(OptionType type) noexcept;
[[nodiscard]] const char* to_string(ExerciseStyle style) noexcept;

/// Contractual terms of a single option.
struct OptionContractSpec {
    OptionType type = OptionType::call;
    ExerciseStyle style = ExerciseStyle::european;
    double strike = 0.0;          // K, must be > 0
    double time_to_expiry = 0.0;  // years, must be >= 0
};

/// Pricing inputs at one moment. The cost of carry is always derived as
/// rate - dividend_yield and never stored.
struct MarketParams {
    double spot = 0.0;
    double rate = 0.0;
    double dividend_yield = 0.0;
    double volatility = 0.0;

    [[nodiscard]] double cost_of_carry() const noexcept { return rate - dividend_yield; }
};

/// Same contract, exercisable only at expiry.
[[nodiscard]] OptionContractSpec european_twin(OptionContractSpec spec) noexcept;

[[nodiscard]] double intrinsic_value(OptionType type, double spot, double strike) noexcept;

/// Raised for inputs outside an operation's domain (negative strike, NaN, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Raised when an input is valid but collapses a formula (T == 0, sigma == 0, r == 0).
class DegenerateInputError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Critical-price root finder failed to converge.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double last_iterate, double residual, int iterations)
        : std::runtime_error(what),
          last_iterate_(last_iterate),
          residual_(residual),
          iterations_(iterations) {}

    [[nodiscard]] double last_iterate() const noexcept { return last_iterate_; }
    [[nodiscard]] double residual() const noexcept { return residual_; }
    [[nodiscard]] int iterations() const noexcept { return iterations_; }

private:
    double last_iterate_;
    double residual_;
    int iterations_;
};

void validate(const OptionContractSpec& spec);
void validate(const MarketParams& params);

/// Standard normal CDF, accurate to about 1e-16 absolute via erfc.
[[nodiscard]] double std_normal_cdf(double x);

/// Standard normal density.
[[nodiscard]] double std_normal_pdf(double x) noexcept;

struct DValues {
    double d1;
    double d2;
};

/// d1 = (ln(S/K) + (b + sigma^2/2) T) / (sigma sqrt T), d2 = d1 - sigma sqrt T.
/// With zero dividend yield b == r and this is the textbook form.
/// Throws DegenerateInputError when T == 0 or sigma == 0.
[[nodiscard]] DValues bs_d_values(const OptionContractSpec& spec, const MarketParams& params);

/// Closed-form European price (generalised with continuous dividend yield).
/// At expiry returns intrinsic value without touching d1/d2.
[[nodiscard]] double bs_price(const OptionContractSpec& spec, const MarketParams& params);

/// Roots of q^2 + q (2b/sigma^2 - 1) - 2r/(sigma^2 X) = 0 with
/// X = 1 - exp(-r T). Note that X here is the time-scaling function, not
/// the strike; the quadratic's constant term uses X(T).
struct BawQValues {
    double q1;     // < 0
    double q2;     // > 0
    double big_x;  // X(T) in (0, 1]
};

/// Rates below this are treated as zero; no early-exercise premium is
/// computable there and baw_price falls back to the European price.
inline constexpr double kMinBawRate = 1e-12;

[[nodiscard]] BawQValues baw_q_values(const MarketParams& params, const OptionContractSpec& spec);

struct CriticalPrice {
    double value;     // S* for calls, S** for puts; +inf when no finite boundary exists
    int iterations;   // Newton steps plus any bisection steps
    double residual;  // value-matching residual at `value` (0 for the sentinel)

    [[nodiscard]] bool is_finite() const noexcept;
};

/// Early-exercise boundary from the value-matching condition.
///
/// Newton-Raphson seeded at the strike with tolerance 1e-6 K on the residual
/// and at most 100 iterations. If an iterate leaves the positive half-line the
/// solver restarts with bisection on (tiny, 10 K), widening the upper end if no
/// sign change is found. A call whose carry equals the rate has no finite
/// boundary and returns +inf.
[[nodiscard]] CriticalPrice baw_critical_price(const OptionContractSpec& spec,
                                               const MarketParams& params);

/// Value-matching residual whose root is the critical price.
[[nodiscard]] double baw_value_matching_residual(const OptionContractSpec& spec,
                                                 const MarketParams& params,
                                                 double candidate);

struct BawIntermediates {
    double q1 = 0.0;
    double q2 = 0.0;
    double big_x = 0.0;
    double a1 = 0.0;
    double a2 = 0.0;
    double critical_price = 0.0;
    int iterations_used = 0;
};

struct BawEvaluation {
    double price = 0.0;
    double european_price = 0.0;
    bool exercised = false;    // spot is beyond the boundary, price == intrinsic
    bool degenerate = false;   // rate below kMinBawRate or T == 0, no premium computed
    BawIntermediates intermediates;
};

/// Full Barone-Adesi/Whaley evaluation exposing every intermediate.
[[nodiscard]] BawEvaluation baw_evaluate(const OptionContractSpec& spec, const MarketParams& params);

/// Barone-Adesi/Whaley quadratic approximation of an American option.
[[nodiscard]] double baw_price(const OptionContractSpec& spec, const MarketParams& params);

/// Cox-Ross-Rubinstein binomial tree for either exercise style.
[[nodiscard]] double crr_binomial_price(const OptionContractSpec& spec,
                                        const MarketParams& params,
                                        int steps);

}  // namespace sysnoise::pricing
