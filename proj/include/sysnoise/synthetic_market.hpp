#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sysnoise/dates.hpp"

namespace sysnoise::synthetic {

/// Knobs of the simulated market. Volumes follow
///   log V_t = c + sum_i ar[i] log V_{t-1-i} + phi_bs x_bs_t + phi_baw x_baw_t + e_t
/// along the rows in (trade date, contract) order, which is the order the
/// pooled analysis lags them in.
struct SynthConfig {
    std::uint64_t seed = 1;
    Date start = Date{std::chrono::year{2015} / 1 / 2};
    std::size_t option_days = 60;
    std::size_t volatility_window = 21;

    double spot = 200.0;
    double drift = 0.05;
    double sigma = 0.15;

    double mid_bias = 0.8;     // added to the BAW price
    double mid_noise_sd = 0.5;
    double half_spread = 0.05;

    double volume_constant = 3.5;
    std::vector<double> ar = {0.3, 0.2};
    double phi_bs = 0.0;
    double phi_baw = 0.0;
    double volume_noise_sd = 0.1;
    /// When set, phi_bs is solved so |phi_bs m_bs + phi_baw m_baw| equals
    /// this share at the realised error means, with the sum negative.
    std::optional<double> target_share;

    double inactive_fraction = 0.1;  // extra rows with zero volume or open interest
    std::size_t crossed_rows = 2;    // extra rows with ask < bid
    std::size_t treasury_gap_every = 17;  // drop every n-th curve (carry-forward)
};

struct Truth {
    std::uint64_t seed = 0;
    double phi_bs = 0.0;
    double phi_baw = 0.0;
    double volume_constant = 0.0;
    std::vector<double> ar;
    double mean_x_bs = 0.0;
    double mean_x_baw = 0.0;
    double planted_share = 0.0;  // |phi_bs mean_x_bs + phi_baw mean_x_baw|
    std::size_t active_rows = 0;
    std::size_t option_rows = 0;
};

struct SyntheticMarket {
    std::string options_csv;
    std::string treasury_csv;
    std::string closes_csv;
    Truth truth;
};

/// Fully determined by the config (and its seed).
[[nodiscard]] SyntheticMarket synthesize_market(const SynthConfig& config);

[[nodiscard]] std::string truth_json(const Truth& truth);

/// Writes options.csv, treasury.csv, closes.csv and truth.json into `dir`,
/// creating it if needed. Throws std::runtime_error naming a path that
/// cannot be written.
void write_synthetic_market(const SyntheticMarket& market, const std::filesystem::path& dir);

}  // namespace sysnoise::synthetic
