#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "crplus/engine.hpp"
#include "crplus/portfolio.hpp"

namespace crplus {

// Monte Carlo re-simulation of the sector model, independent of the PGF
// machinery in engine.hpp.

enum class SimMode { PoissonBanded, BernoulliExact };

std::string to_string(SimMode mode);
SimMode parse_sim_mode(std::string_view text);

struct SimConfig {
    std::uint64_t n_draws = 100000;
    std::uint64_t seed = 42;
    SimMode mode = SimMode::PoissonBanded;
    unsigned workers = 0;  // 0: hardware concurrency; never changes the result
};

struct EmpiricalDistribution {
    std::vector<double> sample;  // sorted ascending, money
    std::uint64_t n_draws = 0;
    std::uint64_t clamp_count = 0;  // Bernoulli draws with p * scaling > 1
    SimMode mode = SimMode::PoissonBanded;

    double mean() const;
    double stddev() const;
};

/// Draws n_draws aggregate losses. Each draw samples one gamma factor per
/// sector (shape alpha_k, scale 1/alpha_k, so its mean is 1), then
///  - poisson-banded: Poisson(mu_j * factor) defaults per band, v_j units each;
///  - bernoulli-exact: one Bernoulli(min(p_i * factor, 1)) per sub-exposure,
///    paying the un-banded sub-exposure.
/// Draws are generated in fixed-size chunks with per-chunk seeds, so the
/// sample depends only on (seed, n_draws, mode).
EmpiricalDistribution simulate(const SectoredPortfolio& sectored, const BandedPortfolio& banded,
                               const SimConfig& config);

// Inverse-CDF sampling from a lattice distribution; truncated mass maps to
// one grid step past the end.
EmpiricalDistribution sample_distribution(const LossDistribution& d, std::uint64_t n_draws, std::uint64_t seed);

// Smallest sample value x with #{samples > x} / n <= eps.
double empirical_exceedance_quantile(const EmpiricalDistribution& e, double eps);

struct ComparisonRow {
    double level = 0.0;
    double analytic = 0.0;
    double empirical = 0.0;
    double se_prob = 0.0;  // sqrt(eps (1 - eps) / n)
    double band_lo = 0.0;  // analytic quantile at eps + 3 se
    double band_hi = 0.0;  // analytic quantile at eps - 3 se
    double se_loss = 0.0;  // (band_hi - band_lo) / 6
    bool flagged = false;
};

struct ComparisonReport {
    std::vector<ComparisonRow> rows;
    std::size_t flag_count = 0;
    double analytic_mean = 0.0;
    double empirical_mean = 0.0;
    double empirical_stddev = 0.0;
    std::uint64_t n_draws = 0;
    std::uint64_t clamp_count = 0;
    double total_exposure = 0.0;
    double analytic_prob_above_exposure = 0.0;
    double empirical_prob_above_exposure = 0.0;
};

inline constexpr double kFlagSigmas = 3.0;

/// Flags a level when the empirical quantile falls outside the analytic
/// quantiles at eps -/+ 3 binomial standard errors. On a lattice this is the
/// delta-method band se_p / density evaluated with a finite difference of
/// the inverse CDF.
ComparisonReport compare(const LossDistribution& analytic, const EmpiricalDistribution& empirical,
                         std::span<const double> levels, double total_exposure);

}  // namespace crplus
