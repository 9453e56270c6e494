#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "crplus/engine.hpp"
#include "crplus/portfolio.hpp"

namespace crplus {

// Exceedance levels of the reference marginal-percentile table, 0.5 excluded
// (that row is the mean and is reported as such).
inline const std::vector<double> kDefaultLevels = {0.1, 0.05, 0.025, 0.01, 0.005, 0.0025, 0.001};

inline constexpr double kTruncationCaveat = 1e-9;

// Smallest grid point x with P(loss > x) <= eps. Throws ModelError when the
// grid's truncation mass is not below eps.
double exceedance_quantile(const LossDistribution& d, double eps);

struct Moments {
    double mean = 0.0;
    double variance = 0.0;
    bool truncated = false;  // truncation_mass > 1e-9

    bool operator==(const Moments&) const = default;
};

Moments moments(const LossDistribution& d);

struct QuantileRow {
    double exceedance_prob = 0.0;
    double loss = 0.0;

    bool operator==(const QuantileRow&) const = default;
};

struct ContributionRow {
    std::string id;
    std::string name;
    double expected_loss = 0.0;
    double variance_contribution = 0.0;
    std::vector<double> contributions;  // one per level

    bool operator==(const ContributionRow&) const = default;
};

struct ContributionTable {
    std::vector<double> levels;
    std::vector<ContributionRow> rows;
    ContributionRow total;

    bool operator==(const ContributionTable&) const = default;
};

/// Allocates VaR at each level to obligors:
///   c_i = EL_i + (VaR - EL) * VC_i / sum_j VC_j
/// with VC_i the obligor's share of the analytic variance,
///   VC_i = sum_sub eps_i v_i unit^2 + sum_k (sigma_k/mu_k)^2 (eps_ik unit)(eps_k unit).
/// Contributions add up to VaR exactly up to rounding.
ContributionTable risk_contributions(const BandedPortfolio& banded, const LossDistribution& d,
                                     std::span<const double> levels);

struct SectorSummary {
    std::string name;
    double mean_rate = 0.0;
    double rate_stddev = 0.0;
    double expected_count = 0.0;
    double alpha = 0.0;  // 0 encodes +inf (Poisson sector) in reports
    double beta = 0.0;
    double rho = 0.0;
    std::size_t band_count = 0;

    bool operator==(const SectorSummary&) const = default;
};

struct RunInfo {
    std::string input;
    double unit = 1.0;
    std::size_t grid_size = 0;
    std::string sector_mode;
    std::string backend;
    double discount_rate = 0.0;
    double discount_horizon = 0.0;
    double tolerance = kDefaultValidationTolerance;

    bool operator==(const RunInfo&) const = default;
};

struct RiskReport {
    RunInfo run;
    std::string currency_unit;
    double total_exposure = 0.0;
    double expected_loss = 0.0;  // banded, analytic
    double analytic_variance = 0.0;
    Moments moments;
    double truncation_mass = 0.0;
    std::vector<QuantileRow> quantiles;
    ContributionTable contributions;
    std::vector<SectorSummary> sectors;
    std::vector<ValidationFinding> findings;

    bool operator==(const RiskReport&) const = default;
};

RiskReport build_report(const Portfolio& portfolio, const BandedPortfolio& banded, const LossDistribution& d,
                        std::span<const double> levels, RunInfo run, std::vector<ValidationFinding> findings = {});

}  // namespace crplus
