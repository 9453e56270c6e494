#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "crplus/portfolio.hpp"

namespace crplus {

// One exposure band: `v` loss units per default, `epsilon` expected loss in
// units, `mu = epsilon / v` expected number of defaults.
struct Band {
    std::int64_t v = 1;
    double epsilon = 0.0;
    double mu = 0.0;
};

/// Gamma mixing parameters of one sector.
///
/// `mean_rate` and `rate_stddev` are the sector's default-rate moments as
/// given. The default count of the sector is negative binomial; `mu` and
/// `sigma` are the mean and standard deviation of the gamma-mixed intensity
/// in *count* units, so that alpha = mu^2 / sigma^2, beta = sigma^2 / mu and
/// rho = beta / (1 + beta) parameterize the count PGF
/// ((1 - rho) / (1 - rho z))^alpha. The relative volatility
/// sigma / mu = rate_stddev / mean_rate is shared by both scales.
///
/// A sector with rate_stddev == 0 is pure Poisson: alpha is +inf and
/// beta = rho = 0.
struct SectorParams {
    double mean_rate = 0.0;
    double rate_stddev = 0.0;
    double mu = 0.0;
    double sigma = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    double rho = 0.0;

    static SectorParams from_rates(double mean_rate, double rate_stddev, double expected_count);

    bool is_poisson() const { return rate_stddev == 0.0; }
    // (sigma / mu)^2, zero for Poisson sectors.
    double relative_variance() const;
};

struct BandedSector {
    std::string name;
    SectorParams params;
    std::vector<Band> bands;  // sorted by v, one entry per distinct v

    double expected_count() const;
    double expected_loss_units() const;
    std::int64_t max_v() const;
};

// Where one obligor sub-exposure landed after banding.
struct ObligorBand {
    std::size_t obligor = 0;
    std::size_t sector = 0;
    std::int64_t v = 1;
    double epsilon = 0.0;
};

struct ObligorInfo {
    std::string id;
    std::string name;
};

struct BandedPortfolio {
    double unit = 1.0;
    std::vector<BandedSector> sectors;
    std::vector<ObligorInfo> obligors;  // portfolio order
    std::vector<ObligorBand> obligor_bands;

    std::int64_t max_v() const;
    double expected_loss() const;  // money
    // Analytic variance of the sector model, money^2:
    // unit^2 * sum_k [ sum_j eps_j v_j + (sigma_k/mu_k)^2 (sum_j eps_j)^2 ].
    double variance() const;
};

// Rounds each sub-exposure up to an integer number of units and merges
// sub-exposures that share (sector, v). Expected loss is preserved exactly;
// exposure is inflated by the round-up.
BandedPortfolio band_exposures(const SectoredPortfolio& sectored, double unit);

double poisson_rate(std::span<const Band> bands);
double poisson_rate(const BandedPortfolio& banded);

// Dense coefficients of the normalized severity polynomial, indexed by degree
// 0..max v. Throws ModelError when every band has mu == 0.
std::vector<double> severity_polynomial(std::span<const Band> bands);

/// Lattice distribution of aggregate loss: pmf[n] = P(loss = n * unit).
/// Mass beyond the grid is tracked in truncation_mass, never renormalized.
struct LossDistribution {
    double unit = 1.0;
    std::vector<double> pmf;
    double truncation_mass = 0.0;

    std::size_t size() const { return pmf.size(); }
};

inline constexpr double kNegativeClampLimit = 1e-14;

// Clamps round-off negatives (>= -1e-14) to zero and sets truncation_mass.
LossDistribution make_loss_distribution(double unit, std::vector<double> pmf);

LossDistribution point_mass(double unit, std::size_t at, std::size_t grid_size);

// Compound Poisson over every band of every sector, gamma mixing ignored.
LossDistribution loss_dist_poisson(const BandedPortfolio& banded, std::size_t grid_size);
// Gamma-mixed sector model by per-sector Panjer recursion and convolution.
LossDistribution loss_dist_sector(const BandedPortfolio& banded, std::size_t grid_size);
// Gamma-mixed sector model by inverting the closed-form PGF on the unit
// circle. grid_size must be a power of two >= 2 * (1 + max v).
LossDistribution loss_dist_fft(const BandedPortfolio& banded, std::size_t grid_size);

// Sector pmf for one sector alone (negative binomial or Poisson compound).
LossDistribution sector_distribution(const BandedSector& sector, double unit, std::size_t grid_size);

LossDistribution convolve(const LossDistribution& a, const LossDistribution& b);

enum class Backend { Panjer, Fft };
std::string to_string(Backend backend);
Backend parse_backend(std::string_view text);

// Smallest power of two >= 4 * (mean + 20 sd) / unit and >= 2 * (1 + max v).
// Sectors with alpha < 1 also reserve room for ~1e-13 count-tail mass.
std::size_t auto_grid_size(const BandedPortfolio& banded);

LossDistribution compute_loss_distribution(const BandedPortfolio& banded, Backend backend,
                                           std::size_t grid_size);

double total_variation(const LossDistribution& a, const LossDistribution& b);

}  // namespace crplus
