#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace crplus {

// One insured entity. Rates are fractions (0.0312), never percentages.
struct ObligorRecord {
    std::string id;
    std::string name;
    double exposure = 0.0;          // money, > 0
    double mean_loss_rate = 0.0;    // [0, 1]
    double loss_rate_stddev = 0.0;  // >= 0
    double crop_ratio = 0.0;        // [0, 1]
    double livestock_ratio = 0.0;   // [0, 1]
    std::optional<double> expected_loss_declared;

    double expected_loss() const { return exposure * mean_loss_rate; }

    bool operator==(const ObligorRecord&) const = default;
};

struct Portfolio {
    std::vector<ObligorRecord> obligors;
    std::string currency_unit = "M EUR";
    std::optional<std::string> as_of;

    double total_exposure() const;
    double total_expected_loss() const;
    const ObligorRecord* find(std::string_view id) const;

    bool operator==(const Portfolio&) const = default;
};

// Throws InputError naming the offending row and column.
Portfolio parse_portfolio(std::string_view csv_text);
Portfolio read_portfolio(const std::filesystem::path& path);
std::string serialize_portfolio(const Portfolio& portfolio);

inline constexpr double kDefaultValidationTolerance = 0.02;

enum class FindingKind { ExpectedLossMismatch, RatioSum };
enum class Severity { Warning, Error };

struct ValidationFinding {
    std::string obligor_id;
    FindingKind kind = FindingKind::ExpectedLossMismatch;
    Severity severity = Severity::Warning;
    double observed = 0.0;
    double expected = 0.0;
    std::string message;

    bool operator==(const ValidationFinding&) const = default;
};

std::string to_string(FindingKind kind);
std::string to_string(Severity severity);

/// Checks the declared expected loss against exposure x mean rate and the
/// crop/livestock split against 1. Findings are data: nothing throws.
///
/// A relative deviation above `tol` is a warning. It becomes an error above
/// 10 x tol for expected loss (typically a percent/fraction mix-up), or when
/// a split sums to zero and cannot be renormalized.
std::vector<ValidationFinding> validate_portfolio(const Portfolio& portfolio,
                                                  double tol = kDefaultValidationTolerance);

struct DiscountSpec {
    double rate = 0.0;     // annual, continuously compounded
    double horizon = 0.0;  // years, >= 0
};

// Multiplies every exposure by exp(-rate * horizon).
Portfolio discount_exposures(const Portfolio& portfolio, const DiscountSpec& spec);

enum class SectorMode { Single, CropLivestock, PerObligor };

std::string to_string(SectorMode mode);
SectorMode parse_sector_mode(std::string_view text);

struct SectorRate {
    double mean = 0.0;
    double stddev = 0.0;
};

struct SectorAssignment {
    SectorMode mode = SectorMode::CropLivestock;
    // Overrides keyed by sector name ("portfolio", "crop", "livestock").
    // Sectors without an override use exposure-weighted averages of the
    // obligor rates they hold. Not allowed in per-obligor mode.
    std::map<std::string, SectorRate> sector_rates;
};

struct SectorDef {
    std::string name;
    SectorRate rate;
};

struct SubExposure {
    std::size_t obligor = 0;  // index into portfolio.obligors
    std::size_t sector = 0;   // index into sectors
    double exposure = 0.0;
    double loss_rate = 0.0;
};

struct SectoredPortfolio {
    Portfolio portfolio;
    SectorMode mode = SectorMode::Single;
    std::vector<SectorDef> sectors;
    std::vector<SubExposure> sub_exposures;
};

inline constexpr double kRatioRenormalizeThreshold = 1e-9;

SectoredPortfolio assign_sectors(const Portfolio& portfolio, const SectorAssignment& assignment);

}  // namespace crplus
