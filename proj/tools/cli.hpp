#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "crplus/analytics.hpp"
#include "crplus/engine.hpp"
#include "crplus/oracle.hpp"
#include "crplus/portfolio.hpp"

namespace crplus::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitModel = 1;
inline constexpr int kExitUsage = 2;

struct RunConfig {
    std::string input = "data/table1_eu22.csv";
    double unit = 1.0;
    SectorMode sector_mode = SectorMode::CropLivestock;
    std::map<std::string, SectorRate> sector_rates;
    DiscountSpec discount;
    Backend backend = Backend::Panjer;
    std::size_t grid = 0;  // 0: auto
    std::vector<double> levels = kDefaultLevels;
    std::uint64_t seed = 42;
    std::uint64_t n_draws = 100000;
    SimMode mc_mode = SimMode::PoissonBanded;
    std::string out = "out";
    double tolerance = kDefaultValidationTolerance;
    bool raw_samples = false;
};

// Everything one analytic run produces, in pipeline order.
struct Pipeline {
    Portfolio portfolio;
    std::vector<ValidationFinding> findings;
    SectoredPortfolio sectored;
    BandedPortfolio banded;
    LossDistribution distribution;
    RunInfo run;
};

Pipeline run_pipeline(const RunConfig& config);

int cmd_validate(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_analyze(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_simulate(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_dist(const RunConfig& config, std::ostream& out, std::ostream& err);

// Parses argv (program name first) and dispatches. Exit codes: 0 success,
// 1 pipeline/model error, 2 usage/input error.
int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

}  // namespace crplus::cli
