#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "crplus/analytics.hpp"
#include "crplus/error.hpp"
#include "crplus/oracle.hpp"
#include "test_support.hpp"

using namespace crplus;
using Catch::Approx;

namespace {

struct Model {
    Portfolio portfolio;
    SectoredPortfolio sectored;
    BandedPortfolio banded;
};

Model model(Portfolio p, SectorMode mode, double unit = 1.0) {
    Model m;
    m.portfolio = std::move(p);
    m.sectored = assign_sectors(m.portfolio, {mode, {}});
    m.banded = band_exposures(m.sectored, unit);
    return m;
}

Portfolio single(double exposure, double rate, double sd) {
    Portfolio p;
    p.obligors.push_back({"A", "A", exposure, rate, sd, 0.5, 0.5, std::nullopt});
    return p;
}

EmpiricalDistribution from_values(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    EmpiricalDistribution e;
    e.n_draws = v.size();
    e.sample = std::move(v);
    return e;
}

}  // namespace

TEST_CASE("empirical_exceedance_quantile", "[oracle]") {
    std::vector<double> v(100);
    std::iota(v.begin(), v.end(), 0.0);
    const auto e = from_values(v);
    // five values (95..99) exceed 94
    CHECK(empirical_exceedance_quantile(e, 0.05) == 94.0);
    CHECK(empirical_exceedance_quantile(e, 0.01) == 98.0);
    CHECK(empirical_exceedance_quantile(from_values({7, 7, 7}), 0.1) == 7.0);
    CHECK(empirical_exceedance_quantile(from_values({1, 2, 3, 4}), 0.5) == 2.0);
    CHECK_THROWS_AS(empirical_exceedance_quantile(EmpiricalDistribution{}, 0.1), InputError);
}

TEST_CASE("simulate degenerate portfolios", "[oracle]") {
    SECTION("zero loss rates never lose") {
        Portfolio p;
        p.obligors.push_back({"A", "A", 100.0, 0.0, 0.0, 0.5, 0.5, std::nullopt});
        const auto m = model(p, SectorMode::Single);
        for (auto mode : {SimMode::PoissonBanded, SimMode::BernoulliExact}) {
            const auto e = simulate(m.sectored, m.banded, {1000, 1, mode});
            CHECK(e.sample.front() == 0.0);
            CHECK(e.sample.back() == 0.0);
        }
    }
    SECTION("certain default pays the exposure exactly once under bernoulli-exact") {
        const auto m = model(single(100.0, 1.0, 0.0), SectorMode::Single);
        const auto e = simulate(m.sectored, m.banded, {1000, 1, SimMode::BernoulliExact});
        CHECK(e.sample.front() == 100.0);
        CHECK(e.sample.back() == 100.0);
        CHECK(e.clamp_count == 0);
    }
    SECTION("bernoulli-exact counts clamped probabilities") {
        const auto m = model(single(100.0, 0.5, 0.5), SectorMode::Single);
        const auto e = simulate(m.sectored, m.banded, {20000, 3, SimMode::BernoulliExact});
        CHECK(e.clamp_count > 0);
        CHECK(e.sample.back() <= 100.0);
    }
}

TEST_CASE("simulate is reproducible and worker independent", "[oracle]") {
    const auto m = model(testing::table1(), SectorMode::CropLivestock);
    SimConfig cfg{30000, 99, SimMode::PoissonBanded, 1};
    const auto one = simulate(m.sectored, m.banded, cfg);
    cfg.workers = 4;
    const auto four = simulate(m.sectored, m.banded, cfg);
    CHECK(one.sample == four.sample);
    cfg.seed = 100;
    CHECK(simulate(m.sectored, m.banded, cfg).sample != one.sample);
    CHECK_THROWS_AS(simulate(m.sectored, m.banded, {0, 1, SimMode::PoissonBanded}), InputError);
}

TEST_CASE("simulated mean and quantiles agree with the analytic model", "[oracle]") {
    SECTION("poisson sector matches loss_dist_poisson") {
        const auto m = model(single(40.0, 0.05, 0.0), SectorMode::Single, 1.0);
        const auto d = loss_dist_poisson(m.banded, 512);
        const auto e = simulate(m.sectored, m.banded, {200000, 5, SimMode::PoissonBanded});
        const auto c = compare(d, e, kDefaultLevels, m.portfolio.total_exposure());
        CHECK(c.flag_count == 0);
    }
    SECTION("bundled dataset mean within four standard errors") {
        const auto m = model(testing::table1(), SectorMode::CropLivestock);
        const auto e = simulate(m.sectored, m.banded, {100000, 42, SimMode::PoissonBanded});
        const double se = e.stddev() / std::sqrt(static_cast<double>(e.n_draws));
        CHECK(std::abs(e.mean() - m.banded.expected_loss()) <= 4.0 * se);
    }
}

TEST_CASE("compare on a sample drawn from the analytic distribution", "[oracle]") {
    const auto m = model(testing::table1(), SectorMode::CropLivestock);
    const auto d = loss_dist_sector(m.banded, auto_grid_size(m.banded));
    const auto e = sample_distribution(d, 1000000, 11);
    REQUIRE(e.n_draws == 1000000);
    const auto c = compare(d, e, kDefaultLevels, m.portfolio.total_exposure());
    REQUIRE(c.rows.size() == kDefaultLevels.size());
    CHECK(c.flag_count == 0);
    for (const auto& row : c.rows) {
        CHECK(row.band_lo <= row.analytic);
        CHECK(row.analytic <= row.band_hi);
        CHECK(row.se_loss == Approx((row.band_hi - row.band_lo) / 6.0));
    }
    CHECK(c.empirical_mean == Approx(c.analytic_mean).epsilon(5e-3));
}

TEST_CASE("compare flags a shifted sample", "[oracle]") {
    const auto m = model(testing::table1(), SectorMode::CropLivestock);
    const auto d = loss_dist_sector(m.banded, auto_grid_size(m.banded));
    auto e = sample_distribution(d, 100000, 3);
    for (auto& x : e.sample) x *= 1.2;
    CHECK(compare(d, e, kDefaultLevels, m.portfolio.total_exposure()).flag_count > 0);
}
