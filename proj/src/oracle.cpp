#include "crplus/oracle.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

#include "crplus/analytics.hpp"
#include "crplus/error.hpp"

namespace crplus {

namespace {

constexpr std::uint64_t kChunkSize = 8192;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t chunk_seed(std::uint64_t seed, std::uint64_t chunk) {
    return splitmix64(splitmix64(seed) ^ splitmix64(chunk + 0x632BE59BD9B4E019ULL));
}

struct SectorPlan {
    bool mixed = false;  // draws a gamma factor
    double alpha = 0.0;
    std::vector<Band> bands;
    std::vector<std::pair<double, double>> exposures;  // (x, p) for bernoulli-exact
};

struct ChunkResult {
    std::uint64_t clamps = 0;
};

}  // namespace

std::string to_string(SimMode mode) { return mode == SimMode::PoissonBanded ? "poisson-banded" : "bernoulli-exact"; }

SimMode parse_sim_mode(std::string_view text) {
    if (text == "poisson-banded") return SimMode::PoissonBanded;
    if (text == "bernoulli-exact") return SimMode::BernoulliExact;
    throw InputError("unknown simulation mode '" + std::string(text) + "'");
}

double EmpiricalDistribution::mean() const {
    if (sample.empty()) return 0.0;
    double s = 0.0;
    for (double x : sample) s += x;
    return s / static_cast<double>(sample.size());
}

double EmpiricalDistribution::stddev() const {
    if (sample.size() < 2) return 0.0;
    const double m = mean();
    double s = 0.0;
    for (double x : sample) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(sample.size() - 1));
}

EmpiricalDistribution simulate(const SectoredPortfolio& sectored, const BandedPortfolio& banded,
                               const SimConfig& config) {
    if (config.n_draws < 1) throw InputError("n_draws must be >= 1");
    if (sectored.sectors.size() != banded.sectors.size()) {
        throw ModelError("sectored and banded portfolios disagree on the sector count");
    }

    std::vector<SectorPlan> plans(banded.sectors.size());
    for (std::size_t k = 0; k < plans.size(); ++k) {
        const auto& p = banded.sectors[k].params;
        plans[k].mixed = !p.is_poisson();
        plans[k].alpha = p.alpha;
        if (plans[k].mixed && !(p.alpha > 0.0 && std::isfinite(p.alpha))) {
            throw ModelError("sector '" + banded.sectors[k].name + "': invalid gamma shape");
        }
        for (const auto& b : banded.sectors[k].bands) {
            if (b.mu > 0.0) plans[k].bands.push_back(b);
        }
    }
    for (const auto& sub : sectored.sub_exposures) {
        plans.at(sub.sector).exposures.emplace_back(sub.exposure, sub.loss_rate);
    }

    const std::uint64_t n = config.n_draws;
    const std::uint64_t chunks = (n + kChunkSize - 1) / kChunkSize;
    const double unit = banded.unit;
    const bool poisson_mode = config.mode == SimMode::PoissonBanded;

    std::vector<double> sample(n);
    std::vector<ChunkResult> results(chunks);

    auto run_chunk = [&](std::uint64_t c) {
        std::mt19937_64 rng(chunk_seed(config.seed, c));
        std::uniform_real_distribution<double> uniform(0.0, 1.0);
        std::vector<double> factor(plans.size(), 1.0);
        const std::uint64_t begin = c * kChunkSize;
        const std::uint64_t end = std::min(n, begin + kChunkSize);
        for (std::uint64_t draw = begin; draw < end; ++draw) {
            for (std::size_t k = 0; k < plans.size(); ++k) {
                if (plans[k].mixed) {
                    std::gamma_distribution<double> gamma(plans[k].alpha, 1.0 / plans[k].alpha);
                    factor[k] = gamma(rng);
                }
            }
            double loss = 0.0;
            if (poisson_mode) {
                std::int64_t units = 0;
                for (std::size_t k = 0; k < plans.size(); ++k) {
                    for (const auto& b : plans[k].bands) {
                        const double intensity = b.mu * factor[k];
                        if (!(intensity > 0.0)) continue;
                        std::poisson_distribution<std::int64_t> poisson(intensity);
                        units += poisson(rng) * b.v;
                    }
                }
                loss = static_cast<double>(units) * unit;
            } else {
                for (std::size_t k = 0; k < plans.size(); ++k) {
                    for (const auto& [x, p] : plans[k].exposures) {
                        double prob = p * factor[k];
                        if (prob > 1.0) {
                            prob = 1.0;
                            ++results[c].clamps;
                        }
                        if (uniform(rng) < prob) loss += x;
                    }
                }
            }
            sample[draw] = loss;
        }
    };

    unsigned workers = config.workers ? config.workers : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, chunks));
    std::atomic<std::uint64_t> next{0};
    auto worker = [&] {
        for (std::uint64_t c = next++; c < chunks; c = next++) run_chunk(c);
    };
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    EmpiricalDistribution e;
    std::sort(sample.begin(), sample.end());
    e.sample = std::move(sample);
    e.n_draws = n;
    e.mode = config.mode;
    for (const auto& r : results) e.clamp_count += r.clamps;
    return e;
}

EmpiricalDistribution sample_distribution(const LossDistribution& d, std::uint64_t n_draws, std::uint64_t seed) {
    if (n_draws < 1) throw InputError("n_draws must be >= 1");
    std::vector<double> cdf(d.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) cdf[i] = acc += d.pmf[i];

    std::mt19937_64 rng(splitmix64(seed));
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    EmpiricalDistribution e;
    e.n_draws = n_draws;
    e.sample.resize(n_draws);
    for (auto& x : e.sample) {
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), uniform(rng));
        x = static_cast<double>(it - cdf.begin()) * d.unit;
    }
    std::sort(e.sample.begin(), e.sample.end());
    return e;
}

double empirical_exceedance_quantile(const EmpiricalDistribution& e, double eps) {
    if (!(eps > 0.0 && eps < 1.0)) throw InputError("exceedance level must lie in (0, 1)");
    if (e.sample.empty()) throw InputError("empty sample");
    const auto& s = e.sample;
    const double n = static_cast<double>(s.size());
    // Counts are integers, so a tiny slack only absorbs eps * n rounding.
    const double allowed = eps * n + 1e-9;
    auto exceed = [&](std::size_t i) {
        return static_cast<double>(s.end() - std::upper_bound(s.begin(), s.end(), s[i]));
    };
    std::size_t lo = 0, hi = s.size() - 1;  // exceed(hi) == 0 always qualifies
    while (lo < hi) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (exceed(mid) <= allowed) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    return s[lo];
}

ComparisonReport compare(const LossDistribution& analytic, const EmpiricalDistribution& empirical,
                         std::span<const double> levels, double total_exposure) {
    ComparisonReport report;
    const double n = static_cast<double>(empirical.sample.size());
    const double trunc = std::max(analytic.truncation_mass, 0.0);
    const double grid_end = static_cast<double>(analytic.size()) * analytic.unit;

    for (double eps : levels) {
        ComparisonRow row;
        row.level = eps;
        row.analytic = exceedance_quantile(analytic, eps);
        row.empirical = empirical_exceedance_quantile(empirical, eps);
        row.se_prob = std::sqrt(eps * (1.0 - eps) / n);
        const double eps_lo = eps + kFlagSigmas * row.se_prob;
        const double eps_hi = eps - kFlagSigmas * row.se_prob;
        row.band_lo = eps_lo < 1.0 ? exceedance_quantile(analytic, eps_lo) : 0.0;
        row.band_hi = eps_hi > trunc ? exceedance_quantile(analytic, eps_hi) : grid_end;
        row.se_loss = (row.band_hi - row.band_lo) / (2.0 * kFlagSigmas);
        const double slack = 1e-9 * std::max(1.0, row.band_hi);
        row.flagged = row.empirical < row.band_lo - slack || row.empirical > row.band_hi + slack;
        if (row.flagged) ++report.flag_count;
        report.rows.push_back(row);
    }

    report.analytic_mean = moments(analytic).mean;
    report.empirical_mean = empirical.mean();
    report.empirical_stddev = empirical.stddev();
    report.n_draws = empirical.n_draws;
    report.clamp_count = empirical.clamp_count;
    report.total_exposure = total_exposure;

    double above = trunc;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        if (static_cast<double>(i) * analytic.unit > total_exposure) above += analytic.pmf[i];
    }
    report.analytic_prob_above_exposure = above;
    const auto& s = empirical.sample;
    report.empirical_prob_above_exposure =
        n > 0 ? static_cast<double>(s.end() - std::upper_bound(s.begin(), s.end(), total_exposure)) / n : 0.0;
    return report;
}

}  // namespace crplus
