#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "crplus/engine.hpp"
#include "crplus/error.hpp"

namespace crplus {

SectorParams SectorParams::from_rates(double mean_rate, double rate_stddev, double expected_count) {
    if (mean_rate < 0.0 || rate_stddev < 0.0 || expected_count < 0.0) {
        throw ModelError("sector rates and expected count must be >= 0");
    }
    SectorParams p;
    p.mean_rate = mean_rate;
    p.rate_stddev = rate_stddev;
    p.mu = expected_count;
    if (rate_stddev == 0.0) {
        p.alpha = std::numeric_limits<double>::infinity();
        return p;
    }
    if (mean_rate == 0.0) throw ModelError("sector with zero mean rate and positive stddev");
    const double cv = rate_stddev / mean_rate;
    p.sigma = expected_count * cv;
    p.alpha = (mean_rate * mean_rate) / (rate_stddev * rate_stddev);
    p.beta = expected_count * cv * cv;
    p.rho = p.beta / (1.0 + p.beta);
    return p;
}

double SectorParams::relative_variance() const {
    if (is_poisson() || mean_rate == 0.0) return 0.0;
    const double cv = rate_stddev / mean_rate;
    return cv * cv;
}

double BandedSector::expected_count() const { return poisson_rate(bands); }

double BandedSector::expected_loss_units() const {
    double total = 0.0;
    for (const auto& b : bands) total += b.epsilon;
    return total;
}

std::int64_t BandedSector::max_v() const {
    std::int64_t m = 0;
    for (const auto& b : bands) m = std::max(m, b.v);
    return m;
}

std::int64_t BandedPortfolio::max_v() const {
    std::int64_t m = 0;
    for (const auto& s : sectors) m = std::max(m, s.max_v());
    return m;
}

double BandedPortfolio::expected_loss() const {
    double total = 0.0;
    for (const auto& s : sectors) total += s.expected_loss_units();
    return total * unit;
}

double BandedPortfolio::variance() const {
    double total = 0.0;
    for (const auto& s : sectors) {
        double eps_v = 0.0;
        for (const auto& b : s.bands) eps_v += b.epsilon * static_cast<double>(b.v);
        const double el = s.expected_loss_units();
        total += eps_v + s.params.relative_variance() * el * el;
    }
    return total * unit * unit;
}

BandedPortfolio band_exposures(const SectoredPortfolio& sectored, double unit) {
    if (!(unit > 0.0) || !std::isfinite(unit)) throw InputError("unit must be > 0");

    BandedPortfolio out;
    out.unit = unit;
    for (const auto& o : sectored.portfolio.obligors) out.obligors.push_back({o.id, o.name});

    std::vector<std::map<std::int64_t, double>> merged(sectored.sectors.size());
    for (const auto& sub : sectored.sub_exposures) {
        if (!(sub.exposure > 0.0)) {
            throw ModelError("obligor '" + sectored.portfolio.obligors[sub.obligor].id +
                             "': sub-exposure must be > 0");
        }
        const double ratio = sub.exposure / unit;
        // Tolerate representation error so exact multiples are not pushed up a band.
        const auto v = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(ratio * (1.0 - 1e-12))));
        const double epsilon = sub.exposure * sub.loss_rate / unit;
        merged[sub.sector][v] += epsilon;
        out.obligor_bands.push_back({sub.obligor, sub.sector, v, epsilon});
    }

    for (std::size_t k = 0; k < sectored.sectors.size(); ++k) {
        BandedSector sector;
        sector.name = sectored.sectors[k].name;
        for (const auto& [v, epsilon] : merged[k]) {
            sector.bands.push_back({v, epsilon, epsilon / static_cast<double>(v)});
        }
        const auto& rate = sectored.sectors[k].rate;
        sector.params = SectorParams::from_rates(rate.mean, rate.stddev, poisson_rate(sector.bands));
        out.sectors.push_back(std::move(sector));
    }
    return out;
}

double poisson_rate(std::span<const Band> bands) {
    double total = 0.0;
    for (const auto& b : bands) total += b.mu;
    return total;
}

double poisson_rate(const BandedPortfolio& banded) {
    double total = 0.0;
    for (const auto& s : banded.sectors) total += poisson_rate(s.bands);
    return total;
}

std::vector<double> severity_polynomial(std::span<const Band> bands) {
    const double total = poisson_rate(bands);
    if (bands.empty() || !(total > 0.0)) throw ModelError("degenerate sector: no expected defaults");
    std::int64_t max_v = 0;
    for (const auto& b : bands) max_v = std::max(max_v, b.v);
    std::vector<double> coeffs(static_cast<std::size_t>(max_v) + 1, 0.0);
    for (const auto& b : bands) coeffs[static_cast<std::size_t>(b.v)] += b.mu / total;
    return coeffs;
}

}  // namespace crplus
