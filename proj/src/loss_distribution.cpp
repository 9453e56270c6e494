#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <numeric>

#include "crplus/engine.hpp"
#include "crplus/error.hpp"
#include "fft.hpp"

namespace crplus {

namespace {

struct SeverityTerm {
    std::size_t v;
    double f;
};

// (a, b, 0) Panjer recursion with f_0 = 0:
// g_n = sum_{v <= n} (a + b v / n) f_v g_{n - v}.
std::vector<double> panjer(double a, double b, double g0, std::span<const SeverityTerm> severity,
                           std::size_t grid_size) {
    if (!(g0 > 0.0)) {
        throw ModelError("Panjer recursion start value underflows; the expected default count is too large "
                         "for this unit size");
    }
    std::vector<double> g(grid_size, 0.0);
    g[0] = g0;
    for (std::size_t n = 1; n < grid_size; ++n) {
        const double inv_n = 1.0 / static_cast<double>(n);
        double sum = 0.0;
        for (const auto& term : severity) {
            if (term.v > n) break;
            sum += (a + b * static_cast<double>(term.v) * inv_n) * term.f * g[n - term.v];
        }
        g[n] = sum;
    }
    return g;
}

std::vector<SeverityTerm> sparse_severity(std::span<const Band> bands, double total) {
    std::map<std::size_t, double> by_v;
    for (const auto& b : bands) by_v[static_cast<std::size_t>(b.v)] += b.mu / total;
    std::vector<SeverityTerm> terms;
    for (const auto& [v, f] : by_v) {
        if (f > 0.0) terms.push_back({v, f});
    }
    return terms;
}

void require_grid(std::size_t grid_size, std::int64_t max_v) {
    const auto required = static_cast<std::size_t>(max_v) + 1;
    if (grid_size < required) {
        throw ModelError("grid size " + std::to_string(grid_size) + " too small: need at least " +
                         std::to_string(required));
    }
}

// log(1 + w) without cancellation for small |w|.
std::complex<double> log1p_complex(std::complex<double> w) {
    const double re = w.real(), im = w.imag();
    return {0.5 * std::log1p(2.0 * re + re * re + im * im), std::atan2(im, 1.0 + re)};
}

}  // namespace

LossDistribution make_loss_distribution(double unit, std::vector<double> pmf) {
    for (std::size_t n = 0; n < pmf.size(); ++n) {
        if (pmf[n] < 0.0) {
            if (pmf[n] < -kNegativeClampLimit || std::isnan(pmf[n])) {
                throw ModelError("pmf entry " + std::to_string(n) + " is negative beyond round-off");
            }
            pmf[n] = 0.0;
        }
    }
    LossDistribution d;
    d.unit = unit;
    d.truncation_mass = 1.0 - std::accumulate(pmf.begin(), pmf.end(), 0.0);
    d.pmf = std::move(pmf);
    return d;
}

LossDistribution point_mass(double unit, std::size_t at, std::size_t grid_size) {
    std::vector<double> pmf(std::max(grid_size, at + 1), 0.0);
    pmf[at] = 1.0;
    return make_loss_distribution(unit, std::move(pmf));
}

LossDistribution loss_dist_poisson(const BandedPortfolio& banded, std::size_t grid_size) {
    require_grid(grid_size, banded.max_v());
    std::vector<Band> all;
    for (const auto& s : banded.sectors) all.insert(all.end(), s.bands.begin(), s.bands.end());
    const double lambda = poisson_rate(all);
    if (!(lambda > 0.0)) return point_mass(banded.unit, 0, grid_size);
    const auto severity = sparse_severity(all, lambda);
    return make_loss_distribution(banded.unit, panjer(0.0, lambda, std::exp(-lambda), severity, grid_size));
}

LossDistribution sector_distribution(const BandedSector& sector, double unit, std::size_t grid_size) {
    require_grid(grid_size, sector.max_v());
    const double lambda = sector.expected_count();
    if (!(lambda > 0.0)) return point_mass(unit, 0, grid_size);
    const auto severity = sparse_severity(sector.bands, lambda);
    if (sector.params.is_poisson()) {
        return make_loss_distribution(unit, panjer(0.0, lambda, std::exp(-lambda), severity, grid_size));
    }
    const auto& p = sector.params;
    if (!(p.rho > 0.0 && p.rho < 1.0) || !(p.alpha > 0.0) || !std::isfinite(p.alpha)) {
        throw ModelError("sector '" + sector.name + "': rho must lie in (0, 1)");
    }
    const double g0 = std::exp(p.alpha * std::log1p(-p.rho));
    return make_loss_distribution(unit, panjer(p.rho, p.rho * (p.alpha - 1.0), g0, severity, grid_size));
}

LossDistribution loss_dist_sector(const BandedPortfolio& banded, std::size_t grid_size) {
    require_grid(grid_size, banded.max_v());
    LossDistribution result = point_mass(banded.unit, 0, grid_size);
    for (const auto& sector : banded.sectors) {
        if (!(sector.expected_count() > 0.0)) continue;
        result = convolve(result, sector_distribution(sector, banded.unit, grid_size));
    }
    return result;
}

LossDistribution loss_dist_fft(const BandedPortfolio& banded, std::size_t grid_size) {
    if (!detail::is_power_of_two(grid_size)) {
        throw ModelError("FFT grid size " + std::to_string(grid_size) + " is not a power of two");
    }
    const auto required = 2 * (static_cast<std::size_t>(banded.max_v()) + 1);
    if (grid_size < required) {
        throw ModelError("FFT grid size " + std::to_string(grid_size) + " too small: need at least " +
                         std::to_string(required));
    }

    detail::RealFft fft(grid_size);
    std::vector<std::complex<double>> log_g(fft.spectrum_size(), 0.0);
    for (const auto& sector : banded.sectors) {
        const double lambda = sector.expected_count();
        if (!(lambda > 0.0)) continue;
        const auto q = fft.forward(severity_polynomial(sector.bands));
        const auto& p = sector.params;
        if (p.is_poisson()) {
            for (std::size_t k = 0; k < q.size(); ++k) log_g[k] += lambda * (q[k] - 1.0);
            continue;
        }
        if (!(p.rho > 0.0 && p.rho < 1.0)) throw ModelError("sector '" + sector.name + "': rho must lie in (0, 1)");
        const double log_num = std::log1p(-p.rho);
        for (std::size_t k = 0; k < q.size(); ++k) {
            const std::complex<double> w = -p.rho * q[k];
            if (std::abs(1.0 + w) == 0.0) {
                throw ModelError("sector '" + sector.name + "': PGF pole on the unit circle");
            }
            log_g[k] += p.alpha * (log_num - log1p_complex(w));
        }
    }

    std::vector<std::complex<double>> g(log_g.size());
    std::transform(log_g.begin(), log_g.end(), g.begin(), [](auto x) { return std::exp(x); });
    auto pmf = fft.inverse(g);
    const double scale = 1.0 / static_cast<double>(grid_size);
    for (auto& x : pmf) x *= scale;
    return make_loss_distribution(banded.unit, std::move(pmf));
}

LossDistribution convolve(const LossDistribution& a, const LossDistribution& b) {
    if (std::abs(a.unit - b.unit) > 1e-12 * std::max(std::abs(a.unit), std::abs(b.unit))) {
        throw ModelError("cannot convolve distributions with different units");
    }
    const std::size_t n_out = std::max(a.size(), b.size());
    if (a.pmf.empty() || b.pmf.empty()) return make_loss_distribution(a.unit, std::vector<double>(n_out, 0.0));

    auto nonzero = [](const std::vector<double>& pmf) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < pmf.size(); ++i) {
            if (pmf[i] != 0.0) idx.push_back(i);
        }
        return idx;
    };
    const auto nz_a = nonzero(a.pmf);
    const auto nz_b = nonzero(b.pmf);
    const bool a_sparser = nz_a.size() <= nz_b.size();
    const auto& sparse_idx = a_sparser ? nz_a : nz_b;
    const auto& sparse = a_sparser ? a.pmf : b.pmf;
    const auto& dense = a_sparser ? b.pmf : a.pmf;

    std::vector<double> out(n_out, 0.0);
    constexpr double kDirectBudget = 1.5e8;
    if (static_cast<double>(sparse_idx.size()) * static_cast<double>(n_out) <= kDirectBudget) {
        for (std::size_t i : sparse_idx) {
            const double w = sparse[i];
            const std::size_t limit = std::min(dense.size(), n_out - std::min(n_out, i));
            for (std::size_t j = 0; j < limit; ++j) out[i + j] += w * dense[j];
        }
    } else {
        const std::size_t len = detail::next_power_of_two(a.size() + b.size() - 1);
        detail::RealFft fft(len);
        auto fa = fft.forward(a.pmf);
        const auto fb = fft.forward(b.pmf);
        for (std::size_t k = 0; k < fa.size(); ++k) fa[k] *= fb[k];
        const auto full = fft.inverse(fa);
        const double scale = 1.0 / static_cast<double>(len);
        for (std::size_t n = 0; n < n_out; ++n) out[n] = full[n] * scale;
    }
    return make_loss_distribution(a.unit, std::move(out));
}

std::string to_string(Backend backend) { return backend == Backend::Panjer ? "panjer" : "fft"; }

Backend parse_backend(std::string_view text) {
    if (text == "panjer") return Backend::Panjer;
    if (text == "fft") return Backend::Fft;
    throw InputError("unknown backend '" + std::string(text) + "'");
}

std::size_t auto_grid_size(const BandedPortfolio& banded) {
    const double mean = banded.expected_loss() / banded.unit;
    const double sd = std::sqrt(banded.variance()) / banded.unit;
    double needed = 4.0 * (mean + 20.0 * sd);
    double tail_reserve = mean;
    for (const auto& s : banded.sectors) {
        const auto& p = s.params;
        if (p.is_poisson() || !(p.alpha < 1.0) || !(p.rho > 0.0)) continue;
        const double counts = std::ceil(std::log(1e-13) / std::log(p.rho));
        tail_reserve += counts * static_cast<double>(s.max_v());
    }
    needed = std::max({needed, tail_reserve, 2.0 * (static_cast<double>(banded.max_v()) + 1.0), 64.0});
    constexpr double kMaxGrid = 1u << 28;
    if (needed > kMaxGrid) throw ModelError("required grid exceeds 2^28 points; increase the unit size");
    return detail::next_power_of_two(static_cast<std::size_t>(std::ceil(needed)));
}

LossDistribution compute_loss_distribution(const BandedPortfolio& banded, Backend backend,
                                           std::size_t grid_size) {
    return backend == Backend::Panjer ? loss_dist_sector(banded, grid_size) : loss_dist_fft(banded, grid_size);
}

double total_variation(const LossDistribution& a, const LossDistribution& b) {
    const std::size_t n = std::max(a.size(), b.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = i < a.size() ? a.pmf[i] : 0.0;
        const double y = i < b.size() ? b.pmf[i] : 0.0;
        sum += std::abs(x - y);
    }
    return 0.5 * (sum + std::abs(a.truncation_mass - b.truncation_mass));
}

}  // namespace crplus
