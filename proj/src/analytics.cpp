#include "crplus/analytics.hpp"

#include <algorithm>
#include <cmath>

#include "crplus/error.hpp"

namespace crplus {

namespace {

void require_level(double eps) {
    if (!(eps > 0.0 && eps < 1.0)) throw InputError("exceedance level must lie in (0, 1)");
}

}  // namespace

double exceedance_quantile(const LossDistribution& d, double eps) {
    require_level(eps);
    double tail = std::max(d.truncation_mass, 0.0);
    if (tail >= eps || d.pmf.empty()) throw ModelError("grid too small for requested tail");
    // Walk down from the top; tail holds P(loss > (n - 1) * unit) after adding pmf[n].
    for (std::size_t n = d.size() - 1; n > 0; --n) {
        tail += d.pmf[n];
        if (tail > eps) return static_cast<double>(n) * d.unit;
    }
    return 0.0;
}

Moments moments(const LossDistribution& d) {
    double m1 = 0.0, m2 = 0.0;
    for (std::size_t n = 0; n < d.size(); ++n) {
        const double x = static_cast<double>(n);
        m1 += x * d.pmf[n];
        m2 += x * x * d.pmf[n];
    }
    Moments m;
    m.mean = m1 * d.unit;
    m.variance = (m2 - m1 * m1) * d.unit * d.unit;
    m.truncated = d.truncation_mass > kTruncationCaveat;
    return m;
}

ContributionTable risk_contributions(const BandedPortfolio& banded, const LossDistribution& d,
                                     std::span<const double> levels) {
    const double unit = banded.unit;
    const std::size_t n = banded.obligors.size();

    std::vector<double> el(n, 0.0), vc(n, 0.0);
    for (const auto& ob : banded.obligor_bands) {
        const auto& sector = banded.sectors.at(ob.sector);
        const double eps_money = ob.epsilon * unit;
        el[ob.obligor] += eps_money;
        vc[ob.obligor] += eps_money * static_cast<double>(ob.v) * unit;
        vc[ob.obligor] += sector.params.relative_variance() * eps_money * sector.expected_loss_units() * unit;
    }
    double el_total = 0.0, vc_total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        el_total += el[i];
        vc_total += vc[i];
    }
    if (!(vc_total > 0.0)) throw ModelError("degenerate portfolio: total variance contribution is zero");

    ContributionTable table;
    table.levels.assign(levels.begin(), levels.end());
    table.total.id = "TOTAL";
    table.total.name = "TOTAL";
    table.total.expected_loss = el_total;
    table.total.variance_contribution = vc_total;
    for (std::size_t i = 0; i < n; ++i) {
        table.rows.push_back({banded.obligors[i].id, banded.obligors[i].name, el[i], vc[i], {}});
    }
    for (double eps : levels) {
        const double var = exceedance_quantile(d, eps);
        const double unexpected = var - el_total;
        for (std::size_t i = 0; i < n; ++i) {
            table.rows[i].contributions.push_back(el[i] + unexpected * (vc[i] / vc_total));
        }
        table.total.contributions.push_back(var);
    }
    return table;
}

RiskReport build_report(const Portfolio& portfolio, const BandedPortfolio& banded, const LossDistribution& d,
                        std::span<const double> levels, RunInfo run, std::vector<ValidationFinding> findings) {
    RiskReport report;
    report.run = std::move(run);
    report.currency_unit = portfolio.currency_unit;
    report.total_exposure = portfolio.total_exposure();
    report.run.grid_size = d.size();
    report.expected_loss = banded.expected_loss();
    report.analytic_variance = banded.variance();
    report.moments = moments(d);
    report.truncation_mass = d.truncation_mass;
    for (double eps : levels) report.quantiles.push_back({eps, exceedance_quantile(d, eps)});
    report.contributions = risk_contributions(banded, d, levels);
    for (const auto& s : banded.sectors) {
        const auto& p = s.params;
        report.sectors.push_back({s.name, p.mean_rate, p.rate_stddev, s.expected_count(),
                                  p.is_poisson() ? 0.0 : p.alpha, p.beta, p.rho, s.bands.size()});
    }
    report.findings = std::move(findings);
    return report;
}

}  // namespace crplus
