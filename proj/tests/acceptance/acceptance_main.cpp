// Acceptance suite: one PASS/FAIL line per criterion.
//
// Usage: crplus_acceptance [--known-failure ID]...
// Exit status is 0 when the set of failing criteria equals the set given
// with --known-failure, 1 otherwise.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "crplus/analytics.hpp"
#include "crplus/engine.hpp"
#include "crplus/oracle.hpp"
#include "crplus/portfolio.hpp"
#include "test_support.hpp"

using namespace crplus;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

std::string num(const char* format, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, format, v);
    return buf;
}

BandedPortfolio table1_banded(SectorMode mode = SectorMode::CropLivestock) {
    return band_exposures(assign_sectors(testing::table1(), {mode, {}}), 1.0);
}

Outcome expected_loss_reproduction() {
    Outcome o;
    const auto p = testing::table1();
    const double total = p.total_expected_loss();
    o.require(std::abs(total - 1525.03) <= 0.5, "total " + num("%.4f", total) + " vs 1525.03 +/- 0.5");
    for (const auto& ob : p.obligors) {
        if (!ob.expected_loss_declared) {
            o.require(false, ob.id + " has no declared expected loss");
            continue;
        }
        const double diff = ob.expected_loss() - *ob.expected_loss_declared;
        o.require(std::abs(diff) <= 0.3, ob.id + " " + num("%.4f", ob.expected_loss()) + " vs " +
                                             num("%.2f", *ob.expected_loss_declared) + " +/- 0.3");
    }
    if (o.pass) o.detail = "total " + num("%.4f", total);
    return o;
}

// The runtime limit applies to the default crop-livestock run; the other
// sector modes are checked for additivity without a time budget.
Outcome additivity() {
    Outcome o;
    const std::vector<double> levels{0.1, 0.05, 0.01};
    double worst = 0.0;
    double default_seconds = 0.0;
    for (auto mode : {SectorMode::CropLivestock, SectorMode::Single, SectorMode::PerObligor}) {
        const auto start = std::chrono::steady_clock::now();
        const auto b = table1_banded(mode);
        const auto d = loss_dist_sector(b, auto_grid_size(b));
        const auto t = risk_contributions(b, d, levels);
        for (std::size_t l = 0; l < levels.size(); ++l) {
            const double var = exceedance_quantile(d, levels[l]);
            double sum = 0.0;
            for (const auto& row : t.rows) sum += row.contributions[l];
            const double rel = std::abs(sum - var) / var;
            worst = std::max(worst, rel);
            o.require(rel <= 1e-9, to_string(mode) + " at " + num("%g", levels[l]) + ": rel " + num("%.3g", rel));
        }
        if (mode == SectorMode::CropLivestock) {
            default_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        }
    }
    o.require(default_seconds < 5.0, "default run took " + num("%.2f", default_seconds) + " s");
    if (o.pass) {
        o.detail = "max relative gap " + num("%.3g", worst) + ", default run " + num("%.2f", default_seconds) + " s";
    }
    return o;
}

Outcome negbin_closed_form() {
    Outcome o;
    double worst = 0.0;
    for (double alpha : {0.5, 2.0, 10.0}) {
        for (double rho : {0.1, 0.5, 0.9}) {
            const auto b = testing::negbin_sector(alpha, rho);
            const auto d = loss_dist_sector(b, 201);
            double sup = 0.0;
            for (int n = 0; n <= 200; ++n) sup = std::max(sup, std::abs(d.pmf[n] - testing::negbin_pmf(alpha, rho, n)));
            worst = std::max(worst, sup);
            o.require(sup <= 1e-10, "alpha " + num("%g", alpha) + " rho " + num("%g", rho) + ": " + num("%.3g", sup));
        }
    }
    if (o.pass) o.detail = "max sup-norm " + num("%.3g", worst);
    return o;
}

Outcome backend_equivalence() {
    Outcome o;
    const auto b = table1_banded();
    const std::size_t n = auto_grid_size(b);
    const double tv = total_variation(loss_dist_sector(b, n), loss_dist_fft(b, n));
    o.require(tv <= 1e-8, "dataset TV " + num("%.3g", tv));
    double worst = 0.0;
    std::mt19937_64 rng(20240601);
    const SectorMode modes[] = {SectorMode::Single, SectorMode::CropLivestock, SectorMode::PerObligor};
    for (int trial = 0; trial < 50; ++trial) {
        const auto p = testing::random_portfolio(rng, 10, 3000.0);
        const auto rb = band_exposures(assign_sectors(p, {modes[trial % 3], {}}), 1.0 + (trial % 5));
        const std::size_t rn = auto_grid_size(rb);
        const double rtv = total_variation(loss_dist_sector(rb, rn), loss_dist_fft(rb, rn));
        worst = std::max(worst, rtv);
        o.require(rtv <= 1e-8, "random portfolio " + std::to_string(trial) + " TV " + num("%.3g", rtv));
    }
    if (o.pass) o.detail = "dataset TV " + num("%.3g", tv) + ", max over 50 random " + num("%.3g", worst);
    return o;
}

Outcome monte_carlo_agreement() {
    Outcome o;
    const auto p = testing::table1();
    const auto s = assign_sectors(p, {SectorMode::CropLivestock, {}});
    const auto b = band_exposures(s, 1.0);
    const auto d = loss_dist_sector(b, auto_grid_size(b));
    const auto e = simulate(s, b, {1000000, 42, SimMode::PoissonBanded});
    const std::vector<double> levels{0.1, 0.05, 0.01};
    const auto c = compare(d, e, levels, p.total_exposure());
    for (const auto& row : c.rows) {
        o.require(!row.flagged, "level " + num("%g", row.level) + ": empirical " + num("%.2f", row.empirical) +
                                    " outside [" + num("%.2f", row.band_lo) + ", " + num("%.2f", row.band_hi) + "]");
    }
    if (o.pass) {
        for (const auto& row : c.rows) {
            o.detail += (o.detail.empty() ? "" : ", ") + num("%g", row.level) + ": " + num("%.2f", row.analytic) +
                        " vs " + num("%.2f", row.empirical);
        }
    }
    return o;
}

Outcome poisson_limit() {
    Outcome o;
    const auto p = testing::table1();
    SectoredPortfolio s = assign_sectors(p, {SectorMode::Single, {}});
    const double mean = s.sectors[0].rate.mean;
    s = assign_sectors(p, {SectorMode::Single, {{"portfolio", {mean, 1e-6}}}});
    const auto b = band_exposures(s, 1.0);
    const std::size_t n = auto_grid_size(b);
    const double tv = total_variation(loss_dist_sector(b, n), loss_dist_poisson(b, n));
    o.require(tv < 1e-4, "TV " + num("%.3g", tv));
    if (o.pass) o.detail = "TV " + num("%.3g", tv);
    return o;
}

Outcome moment_conservation() {
    Outcome o;
    double worst_mean = 0.0;
    for (auto mode : {SectorMode::Single, SectorMode::CropLivestock, SectorMode::PerObligor}) {
        const auto b = table1_banded(mode);
        const auto d = loss_dist_sector(b, auto_grid_size(b));
        const auto m = moments(d);
        const double rel = std::abs(m.mean - b.expected_loss()) / b.expected_loss();
        worst_mean = std::max(worst_mean, rel);
        o.require(rel <= 1e-6, to_string(mode) + " mean rel " + num("%.3g", rel));
        o.require(d.truncation_mass < 1e-9, to_string(mode) + " truncation " + num("%.3g", d.truncation_mass));
    }
    const auto b = table1_banded(SectorMode::Single);
    const auto m = moments(loss_dist_sector(b, auto_grid_size(b)));
    const double rel_var = std::abs(m.variance - b.variance()) / b.variance();
    o.require(rel_var <= 1e-5, "one-sector variance rel " + num("%.3g", rel_var));
    if (o.pass) o.detail = "mean rel " + num("%.3g", worst_mean) + ", variance rel " + num("%.3g", rel_var);
    return o;
}

Outcome tail_properties() {
    Outcome o;
    const auto b = table1_banded();
    const auto d = loss_dist_sector(b, auto_grid_size(b));
    std::vector<double> q;
    for (double eps : kDefaultLevels) q.push_back(exceedance_quantile(d, eps));
    for (std::size_t i = 1; i < q.size(); ++i) {
        o.require(q[i] >= q[i - 1], "quantile at " + num("%g", kDefaultLevels[i]) + " below the previous level");
    }
    const double mean = moments(d).mean;
    const double q001 = exceedance_quantile(d, 0.001), q01 = exceedance_quantile(d, 0.01),
                 q1 = exceedance_quantile(d, 0.1);
    o.require(q001 > q01 && q01 > q1 && q1 > mean, "q(0.001) > q(0.01) > q(0.1) > mean does not hold");
    const fs::path doc = fs::path(CRPLUS_SOURCE_DIR) / "docs" / "table2_reproduction.md";
    o.require(fs::is_regular_file(doc), "missing " + doc.string());
    if (o.pass) {
        o.detail = "q(0.1) " + num("%.2f", q1) + ", q(0.01) " + num("%.2f", q01) + ", q(0.001) " + num("%.2f", q001) +
                   ", mean " + num("%.2f", mean);
    }
    return o;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

// stdout plus every output file, keyed by name
std::vector<std::pair<std::string, std::string>> cli_snapshot(const std::vector<std::string>& args, const fs::path& dir,
                                                              int& code) {
    fs::remove_all(dir);
    std::vector<std::string> argv{"crplus", "--input", testing::data_file("table1_eu22.csv").string(), "--out",
                                  dir.string()};
    argv.insert(argv.end(), args.begin(), args.end());
    std::ostringstream out, err;
    code = cli::run(argv, out, err);
    std::vector<std::pair<std::string, std::string>> snap{{"<stdout>", out.str()}, {"<stderr>", err.str()}};
    if (fs::exists(dir)) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(dir)) files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files) snap.emplace_back(f.filename().string(), slurp(f));
    }
    return snap;
}

Outcome determinism() {
    Outcome o;
    const fs::path dir = fs::temp_directory_path() / "crplus_acceptance_determinism";
    const std::vector<std::vector<std::string>> commands{
        {"validate"},
        {"analyze"},
        {"--backend", "fft", "analyze"},
        {"dist"},
        {"--n-draws", "50000", "--seed", "7", "simulate", "--raw-samples"},
        {"--n-draws", "20000", "--seed", "7", "--mc-mode", "bernoulli-exact", "simulate"},
    };
    for (const auto& args : commands) {
        std::string label;
        for (const auto& a : args) label += (label.empty() ? "" : " ") + a;
        int c1 = 0, c2 = 0;
        const auto first = cli_snapshot(args, dir, c1);
        const auto second = cli_snapshot(args, dir, c2);
        o.require(c1 == 0 && c2 == 0, "'" + label + "' exit codes " + std::to_string(c1) + "/" + std::to_string(c2));
        o.require(first == second, "'" + label + "' outputs differ");
    }
    fs::remove_all(dir);
    if (o.pass) o.detail = std::to_string(commands.size()) + " commands byte-identical";
    return o;
}

struct Criterion {
    std::string id;
    std::string title;
    double time_limit;  // seconds, 0: none
    std::function<Outcome()> check;
};

}  // namespace

int main(int argc, char** argv) {
    std::set<std::string> known;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--known-failure" && i + 1 < argc) {
            known.insert(argv[++i]);
        } else {
            std::fprintf(stderr, "usage: %s [--known-failure ID]...\n", argv[0]);
            return 2;
        }
    }

    const std::vector<Criterion> criteria{
        {"C1", "expected-loss reproduction", 1.0, expected_loss_reproduction},
        {"C2", "additivity of contributions", 0.0, additivity},
        {"C3", "negative-binomial closed form", 0.0, negbin_closed_form},
        {"C4", "Panjer/FFT equivalence", 0.0, backend_equivalence},
        {"C5", "Monte Carlo agreement", 60.0, monte_carlo_agreement},
        {"C6", "Poisson limit", 0.0, poisson_limit},
        {"C7", "mean/variance conservation", 0.0, moment_conservation},
        {"C8", "tail ordering and reproduction report", 0.0, tail_properties},
        {"C9", "CLI determinism", 0.0, determinism},
    };

    std::set<std::string> failed;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.check();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (c.time_limit > 0.0 && seconds >= c.time_limit) {
            o.require(false, "runtime " + num("%.2f", seconds) + " s over " + num("%g", c.time_limit) + " s");
        }
        if (!o.pass) failed.insert(c.id);
        std::printf("%s %s: %s (%.2f s) %s\n", o.pass ? "PASS" : "FAIL", c.id.c_str(), c.title.c_str(), seconds,
                    o.detail.c_str());
        std::fflush(stdout);
    }

    std::printf("%zu/%zu criteria passed\n", criteria.size() - failed.size(), criteria.size());
    if (!known.empty()) {
        std::string list;
        for (const auto& k : known) list += (list.empty() ? "" : ", ") + k;
        std::printf("known failures: %s\n", list.c_str());
    }
    for (const auto& k : known) {
        if (!failed.count(k)) std::printf("note: %s was declared a known failure but passed\n", k.c_str());
    }
    return failed == known ? 0 : 1;
}
