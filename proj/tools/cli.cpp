#include "cli.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <functional>

#include "CLI11.hpp"
#include "crplus/error.hpp"
#include "crplus/io.hpp"

namespace crplus::cli {

namespace {

std::string fmt(const char* format, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, format, v);
    return buf;
}

double parse_double(std::string_view text, const std::string& what) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
        throw InputError("cannot parse " + what + " '" + std::string(text) + "'");
    }
    return value;
}

std::vector<double> parse_levels(const std::string& text) {
    std::vector<double> levels;
    std::string_view rest = text;
    while (!rest.empty()) {
        const auto comma = rest.find(',');
        const auto item = rest.substr(0, comma);
        if (!item.empty()) {
            const double level = parse_double(item, "level");
            if (!(level > 0.0 && level < 1.0)) throw InputError("levels must lie in (0, 1)");
            levels.push_back(level);
        }
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
    }
    return levels;
}

// "name=mu,sigma"
std::pair<std::string, SectorRate> parse_sector_rate(const std::string& text) {
    const auto eq = text.find('=');
    const auto comma = text.find(',', eq == std::string::npos ? 0 : eq);
    if (eq == std::string::npos || eq == 0 || comma == std::string::npos) {
        throw InputError("--sector-rate expects name=mu,sigma, got '" + text + "'");
    }
    SectorRate rate;
    rate.mean = parse_double(std::string_view(text).substr(eq + 1, comma - eq - 1), "sector mean rate");
    rate.stddev = parse_double(std::string_view(text).substr(comma + 1), "sector rate stddev");
    return {text.substr(0, eq), rate};
}

int guarded(std::ostream& err, const std::function<int()>& body) {
    try {
        return body();
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitModel;
    }
}

void print_findings(const std::vector<ValidationFinding>& findings, std::ostream& out) {
    std::size_t errors = 0;
    for (const auto& f : findings) {
        if (f.severity == Severity::Error) ++errors;
        out << (f.severity == Severity::Error ? "ERROR   " : "WARNING ") << f.obligor_id << "  " << to_string(f.kind)
            << "  " << f.message << '\n';
    }
    out << findings.size() << " finding(s), " << errors << " error(s)\n";
}

void print_quantiles(const RiskReport& report, std::ostream& out) {
    out << "exceedance_prob  loss\n";
    for (const auto& q : report.quantiles) {
        out << fmt("%-15.6g", q.exceedance_prob) << "  " << fmt("%.2f", q.loss) << '\n';
    }
}

std::filesystem::path out_path(const RunConfig& config, const char* name) {
    return std::filesystem::path(config.out) / name;
}

}  // namespace

Pipeline run_pipeline(const RunConfig& config) {
    Pipeline p;
    const auto raw = read_portfolio(config.input);
    p.findings = validate_portfolio(raw, config.tolerance);
    p.portfolio = discount_exposures(raw, config.discount);
    p.sectored = assign_sectors(p.portfolio, {config.sector_mode, config.sector_rates});
    p.banded = band_exposures(p.sectored, config.unit);
    const std::size_t grid = config.grid ? config.grid : auto_grid_size(p.banded);
    p.distribution = compute_loss_distribution(p.banded, config.backend, grid);
    p.run.input = config.input;
    p.run.unit = config.unit;
    p.run.grid_size = grid;
    p.run.sector_mode = to_string(config.sector_mode);
    p.run.backend = to_string(config.backend);
    p.run.discount_rate = config.discount.rate;
    p.run.discount_horizon = config.discount.horizon;
    p.run.tolerance = config.tolerance;
    return p;
}

int cmd_validate(const RunConfig& config, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto portfolio = read_portfolio(config.input);
        const auto findings = validate_portfolio(portfolio, config.tolerance);
        print_findings(findings, out);
        for (const auto& f : findings) {
            if (f.severity == Severity::Error) return kExitModel;
        }
        return kExitOk;
    });
}

int cmd_analyze(const RunConfig& config, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto p = run_pipeline(config);
        const auto report = build_report(p.portfolio, p.banded, p.distribution, config.levels, p.run, p.findings);
        write_text_file(out_path(config, "report.json"), nlohmann::json(report).dump(2) + '\n');
        write_text_file(out_path(config, "quantiles.csv"), quantiles_csv(report));
        write_text_file(out_path(config, "contributions.csv"), contributions_csv(report));

        out << "obligors: " << p.portfolio.obligors.size() << "  sectors: " << p.banded.sectors.size()
            << "  unit: " << format_double(config.unit) << "  grid: " << report.run.grid_size
            << "  backend: " << report.run.backend << '\n';
        out << "expected loss: " << fmt("%.4f", report.expected_loss)
            << "  mean: " << fmt("%.4f", report.moments.mean)
            << "  stddev: " << fmt("%.4f", std::sqrt(report.moments.variance))
            << "  truncation_mass: " << fmt("%.3g", report.truncation_mass) << '\n';
        print_quantiles(report, out);
        out << "wrote " << config.out << "/report.json, quantiles.csv, contributions.csv\n";
        return kExitOk;
    });
}

int cmd_dist(const RunConfig& config, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto p = run_pipeline(config);
        write_text_file(out_path(config, "distribution.csv"), loss_distribution_csv(p.distribution));
        write_text_file(out_path(config, "distribution.json"), loss_distribution_json(p.distribution).dump() + '\n');
        const auto m = moments(p.distribution);
        out << "grid: " << p.distribution.size() << "  unit: " << format_double(p.distribution.unit) << '\n';
        out << "mean: " << format_double(m.mean) << '\n';
        out << "variance: " << format_double(m.variance) << '\n';
        out << "truncation_mass: " << format_double(p.distribution.truncation_mass) << '\n';
        out << "wrote " << config.out << "/distribution.csv, distribution.json\n";
        return kExitOk;
    });
}

int cmd_simulate(const RunConfig& config, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        if (config.n_draws < 1) throw InputError("--n-draws must be >= 1");
        const auto p = run_pipeline(config);
        SimConfig sim{config.n_draws, config.seed, config.mc_mode};
        const auto empirical = simulate(p.sectored, p.banded, sim);
        const auto comparison = compare(p.distribution, empirical, config.levels, p.portfolio.total_exposure());
        write_text_file(out_path(config, "simulation.json"), simulation_json(sim, empirical, comparison).dump(2) + '\n');
        if (config.raw_samples) write_text_file(out_path(config, "samples.csv"), samples_csv(empirical));

        out << "mode: " << to_string(sim.mode) << "  draws: " << sim.n_draws << "  seed: " << sim.seed << '\n';
        out << "analytic mean: " << fmt("%.4f", comparison.analytic_mean)
            << "  empirical mean: " << fmt("%.4f", comparison.empirical_mean)
            << "  empirical stddev: " << fmt("%.4f", comparison.empirical_stddev) << '\n';
        out << "level            analytic        empirical       band_lo         band_hi         flag\n";
        for (const auto& row : comparison.rows) {
            out << fmt("%-15.6g", row.level) << "  " << fmt("%-14.2f", row.analytic) << "  "
                << fmt("%-14.2f", row.empirical) << "  " << fmt("%-14.2f", row.band_lo) << "  "
                << fmt("%-14.2f", row.band_hi) << "  " << (row.flagged ? "FLAG" : "ok") << '\n';
        }
        out << "P(loss > total exposure " << fmt("%.2f", comparison.total_exposure)
            << "): analytic " << fmt("%.3g", comparison.analytic_prob_above_exposure) << ", empirical "
            << fmt("%.3g", comparison.empirical_prob_above_exposure) << '\n';
        out << "clamped bernoulli probabilities: " << comparison.clamp_count << '\n';
        out << "flags: " << comparison.flag_count << '\n';
        return kExitOk;
    });
}

int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
    RunConfig config;
    std::string sector_mode = "crop-livestock";
    std::vector<std::string> sector_rates;
    std::string backend = "panjer";
    std::string grid = "auto";
    std::string levels = "0.1,0.05,0.025,0.01,0.005,0.0025,0.001";
    std::string mc_mode = "poisson-banded";
    long long n_draws = static_cast<long long>(config.n_draws);

    CLI::App app{"Aggregate loss distribution and VaR allocation for insured portfolios"};
    app.name(argv.empty() ? "crplus" : std::filesystem::path(argv.front()).filename().string());
    app.require_subcommand(1);
    app.add_option("--input", config.input, "Portfolio CSV")->capture_default_str();
    app.add_option("--unit", config.unit, "Loss unit L (money)")->capture_default_str();
    app.add_option("--sector-mode", sector_mode, "single | crop-livestock | per-obligor")
        ->check(CLI::IsMember({"single", "crop-livestock", "per-obligor"}))
        ->capture_default_str();
    app.add_option("--sector-rate", sector_rates, "Override sector rates: name=mu,sigma (repeatable)");
    app.add_option("--rate", config.discount.rate, "Discount rate, continuously compounded")->capture_default_str();
    app.add_option("--horizon", config.discount.horizon, "Discount horizon in years")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    app.add_option("--backend", backend, "panjer | fft")
        ->check(CLI::IsMember({"panjer", "fft"}))
        ->capture_default_str();
    app.add_option("--grid", grid, "Grid size: auto or a positive integer")->capture_default_str();
    app.add_option("--levels", levels, "Comma-separated exceedance probabilities")->capture_default_str();
    app.add_option("--seed", config.seed, "Simulation seed")->capture_default_str();
    app.add_option("--n-draws", n_draws, "Simulation draws")->capture_default_str();
    app.add_option("--mc-mode", mc_mode, "poisson-banded | bernoulli-exact")
        ->check(CLI::IsMember({"poisson-banded", "bernoulli-exact"}))
        ->capture_default_str();
    app.add_option("--out", config.out, "Output directory")->capture_default_str();
    app.add_option("--tolerance", config.tolerance, "Validation tolerance (relative)")->capture_default_str();

    auto* validate = app.add_subcommand("validate", "Check the portfolio file and print findings")->fallthrough();
    auto* analyze = app.add_subcommand("analyze", "Quantiles and risk contributions")->fallthrough();
    auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo check of the analytic distribution")->fallthrough();
    simulate_cmd->add_flag("--raw-samples", config.raw_samples, "Also write every sample to samples.csv");
    auto* dist = app.add_subcommand("dist", "Dump the full loss distribution")->fallthrough();

    std::vector<const char*> args;
    for (const auto& a : argv) args.push_back(a.c_str());
    if (args.empty()) args.push_back("crplus");
    try {
        app.parse(static_cast<int>(args.size()), args.data());
    } catch (const CLI::Success& e) {
        app.exit(e, out, err);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitUsage;
    }

    try {
        config.sector_mode = parse_sector_mode(sector_mode);
        for (const auto& s : sector_rates) config.sector_rates.insert(parse_sector_rate(s));
        config.backend = parse_backend(backend);
        config.mc_mode = parse_sim_mode(mc_mode);
        config.levels = parse_levels(levels);
        if (grid != "auto") {
            const double g = parse_double(grid, "grid size");
            if (!(g >= 1.0) || g != std::floor(g)) throw InputError("--grid must be 'auto' or a positive integer");
            config.grid = static_cast<std::size_t>(g);
        }
        if (n_draws < 1) throw InputError("--n-draws must be >= 1");
        config.n_draws = static_cast<std::uint64_t>(n_draws);
        if (!(config.unit > 0.0)) throw InputError("--unit must be > 0");
        if (config.tolerance < 0.0) throw InputError("--tolerance must be >= 0");
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    if (validate->parsed()) return cmd_validate(config, out, err);
    if (analyze->parsed()) return cmd_analyze(config, out, err);
    if (simulate_cmd->parsed()) return cmd_simulate(config, out, err);
    if (dist->parsed()) return cmd_dist(config, out, err);
    return kExitUsage;
}

}  // namespace crplus::cli
