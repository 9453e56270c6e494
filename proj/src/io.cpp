#include "crplus/io.hpp"

#include <cstdio>
#include <fstream>

#include "crplus/error.hpp"

namespace crplus {

using nlohmann::json;

namespace {

FindingKind parse_finding_kind(const std::string& s) {
    if (s == "expected_loss_mismatch") return FindingKind::ExpectedLossMismatch;
    if (s == "ratio_sum") return FindingKind::RatioSum;
    throw InputError("unknown finding kind '" + s + "'");
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    return out + "\"";
}

std::string money(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

json contribution_row_json(const ContributionRow& row) {
    return {{"id", row.id},
            {"name", row.name},
            {"expected_loss", row.expected_loss},
            {"variance_contribution", row.variance_contribution},
            {"contributions", row.contributions}};
}

ContributionRow contribution_row_from_json(const json& j) {
    ContributionRow row;
    j.at("id").get_to(row.id);
    j.at("name").get_to(row.name);
    j.at("expected_loss").get_to(row.expected_loss);
    j.at("variance_contribution").get_to(row.variance_contribution);
    j.at("contributions").get_to(row.contributions);
    return row;
}

}  // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void to_json(json& j, const ValidationFinding& f) {
    j = {{"obligor_id", f.obligor_id},
         {"kind", to_string(f.kind)},
         {"severity", to_string(f.severity)},
         {"observed", f.observed},
         {"expected", f.expected},
         {"message", f.message}};
}

void from_json(const json& j, ValidationFinding& f) {
    j.at("obligor_id").get_to(f.obligor_id);
    f.kind = parse_finding_kind(j.at("kind").get<std::string>());
    f.severity = j.at("severity").get<std::string>() == "error" ? Severity::Error : Severity::Warning;
    j.at("observed").get_to(f.observed);
    j.at("expected").get_to(f.expected);
    j.at("message").get_to(f.message);
}

void to_json(json& j, const RiskReport& r) {
    json quantiles = json::array();
    for (const auto& q : r.quantiles) quantiles.push_back({{"exceedance_prob", q.exceedance_prob}, {"loss", q.loss}});
    json rows = json::array();
    for (const auto& row : r.contributions.rows) rows.push_back(contribution_row_json(row));
    json sectors = json::array();
    for (const auto& s : r.sectors) {
        sectors.push_back({{"name", s.name},
                           {"mean_rate", s.mean_rate},
                           {"rate_stddev", s.rate_stddev},
                           {"expected_count", s.expected_count},
                           {"alpha", s.alpha},
                           {"beta", s.beta},
                           {"rho", s.rho},
                           {"band_count", s.band_count}});
    }
    j = {{"run",
          {{"input", r.run.input},
           {"unit", r.run.unit},
           {"grid_size", r.run.grid_size},
           {"sector_mode", r.run.sector_mode},
           {"backend", r.run.backend},
           {"discount_rate", r.run.discount_rate},
           {"discount_horizon", r.run.discount_horizon},
           {"tolerance", r.run.tolerance}}},
         {"portfolio", {{"currency_unit", r.currency_unit}, {"total_exposure", r.total_exposure}}},
         {"moments",
          {{"expected_loss", r.expected_loss},
           {"analytic_variance", r.analytic_variance},
           {"mean", r.moments.mean},
           {"variance", r.moments.variance},
           {"truncated", r.moments.truncated},
           {"truncation_mass", r.truncation_mass}}},
         {"quantiles", quantiles},
         {"contributions",
          {{"levels", r.contributions.levels}, {"rows", rows}, {"total", contribution_row_json(r.contributions.total)}}},
         {"sectors", sectors},
         {"findings", r.findings}};
}

void from_json(const json& j, RiskReport& r) {
    const auto& run = j.at("run");
    run.at("input").get_to(r.run.input);
    run.at("unit").get_to(r.run.unit);
    run.at("grid_size").get_to(r.run.grid_size);
    run.at("sector_mode").get_to(r.run.sector_mode);
    run.at("backend").get_to(r.run.backend);
    run.at("discount_rate").get_to(r.run.discount_rate);
    run.at("discount_horizon").get_to(r.run.discount_horizon);
    run.at("tolerance").get_to(r.run.tolerance);
    j.at("portfolio").at("currency_unit").get_to(r.currency_unit);
    j.at("portfolio").at("total_exposure").get_to(r.total_exposure);
    const auto& m = j.at("moments");
    m.at("expected_loss").get_to(r.expected_loss);
    m.at("analytic_variance").get_to(r.analytic_variance);
    m.at("mean").get_to(r.moments.mean);
    m.at("variance").get_to(r.moments.variance);
    m.at("truncated").get_to(r.moments.truncated);
    m.at("truncation_mass").get_to(r.truncation_mass);
    r.quantiles.clear();
    for (const auto& q : j.at("quantiles")) r.quantiles.push_back({q.at("exceedance_prob"), q.at("loss")});
    const auto& c = j.at("contributions");
    c.at("levels").get_to(r.contributions.levels);
    r.contributions.rows.clear();
    for (const auto& row : c.at("rows")) r.contributions.rows.push_back(contribution_row_from_json(row));
    r.contributions.total = contribution_row_from_json(c.at("total"));
    r.sectors.clear();
    for (const auto& s : j.at("sectors")) {
        r.sectors.push_back({s.at("name"), s.at("mean_rate"), s.at("rate_stddev"), s.at("expected_count"),
                             s.at("alpha"), s.at("beta"), s.at("rho"), s.at("band_count")});
    }
    j.at("findings").get_to(r.findings);
}

json loss_distribution_json(const LossDistribution& d) {
    return {{"unit", d.unit}, {"pmf", d.pmf}, {"truncation_mass", d.truncation_mass}};
}

LossDistribution loss_distribution_from_json(const json& j) {
    LossDistribution d;
    j.at("unit").get_to(d.unit);
    j.at("pmf").get_to(d.pmf);
    j.at("truncation_mass").get_to(d.truncation_mass);
    return d;
}

std::string loss_distribution_csv(const LossDistribution& d) {
    std::string out = "loss_units,loss_money,pmf,cdf\n";
    double cdf = 0.0;
    for (std::size_t n = 0; n < d.size(); ++n) {
        cdf += d.pmf[n];
        out += std::to_string(n) + ',' + format_double(static_cast<double>(n) * d.unit) + ',' +
               format_double(d.pmf[n]) + ',' + format_double(cdf) + '\n';
    }
    return out;
}

std::string quantiles_csv(const RiskReport& r) {
    std::string out = "exceedance_prob,loss\n";
    for (const auto& q : r.quantiles) out += format_double(q.exceedance_prob) + ',' + money(q.loss) + '\n';
    return out;
}

std::string contributions_csv(const RiskReport& r) {
    std::string out = "id,name,expected_loss";
    for (double level : r.contributions.levels) out += ",p_" + format_double(level);
    out += '\n';
    auto append = [&](const ContributionRow& row) {
        out += csv_field(row.id) + ',' + csv_field(row.name) + ',' + money(row.expected_loss);
        for (double c : row.contributions) out += ',' + money(c);
        out += '\n';
    };
    for (const auto& row : r.contributions.rows) append(row);
    append(r.contributions.total);
    return out;
}

json simulation_json(const SimConfig& config, const EmpiricalDistribution& e, const ComparisonReport& c) {
    json rows = json::array();
    for (const auto& row : c.rows) {
        rows.push_back({{"level", row.level},
                        {"analytic", row.analytic},
                        {"empirical", row.empirical},
                        {"se_prob", row.se_prob},
                        {"band_lo", row.band_lo},
                        {"band_hi", row.band_hi},
                        {"se_loss", row.se_loss},
                        {"flagged", row.flagged}});
    }
    return {{"config", {{"n_draws", config.n_draws}, {"seed", config.seed}, {"mode", to_string(config.mode)}}},
            {"sample",
             {{"n_draws", e.n_draws},
              {"mean", e.mean()},
              {"stddev", e.stddev()},
              {"min", e.sample.empty() ? 0.0 : e.sample.front()},
              {"max", e.sample.empty() ? 0.0 : e.sample.back()},
              {"clamp_count", e.clamp_count}}},
            {"comparison",
             {{"rows", rows},
              {"flag_count", c.flag_count},
              {"analytic_mean", c.analytic_mean},
              {"empirical_mean", c.empirical_mean},
              {"total_exposure", c.total_exposure},
              {"analytic_prob_above_exposure", c.analytic_prob_above_exposure},
              {"empirical_prob_above_exposure", c.empirical_prob_above_exposure}}}};
}

std::string samples_csv(const EmpiricalDistribution& e) {
    std::string out = "loss\n";
    for (double x : e.sample) out += format_double(x) + '\n';
    return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw InputError("failed writing '" + path.string() + "'");
}

}  // namespace crplus
