#include "crplus/portfolio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "crplus/error.hpp"

namespace crplus {

namespace {

constexpr const char* kRequiredColumns[] = {"id",         "name",          "exposure",
                                            "mean_loss_rate", "loss_rate_stddev", "crop_ratio",
                                            "livestock_ratio"};

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

// Splits one CSV line; double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split_csv_line(std::string_view line, std::size_t row) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    bool was_quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    current.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                current.push_back(c);
            }
        } else if (c == '"' && trim(current).empty()) {
            current.clear();
            quoted = true;
            was_quoted = true;
        } else if (c == ',') {
            fields.emplace_back(was_quoted ? current : std::string(trim(current)));
            current.clear();
            was_quoted = false;
        } else {
            current.push_back(c);
        }
    }
    if (quoted) throw InputError("row " + std::to_string(row) + ": unterminated quoted field");
    fields.emplace_back(was_quoted ? current : std::string(trim(current)));
    return fields;
}

double parse_number(const std::string& text, std::size_t row, const std::string& column) {
    double value = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (!text.empty() && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (text.empty() || ec != std::errc() || ptr != last || !std::isfinite(value)) {
        throw InputError("row " + std::to_string(row) + ", column " + column +
                         ": cannot parse number '" + text + "'");
    }
    return value;
}

[[noreturn]] void range_error(std::size_t row, const std::string& column, const std::string& what) {
    throw InputError("row " + std::to_string(row) + ", column " + column + ": " + what);
}

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string quote_if_needed(const std::string& s) {
    if (s.find_first_of(",\"") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

}  // namespace

double Portfolio::total_exposure() const {
    double total = 0.0;
    for (const auto& o : obligors) total += o.exposure;
    return total;
}

double Portfolio::total_expected_loss() const {
    double total = 0.0;
    for (const auto& o : obligors) total += o.expected_loss();
    return total;
}

const ObligorRecord* Portfolio::find(std::string_view id) const {
    auto it = std::find_if(obligors.begin(), obligors.end(), [&](const auto& o) { return o.id == id; });
    return it == obligors.end() ? nullptr : &*it;
}

Portfolio parse_portfolio(std::string_view csv_text) {
    std::vector<std::pair<std::size_t, std::string_view>> lines;
    std::size_t line_no = 0;
    while (!csv_text.empty()) {
        const auto nl = csv_text.find('\n');
        std::string_view line = csv_text.substr(0, nl);
        ++line_no;
        if (line_no == 1 && line.size() >= 3 && line.substr(0, 3) == "\xEF\xBB\xBF") line.remove_prefix(3);
        if (!trim(line).empty()) lines.emplace_back(line_no, line);
        if (nl == std::string_view::npos) break;
        csv_text.remove_prefix(nl + 1);
    }
    if (lines.empty()) throw InputError("empty portfolio: missing header row");

    const auto header = split_csv_line(lines.front().second, lines.front().first);
    std::map<std::string, std::size_t> column;
    for (std::size_t i = 0; i < header.size(); ++i) {
        const auto& name = header[i];
        const bool known = std::find(std::begin(kRequiredColumns), std::end(kRequiredColumns), name) !=
                               std::end(kRequiredColumns) ||
                           name == "expected_loss" || name == "rating";
        if (!known) throw InputError("header: unknown column '" + name + "'");
        if (!column.emplace(name, i).second) throw InputError("header: duplicate column '" + name + "'");
    }
    for (const char* required : kRequiredColumns) {
        if (!column.count(required)) throw InputError(std::string("header: missing column '") + required + "'");
    }
    if (lines.size() == 1) throw InputError("empty portfolio");

    Portfolio portfolio;
    std::set<std::string> seen;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const auto [row, text] = lines[li];
        const auto fields = split_csv_line(text, row);
        if (fields.size() != header.size()) {
            throw InputError("row " + std::to_string(row) + ": expected " + std::to_string(header.size()) +
                             " columns, found " + std::to_string(fields.size()));
        }
        auto field = [&](const char* name) -> const std::string& { return fields[column.at(name)]; };
        auto number = [&](const char* name) { return parse_number(field(name), row, name); };

        ObligorRecord o;
        o.id = field("id");
        if (o.id.empty()) range_error(row, "id", "must not be empty");
        o.name = field("name");
        o.exposure = number("exposure");
        o.mean_loss_rate = number("mean_loss_rate");
        o.loss_rate_stddev = number("loss_rate_stddev");
        o.crop_ratio = number("crop_ratio");
        o.livestock_ratio = number("livestock_ratio");
        if (auto it = column.find("expected_loss"); it != column.end() && !fields[it->second].empty()) {
            o.expected_loss_declared = parse_number(fields[it->second], row, "expected_loss");
        }

        if (!(o.exposure > 0.0)) range_error(row, "exposure", "must be > 0");
        if (o.mean_loss_rate < 0.0 || o.mean_loss_rate > 1.0)
            range_error(row, "mean_loss_rate", "must be a fraction in [0, 1]");
        if (o.loss_rate_stddev < 0.0) range_error(row, "loss_rate_stddev", "must be >= 0");
        if (o.crop_ratio < 0.0 || o.crop_ratio > 1.0) range_error(row, "crop_ratio", "must be in [0, 1]");
        if (o.livestock_ratio < 0.0 || o.livestock_ratio > 1.0)
            range_error(row, "livestock_ratio", "must be in [0, 1]");

        if (!seen.insert(o.id).second) {
            throw InputError("row " + std::to_string(row) + ": duplicate id '" + o.id + "'");
        }
        portfolio.obligors.push_back(std::move(o));
    }
    return portfolio;
}

Portfolio read_portfolio(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read portfolio file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_portfolio(buf.str());
}

std::string serialize_portfolio(const Portfolio& portfolio) {
    std::string out = "id,name,exposure,mean_loss_rate,loss_rate_stddev,crop_ratio,livestock_ratio,expected_loss\n";
    for (const auto& o : portfolio.obligors) {
        out += quote_if_needed(o.id) + ',' + quote_if_needed(o.name) + ',' + format_number(o.exposure) + ',' +
               format_number(o.mean_loss_rate) + ',' + format_number(o.loss_rate_stddev) + ',' +
               format_number(o.crop_ratio) + ',' + format_number(o.livestock_ratio) + ',';
        if (o.expected_loss_declared) out += format_number(*o.expected_loss_declared);
        out += '\n';
    }
    return out;
}

std::string to_string(FindingKind kind) {
    return kind == FindingKind::ExpectedLossMismatch ? "expected_loss_mismatch" : "ratio_sum";
}

std::string to_string(Severity severity) { return severity == Severity::Warning ? "warning" : "error"; }

std::vector<ValidationFinding> validate_portfolio(const Portfolio& portfolio, double tol) {
    std::vector<ValidationFinding> findings;
    char msg[256];
    for (const auto& o : portfolio.obligors) {
        if (o.expected_loss_declared) {
            const double declared = *o.expected_loss_declared;
            const double computed = o.expected_loss();
            const double rel = std::abs(computed - declared) / std::max(declared, 1.0);
            if (rel > tol) {
                std::snprintf(msg, sizeof msg,
                              "exposure x mean_loss_rate = %.4f differs from declared expected loss %.4f "
                              "(relative %.3g > %.3g)",
                              computed, declared, rel, tol);
                findings.push_back({o.id, FindingKind::ExpectedLossMismatch,
                                    rel > 10.0 * tol ? Severity::Error : Severity::Warning, computed, declared,
                                    msg});
            }
        }
        const double sum = o.crop_ratio + o.livestock_ratio;
        if (sum < 1.0 - tol || sum > 1.0 + tol) {
            std::snprintf(msg, sizeof msg, "crop_ratio + livestock_ratio = %.4g, outside [%.4g, %.4g]", sum,
                          1.0 - tol, 1.0 + tol);
            findings.push_back({o.id, FindingKind::RatioSum, sum > 0.0 ? Severity::Warning : Severity::Error,
                                sum, 1.0, msg});
        }
    }
    return findings;
}

Portfolio discount_exposures(const Portfolio& portfolio, const DiscountSpec& spec) {
    if (spec.horizon < 0.0) throw InputError("discount horizon must be >= 0");
    Portfolio out = portfolio;
    const double factor = std::exp(-spec.rate * spec.horizon);
    for (auto& o : out.obligors) o.exposure *= factor;
    return out;
}

std::string to_string(SectorMode mode) {
    switch (mode) {
        case SectorMode::Single: return "single";
        case SectorMode::CropLivestock: return "crop-livestock";
        case SectorMode::PerObligor: return "per-obligor";
    }
    return "?";
}

SectorMode parse_sector_mode(std::string_view text) {
    if (text == "single") return SectorMode::Single;
    if (text == "crop-livestock") return SectorMode::CropLivestock;
    if (text == "per-obligor") return SectorMode::PerObligor;
    throw InputError("unknown sector mode '" + std::string(text) + "'");
}

SectoredPortfolio assign_sectors(const Portfolio& portfolio, const SectorAssignment& assignment) {
    if (portfolio.obligors.empty()) throw InputError("empty portfolio");

    SectoredPortfolio out;
    out.portfolio = portfolio;
    out.mode = assignment.mode;
    const auto& obligors = portfolio.obligors;

    switch (assignment.mode) {
        case SectorMode::Single:
            out.sectors.push_back({"portfolio", {}});
            for (std::size_t i = 0; i < obligors.size(); ++i) {
                out.sub_exposures.push_back({i, 0, obligors[i].exposure, obligors[i].mean_loss_rate});
            }
            break;
        case SectorMode::CropLivestock:
            out.sectors.push_back({"crop", {}});
            out.sectors.push_back({"livestock", {}});
            for (std::size_t i = 0; i < obligors.size(); ++i) {
                const auto& o = obligors[i];
                double crop = std::clamp(o.crop_ratio, 0.0, 1.0);
                double livestock = std::clamp(o.livestock_ratio, 0.0, 1.0);
                const double sum = crop + livestock;
                if (!(sum > 0.0)) throw ModelError("obligor '" + o.id + "': crop and livestock ratios are both zero");
                if (std::abs(sum - 1.0) > kRatioRenormalizeThreshold) {
                    crop /= sum;
                    livestock /= sum;
                }
                const double crop_exposure = o.exposure * crop;
                const double livestock_exposure = o.exposure * livestock;
                if (crop_exposure > 0.0) out.sub_exposures.push_back({i, 0, crop_exposure, o.mean_loss_rate});
                if (livestock_exposure > 0.0) {
                    out.sub_exposures.push_back({i, 1, livestock_exposure, o.mean_loss_rate});
                }
            }
            break;
        case SectorMode::PerObligor:
            if (!assignment.sector_rates.empty()) {
                throw InputError("sector-rate overrides are not allowed in per-obligor mode");
            }
            for (std::size_t i = 0; i < obligors.size(); ++i) {
                const auto& o = obligors[i];
                out.sectors.push_back({o.id, {o.mean_loss_rate, o.loss_rate_stddev}});
                out.sub_exposures.push_back({i, i, o.exposure, o.mean_loss_rate});
            }
            break;
    }

    if (assignment.mode != SectorMode::PerObligor) {
        for (const auto& [name, rate] : assignment.sector_rates) {
            auto it = std::find_if(out.sectors.begin(), out.sectors.end(),
                                   [&](const auto& s) { return s.name == name; });
            if (it == out.sectors.end()) throw InputError("sector-rate override for unknown sector '" + name + "'");
        }
        for (std::size_t k = 0; k < out.sectors.size(); ++k) {
            auto& sector = out.sectors[k];
            if (auto it = assignment.sector_rates.find(sector.name); it != assignment.sector_rates.end()) {
                sector.rate = it->second;
                continue;
            }
            double weight = 0.0, mean = 0.0, stddev = 0.0;
            for (const auto& sub : out.sub_exposures) {
                if (sub.sector != k) continue;
                weight += sub.exposure;
                mean += sub.exposure * sub.loss_rate;
                stddev += sub.exposure * obligors[sub.obligor].loss_rate_stddev;
            }
            if (weight > 0.0) sector.rate = {mean / weight, stddev / weight};
        }
    }

    for (const auto& sector : out.sectors) {
        if (sector.rate.mean < 0.0 || sector.rate.stddev < 0.0) {
            throw InputError("sector '" + sector.name + "': rates must be >= 0");
        }
        if (sector.rate.mean == 0.0 && sector.rate.stddev > 0.0) {
            throw ModelError("sector '" + sector.name +
                             "': zero mean rate with positive stddev leaves the gamma parameters undefined");
        }
    }
    return out;
}

}  // namespace crplus
