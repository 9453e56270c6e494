#pragma once

#include <filesystem>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "crplus/analytics.hpp"
#include "crplus/engine.hpp"
#include "crplus/oracle.hpp"
#include "crplus/portfolio.hpp"

namespace crplus {

// Reports and distributions as JSON and as CSV tables.

void to_json(nlohmann::json& j, const ValidationFinding& f);
void from_json(const nlohmann::json& j, ValidationFinding& f);
void to_json(nlohmann::json& j, const RiskReport& r);
void from_json(const nlohmann::json& j, RiskReport& r);

nlohmann::json loss_distribution_json(const LossDistribution& d);
LossDistribution loss_distribution_from_json(const nlohmann::json& j);

// loss_units,loss_money,pmf,cdf
std::string loss_distribution_csv(const LossDistribution& d);
// exceedance_prob,loss
std::string quantiles_csv(const RiskReport& r);
// id,name,expected_loss,<one column per level>; TOTAL row last
std::string contributions_csv(const RiskReport& r);

nlohmann::json simulation_json(const SimConfig& config, const EmpiricalDistribution& e, const ComparisonReport& c);
std::string samples_csv(const EmpiricalDistribution& e);

std::string format_double(double v);  // %.17g, locale independent
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace crplus
