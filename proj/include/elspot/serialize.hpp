#pragma once

#include <string>

#include "elspot/copula.hpp"
#include "elspot/forecast.hpp"
#include "elspot/generator.hpp"
#include "elspot/mcmc.hpp"

#include <json.hpp>

namespace elspot {

nlohmann::json to_json(const MonotoneFunction& fn);
MonotoneFunction monotone_from_json(const nlohmann::json& j);

nlohmann::json to_json(const MixtureParams& m);
MixtureParams mixture_from_json(const nlohmann::json& j);

nlohmann::json to_json(const RegressionFit& fit, bool include_label_probs = false);
RegressionFit fit_from_json(const nlohmann::json& j);

nlohmann::json to_json(const CopulaModel& m);
CopulaModel copula_from_json(const nlohmann::json& j);

nlohmann::json to_json(const SupplyRegionModel& m, bool include_tables = true);
SupplyRegionModel supply_model_from_json(const nlohmann::json& j);

nlohmann::json to_json(const TruthRecord& t, bool include_series = true);

void save_json(const std::string& path, const nlohmann::json& j);
nlohmann::json load_json(const std::string& path);

// forecast quantile/mean table: one row per (horizon, region)
void write_forecast_csv(const std::string& path, const ForecastSet& fs,
                        const std::vector<std::string>& regions,
                        const std::vector<double>& probs);

}  // namespace elspot
