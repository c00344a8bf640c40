#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "elspot/copula.hpp"
#include "elspot/mcmc.hpp"

namespace elspot {

enum class Method {
  Naive1,
  Naive2,
  Fundamental,
  Copula,
  CopulaFundamental1,
  CopulaFundamental2,
};

std::string method_name(Method m);
Method method_from_name(const std::string& name);

// Forecast-horizon buckets in hours: 1, 2, 3, 4-6, 7-12, 13-24, 25-48, 49-72,
// 73-96, 97-120, 121-144, 145-168.
const std::vector<std::pair<int, int>>& horizon_buckets();
std::string bucket_label(int k);
int bucket_of(int h);

struct BacktestConfig {
  std::vector<int> origins;   // hourly indices into the aggregated series
  int horizon_hours = 168;
  std::vector<Method> methods = {Method::Naive1,  Method::Naive2,
                                 Method::Fundamental, Method::Copula,
                                 Method::CopulaFundamental1,
                                 Method::CopulaFundamental2};
  SamplerConfig fit_config;
  std::vector<int> forced_lags;  // skip BIC selection when nonempty
  int n_draws = 300;
  std::uint64_t seed = 1;
  int threads = 1;
};

// Half-hourly panels are averaged into an hourly dataset (log prices averaged
// within the hour; loads, flows and losses likewise, which preserves the
// supply identity). Datasets already at 60-minute resolution pass through.
PanelDataset hourly_aggregate(const PanelDataset& data, const MarketNetwork& net);

// Single-series point forecasts on the log scale.
// Same clock time on the last observed day.
double naive1(const Eigen::MatrixXd& log_price, int region, int origin, int h, int day_len);
// Average at the same clock time over the training sample.
double naive2(const Eigen::MatrixXd& log_price, int region, int origin, int h, int day_len);

// Ensemble of eta + mixture-mean constants at known supply and flows.
std::vector<double> fundamental_forecast(const std::vector<SupplyRegionModel>& models,
                                         const PanelDataset& hourly,
                                         const MarketNetwork& net, int origin, int h);

struct MafeTable {
  std::vector<std::string> bucket_labels;
  std::map<std::string, std::vector<double>> mafe;  // x100; NaN marks an NA cell
  std::map<std::string, std::vector<long>> counts;
};

MafeTable run_backtest(const PanelDataset& data, const MarketNetwork& net,
                       const BacktestConfig& cfg);

void write_mafe_csv(const std::string& path, const MafeTable& table);

}  // namespace elspot
