#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "elspot/copula.hpp"

namespace elspot {

// Demand weights over unordered region pairs (l < j), normalized to sum 1.
std::vector<double> demand_pair_weights(const std::vector<double>& loads);

// Sum of weighted absolute pairwise gaps between expected prices.
double gap_objective(const std::vector<double>& prices,
                     const std::vector<double>& pair_weights);

struct FlowSolution {
  std::vector<double> flows;        // per arc, complementarity-feasible
  std::vector<double> supply;       // implied per region
  std::vector<double> exports_by_region, imports_by_region;
  double objective = 0.0;
  double objective_zero_flow = 0.0;
};

// Minimizes the expected-price gap for one supply-region model over the
// interconnector flows: coordinate descent on the net flow of each pair with
// multi-start golden-section line searches inside the capacity box. Expected
// prices are the deterministic eta + mixture-mean shortcut.
FlowSolution optimize_flows(const SupplyRegionModel& model, const MarketNetwork& net,
                            const std::vector<double>& loads,
                            const std::vector<double>& loss_adj);

struct HorizonInputs {
  Eigen::MatrixXd flows;  // H x n_arcs
  Eigen::MatrixXd loads;  // H x r
  Eigen::MatrixXd loss;   // H x r
};

// Actual rows t_idx+1 .. t_idx+H of the dataset.
HorizonInputs actual_inputs(const PanelDataset& data, const MarketNetwork& net, int t_idx,
                            int horizon);

struct ForecastSet {
  std::vector<double> weights;                      // W_i, sum to 1
  std::vector<std::vector<Eigen::MatrixXd>> draws;  // [component][draw] (H x r) log prices
  std::vector<Eigen::MatrixXd> component_means;     // per component, H x r
  Eigen::MatrixXd mean;                             // ensemble point forecast, H x r
  std::vector<Eigen::MatrixXd> flows_used;          // per component, H x n_arcs

  // Pooled ensemble quantile per horizon/region (equal draw counts per
  // component make pooling the exact equal-weight mixture).
  Eigen::MatrixXd quantile(double p) const;
};

// Predictive draws conditional on known supply and flows over the horizon.
ForecastSet conditional_forecast(const std::vector<SupplyRegionModel>& models,
                                 const PanelDataset& data, const MarketNetwork& net,
                                 int t_idx, int horizon, const HorizonInputs& inputs,
                                 int n_draws, std::uint64_t seed);

// Flows solved per horizon step and component by optimize_flows, then the
// conditional forecast at the solved flows and implied supplies.
ForecastSet joint_forecast(const std::vector<SupplyRegionModel>& models,
                           const PanelDataset& data, const MarketNetwork& net, int t_idx,
                           int horizon, const Eigen::MatrixXd& load_forecasts,
                           const Eigen::MatrixXd& loss_adj, int n_draws,
                           std::uint64_t seed);

}  // namespace elspot
