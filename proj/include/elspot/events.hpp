#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "elspot/copula.hpp"
#include "elspot/forecast.hpp"

namespace elspot {

// Supply curve shifted left by a raw-MWh amount: evaluation at b returns the
// original at b + shift, through the stored normalization.
MonotoneFunction shift_supply(const MonotoneFunction& fn, double mwh);
RegressionFit shift_supply(const RegressionFit& fit, double mwh);

// Expected dollar price from log-scale draws; draws above log(10 x price_cap)
// are capped before exponentiation (sets *capped when it happens).
double expected_price(const std::vector<double>& log_draws, double floor_offset,
                      double price_cap = 12500.0, bool* capped = nullptr);

// Closed form for the fitted mixture around a regression mean eta.
double expected_price(const MixtureParams& mix, double eta, double floor_offset);

struct SupplyShockResult {
  std::vector<double> base_price;     // $/MWh expected, per region
  std::vector<double> shocked_price;
  std::vector<double> delta;
};

// Marginal expected-price impact at one historical period of shifting the
// supply curve by `mwh` in the model's supply region.
SupplyShockResult supply_shock_study(const SupplyRegionModel& model,
                                     const PanelDataset& data, const MarketNetwork& net,
                                     int t_idx, double mwh);

struct ImpulseResult {
  Eigen::MatrixXd base_mean, shocked_mean, delta_mean;  // H x r, log scale
  std::vector<double> quantile_probs;
  std::vector<Eigen::MatrixXd> base_quantiles, shocked_quantiles;
  // draws of the shocked region's log price, n_draws x H (for density tables)
  Eigen::MatrixXd base_draws_shock_region, shocked_draws_shock_region;
};

// Generalized impulse response: predictive distributions with and without a
// dollar impulse added to the shocked region's residuals over the window
// [window_begin, window_end]. Both simulations share innovation streams
// (common random numbers), so a zero impulse gives exactly zero response.
ImpulseResult impulse_response(const SupplyRegionModel& model, const PanelDataset& data,
                               const MarketNetwork& net, int shock_region,
                               int window_begin, int window_end, double dollars,
                               int horizon, int n_draws, std::uint64_t seed);

struct DensityTable {
  std::vector<double> x, density;
  double global_bandwidth = 0.0;
  bool point_mass = false;
};

// Gaussian kernel density on a fixed grid. The global bandwidth minimizes the
// cross-validation cost of Shimazaki & Shinomoto; local bandwidths then scale
// inversely with the square root of the pilot density.
DensityTable density_report(const std::vector<double>& draws, int grid_n = 256);

}  // namespace elspot
