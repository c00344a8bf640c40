#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "elspot/copula.hpp"
#include "elspot/dataset.hpp"
#include "elspot/mixture.hpp"
#include "elspot/network.hpp"
#include "elspot/spline.hpp"

namespace elspot {

// Ground-truth data generator. Prices are built from a designated supply
// region's regressions: known monotone curves per price region, known cost
// curves on the outgoing arcs, and disturbances with mixture margins whose
// dependence comes from a known sparse VAR copula. Regime labels follow the
// three equilibrium cases: baseline, trade-idle (low mean, wide), and
// congestion (high mean, wide).
struct GeneratorSpec {
  MarketNetwork network;
  int supply_region = 0;

  std::vector<MonotoneFunction> price_curves;   // per price region, on supply
  std::vector<std::string> cost_arc_ids;        // arcs out of supply_region
  std::vector<MonotoneFunction> cost_curves;    // aligned with cost_arc_ids
  std::vector<MixtureParams> mixtures;          // per price region
  CopulaModel copula;                           // dependence of the disturbances

  struct LoadProcess {
    double base = 6000.0;
    double daily_amp = 0.25;     // relative daily swing
    double weekly_amp = 0.05;    // relative weekly swing
    double noise_sd = 50.0;      // iid MWh noise
    double drift_rho = 0.0;      // slow AR(1) level drift
    double drift_sd = 0.0;
  };
  std::vector<LoadProcess> loads;  // per region

  struct FlowProcess {
    double rho = 0.95;    // AR(1) of the net flow
    double sd = 60.0;     // innovation MWh
    double mean = 0.0;    // directional bias
  };
  std::vector<FlowProcess> flows;  // per arc pair

  NormBounds supply_bounds;        // raw-MWh domain of the true curves
  TransformSpec transform;
  int period_minutes = 30;
  std::int64_t start_time = 1265500800;  // 2010-02-07T00:00:00
  std::uint64_t seed = 1;
  bool zero_noise = false;
};

struct TruthRecord {
  int supply_region = -1;
  std::vector<MonotoneFunction> price_curves;
  std::vector<std::string> cost_arc_ids;
  std::vector<MonotoneFunction> cost_curves;
  std::vector<MixtureParams> mixtures;
  CopulaModel copula;
  NormBounds supply_bounds;
  std::vector<std::vector<double>> eta;     // [region][t]
  std::vector<std::vector<double>> eps;     // [region][t]
  std::vector<std::vector<int>> labels;     // [region][t], 0-based component
};

struct GeneratedData {
  PanelDataset data;
  TruthRecord truth;
};

GeneratedData generate(const GeneratorSpec& spec, int T);

// True monotone curve with a piecewise-linear derivative: derivative values
// at the checkpoints (0, knots..., 1), integrated from S(0) = 0.
MonotoneFunction make_true_curve(const std::vector<double>& knots,
                                 const std::vector<double>& deriv_at_checkpoints,
                                 NormBounds bounds);

// Presets. The five-region preset mirrors the NEM layout (region order NSW,
// QLD, SA, TAS, VIC; twelve directed arcs on six interconnectors) with curve
// kinks, mixture shapes and dependence calibrated for the event-study and
// backtest contracts: early NSW kink on the VIC supply curve, near-decoupled
// QLD block, persistent short-lag dependence.
GeneratorSpec five_region_spec(std::uint64_t seed);
GeneratorSpec two_region_spec(std::uint64_t seed);

}  // namespace elspot
