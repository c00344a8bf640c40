#include "elspot/forecast.hpp"

#include <algorithm>
#include <cmath>

#include "elspot/errors.hpp"
#include "elspot/stats.hpp"

namespace elspot {

std::vector<double> demand_pair_weights(const std::vector<double>& loads) {
  const int r = static_cast<int>(loads.size());
  std::vector<double> w;
  double total = 0.0;
  for (int j = 1; j < r; ++j)
    for (int l = 0; l < j; ++l) {
      w.push_back(loads[l] + loads[j]);
      total += w.back();
    }
  if (total <= 0.0) throw ValidationError("demand weights: nonpositive total load");
  for (double& v : w) v /= total;
  return w;
}

double gap_objective(const std::vector<double>& prices,
                     const std::vector<double>& pair_weights) {
  const int r = static_cast<int>(prices.size());
  double d = 0.0;
  int k = 0;
  for (int j = 1; j < r; ++j)
    for (int l = 0; l < j; ++l, ++k) d += pair_weights[k] * std::fabs(prices[j] - prices[l]);
  return d;
}

namespace {

// Contextual evaluation of D for one supply-region model at a net-flow
// configuration; +inf when any implied supply is nonpositive.
struct GapEvaluator {
  const SupplyRegionModel& model;
  const MarketNetwork& net;
  const std::vector<double>& loads;
  const std::vector<double>& loss;
  std::vector<double> pair_weights;

  std::vector<double> flows;  // scratch, per arc

  explicit GapEvaluator(const SupplyRegionModel& m, const MarketNetwork& n,
                        const std::vector<double>& ld, const std::vector<double>& ls)
      : model(m), net(n), loads(ld), loss(ls), pair_weights(demand_pair_weights(ld)),
        flows(n.n_arcs(), 0.0) {}

  void set_net_flows(const std::vector<double>& s) {
    const auto& pairs = net.arc_pairs();
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      flows[pairs[p].forward] = std::max(s[p], 0.0);
      flows[pairs[p].reverse] = std::max(-s[p], 0.0);
    }
  }

  double supply_of(int q) const {
    double ex = 0.0, im = 0.0;
    for (int a : net.arcs_out(q)) ex += flows[a];
    for (int a : net.arcs_in(q)) im += flows[a];
    return loads[q] + ex - im + loss[q];
  }

  double operator()(const std::vector<double>& s) {
    set_net_flows(s);
    const int r = net.n_regions();
    for (int q = 0; q < r; ++q)
      if (!(supply_of(q) > 0.0)) return INFINITY;
    const double b_i = supply_of(model.supply_region);
    std::vector<double> a(r);
    std::vector<double> arc_flows;
    for (int j = 0; j < r; ++j) {
      const RegressionFit& fit = model.fits[j];
      arc_flows.clear();
      for (const auto& id : fit.arc_ids) arc_flows.push_back(flows[net.arc_index(id)]);
      a[j] = fit.eta(b_i, arc_flows) + fit.mixture.mean();
    }
    return gap_objective(a, pair_weights);
  }
};

// Golden-section minimum of f on [a, b].
template <typename F>
std::pair<double, double> golden_min(F&& f, double a, double b, double tol) {
  static const double inv_phi = 0.6180339887498949;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    }
  }
  const double xm = 0.5 * (a + b);
  return {xm, f(xm)};
}

}  // namespace

FlowSolution optimize_flows(const SupplyRegionModel& model, const MarketNetwork& net,
                            const std::vector<double>& loads,
                            const std::vector<double>& loss_adj) {
  GapEvaluator eval(model, net, loads, loss_adj);
  const auto& pairs = net.arc_pairs();
  std::vector<double> s(pairs.size(), 0.0);
  const double d0 = eval(s);
  double best = d0;

  for (int pass = 0; pass < 60; ++pass) {
    double improved = 0.0;
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      const double lo = -net.arcs()[pairs[p].reverse].observed_max;
      const double hi = net.arcs()[pairs[p].forward].observed_max;
      auto line = [&](double v) {
        std::vector<double> cand(s);
        cand[p] = v;
        return eval(cand);
      };
      // multi-start at {lo, lo/2, 0, hi/2, hi} with golden sections between
      const double starts[5] = {lo, 0.5 * lo, 0.0, 0.5 * hi, hi};
      double bx = s[p], bf = best;
      for (int k = 0; k < 5; ++k) {
        const double fv = line(starts[k]);
        if (fv < bf) {
          bf = fv;
          bx = starts[k];
        }
      }
      for (int k = 0; k + 1 < 5; ++k) {
        auto [x, fx] = golden_min(line, starts[k], starts[k + 1],
                                  1e-9 * (hi - lo) + 1e-12);
        if (fx < bf) {
          bf = fx;
          bx = x;
        }
      }
      if (bf < best - 1e-14) {
        improved += best - bf;
        best = bf;
        s[p] = bx;
      }
    }
    if (improved < 1e-12) break;
  }

  FlowSolution sol;
  eval.set_net_flows(s);
  sol.flows = eval.flows;
  const int r = net.n_regions();
  sol.supply.resize(r);
  sol.exports_by_region.assign(r, 0.0);
  sol.imports_by_region.assign(r, 0.0);
  for (int q = 0; q < r; ++q) {
    sol.supply[q] = eval.supply_of(q);
    for (int a : net.arcs_out(q)) sol.exports_by_region[q] += eval.flows[a];
    for (int a : net.arcs_in(q)) sol.imports_by_region[q] += eval.flows[a];
  }
  sol.objective = best;
  sol.objective_zero_flow = d0;
  return sol;
}

HorizonInputs actual_inputs(const PanelDataset& data, const MarketNetwork& net, int t_idx,
                            int horizon) {
  if (t_idx + horizon >= static_cast<int>(data.T()))
    throw ValidationError("horizon inputs: dataset ends before t+" + std::to_string(horizon));
  HorizonInputs in;
  in.flows.resize(horizon, net.n_arcs());
  in.loads.resize(horizon, net.n_regions());
  in.loss.resize(horizon, net.n_regions());
  for (int h = 0; h < horizon; ++h) {
    const int t = t_idx + 1 + h;
    for (int a = 0; a < net.n_arcs(); ++a) in.flows(h, a) = data.flow[a][t];
    for (int q = 0; q < net.n_regions(); ++q) {
      in.loads(h, q) = data.load[q][t];
      in.loss(h, q) = data.loss_adj[q][t];
    }
  }
  return in;
}

Eigen::MatrixXd ForecastSet::quantile(double p) const {
  const int H = static_cast<int>(mean.rows());
  const int r = static_cast<int>(mean.cols());
  Eigen::MatrixXd out(H, r);
  std::vector<double> pool;
  for (int h = 0; h < H; ++h)
    for (int j = 0; j < r; ++j) {
      pool.clear();
      for (const auto& comp : draws)
        for (const auto& d : comp) pool.push_back(d(h, j));
      std::sort(pool.begin(), pool.end());
      out(h, j) = quantile_sorted(pool, p);
    }
  return out;
}

namespace {

ForecastSet forecast_with_inputs(const std::vector<SupplyRegionModel>& models,
                                 const PanelDataset& data, const MarketNetwork& net,
                                 int t_idx, int horizon,
                                 const std::vector<HorizonInputs>& per_model_inputs,
                                 int n_draws, std::uint64_t seed) {
  const int r = net.n_regions();
  if (static_cast<int>(models.size()) != r)
    throw ValidationError("forecast: need one fitted model per supply region");

  ForecastSet fs;
  fs.weights.assign(r, 1.0 / r);
  fs.mean = Eigen::MatrixXd::Zero(horizon, r);

  for (int i = 0; i < r; ++i) {
    const SupplyRegionModel& model = models[i];
    const HorizonInputs& in = per_model_inputs[i];
    // eta over the horizon from the given flows and implied supply
    Eigen::MatrixXd eta(horizon, r);
    std::vector<double> arc_flows;
    for (int h = 0; h < horizon; ++h) {
      double ex = 0.0, im = 0.0;
      for (int a : net.arcs_out(model.supply_region)) ex += in.flows(h, a);
      for (int a : net.arcs_in(model.supply_region)) im += in.flows(h, a);
      const double b_i = in.loads(h, model.supply_region) + ex - im +
                         in.loss(h, model.supply_region);
      for (int j = 0; j < r; ++j) {
        const RegressionFit& fit = model.fits[j];
        arc_flows.clear();
        for (const auto& id : fit.arc_ids) arc_flows.push_back(in.flows(h, net.arc_index(id)));
        eta(h, j) = fit.eta(b_i, arc_flows);
      }
    }

    const int p = std::max(model.copula.markov_order(), 1);
    const Eigen::MatrixXd hist = score_history(model, data, net, t_idx, p);
    auto eps = simulate_eps(model.copula, model.transforms, hist, horizon, n_draws,
                            derive_seed(seed, static_cast<std::uint64_t>(i)));
    Eigen::MatrixXd comp_mean = Eigen::MatrixXd::Zero(horizon, r);
    for (auto& path : eps) {
      path += eta;
      comp_mean += path;
    }
    comp_mean /= static_cast<double>(n_draws);
    fs.component_means.push_back(comp_mean);
    fs.mean += fs.weights[i] * comp_mean;
    fs.draws.push_back(std::move(eps));
    fs.flows_used.push_back(in.flows);
  }
  return fs;
}

}  // namespace

ForecastSet conditional_forecast(const std::vector<SupplyRegionModel>& models,
                                 const PanelDataset& data, const MarketNetwork& net,
                                 int t_idx, int horizon, const HorizonInputs& inputs,
                                 int n_draws, std::uint64_t seed) {
  if (inputs.flows.rows() < horizon || inputs.loads.rows() < horizon)
    throw ValidationError("forecast: horizon inputs shorter than the horizon");
  std::vector<HorizonInputs> per_model(models.size(), inputs);
  return forecast_with_inputs(models, data, net, t_idx, horizon, per_model, n_draws, seed);
}

ForecastSet joint_forecast(const std::vector<SupplyRegionModel>& models,
                           const PanelDataset& data, const MarketNetwork& net, int t_idx,
                           int horizon, const Eigen::MatrixXd& load_forecasts,
                           const Eigen::MatrixXd& loss_adj, int n_draws,
                           std::uint64_t seed) {
  if (load_forecasts.rows() < horizon)
    throw ValidationError("forecast: load forecasts shorter than the horizon");
  const int r = net.n_regions();
  std::vector<HorizonInputs> per_model(models.size());
  std::vector<double> loads(r), loss(r);
  for (std::size_t i = 0; i < models.size(); ++i) {
    HorizonInputs& in = per_model[i];
    in.flows.resize(horizon, net.n_arcs());
    in.loads = load_forecasts.topRows(horizon);
    in.loss = loss_adj.topRows(horizon);
    for (int h = 0; h < horizon; ++h) {
      for (int q = 0; q < r; ++q) {
        loads[q] = load_forecasts(h, q);
        loss[q] = loss_adj(h, q);
      }
      const FlowSolution sol = optimize_flows(models[i], net, loads, loss);
      for (int a = 0; a < net.n_arcs(); ++a) in.flows(h, a) = sol.flows[a];
    }
  }
  return forecast_with_inputs(models, data, net, t_idx, horizon, per_model, n_draws, seed);
}

}  // namespace elspot
