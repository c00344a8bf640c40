#include "elspot/events.hpp"

#include <algorithm>
#include <cmath>

#include "elspot/errors.hpp"
#include "elspot/stats.hpp"

namespace elspot {

MonotoneFunction shift_supply(const MonotoneFunction& fn, double mwh) {
  return fn.shifted(mwh / fn.bounds().width());
}

RegressionFit shift_supply(const RegressionFit& fit, double mwh) {
  RegressionFit out = fit;
  out.supply_fn = shift_supply(fit.supply_fn, mwh);
  return out;
}

double expected_price(const std::vector<double>& log_draws, double floor_offset,
                      double price_cap, bool* capped) {
  if (log_draws.empty()) throw ValidationError("expected_price: no draws");
  const double cap = std::log(10.0 * price_cap);
  bool hit = false;
  double s = 0.0;
  for (double d : log_draws) {
    if (d > cap) {
      d = cap;
      hit = true;
    }
    s += std::exp(d);
  }
  if (capped) *capped = hit;
  return s / static_cast<double>(log_draws.size()) - floor_offset;
}

double expected_price(const MixtureParams& mix, double eta, double floor_offset) {
  return mix.exp_mean(eta) - floor_offset;
}

SupplyShockResult supply_shock_study(const SupplyRegionModel& model,
                                     const PanelDataset& data, const MarketNetwork& net,
                                     int t_idx, double mwh) {
  if (t_idx < 0 || t_idx >= static_cast<int>(data.T()))
    throw ValidationError("supply shock: period outside the dataset");
  const int r = net.n_regions();
  SupplyShockResult res;
  const double b = data.supply[model.supply_region][t_idx];
  std::vector<double> arc_flows;
  for (int j = 0; j < r; ++j) {
    const RegressionFit& fit = model.fits[j];
    arc_flows.clear();
    for (const auto& id : fit.arc_ids) arc_flows.push_back(data.flow[net.arc_index(id)][t_idx]);
    const double eta0 = fit.eta(b, arc_flows);
    const RegressionFit shifted = shift_supply(fit, mwh);
    const double eta1 = shifted.eta(b, arc_flows);
    res.base_price.push_back(expected_price(fit.mixture, eta0, fit.floor_offset));
    res.shocked_price.push_back(expected_price(fit.mixture, eta1, fit.floor_offset));
    res.delta.push_back(res.shocked_price.back() - res.base_price.back());
  }
  return res;
}

ImpulseResult impulse_response(const SupplyRegionModel& model, const PanelDataset& data,
                               const MarketNetwork& net, int shock_region,
                               int window_begin, int window_end, double dollars,
                               int horizon, int n_draws, std::uint64_t seed) {
  const int r = net.n_regions();
  const int p = std::max(model.copula.markov_order(), 1);
  if (window_begin > window_end || window_begin < 0 ||
      window_end >= static_cast<int>(data.T()))
    throw ValidationError("impulse: shock window outside the observed history");
  if (window_end - p + 1 < 0)
    throw ValidationError("impulse: not enough history before the window");
  const int t0 = window_end;  // forecast origin

  const Eigen::MatrixXd hist_base = score_history(model, data, net, t0, p);
  Eigen::MatrixXd hist_shocked = hist_base;
  {
    const auto resid = residual_series(model.fits[shock_region], data, net);
    const double off = data.transform.floor_offset;
    for (int t = window_begin; t <= window_end; ++t) {
      const int row = p - 1 - (t0 - t);
      if (row < 0) continue;  // shock earlier than the Markov window
      const double price = data.price[shock_region][t];
      const double log_shift = std::log(price + off + dollars) - std::log(price + off);
      const double u = model.transforms[shock_region].u_of_eps(resid[t] + log_shift);
      hist_shocked(row, shock_region) = normal_quantile(u);
    }
  }

  auto eps_base = simulate_eps(model.copula, model.transforms, hist_base, horizon, n_draws, seed);
  auto eps_shock =
      simulate_eps(model.copula, model.transforms, hist_shocked, horizon, n_draws, seed);

  // Predictive distributions of log price need eta over the horizon; the
  // origin is historical, so actual supply and flows are available.
  const HorizonInputs in = actual_inputs(data, net, t0, horizon);
  Eigen::MatrixXd eta(horizon, r);
  std::vector<double> arc_flows;
  for (int h = 0; h < horizon; ++h) {
    double ex = 0.0, im = 0.0;
    for (int a : net.arcs_out(model.supply_region)) ex += in.flows(h, a);
    for (int a : net.arcs_in(model.supply_region)) im += in.flows(h, a);
    const double b_i =
        in.loads(h, model.supply_region) + ex - im + in.loss(h, model.supply_region);
    for (int j = 0; j < r; ++j) {
      const RegressionFit& fit = model.fits[j];
      arc_flows.clear();
      for (const auto& id : fit.arc_ids) arc_flows.push_back(in.flows(h, net.arc_index(id)));
      eta(h, j) = fit.eta(b_i, arc_flows);
    }
  }

  ImpulseResult res;
  res.base_mean = Eigen::MatrixXd::Zero(horizon, r);
  res.shocked_mean = Eigen::MatrixXd::Zero(horizon, r);
  res.base_draws_shock_region.resize(n_draws, horizon);
  res.shocked_draws_shock_region.resize(n_draws, horizon);
  for (int d = 0; d < n_draws; ++d) {
    eps_base[d] += eta;
    eps_shock[d] += eta;
    res.base_mean += eps_base[d];
    res.shocked_mean += eps_shock[d];
    res.base_draws_shock_region.row(d) = eps_base[d].col(shock_region).transpose();
    res.shocked_draws_shock_region.row(d) = eps_shock[d].col(shock_region).transpose();
  }
  res.base_mean /= n_draws;
  res.shocked_mean /= n_draws;
  res.delta_mean = res.shocked_mean - res.base_mean;

  res.quantile_probs = {0.05, 0.25, 0.50, 0.75, 0.95};
  std::vector<double> pool(n_draws);
  for (double prob : res.quantile_probs) {
    Eigen::MatrixXd qb(horizon, r), qs(horizon, r);
    for (int h = 0; h < horizon; ++h)
      for (int j = 0; j < r; ++j) {
        for (int d = 0; d < n_draws; ++d) pool[d] = eps_base[d](h, j);
        std::sort(pool.begin(), pool.end());
        qb(h, j) = quantile_sorted(pool, prob);
        for (int d = 0; d < n_draws; ++d) pool[d] = eps_shock[d](h, j);
        std::sort(pool.begin(), pool.end());
        qs(h, j) = quantile_sorted(pool, prob);
      }
    res.base_quantiles.push_back(std::move(qb));
    res.shocked_quantiles.push_back(std::move(qs));
  }
  return res;
}

namespace {

struct Binned {
  std::vector<double> centers, counts;
  double n = 0.0;
};

Binned bin_draws(const std::vector<double>& draws, double lo, double hi, int bins) {
  Binned b;
  b.centers.resize(bins);
  b.counts.assign(bins, 0.0);
  const double w = (hi - lo) / bins;
  for (int i = 0; i < bins; ++i) b.centers[i] = lo + (i + 0.5) * w;
  for (double x : draws) {
    int k = static_cast<int>((x - lo) / w);
    k = std::clamp(k, 0, bins - 1);
    b.counts[k] += 1.0;
  }
  b.n = static_cast<double>(draws.size());
  return b;
}

// Cross-validation cost of a fixed Gaussian bandwidth on binned data
// (Shimazaki & Shinomoto 2010): C(w) = (1/n^2) sum_{ij} k_{sqrt2 w}(d_ij)
//                                    - (2/n^2) sum_{i != j} k_w(d_ij).
double ss_cost(const Binned& b, double w) {
  const int B = static_cast<int>(b.centers.size());
  const double n = b.n;
  double within = 0.0, cross = 0.0;
  for (int i = 0; i < B; ++i) {
    if (b.counts[i] == 0.0) continue;
    for (int j = i; j < B; ++j) {
      if (b.counts[j] == 0.0) continue;
      const double d = b.centers[j] - b.centers[i];
      const double pairs = (i == j) ? b.counts[i] * b.counts[i] : 2.0 * b.counts[i] * b.counts[j];
      const double off_pairs =
          (i == j) ? b.counts[i] * (b.counts[i] - 1.0) : 2.0 * b.counts[i] * b.counts[j];
      within += pairs * normal_pdf(d / (std::sqrt(2.0) * w)) / (std::sqrt(2.0) * w);
      cross += off_pairs * normal_pdf(d / w) / w;
    }
  }
  return within / (n * n) - 2.0 * cross / (n * n);
}

}  // namespace

DensityTable density_report(const std::vector<double>& draws, int grid_n) {
  if (draws.size() < 1000)
    throw ValidationError("density_report: needs at least 1000 draws");
  DensityTable out;
  const double sd = stddev(draws);
  const double m = mean(draws);
  if (sd < 1e-12 * (1.0 + std::fabs(m))) {
    out.point_mass = true;
    out.x = {m};
    out.density = {INFINITY};
    return out;
  }

  const auto [mn_it, mx_it] = std::minmax_element(draws.begin(), draws.end());
  const double lo = *mn_it - 0.05 * (*mx_it - *mn_it) - 1e-12;
  const double hi = *mx_it + 0.05 * (*mx_it - *mn_it) + 1e-12;
  const int bins = 512;
  const Binned b = bin_draws(draws, lo, hi, bins);

  // golden-section over log bandwidth
  const double n = static_cast<double>(draws.size());
  double wl = std::log(std::max(sd * std::pow(n, -0.9), (hi - lo) / bins));
  double wh = std::log(3.0 * sd);
  auto cost = [&](double lw) { return ss_cost(b, std::exp(lw)); };
  static const double inv_phi = 0.6180339887498949;
  double x1 = wh - inv_phi * (wh - wl), x2 = wl + inv_phi * (wh - wl);
  double f1 = cost(x1), f2 = cost(x2);
  for (int it = 0; it < 60; ++it) {
    if (f1 <= f2) {
      wh = x2;
      x2 = x1;
      f2 = f1;
      x1 = wh - inv_phi * (wh - wl);
      f1 = cost(x1);
    } else {
      wl = x1;
      x1 = x2;
      f1 = f2;
      x2 = wl + inv_phi * (wh - wl);
      f2 = cost(x2);
    }
  }
  const double w0 = std::exp(0.5 * (wl + wh));
  out.global_bandwidth = w0;

  // pilot density at the source bins, then square-root local scaling
  const int B = static_cast<int>(b.centers.size());
  std::vector<double> pilot(B, 0.0);
  for (int i = 0; i < B; ++i) {
    double f = 0.0;
    for (int j = 0; j < B; ++j) {
      if (b.counts[j] == 0.0) continue;
      const double d = (b.centers[i] - b.centers[j]) / w0;
      f += b.counts[j] * normal_pdf(d) / w0;
    }
    pilot[i] = f / n;
  }
  double log_g = 0.0, wsum = 0.0;
  for (int j = 0; j < B; ++j)
    if (b.counts[j] > 0.0 && pilot[j] > 0.0) {
      log_g += b.counts[j] * std::log(pilot[j]);
      wsum += b.counts[j];
    }
  const double g = std::exp(log_g / std::max(wsum, 1.0));
  std::vector<double> local(B, w0);
  for (int j = 0; j < B; ++j)
    if (b.counts[j] > 0.0 && pilot[j] > 0.0)
      local[j] = std::clamp(w0 * std::sqrt(g / pilot[j]), 0.25 * w0, 4.0 * w0);

  out.x.resize(grid_n);
  out.density.assign(grid_n, 0.0);
  const double span_lo = lo - 3.0 * w0, span_hi = hi + 3.0 * w0;
  for (int i = 0; i < grid_n; ++i)
    out.x[i] = span_lo + (span_hi - span_lo) * i / (grid_n - 1);
  for (int i = 0; i < grid_n; ++i) {
    double f = 0.0;
    for (int j = 0; j < B; ++j) {
      if (b.counts[j] == 0.0) continue;
      const double hw = local[j];
      f += b.counts[j] * normal_pdf((out.x[i] - b.centers[j]) / hw) / hw;
    }
    out.density[i] = f / n;
  }
  return out;
}

}  // namespace elspot
