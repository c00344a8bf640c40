#include "elspot/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "elspot/errors.hpp"
#include "elspot/forecast.hpp"
#include "elspot/parallel.hpp"
#include "elspot/stats.hpp"

namespace elspot {

std::string method_name(Method m) {
  switch (m) {
    case Method::Naive1: return "naive1";
    case Method::Naive2: return "naive2";
    case Method::Fundamental: return "fundamental";
    case Method::Copula: return "copula";
    case Method::CopulaFundamental1: return "copula_fundamental_1";
    case Method::CopulaFundamental2: return "copula_fundamental_2";
  }
  return "?";
}

Method method_from_name(const std::string& name) {
  for (Method m : {Method::Naive1, Method::Naive2, Method::Fundamental, Method::Copula,
                   Method::CopulaFundamental1, Method::CopulaFundamental2})
    if (method_name(m) == name) return m;
  throw ValidationError("unknown backtest method: '" + name + "'");
}

const std::vector<std::pair<int, int>>& horizon_buckets() {
  static const std::vector<std::pair<int, int>> b = {
      {1, 1},    {2, 2},    {3, 3},    {4, 6},     {7, 12},    {13, 24},
      {25, 48},  {49, 72},  {73, 96},  {97, 120},  {121, 144}, {145, 168}};
  return b;
}

std::string bucket_label(int k) {
  const auto& [lo, hi] = horizon_buckets()[k];
  if (lo == hi) return std::to_string(lo);
  return std::to_string(lo) + "-" + std::to_string(hi);
}

int bucket_of(int h) {
  const auto& bs = horizon_buckets();
  for (std::size_t k = 0; k < bs.size(); ++k)
    if (h >= bs[k].first && h <= bs[k].second) return static_cast<int>(k);
  return -1;
}

PanelDataset hourly_aggregate(const PanelDataset& data, const MarketNetwork& net) {
  if (data.period_minutes == 60) return data;
  if (data.period_minutes != 30)
    throw ValidationError("hourly aggregation expects 30- or 60-minute data");
  const int Th = static_cast<int>(data.T()) / 2;
  PanelDataset out;
  out.period_minutes = 60;
  out.transform = data.transform;
  out.timestamps.resize(Th);
  for (int t = 0; t < Th; ++t) out.timestamps[t] = data.timestamps[2 * t];
  auto avg = [&](const std::vector<std::vector<double>>& src) {
    std::vector<std::vector<double>> dst(src.size(), std::vector<double>(Th));
    for (std::size_t c = 0; c < src.size(); ++c)
      for (int t = 0; t < Th; ++t) dst[c][t] = 0.5 * (src[c][2 * t] + src[c][2 * t + 1]);
    return dst;
  };
  out.load = avg(data.load);
  out.flow = avg(data.flow);
  out.loss_adj = avg(data.loss_adj);
  out.log_price = avg(data.log_price);  // hourly log price = mean of half hours
  out.supply = avg(data.supply);        // identity is linear, averaging preserves it
  out.price.assign(net.n_regions(), std::vector<double>(Th));
  for (int j = 0; j < net.n_regions(); ++j)
    for (int t = 0; t < Th; ++t) out.price[j][t] = data.transform.from_log(out.log_price[j][t]);
  return out;
}

double naive1(const Eigen::MatrixXd& log_price, int region, int origin, int h, int day_len) {
  const int back = day_len * ((h + day_len - 1) / day_len);
  const int idx = origin + h - back;
  if (idx < 0) throw ValidationError("naive1: not enough history");
  return log_price(idx, region);
}

double naive2(const Eigen::MatrixXd& log_price, int region, int origin, int h, int day_len) {
  const int clock = ((origin + h) % day_len + day_len) % day_len;
  double s = 0.0;
  long n = 0;
  for (int t = clock; t <= origin; t += day_len) {
    if (t % day_len != clock) continue;
    s += log_price(t, region);
    ++n;
  }
  // walk from the first index with this clock time
  if (n == 0) {
    for (int t = 0; t <= origin; ++t)
      if (t % day_len == clock) {
        s += log_price(t, region);
        ++n;
      }
  }
  if (n == 0) throw ValidationError("naive2: no same-clock history");
  return s / n;
}

namespace {

double eta_at(const SupplyRegionModel& model, const MarketNetwork& net,
              const PanelDataset& hourly, int t, int j) {
  const RegressionFit& fit = model.fits[j];
  std::vector<double> arc_flows;
  for (const auto& id : fit.arc_ids) arc_flows.push_back(hourly.flow[net.arc_index(id)][t]);
  return fit.eta(hourly.supply[model.supply_region][t], arc_flows);
}

// Plain empirical margin for the regression-free copula method: a piecewise
// linear CDF through the plotting positions with boundary-slope extension.
struct PlainEdf {
  std::vector<double> x;  // sorted training values

  double u_of_x(double v) const {
    const std::size_t T = x.size();
    const double denom = T + 1.0;
    auto lo = std::lower_bound(x.begin(), x.end(), v);
    auto hi = std::upper_bound(x.begin(), x.end(), v);
    if (lo != hi) return static_cast<double>(hi - x.begin()) / denom;
    const std::size_t a = static_cast<std::size_t>(lo - x.begin());
    double xa, xb, ya, yb;
    if (a == 0) {
      xa = x[0];
      xb = x[1];
      ya = 1.0 / denom;
      yb = 2.0 / denom;
    } else if (a == T) {
      xa = x[T - 2];
      xb = x[T - 1];
      ya = (T - 1.0) / denom;
      yb = T / denom;
    } else {
      xa = x[a - 1];
      xb = x[a];
      ya = a / denom;
      yb = (a + 1.0) / denom;
    }
    const double slope = xb > xa ? (yb - ya) / (xb - xa) : 0.0;
    return std::clamp(ya + (v - xa) * slope, 1e-9, 1.0 - 1e-9);
  }

  double x_of_u(double u) const {
    const std::size_t T = x.size();
    const double denom = T + 1.0;
    u = std::clamp(u, 1e-9, 1.0 - 1e-9);
    double pos = u * denom;  // rank coordinate
    std::size_t a = static_cast<std::size_t>(pos);
    a = std::clamp<std::size_t>(a, 1, T - 1);  // interpolate between order stats
    const double xa = x[a - 1], xb = x[a];
    const double ya = a / denom, yb = (a + 1.0) / denom;
    const double slope = yb > ya ? (xb - xa) / (yb - ya) : 0.0;
    return xa + (u - ya) * slope;
  }
};

struct EdfCopulaModel {
  std::vector<PlainEdf> margins;
  CopulaModel var;
};

EdfCopulaModel build_edf_copula(const PanelDataset& train, int day_len,
                                const std::vector<int>& forced_lags) {
  const int r = static_cast<int>(train.log_price.size());
  const int T = static_cast<int>(train.T());
  EdfCopulaModel m;
  Eigen::MatrixXd w(T, r);
  for (int j = 0; j < r; ++j) {
    PlainEdf e;
    e.x = train.log_price[j];
    std::sort(e.x.begin(), e.x.end());
    for (int t = 0; t < T; ++t)
      w(t, j) = normal_quantile(e.u_of_x(train.log_price[j][t]));
    m.margins.push_back(std::move(e));
  }
  const std::vector<int> lags =
      forced_lags.empty() ? select_lags(w, day_len).lags : forced_lags;
  m.var = fit_var(w, lags);
  return m;
}

Eigen::MatrixXd edf_copula_forecast(const EdfCopulaModel& m, const PanelDataset& hourly,
                                    int origin, int horizon, int n_draws,
                                    std::uint64_t seed) {
  const int r = static_cast<int>(m.margins.size());
  const int p = std::max(m.var.markov_order(), 1);
  if (origin + 1 < p) throw ValidationError("copula method: not enough history");
  Eigen::MatrixXd hist(p, r);
  for (int k = 0; k < p; ++k)
    for (int j = 0; j < r; ++j)
      hist(k, j) = normal_quantile(m.margins[j].u_of_x(hourly.log_price[j][origin - p + 1 + k]));
  auto paths = simulate_w_paths(m.var, hist, horizon, n_draws, seed);
  Eigen::VectorXd scale(r);
  for (int j = 0; j < r; ++j) scale[j] = std::sqrt(std::max(m.var.marginal_var[j], 1e-300));
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(horizon, r);
  for (const auto& path : paths)
    for (int h = 0; h < horizon; ++h)
      for (int j = 0; j < r; ++j)
        mean(h, j) += m.margins[j].x_of_u(normal_cdf(path(h, j) / scale[j]));
  return mean / n_draws;
}

}  // namespace

std::vector<double> fundamental_forecast(const std::vector<SupplyRegionModel>& models,
                                         const PanelDataset& hourly,
                                         const MarketNetwork& net, int origin, int h) {
  const int r = net.n_regions();
  const int t = origin + h;
  if (t >= static_cast<int>(hourly.T()))
    throw ValidationError("fundamental: target beyond the dataset");
  std::vector<double> mu(r, 0.0);
  for (const auto& model : models)
    for (int j = 0; j < r; ++j)
      mu[j] += (eta_at(model, net, hourly, t, j) + model.fits[j].mixture.mean()) / models.size();
  return mu;
}

MafeTable run_backtest(const PanelDataset& data, const MarketNetwork& net,
                       const BacktestConfig& cfg) {
  const PanelDataset hourly = hourly_aggregate(data, net);
  const int r = net.n_regions();
  const int Th = static_cast<int>(hourly.T());
  const int day_len = 24;
  if (cfg.origins.empty()) throw ValidationError("backtest: no origins");
  const int train_end = *std::min_element(cfg.origins.begin(), cfg.origins.end());
  for (int o : cfg.origins)
    if (o + cfg.horizon_hours >= Th)
      throw ValidationError("backtest: origin " + std::to_string(o) +
                            " leaves no room for the horizon");

  const bool want_models =
      std::any_of(cfg.methods.begin(), cfg.methods.end(), [](Method m) {
        return m == Method::Fundamental || m == Method::CopulaFundamental1 ||
               m == Method::CopulaFundamental2;
      });
  const bool want_sim =
      std::any_of(cfg.methods.begin(), cfg.methods.end(), [](Method m) {
        return m == Method::CopulaFundamental1 || m == Method::CopulaFundamental2;
      });
  const bool want_edf = std::find(cfg.methods.begin(), cfg.methods.end(),
                                  Method::Copula) != cfg.methods.end();

  const PanelDataset train = slice_dataset(hourly, 0, train_end + 1);

  std::vector<SupplyRegionModel> models;
  if (want_models) {
    SamplerConfig fit_cfg = cfg.fit_config;
    fit_cfg.store_label_probs = false;
    fit_cfg.seed = derive_seed(cfg.seed, 0xf17ULL);
    auto fits = fit_all_regressions(train, net, fit_cfg, cfg.threads);
    for (int i = 0; i < r; ++i) {
      std::vector<RegressionFit> row(fits.begin() + i * r, fits.begin() + (i + 1) * r);
      models.push_back(build_supply_model(i, std::move(row), train, net, day_len,
                                          cfg.forced_lags));
    }
  }
  EdfCopulaModel edf;
  if (want_edf) edf = build_edf_copula(train, day_len, cfg.forced_lags);

  Eigen::MatrixXd lp(Th, r);
  for (int j = 0; j < r; ++j)
    for (int t = 0; t < Th; ++t) lp(t, j) = hourly.log_price[j][t];

  const int H = cfg.horizon_hours;
  const int n_buckets = static_cast<int>(horizon_buckets().size());
  struct Cell {
    double sum = 0.0;
    long n = 0;
    bool poisoned = false;
  };
  std::vector<std::vector<std::vector<Cell>>> acc(
      cfg.origins.size(),
      std::vector<std::vector<Cell>>(cfg.methods.size(), std::vector<Cell>(n_buckets)));

  parallel_for(cfg.origins.size(), cfg.threads, [&](std::size_t oi) {
    const int origin = cfg.origins[oi];
    // shared per-origin simulations
    std::vector<Eigen::MatrixXd> mean_eps(models.size());
    if (want_sim) {
      for (std::size_t i = 0; i < models.size(); ++i) {
        const int p = std::max(models[i].copula.markov_order(), 1);
        const Eigen::MatrixXd hist = score_history(models[i], hourly, net, origin, p);
        auto eps = simulate_eps(models[i].copula, models[i].transforms, hist, H, cfg.n_draws,
                                derive_seed(cfg.seed, 0xe5a0 + 31 * oi + i));
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(H, r);
        for (const auto& path : eps) m += path;
        mean_eps[i] = m / cfg.n_draws;
      }
    }
    Eigen::MatrixXd copula_mean;
    if (want_edf)
      copula_mean = edf_copula_forecast(edf, hourly, origin, H, cfg.n_draws,
                                        derive_seed(cfg.seed, 0xc0b0 + oi));
    // method (v): per-model flows solved hour by hour from actual loads/losses
    std::vector<Eigen::MatrixXd> opt_eta(models.size());
    if (std::find(cfg.methods.begin(), cfg.methods.end(), Method::CopulaFundamental2) !=
        cfg.methods.end()) {
      std::vector<double> loads(r), loss(r);
      for (std::size_t i = 0; i < models.size(); ++i) {
        opt_eta[i].resize(H, r);
        for (int h = 1; h <= H; ++h) {
          const int t = origin + h;
          for (int q = 0; q < r; ++q) {
            loads[q] = hourly.load[q][t];
            loss[q] = hourly.loss_adj[q][t];
          }
          const FlowSolution sol = optimize_flows(models[i], net, loads, loss);
          std::vector<double> arc_flows;
          for (int j = 0; j < r; ++j) {
            const RegressionFit& fit = models[i].fits[j];
            arc_flows.clear();
            for (const auto& id : fit.arc_ids) arc_flows.push_back(sol.flows[net.arc_index(id)]);
            opt_eta[i](h - 1, j) = fit.eta(sol.supply[models[i].supply_region], arc_flows);
          }
        }
      }
    }

    for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
      const Method method = cfg.methods[mi];
      for (int h = 1; h <= H; ++h) {
        const int k = bucket_of(h);
        if (k < 0) continue;
        Cell& cell = acc[oi][mi][k];
        if (cell.poisoned) continue;
        try {
          const int t = origin + h;
          std::vector<double> fc(r);
          switch (method) {
            case Method::Naive1:
              for (int j = 0; j < r; ++j) fc[j] = naive1(lp, j, origin, h, day_len);
              break;
            case Method::Naive2:
              for (int j = 0; j < r; ++j) fc[j] = naive2(lp, j, origin, h, day_len);
              break;
            case Method::Fundamental:
              fc = fundamental_forecast(models, hourly, net, origin, h);
              break;
            case Method::Copula:
              for (int j = 0; j < r; ++j) fc[j] = copula_mean(h - 1, j);
              break;
            case Method::CopulaFundamental1:
              for (int j = 0; j < r; ++j) {
                fc[j] = 0.0;
                for (std::size_t i = 0; i < models.size(); ++i)
                  fc[j] += (eta_at(models[i], net, hourly, t, j) + mean_eps[i](h - 1, j)) /
                           models.size();
              }
              break;
            case Method::CopulaFundamental2:
              for (int j = 0; j < r; ++j) {
                fc[j] = 0.0;
                for (std::size_t i = 0; i < models.size(); ++i)
                  fc[j] += (opt_eta[i](h - 1, j) + mean_eps[i](h - 1, j)) / models.size();
              }
              break;
          }
          // demand-weighted log price, weights from actual loads at the target
          double wsum = 0.0;
          for (int q = 0; q < r; ++q) wsum += hourly.load[q][t];
          double dw_fc = 0.0, dw_actual = 0.0;
          for (int j = 0; j < r; ++j) {
            const double wj = hourly.load[j][t] / wsum;
            dw_fc += wj * fc[j];
            dw_actual += wj * lp(t, j);
          }
          cell.sum += std::fabs(dw_fc - dw_actual);
          cell.n += 1;
        } catch (const std::exception&) {
          cell.poisoned = true;  // NA for this (origin, method, bucket)
        }
      }
    }
  });

  MafeTable table;
  for (int k = 0; k < n_buckets; ++k) table.bucket_labels.push_back(bucket_label(k));
  for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
    const std::string name = method_name(cfg.methods[mi]);
    std::vector<double> row(n_buckets, std::numeric_limits<double>::quiet_NaN());
    std::vector<long> cnt(n_buckets, 0);
    for (int k = 0; k < n_buckets; ++k) {
      double sum = 0.0;
      long n = 0;
      bool poisoned = false;
      for (std::size_t oi = 0; oi < cfg.origins.size(); ++oi) {
        const Cell& c = acc[oi][mi][k];
        if (c.poisoned) poisoned = true;
        sum += c.sum;
        n += c.n;
      }
      if (!poisoned && n > 0) row[k] = 100.0 * sum / n;
      cnt[k] = n;
    }
    table.mafe[name] = row;
    table.counts[name] = cnt;
  }
  return table;
}

void write_mafe_csv(const std::string& path, const MafeTable& table) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << "method";
  for (const auto& b : table.bucket_labels) out << ',' << b;
  out << '\n';
  for (const auto& [name, row] : table.mafe) {
    out << name;
    for (double v : row) {
      if (std::isnan(v))
        out << ",NA";
      else {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.6g", v);
        out << ',' << buf;
      }
    }
    out << '\n';
  }
}

}  // namespace elspot
