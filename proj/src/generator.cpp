#include "elspot/generator.hpp"

#include <cmath>

#include "elspot/errors.hpp"
#include "elspot/rng.hpp"
#include "elspot/stats.hpp"

namespace elspot {

MonotoneFunction make_true_curve(const std::vector<double>& knots,
                                 const std::vector<double>& deriv_at_checkpoints,
                                 NormBounds bounds) {
  SplineBasis basis{knots};
  if (static_cast<int>(deriv_at_checkpoints.size()) != basis.dim())
    throw ValidationError("make_true_curve: need one derivative per checkpoint");
  std::vector<std::uint8_t> J(basis.dim(), 1);
  Eigen::VectorXd gamma(basis.dim());
  for (int i = 0; i < basis.dim(); ++i) {
    if (deriv_at_checkpoints[i] < 0.0)
      throw ValidationError("make_true_curve: negative derivative");
    gamma[i] = deriv_at_checkpoints[i];
  }
  return MonotoneFunction(std::move(basis), std::move(J), std::move(gamma), bounds);
}

namespace {

int label_from_density(const MixtureParams& mix, double eps, Rng& rng) {
  double p[3];
  double total = 0.0;
  for (int l = 0; l < 3; ++l) {
    const double sd = mix.stddevs[l];
    p[l] = sd > 0.0
               ? mix.weights[l] * normal_pdf((eps - mix.means[l]) / sd) / sd
               : (eps == mix.means[l] ? mix.weights[l] * 1e12 : 0.0);
    total += p[l];
  }
  if (total <= 0.0) {
    // far tail: pick the component with the closest standardized distance
    double best = INFINITY;
    int pick = 0;
    for (int l = 0; l < 3; ++l) {
      const double sd = std::max(mix.stddevs[l], 1e-12);
      const double z = std::fabs(eps - mix.means[l]) / sd + std::log(sd);
      if (z < best) {
        best = z;
        pick = l;
      }
    }
    return pick;
  }
  double u = rng.uniform() * total;
  for (int l = 0; l < 2; ++l) {
    if (u < p[l]) return l;
    u -= p[l];
  }
  return 2;
}

}  // namespace

GeneratedData generate(const GeneratorSpec& spec, int T) {
  const MarketNetwork& net = spec.network;
  const int r = net.n_regions();
  const int na = net.n_arcs();
  if (static_cast<int>(spec.price_curves.size()) != r ||
      static_cast<int>(spec.mixtures.size()) != r ||
      static_cast<int>(spec.loads.size()) != r)
    throw ValidationError("generator: per-region fields must match the network");
  if (spec.flows.size() != net.arc_pairs().size())
    throw ValidationError("generator: one flow process per arc pair");

  Rng rng(spec.seed);

  PanelDataset data;
  data.period_minutes = spec.period_minutes;
  data.timestamps.resize(T);
  for (int t = 0; t < T; ++t)
    data.timestamps[t] = spec.start_time + static_cast<std::int64_t>(t) * 60 * spec.period_minutes;

  const int steps_per_day = 24 * 60 / spec.period_minutes;

  // Loads: smooth daily/weekly shape, slow drift, iid noise.
  data.load.assign(r, std::vector<double>(T));
  for (int i = 0; i < r; ++i) {
    const auto& lp = spec.loads[i];
    double drift = 0.0;
    for (int t = 0; t < T; ++t) {
      const double tod = static_cast<double>(t % steps_per_day) / steps_per_day;
      const double tow = static_cast<double>(t % (7 * steps_per_day)) / (7 * steps_per_day);
      double v = lp.base * (1.0 + lp.daily_amp * std::sin(2.0 * M_PI * (tod - 0.3)) +
                            lp.weekly_amp * std::sin(2.0 * M_PI * tow));
      if (lp.drift_sd > 0.0) {
        drift = lp.drift_rho * drift + lp.drift_sd * rng.normal();
        v += drift;
      }
      if (lp.noise_sd > 0.0) v += lp.noise_sd * rng.normal();
      data.load[i][t] = std::max(v, 0.05 * lp.base);
    }
  }

  // Flows: reflected AR(1) net flow per pair keeps complementarity and the
  // observed-max capacities exact by construction.
  data.flow.assign(na, std::vector<double>(T, 0.0));
  for (std::size_t p = 0; p < net.arc_pairs().size(); ++p) {
    const auto& pair = net.arc_pairs()[p];
    const auto& fp = spec.flows[p];
    const double cap_f = net.arcs()[pair.forward].observed_max;
    const double cap_r = net.arcs()[pair.reverse].observed_max;
    double s = fp.mean;
    for (int t = 0; t < T; ++t) {
      s = fp.rho * s + (1.0 - fp.rho) * fp.mean + fp.sd * rng.normal();
      s = std::clamp(s, -cap_r, cap_f);
      data.flow[pair.forward][t] = std::max(s, 0.0);
      data.flow[pair.reverse][t] = std::max(-s, 0.0);
    }
  }

  data.loss_adj.assign(r, std::vector<double>(T, 0.0));

  // Supply of the generating region drives every price curve.
  std::vector<double> b_gen(T);
  {
    const int i0 = spec.supply_region;
    for (int t = 0; t < T; ++t) {
      double ex = 0.0, im = 0.0;
      for (int a : net.arcs_out(i0)) ex += data.flow[a][t];
      for (int a : net.arcs_in(i0)) im += data.flow[a][t];
      b_gen[t] = data.load[i0][t] + ex - im;
    }
  }

  // Disturbances: latent VAR scores -> uniform -> mixture quantile.
  TruthRecord truth;
  truth.eps.assign(r, std::vector<double>(T, 0.0));
  truth.labels.assign(r, std::vector<int>(T, 0));
  if (!spec.zero_noise) {
    const int p = spec.copula.markov_order();
    const int burn = 8 * std::max(p, 1);
    const Eigen::MatrixXd zero_hist = Eigen::MatrixXd::Zero(std::max(p, 1), r);
    auto paths = simulate_w_paths(spec.copula, zero_hist, burn + T, 1,
                                  derive_seed(spec.seed, 0x77aaULL));
    const Eigen::MatrixXd& w = paths[0];
    Eigen::VectorXd scale(r);
    for (int j = 0; j < r; ++j)
      scale[j] = std::sqrt(std::max(spec.copula.marginal_var[j], 1e-300));
    for (int j = 0; j < r; ++j)
      for (int t = 0; t < T; ++t) {
        const double u = normal_cdf(w(burn + t, j) / scale[j]);
        const double e = spec.mixtures[j].quantile(std::clamp(u, 1e-14, 1.0 - 1e-14));
        truth.eps[j][t] = e;
        truth.labels[j][t] = label_from_density(spec.mixtures[j], e, rng);
      }
  }

  // Prices: eta from the true curves plus the disturbance.
  truth.eta.assign(r, std::vector<double>(T));
  data.price.assign(r, std::vector<double>(T));
  for (int j = 0; j < r; ++j) {
    // cost terms apply on the arcs from the generating region to j
    std::vector<int> arcs;
    std::vector<const MonotoneFunction*> costs;
    for (std::size_t a = 0; a < spec.cost_arc_ids.size(); ++a) {
      const int idx = net.arc_index(spec.cost_arc_ids[a]);
      if (net.arcs()[idx].destination == j) {
        arcs.push_back(idx);
        costs.push_back(&spec.cost_curves[a]);
      }
    }
    for (int t = 0; t < T; ++t) {
      double eta = spec.price_curves[j].eval(b_gen[t]);
      for (std::size_t a = 0; a < arcs.size(); ++a)
        eta += costs[a]->eval(data.flow[arcs[a]][t]);
      truth.eta[j][t] = eta;
      const double pi = std::max(eta + truth.eps[j][t], 1e-9);
      data.price[j][t] = spec.transform.from_log(pi);
    }
  }

  data.transform = spec.transform;
  IngestOptions opts;
  opts.floor_offset = spec.transform.floor_offset;
  data.finalize(net, opts);

  truth.supply_region = spec.supply_region;
  truth.price_curves = spec.price_curves;
  truth.cost_arc_ids = spec.cost_arc_ids;
  truth.cost_curves = spec.cost_curves;
  truth.mixtures = spec.mixtures;
  truth.copula = spec.copula;
  truth.supply_bounds = spec.supply_bounds;
  return {std::move(data), std::move(truth)};
}

namespace {

Eigen::MatrixXd scaled_block(int r, double diag, double cross,
                             const std::vector<int>& decoupled, double decoupled_diag,
                             double decoupled_cross) {
  Eigen::MatrixXd A = Eigen::MatrixXd::Constant(r, r, cross);
  for (int i = 0; i < r; ++i) A(i, i) = diag;
  for (int d : decoupled) {
    for (int j = 0; j < r; ++j) {
      A(d, j) = decoupled_cross;
      A(j, d) = decoupled_cross;
    }
    A(d, d) = decoupled_diag;
  }
  return A;
}

}  // namespace

GeneratorSpec two_region_spec(std::uint64_t seed) {
  GeneratorSpec s;
  std::vector<Arc> arcs = {{"a1", 0, 1, 500.0, 480.0}, {"a2", 1, 0, 500.0, 480.0}};
  s.network = MarketNetwork({"R1", "R2"}, arcs, {{0, 1}});
  s.supply_region = 0;
  s.supply_bounds = {3400.0, 6800.0};
  s.price_curves = {
      make_true_curve({0.5}, {0.3, 0.8, 1.5}, s.supply_bounds),
      make_true_curve({0.5}, {0.2, 0.5, 1.0}, s.supply_bounds),
  };
  s.cost_arc_ids = {"a1"};
  s.cost_curves = {make_true_curve({0.6}, {0.0, 0.05, 0.3}, {0.0, 480.0})};
  MixtureParams mix;
  mix.weights = {0.90, 0.07, 0.03};
  mix.means = {0.0, -0.10, 0.60};
  mix.stddevs = {0.02, 0.12, 0.50};
  s.mixtures = {mix, mix};
  CopulaModel cop;
  cop.lags = {1};
  Eigen::MatrixXd A(2, 2);
  A << 0.70, 0.05, 0.05, 0.70;
  cop.coef = {A};
  cop.innovation_cov = 0.40 * Eigen::MatrixXd::Identity(2, 2);
  cop.marginal_var = autocov_blocks(cop, 0)[0].diagonal();
  s.copula = cop;
  s.loads = {{5000.0, 0.20, 0.04, 30.0, 0.0, 0.0}, {4000.0, 0.20, 0.04, 30.0, 0.0, 0.0}};
  s.flows = {{0.90, 50.0, 100.0}};
  s.seed = seed;
  return s;
}

GeneratorSpec five_region_spec(std::uint64_t seed) {
  GeneratorSpec s;
  // NEM-style layout: six interconnectors, twelve directed arcs.
  std::vector<std::string> regions = {"NSW", "QLD", "SA", "TAS", "VIC"};
  const int NSW = 0, QLD = 1, SA = 2, TAS = 3, VIC = 4;
  std::vector<Arc> arcs = {
      {"v1", QLD, NSW, 230.0, 231.0},   {"v2", NSW, QLD, 230.0, 50.0},
      {"v3", QLD, NSW, 1078.0, 1078.0}, {"v4", NSW, QLD, 700.0, 410.0},
      {"v5", NSW, VIC, 1350.0, 1348.0}, {"v6", VIC, NSW, 1550.0, 1525.0},
      {"v7", SA, VIC, 460.0, 455.0},    {"v8", VIC, SA, 460.0, 457.0},
      {"v9", SA, VIC, 220.0, 172.0},    {"v10", VIC, SA, 220.0, 220.0},
      {"v11", VIC, TAS, 480.0, 478.0},  {"v12", TAS, VIC, 600.0, 594.0},
  };
  std::vector<ArcPair> pairs = {{0, 1}, {2, 3}, {4, 5}, {6, 7}, {8, 9}, {10, 11}};
  s.network = MarketNetwork(regions, arcs, pairs);
  s.supply_region = VIC;
  s.supply_bounds = {4000.0, 9500.0};

  // Response curves of each regional price to VIC supply. NSW carries the
  // early kink; QLD and TAS only react near the top of the range.
  s.price_curves = {
      make_true_curve({0.35, 0.55, 0.75, 0.90}, {0.02, 0.02, 0.05, 0.90, 1.80, 2.20},
                      s.supply_bounds),                                          // NSW
      make_true_curve({0.50, 0.80, 0.93}, {0.01, 0.01, 0.012, 0.02, 1.20},
                      s.supply_bounds),                                          // QLD
      make_true_curve({0.50, 0.82, 0.92}, {0.03, 0.04, 0.09, 1.10, 2.00},
                      s.supply_bounds),                                          // SA
      make_true_curve({0.60, 0.93}, {0.02, 0.02, 0.03, 1.00}, s.supply_bounds),  // TAS
      make_true_curve({0.55, 0.88}, {0.04, 0.05, 0.07, 1.40}, s.supply_bounds),  // VIC
  };
  s.cost_arc_ids = {"v6", "v8", "v10", "v11"};
  s.cost_curves = {
      make_true_curve({0.6}, {0.0, 0.02, 0.25}, {0.0, 1525.0}),
      make_true_curve({0.6}, {0.0, 0.02, 0.22}, {0.0, 457.0}),
      make_true_curve({0.6}, {0.0, 0.01, 0.15}, {0.0, 220.0}),
      make_true_curve({0.6}, {0.0, 0.02, 0.20}, {0.0, 478.0}),
  };

  auto mix = [](std::array<double, 3> w, std::array<double, 3> a, std::array<double, 3> sd) {
    MixtureParams m;
    m.weights = w;
    m.means = a;
    m.stddevs = sd;
    return m;
  };
  s.mixtures = {
      mix({0.751, 0.222, 0.027}, {0.0, -0.002, 0.164}, {0.0025, 0.012, 0.446}),  // NSW
      mix({0.864, 0.123, 0.013}, {0.0, -0.001, 0.236}, {0.0035, 0.023, 0.732}),  // QLD
      mix({0.901, 0.008, 0.091}, {0.0, -0.050, 0.015}, {0.0056, 1.251, 0.024}),  // SA
      mix({0.900, 0.094, 0.006}, {0.0, -0.001, 0.414}, {0.0053, 0.024, 0.670}),  // TAS
      mix({0.933, 0.063, 0.004}, {0.0, -0.0005, 0.718}, {0.0059, 0.033, 0.909}), // VIC
  };

  CopulaModel cop;
  cop.lags = {1, 2, 48};
  cop.coef = {
      scaled_block(5, 0.72, 0.02, {QLD}, 0.72, 0.002),
      scaled_block(5, 0.08, 0.0, {QLD}, 0.08, 0.0),
      scaled_block(5, 0.12, 0.0, {QLD}, 0.12, 0.0),
  };
  Eigen::MatrixXd C = scaled_block(5, 1.0, 0.45, {QLD}, 1.0, 0.02);
  cop.innovation_cov = 0.12 * C;
  cop.marginal_var = autocov_blocks(cop, 0)[0].diagonal();
  s.copula = cop;

  s.loads = {
      {7600.0, 0.18, 0.04, 60.0, 0.9995, 12.0},  // NSW
      {6800.0, 0.16, 0.04, 55.0, 0.9995, 10.0},  // QLD
      {1480.0, 0.20, 0.04, 25.0, 0.9995, 5.0},   // SA
      {1150.0, 0.12, 0.03, 18.0, 0.9995, 4.0},   // TAS
      {6300.0, 0.18, 0.04, 55.0, 0.9995, 10.0},  // VIC
  };
  s.flows = {
      {0.95, 25.0, 100.0},    // Terranora: QLD -> NSW bias
      {0.95, 120.0, 700.0},   // QNI: strong QLD -> NSW
      {0.95, 200.0, -390.0},  // V-N: net VIC -> NSW
      {0.95, 60.0, -100.0},   // Heywood: net VIC -> SA
      {0.95, 40.0, 20.0},     // Murraylink
      {0.95, 80.0, 10.0},     // Basslink
  };
  s.seed = seed;
  return s;
}

}  // namespace elspot
