#include <doctest.h>

#include <cmath>

#include "elspot/forecast.hpp"
#include "elspot/generator.hpp"
#include "elspot/rng.hpp"
#include "elspot/stats.hpp"
#include "truth_models.hpp"

using namespace elspot;

TEST_SUITE_BEGIN("forecast");

TEST_CASE("gap objective closed forms and brute-force oracle") {
  CHECK(gap_objective({5.0, 5.0, 5.0}, demand_pair_weights({1.0, 2.0, 3.0})) == 0.0);
  CHECK(gap_objective({3.0, 5.0}, {1.0}) == doctest::Approx(2.0));
  Rng rng(3);
  for (int rep = 0; rep < 30; ++rep) {
    const int r = 2 + static_cast<int>(rng.uniform() * 4);
    std::vector<double> a(r), loads(r);
    for (int j = 0; j < r; ++j) {
      a[j] = 10.0 * rng.uniform();
      loads[j] = 1.0 + rng.uniform();
    }
    const auto w = demand_pair_weights(loads);
    double total_w = 0.0, expect = 0.0;
    int k = 0;
    double denom = 0.0;
    for (int j = 1; j < r; ++j)
      for (int l = 0; l < j; ++l) denom += loads[l] + loads[j];
    for (int j = 1; j < r; ++j)
      for (int l = 0; l < j; ++l, ++k) {
        expect += (loads[l] + loads[j]) / denom * std::fabs(a[j] - a[l]);
        total_w += w[k];
      }
    CHECK(total_w == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(gap_objective(a, w) == doctest::Approx(expect).epsilon(1e-12));
  }
}

namespace {

// two-region toy model with explicit curve shapes for the optimizer tests
std::vector<SupplyRegionModel> toy_models(double steep1, double steep2, double alpha_gap,
                                          const MarketNetwork& net) {
  const NormBounds sb{2000.0, 8000.0};
  std::vector<SupplyRegionModel> models;
  for (int i = 0; i < 2; ++i) {
    SupplyRegionModel m;
    m.supply_region = i;
    for (int j = 0; j < 2; ++j) {
      RegressionFit fit;
      fit.supply_region = i;
      fit.price_region = j;
      fit.supply_fn = make_true_curve({0.5}, j == 0 ? std::vector<double>{steep1, steep1, steep1}
                                                    : std::vector<double>{steep2, steep2, steep2},
                                      sb);
      for (int a : net.arcs_between(i, j)) {
        fit.arc_ids.push_back(net.arcs()[a].id);
        fit.cost_fns.push_back(
            make_true_curve({0.5}, {0.0, 0.005, 0.01}, {0.0, net.arcs()[a].observed_max}));
      }
      fit.mixture.weights = {0.998, 0.001, 0.001};
      fit.mixture.means = {j == 1 ? alpha_gap : 0.0, -1.0 + (j == 1 ? alpha_gap : 0.0),
                           1.0 + (j == 1 ? alpha_gap : 0.0)};
      fit.mixture.stddevs = {0.01, 0.05, 0.05};
      m.fits.push_back(std::move(fit));
    }
    m.copula.lags = {1};
    m.copula.coef = {Eigen::MatrixXd::Zero(2, 2)};
    m.copula.innovation_cov = Eigen::MatrixXd::Zero(2, 2);
    m.copula.marginal_var = Eigen::VectorXd::Ones(2);
    models.push_back(std::move(m));
  }
  return models;
}

MarketNetwork toy_net(double cap = 800.0) {
  std::vector<Arc> arcs = {{"f", 0, 1, cap, cap}, {"r", 1, 0, cap, cap}};
  return MarketNetwork({"R1", "R2"}, arcs, {{0, 1}});
}

// brute-force scalar grid search over the single pair's net flow
double grid_best(const SupplyRegionModel& model, const MarketNetwork& net,
                 const std::vector<double>& loads, const std::vector<double>& loss,
                 int points, double* best_s = nullptr) {
  const double cap_f = net.arcs()[0].observed_max;
  const double cap_r = net.arcs()[1].observed_max;
  double best = INFINITY, bs = 0.0;
  for (int k = 0; k <= points; ++k) {
    const double s = -cap_r + (cap_f + cap_r) * k / points;
    std::vector<double> flows = {std::max(s, 0.0), std::max(-s, 0.0)};
    std::vector<double> supply(2);
    supply[0] = loads[0] + flows[0] - flows[1] + loss[0];
    supply[1] = loads[1] + flows[1] - flows[0] + loss[1];
    if (supply[0] <= 0.0 || supply[1] <= 0.0) continue;
    std::vector<double> a(2);
    for (int j = 0; j < 2; ++j) {
      const auto& fit = model.fits[j];
      std::vector<double> af;
      for (const auto& id : fit.arc_ids) af.push_back(flows[net.arc_index(id)]);
      a[j] = fit.eta(supply[model.supply_region], af) + fit.mixture.mean();
    }
    const double d = gap_objective(a, demand_pair_weights(loads));
    if (d < best) {
      best = d;
      bs = s;
    }
  }
  if (best_s) *best_s = bs;
  return best;
}

}  // namespace

TEST_CASE("optimizer: symmetric toy stays at zero flow") {
  const auto net = toy_net();
  const auto models = toy_models(1.0, 1.0, 0.0, net);
  const std::vector<double> loads = {5000.0, 5000.0}, loss = {0.0, 0.0};
  const auto sol = optimize_flows(models[0], net, loads, loss);
  CHECK(sol.flows[0] == 0.0);
  CHECK(sol.flows[1] == 0.0);
  CHECK(sol.objective == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("optimizer: gap-reducing flow matches grid search, including binding caps") {
  Rng rng(11);
  for (int rep = 0; rep < 25; ++rep) {
    const double cap = rep % 3 == 0 ? 150.0 : 900.0;  // binding and interior cases
    const auto net = toy_net(cap);
    // region-1 curve steeper than region 2's, a level gap to close
    const double s1 = 0.8 + 1.5 * rng.uniform();
    const double s2 = 0.1 + 0.3 * rng.uniform();
    const double gap = 0.1 + 0.4 * rng.uniform();
    const auto models = toy_models(s1, s2, gap, net);
    std::vector<double> loads = {4500.0 + 1000.0 * rng.uniform(),
                                 4500.0 + 1000.0 * rng.uniform()};
    std::vector<double> loss = {0.0, 0.0};
    const auto sol = optimize_flows(models[0], net, loads, loss);
    double gs;
    const double gbest = grid_best(models[0], net, loads, loss, 1000, &gs);
    const double resolution = (2.0 * cap) / 1000.0;
    CHECK(sol.objective <= gbest + 1e-9);
    CHECK(sol.objective <= sol.objective_zero_flow + 1e-12);
    const double net_flow = sol.flows[0] - sol.flows[1];
    CHECK(std::fabs(net_flow - gs) <= resolution + 1e-9);
    CHECK(std::min(sol.flows[0], sol.flows[1]) == 0.0);
    CHECK(sol.flows[0] <= cap + 1e-9);
    CHECK(sol.flows[1] <= cap + 1e-9);
  }
}

TEST_CASE("conditional forecast: degenerate copula gives a point mass at eta plus a constant") {
  auto gen = generate(two_region_spec(71), 300);
  const MarketNetwork network = two_region_spec(71).network;
  auto models = testing::truth_models(gen, network);
  for (auto& m : models) {
    m.copula.lags = {1};
    m.copula.coef = {Eigen::MatrixXd::Zero(2, 2)};
    m.copula.innovation_cov = Eigen::MatrixXd::Zero(2, 2);
    m.copula.marginal_var = Eigen::VectorXd::Ones(2);
  }
  const int t0 = 200, H = 1;
  const auto inputs = actual_inputs(gen.data, network, t0, H);
  const auto fs = conditional_forecast(models, gen.data, network, t0, H, inputs, 8, 5);
  for (const auto& comp : fs.draws)
    for (std::size_t d = 1; d < comp.size(); ++d)
      CHECK((comp[d] - comp[0]).norm() == doctest::Approx(0.0));
  // ensemble mean equals the weighted component means; collapsing the weight
  // onto one component reproduces that component's mean
  Eigen::MatrixXd recomputed = Eigen::MatrixXd::Zero(H, 2);
  for (std::size_t i = 0; i < models.size(); ++i)
    recomputed += fs.weights[i] * fs.component_means[i];
  CHECK((recomputed - fs.mean).norm() < 1e-12);
  const Eigen::MatrixXd collapsed = 1.0 * fs.component_means[0];
  CHECK((collapsed - fs.component_means[0]).norm() == 0.0);
}

TEST_CASE("long-horizon predictive mean approaches eta plus the marginal mean") {
  auto gen = generate(two_region_spec(73), 2000);
  const MarketNetwork network = two_region_spec(73).network;
  auto models = testing::truth_models(gen, network);
  const int H = 10 * models[0].copula.markov_order() + 40;
  const int t0 = 1500;
  const int n_draws = 4000;
  const auto inputs = actual_inputs(gen.data, network, t0, H);
  const auto fs = conditional_forecast(models, gen.data, network, t0, H, inputs, n_draws, 7);
  // quadrature for the marginal mean of the transformed disturbance
  for (int j = 0; j < 2; ++j) {
    double marg = 0.0;
    const int Q = 20000;
    for (int q = 0; q < Q; ++q)
      marg += models[0].transforms[j].eps_of_u((q + 0.5) / Q);
    marg /= Q;
    // eta for component 0 at the last horizon step
    double ex = 0.0, im = 0.0;
    for (int a : network.arcs_out(0)) ex += inputs.flows(H - 1, a);
    for (int a : network.arcs_in(0)) im += inputs.flows(H - 1, a);
    const double b = inputs.loads(H - 1, 0) + ex - im + inputs.loss(H - 1, 0);
    std::vector<double> af;
    for (const auto& id : models[0].fits[j].arc_ids)
      af.push_back(inputs.flows(H - 1, network.arc_index(id)));
    const double eta = models[0].fits[j].eta(b, af);
    // MC tolerance: marginal sd of the disturbance over sqrt(draws)
    std::vector<double> draw_vals;
    for (const auto& d : fs.draws[0]) draw_vals.push_back(d(H - 1, j));
    const double sd = stddev(draw_vals);
    CHECK(std::fabs(fs.component_means[0](H - 1, j) - (eta + marg)) <
          4.0 * sd / std::sqrt(static_cast<double>(n_draws)) + 1e-6);
  }
}

TEST_CASE("joint forecast without arcs reduces to the conditional forecast") {
  // single-region network: no arcs, no pairs
  MarketNetwork net({"solo"}, {}, {});
  GeneratorSpec spec;
  spec.network = net;
  spec.supply_region = 0;
  spec.supply_bounds = {3000.0, 7000.0};
  spec.price_curves = {make_true_curve({0.5}, {0.2, 0.6, 1.2}, spec.supply_bounds)};
  MixtureParams mix;
  mix.weights = {0.9, 0.05, 0.05};
  mix.means = {0.0, -0.2, 0.4};
  mix.stddevs = {0.02, 0.1, 0.2};
  spec.mixtures = {mix};
  CopulaModel cop;
  cop.lags = {1};
  cop.coef = {Eigen::MatrixXd::Constant(1, 1, 0.6)};
  cop.innovation_cov = Eigen::MatrixXd::Identity(1, 1);
  cop.marginal_var = autocov_blocks(cop, 0)[0].diagonal();
  spec.copula = cop;
  spec.loads = {{5000.0, 0.2, 0.04, 30.0, 0.0, 0.0}};
  spec.flows = {};
  spec.seed = 77;
  auto gen = generate(spec, 600);
  auto models = testing::truth_models(gen, net);
  const int t0 = 400, H = 6;
  const auto inputs = actual_inputs(gen.data, net, t0, H);
  const auto cf = conditional_forecast(models, gen.data, net, t0, H, inputs, 50, 9);
  const auto jf = joint_forecast(models, gen.data, net, t0, H, inputs.loads, inputs.loss,
                                 50, 9);
  CHECK((cf.mean - jf.mean).norm() < 1e-12);
}

TEST_CASE("joint forecast solutions respect feasibility at every step") {
  auto gen = generate(two_region_spec(79), 700);
  const MarketNetwork network = two_region_spec(79).network;
  auto models = testing::truth_models(gen, network);
  const int t0 = 500, H = 4;
  const auto inputs = actual_inputs(gen.data, network, t0, H);
  const auto jf = joint_forecast(models, gen.data, network, t0, H, inputs.loads,
                                 inputs.loss, 20, 13);
  for (const auto& flows : jf.flows_used)
    for (int h = 0; h < H; ++h) {
      for (const auto& pair : network.arc_pairs()) {
        CHECK(std::min(flows(h, pair.forward), flows(h, pair.reverse)) == 0.0);
        CHECK(flows(h, pair.forward) <= network.arcs()[pair.forward].observed_max + 1e-9);
        CHECK(flows(h, pair.reverse) <= network.arcs()[pair.reverse].observed_max + 1e-9);
      }
    }
}

TEST_SUITE_END();
