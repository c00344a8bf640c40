// Batch CLI: artifacts-on-disk pipeline
//   generate | ingest -> fit -> copula -> forecast | event | validate | deps
// Each stage writes into the run directory and records digests in the
// manifest; downstream stages consume by path.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "elspot/backtest.hpp"
#include "elspot/copula.hpp"
#include "elspot/errors.hpp"
#include "elspot/events.hpp"
#include "elspot/forecast.hpp"
#include "elspot/generator.hpp"
#include "elspot/manifest.hpp"
#include "elspot/mcmc.hpp"
#include "elspot/serialize.hpp"
#include "elspot/timeutil.hpp"
#include "elspot/toml.hpp"

namespace fs = std::filesystem;
using namespace elspot;

namespace {

struct Ctx {
  std::string run_dir = "run";
  std::string config_path;
  std::uint64_t seed = 1;
  int threads = 1;
  toml::Table config;
};

class StageTimer {
 public:
  StageTimer() : t0_(std::chrono::steady_clock::now()) {}
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point t0_;
};

RunManifest load_or_new_manifest(const Ctx& ctx) {
  RunManifest m;
  m.version = kVersion;
  m.seed = ctx.seed;
  if (!ctx.config_path.empty())
    m.config_digest = fingerprint_hex(fingerprint_file(ctx.config_path));
  const std::string path = ctx.run_dir + "/manifest.json";
  if (fs::exists(path)) {
    const auto j = load_json(path);
    for (const auto& s : j.value("stages", nlohmann::json::array())) {
      StageRecord rec;
      rec.name = s.at("name").get<std::string>();
      rec.wall_ms = s.at("wall_ms").get<double>();
      rec.outputs = s.at("outputs").get<std::map<std::string, std::string>>();
      m.stages.push_back(rec);
    }
    m.inputs = j.value("inputs", std::map<std::string, std::string>{});
  }
  return m;
}

void record_stage(const Ctx& ctx, RunManifest& m, const std::string& name, double wall_ms,
                  const std::vector<std::string>& outputs) {
  m.add_stage(name, wall_ms, outputs);
  m.save(ctx.run_dir + "/manifest.json");
}

std::string dataset_dir(const Ctx& ctx) { return ctx.run_dir + "/dataset"; }

MarketNetwork load_network(const Ctx& ctx) {
  const std::string path = dataset_dir(ctx) + "/network.toml";
  if (!fs::exists(path))
    throw ValidationError("no network at " + path + "; run `generate` or `ingest` first");
  return MarketNetwork::from_file(path);
}

PanelDataset load_dataset(const Ctx& ctx, const MarketNetwork& net) {
  const std::string dir = dataset_dir(ctx);
  if (!fs::exists(dir + "/prices.csv"))
    throw ValidationError("no dataset in " + dir + "; run `generate` or `ingest` first");
  CsvPaths paths{dir + "/prices.csv", dir + "/loads.csv", dir + "/flows.csv",
                 dir + "/losses.csv"};
  IngestOptions opts;
  if (ctx.config.tables.count("data")) {
    const auto& d = ctx.config.tables.at("data");
    opts.lenient_complementarity = d.get_bool("lenient_complementarity", false);
    opts.floor_offset = d.get_number_or("floor_offset", 1001.0);
  }
  return ingest_csv(paths, net, opts);
}

void write_network_toml(const std::string& path, const MarketNetwork& net) {
  std::ofstream out(path);
  out << "regions = [";
  for (std::size_t i = 0; i < net.regions().size(); ++i)
    out << (i ? ", " : "") << '"' << net.regions()[i] << '"';
  out << "]\n\n";
  for (const auto& a : net.arcs()) {
    out << "[[arc]]\n";
    out << "id = \"" << a.id << "\"\n";
    out << "from = \"" << net.regions()[a.origin] << "\"\n";
    out << "to = \"" << net.regions()[a.destination] << "\"\n";
    out << "nominal_capacity = " << a.nominal_capacity << "\n";
    out << "observed_max = " << a.observed_max << "\n\n";
  }
  for (const auto& p : net.arc_pairs()) {
    out << "[[pair]]\n";
    out << "forward = \"" << net.arcs()[p.forward].id << "\"\n";
    out << "reverse = \"" << net.arcs()[p.reverse].id << "\"\n\n";
  }
}

int region_arg(const MarketNetwork& net, const std::string& s) {
  for (int i = 0; i < net.n_regions(); ++i)
    if (net.regions()[i] == s) return i;
  try {
    return std::stoi(s);
  } catch (...) {
    throw ValidationError("unknown region '" + s + "'");
  }
}

int time_arg(const PanelDataset& data, const std::string& s) {
  if (!s.empty() && s.find_first_not_of("0123456789") == std::string::npos)
    return std::stoi(s);
  const int idx = data.index_of_time(parse_timestamp(s));
  if (idx < 0) throw ValidationError("timestamp " + s + " not in the dataset");
  return idx;
}

SamplerConfig sampler_config(const Ctx& ctx) {
  SamplerConfig cfg;
  cfg.seed = ctx.seed;
  if (ctx.config.tables.count("fit")) {
    const auto& f = ctx.config.tables.at("fit");
    cfg.sweeps = static_cast<int>(f.get_number_or("sweeps", cfg.sweeps));
    cfg.burnin = static_cast<int>(f.get_number_or("burnin", cfg.burnin));
    cfg.knots = static_cast<int>(f.get_number_or("knots", cfg.knots));
    cfg.p_zero = f.get_number_or("p_zero", cfg.p_zero);
  }
  return cfg;
}

std::string fit_path(const Ctx& ctx, int i, int j) {
  return ctx.run_dir + "/fits/fit_" + std::to_string(i) + "_" + std::to_string(j) + ".json";
}

std::string model_path(const Ctx& ctx, int i) {
  return ctx.run_dir + "/models/model_" + std::to_string(i) + ".json";
}

std::vector<SupplyRegionModel> load_models(const Ctx& ctx, const MarketNetwork& net) {
  std::vector<SupplyRegionModel> models;
  for (int i = 0; i < net.n_regions(); ++i) {
    const std::string path = model_path(ctx, i);
    if (!fs::exists(path))
      throw ValidationError("missing " + path + "; run `copula` first");
    models.push_back(supply_model_from_json(load_json(path)));
  }
  return models;
}

int day_length(const Ctx& ctx, const PanelDataset& data) {
  if (ctx.config.tables.count("copula")) {
    const auto& c = ctx.config.tables.at("copula");
    if (c.has("day_length")) return static_cast<int>(c.get_number("day_length"));
  }
  return 24 * 60 / data.period_minutes;
}

// ---- stages -------------------------------------------------------------

int cmd_generate(Ctx& ctx, const std::string& preset, int T) {
  StageTimer timer;
  GeneratorSpec spec = preset == "two_region" ? two_region_spec(ctx.seed)
                                              : five_region_spec(ctx.seed);
  if (ctx.config.tables.count("generate")) {
    const auto& g = ctx.config.tables.at("generate");
    if (T <= 0) T = static_cast<int>(g.get_number_or("T", 17808));
  }
  if (T <= 0) T = 17808;
  auto gen = generate(spec, T);
  fs::create_directories(dataset_dir(ctx));
  write_dataset_csv(gen.data, spec.network, dataset_dir(ctx));
  write_network_toml(dataset_dir(ctx) + "/network.toml", spec.network);
  save_json(ctx.run_dir + "/truth.json", to_json(gen.truth, true));

  auto manifest = load_or_new_manifest(ctx);
  record_stage(ctx, manifest, "generate", timer.ms(),
               {dataset_dir(ctx) + "/prices.csv", dataset_dir(ctx) + "/loads.csv",
                dataset_dir(ctx) + "/flows.csv", dataset_dir(ctx) + "/losses.csv",
                dataset_dir(ctx) + "/network.toml", ctx.run_dir + "/truth.json"});
  std::cout << "generated T=" << T << " preset=" << preset << " -> " << dataset_dir(ctx)
            << "\n";
  return 0;
}

int cmd_ingest(Ctx& ctx, const std::string& network_path, const CsvPaths& paths) {
  StageTimer timer;
  MarketNetwork net = MarketNetwork::from_file(network_path);
  IngestOptions opts;
  if (ctx.config.tables.count("data")) {
    const auto& d = ctx.config.tables.at("data");
    opts.lenient_complementarity = d.get_bool("lenient_complementarity", false);
    opts.floor_offset = d.get_number_or("floor_offset", 1001.0);
  }
  PanelDataset data = ingest_csv(paths, net, opts);
  fs::create_directories(dataset_dir(ctx));
  write_dataset_csv(data, net, dataset_dir(ctx));
  write_network_toml(dataset_dir(ctx) + "/network.toml", net);

  auto manifest = load_or_new_manifest(ctx);
  manifest.inputs[paths.prices] = fingerprint_hex(fingerprint_file(paths.prices));
  manifest.inputs[paths.loads] = fingerprint_hex(fingerprint_file(paths.loads));
  manifest.inputs[paths.flows] = fingerprint_hex(fingerprint_file(paths.flows));
  record_stage(ctx, manifest, "ingest", timer.ms(),
               {dataset_dir(ctx) + "/prices.csv", dataset_dir(ctx) + "/network.toml"});
  std::cout << "ingested T=" << data.T() << " into " << dataset_dir(ctx) << "\n";
  return 0;
}

int cmd_fit(Ctx& ctx, const std::string& supply, const std::string& price, bool all,
            int sweeps, int burnin) {
  StageTimer timer;
  MarketNetwork net = load_network(ctx);
  PanelDataset data = load_dataset(ctx, net);
  SamplerConfig cfg = sampler_config(ctx);
  if (sweeps > 0) cfg.sweeps = sweeps;
  if (burnin >= 0) cfg.burnin = burnin;
  fs::create_directories(ctx.run_dir + "/fits");
  std::vector<std::string> outputs;
  if (all) {
    auto fits = fit_all_regressions(data, net, cfg, ctx.threads);
    for (const auto& fit : fits) {
      const std::string path = fit_path(ctx, fit.supply_region, fit.price_region);
      save_json(path, to_json(fit));
      outputs.push_back(path);
    }
  } else {
    const int i = region_arg(net, supply);
    const int j = region_arg(net, price);
    SamplerConfig c = cfg;
    c.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(i) * net.n_regions() + j);
    auto fit = fit_regression(data, net, i, j, c);
    const std::string path = fit_path(ctx, i, j);
    save_json(path, to_json(fit));
    outputs.push_back(path);
    for (const auto& warning : fit.diagnostics.warnings)
      std::cerr << "warning: " << warning << "\n";
  }
  auto manifest = load_or_new_manifest(ctx);
  record_stage(ctx, manifest, "fit", timer.ms(), outputs);
  std::cout << "wrote " << outputs.size() << " fit file(s)\n";
  return 0;
}

int cmd_copula(Ctx& ctx) {
  StageTimer timer;
  MarketNetwork net = load_network(ctx);
  PanelDataset data = load_dataset(ctx, net);
  const int r = net.n_regions();
  std::vector<int> forced;
  if (ctx.config.tables.count("copula")) {
    const auto& c = ctx.config.tables.at("copula");
    if (c.has("lags"))
      for (double v : c.get_number_array("lags")) forced.push_back(static_cast<int>(v));
  }
  fs::create_directories(ctx.run_dir + "/models");
  std::vector<std::string> outputs;
  for (int i = 0; i < r; ++i) {
    std::vector<RegressionFit> fits;
    for (int j = 0; j < r; ++j) {
      const std::string path = fit_path(ctx, i, j);
      if (!fs::exists(path))
        throw ValidationError("missing " + path + "; run `fit --all` first");
      fits.push_back(fit_from_json(load_json(path)));
    }
    auto model = build_supply_model(i, std::move(fits), data, net, day_length(ctx, data),
                                    forced);
    for (const auto& warning : model.copula.warnings)
      std::cerr << "warning: " << warning << "\n";
    const std::string path = model_path(ctx, i);
    save_json(path, to_json(model));
    outputs.push_back(path);
    std::cout << "model " << net.regions()[i] << ": lags";
    for (int h : model.copula.lags) std::cout << ' ' << h;
    std::cout << "\n";
  }
  auto manifest = load_or_new_manifest(ctx);
  record_stage(ctx, manifest, "copula", timer.ms(), outputs);
  return 0;
}

int cmd_forecast(Ctx& ctx, const std::string& origin, int horizon, const std::string& mode,
                 int draws, bool dump_draws) {
  StageTimer timer;
  MarketNetwork net = load_network(ctx);
  PanelDataset data = load_dataset(ctx, net);
  auto models = load_models(ctx, net);
  const int t_idx = time_arg(data, origin);

  ForecastSet fs_out;
  if (mode == "joint") {
    const HorizonInputs in = actual_inputs(data, net, t_idx, horizon);
    fs_out = joint_forecast(models, data, net, t_idx, horizon, in.loads, in.loss, draws,
                            ctx.seed);
  } else {
    const HorizonInputs in = actual_inputs(data, net, t_idx, horizon);
    fs_out = conditional_forecast(models, data, net, t_idx, horizon, in, draws, ctx.seed);
  }

  fs::create_directories(ctx.run_dir + "/forecast");
  const std::string csv = ctx.run_dir + "/forecast/forecast.csv";
  write_forecast_csv(csv, fs_out, net.regions(), {0.01, 0.05, 0.25, 0.50, 0.75, 0.95, 0.99});
  std::vector<std::string> outputs = {csv};
  if (dump_draws) {
    const std::string bin = ctx.run_dir + "/forecast/draws.bin";
    std::ofstream out(bin, std::ios::binary);
    for (const auto& comp : fs_out.draws)
      for (const auto& d : comp)
        out.write(reinterpret_cast<const char*>(d.data()),
                  static_cast<std::streamsize>(sizeof(double) * d.size()));
    outputs.push_back(bin);
  }
  auto manifest = load_or_new_manifest(ctx);
  record_stage(ctx, manifest, "forecast", timer.ms(), outputs);
  std::cout << "forecast " << mode << " origin=" << origin << " H=" << horizon << " -> "
            << csv << "\n";
  return 0;
}

int cmd_event_supply(Ctx& ctx, const std::string& region, double mwh,
                     const std::string& at) {
  StageTimer timer;
  MarketNetwork net = load_network(ctx);
  PanelDataset data = load_dataset(ctx, net);
  const int reg = region_arg(net, region);
  const int t_idx = time_arg(data, at);
  auto model = supply_model_from_json(load_json(model_path(ctx, reg)));
  const auto res = supply_shock_study(model, data, net, t_idx, mwh);

  fs::create_directories(ctx.run_dir + "/events");
  const std::string path = ctx.run_dir + "/events/supply_shock.csv";
  std::ofstream out(path);
  out << "region,base_price,shocked_price,delta\n";
  for (int j = 0; j < net.n_regions(); ++j) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%s,%.6f,%.6f,%.6f", net.regions()[j].c_str(),
                  res.base_price[j], res.shocked_price[j], res.delta[j]);
    out << buf << '\n';
  }
  out.close();
  auto manifest = load_or_new_manifest(ctx);
  record_stage(ctx, manifest, "event-supply-shock", timer.ms(), {path});
  std::cout << "supply shock " << mwh << " MWh in " << region << " at " << at << " -> "
            << path << "\n";
  return 0;
}

int cmd_event_impulse(Ctx& ctx, const std::string& region, double dollars,
                      const std::string& window, int horizon, int draws, bool density) {
  StageTimer timer;
  MarketNetwork net = load_network(ctx);
  PanelDataset data = load_dataset(ctx, net);
  const int reg = region_arg(net, region);
  const auto sep = window.find("..");
  if (sep == std::string::npos)
    throw ValidationError("--window expects TS1..TS2");
  const int w0 = time_arg(data, window.substr(0, sep));
  const int w1 = time_arg(data, window.substr(sep + 2));
  auto model = supply_model_from_json(load_json(model_path(ctx, reg)));
  const auto res = impulse_response(model, data, net, reg, w0, w1, dollars, horizon, draws,
                                    ctx.seed);

  fs::create_directories(ctx.run_dir + "/events");
  const std::string path = ctx.run_dir + "/events/impulse.csv";
  std::ofstream out(path);
  out << "horizon,region,delta_mean,delta_q05,delta_q50,delta_q95\n";
  const int i05 = 0, i50 = 2, i95 = 4;
  for (int h = 0; h < horizon; ++h)
    for (int j = 0; j < net.n_regions(); ++j) {
      char buf[160];
      std::snprintf(buf, sizeof(buf), "%d,%s,%.8f,%.8f,%.8f,%.8f", h + 1,
                    net.regions()[j].c_str(), res.delta_mean(h, j),
                    res.shocked_quantiles[i05](h, j) - res.base_quantiles[i05](h, j),
                    res.shocked_quantiles[i50](h, j) - res.base_quantiles[i50](h, j),
                    res.shocked_quantiles[i95](h, j) - res.base_quantiles[i95](h, j));
      out << buf << '\n';
    }
  out.close();
  std::vector<std::string> outputs = {path};
  if (density) {
    // density tables of the shocked-region predictive distribution at a few
    // horizons, with and without the impulse
    for (int h : {1, 2, 3, 48, 96}) {
      if (h > horizon) continue;
      std::vector<double> base_draws(draws), shock_draws(draws);
      for (int d = 0; d < draws; ++d) {
        base_draws[d] = res.base_draws_shock_region(d, h - 1);
        shock_draws[d] = res.shocked_draws_shock_region(d, h - 1);
      }
      const DensityTable db = density_report(base_draws);
      const DensityTable ds = density_report(shock_draws);
      const std::string dpath =
          ctx.run_dir + "/events/impulse_density_h" + std::to_string(h) + ".csv";
      std::ofstream dout(dpath);
      dout << "x_base,f_base,x_shocked,f_shocked\n";
      const std::size_t n = std::max(db.x.size(), ds.x.size());
      for (std::size_t k = 0; k < n; ++k) {
        auto cell = [&](const DensityTable& t, std::size_t i, bool first) {
          char buf[64];
          if (i < t.x.size())
            std::snprintf(buf, sizeof(buf), first ? "%.8g,%.8g" : ",%.8g,%.8g", t.x[i],
                          t.density[i]);
          else
            std::snprintf(buf, sizeof(buf), first ? "," : ",,");
          dout << buf;
        };
        cell(db, k, true);
        cell(ds, k, false);
        dout << '\n';
      }
      outputs.push_back(dpath);
    }
  }
  auto manifest = load_or_new_manifest(ctx);
  record_stage(ctx, manifest, "event-impulse", timer.ms(), outputs);
  std::cout << "impulse $" << dollars << " in " << region << " window " << window << " -> "
            << path << "\n";
  return 0;
}

int cmd_validate(Ctx& ctx, const std::string& config_path) {
  StageTimer timer;
  MarketNetwork net = load_network(ctx);
  PanelDataset data = load_dataset(ctx, net);
  const auto cfg_toml = toml::parse_file(config_path);

  BacktestConfig cfg;
  cfg.seed = static_cast<std::uint64_t>(cfg_toml.get_number_or("seed", ctx.seed));
  cfg.threads = ctx.threads;
  cfg.horizon_hours = static_cast<int>(cfg_toml.get_number_or("horizon_hours", 168));
  cfg.n_draws = static_cast<int>(cfg_toml.get_number_or("draws", 300));
  cfg.fit_config.sweeps = static_cast<int>(cfg_toml.get_number_or("sweeps", 800));
  cfg.fit_config.burnin = static_cast<int>(cfg_toml.get_number_or("burnin", 400));
  cfg.fit_config.knots = static_cast<int>(cfg_toml.get_number_or("knots", 25));
  if (cfg_toml.has("methods")) {
    cfg.methods.clear();
    for (const auto& name : cfg_toml.get_string_array("methods"))
      cfg.methods.push_back(method_from_name(name));
  }
  if (cfg_toml.has("lags"))
    for (double v : cfg_toml.get_number_array("lags"))
      cfg.forced_lags.push_back(static_cast<int>(v));
  if (cfg_toml.has("origins")) {
    for (double v : cfg_toml.get_number_array("origins"))
      cfg.origins.push_back(static_cast<int>(v));
  } else {
    const int n = static_cast<int>(cfg_toml.get_number_or("n_origins", 20));
    const int step = static_cast<int>(cfg_toml.get_number_or("origin_step_hours", 24));
    const int Th = static_cast<int>(data.T()) * data.period_minutes / 60;
    int first = Th - cfg.horizon_hours - 1 - (n - 1) * step;
    if (cfg_toml.has("first_origin_hour"))
      first = static_cast<int>(cfg_toml.get_number("first_origin_hour"));
    for (int k = 0; k < n; ++k) cfg.origins.push_back(first + k * step);
  }

  const auto table = run_backtest(data, net, cfg);
  fs::create_directories(ctx.run_dir + "/validate");
  const std::string path = ctx.run_dir + "/validate/mafe.csv";
  write_mafe_csv(path, table);
  auto manifest = load_or_new_manifest(ctx);
  record_stage(ctx, manifest, "validate", timer.ms(), {path});
  std::cout << "backtest over " << cfg.origins.size() << " origins -> " << path << "\n";
  return 0;
}

int cmd_deps(Ctx& ctx, const std::string& region, const std::vector<int>& hs) {
  StageTimer timer;
  MarketNetwork net = load_network(ctx);
  const int reg = region_arg(net, region);
  auto model = supply_model_from_json(load_json(model_path(ctx, reg)));
  fs::create_directories(ctx.run_dir + "/deps");
  std::vector<std::string> outputs;
  for (int h : hs) {
    const Eigen::MatrixXd tau = auto_dependence(model.copula, h);
    const std::string path = ctx.run_dir + "/deps/tau_" + std::to_string(h) + ".csv";
    std::ofstream out(path);
    out << "region";
    for (const auto& name : net.regions()) out << ',' << name;
    out << '\n';
    for (int i = 0; i < tau.rows(); ++i) {
      out << net.regions()[i];
      for (int j = 0; j < tau.cols(); ++j) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.6f", tau(i, j));
        out << ',' << buf;
      }
      out << '\n';
    }
    outputs.push_back(path);
  }
  auto manifest = load_or_new_manifest(ctx);
  record_stage(ctx, manifest, "deps", timer.ms(), outputs);
  std::cout << "wrote " << outputs.size() << " auto-dependence table(s)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"elspot: regional spot-price modeling and forecasting"};
  app.require_subcommand(1);

  Ctx ctx;
  app.add_option("--run-dir", ctx.run_dir, "artifact directory")->capture_default_str();
  app.add_option("--config", ctx.config_path, "pipeline config (TOML)");
  app.add_option("--seed", ctx.seed, "base RNG seed")->capture_default_str();
  app.add_option("--threads", ctx.threads, "worker threads")->capture_default_str();

  // generate
  auto* gen = app.add_subcommand("generate", "write a synthetic dataset and its truth record");
  std::string preset = "five_region";
  int gen_T = 0;
  gen->add_option("--preset", preset, "five_region|two_region")->capture_default_str();
  gen->add_option("--T", gen_T, "number of periods");

  // ingest
  auto* ing = app.add_subcommand("ingest", "validate CSV extracts into a run dataset");
  std::string net_path;
  CsvPaths csv_paths;
  ing->add_option("--network", net_path, "network TOML")->required();
  ing->add_option("--prices", csv_paths.prices)->required();
  ing->add_option("--loads", csv_paths.loads)->required();
  ing->add_option("--flows", csv_paths.flows)->required();
  ing->add_option("--losses", csv_paths.losses);

  // fit
  auto* fit = app.add_subcommand("fit", "fit monotone regressions by MCMC");
  std::string fit_supply, fit_price;
  bool fit_all = false;
  int fit_sweeps = 0, fit_burnin = -1;
  fit->add_option("--supply-region", fit_supply);
  fit->add_option("--price-region", fit_price);
  fit->add_flag("--all", fit_all, "fit all r^2 regressions");
  fit->add_option("--sweeps", fit_sweeps);
  fit->add_option("--burnin", fit_burnin);

  // copula
  app.add_subcommand("copula", "fit the copula time-series models from saved fits");

  // forecast
  auto* fc = app.add_subcommand("forecast", "predictive distributions from saved models");
  std::string fc_origin, fc_mode = "conditional";
  int fc_h = 48, fc_draws = 1000;
  bool fc_dump = false;
  fc->add_option("--origin", fc_origin, "timestamp or index")->required();
  fc->add_option("--horizon", fc_h)->capture_default_str();
  fc->add_option("--mode", fc_mode, "conditional|joint")->capture_default_str();
  fc->add_option("--draws", fc_draws)->capture_default_str();
  fc->add_flag("--dump-draws", fc_dump, "write raw draws binary");

  // event
  auto* ev = app.add_subcommand("event", "event studies");
  ev->require_subcommand(1);
  auto* evs = ev->add_subcommand("supply-shock", "shift a supply curve");
  std::string evs_region, evs_at;
  double evs_mwh = 0.0;
  evs->add_option("--region", evs_region)->required();
  evs->add_option("--mwh", evs_mwh)->required();
  evs->add_option("--at", evs_at)->required();
  auto* evi = ev->add_subcommand("impulse", "price impulse via the copula model");
  std::string evi_region, evi_window;
  double evi_dollars = 0.0;
  int evi_h = 336, evi_draws = 2000;
  bool evi_density = false;
  evi->add_option("--region", evi_region)->required();
  evi->add_option("--dollars", evi_dollars)->required();
  evi->add_option("--window", evi_window, "TS1..TS2")->required();
  evi->add_option("--horizon", evi_h)->capture_default_str();
  evi->add_option("--draws", evi_draws)->capture_default_str();
  evi->add_flag("--density", evi_density);

  // validate
  auto* val = app.add_subcommand("validate", "expanding-window backtest");
  std::string val_cfg;
  val->add_option("--config", val_cfg, "backtest TOML")->required();

  // deps
  auto* dep = app.add_subcommand("deps", "auto-dependence matrices as CSV");
  std::string dep_region;
  std::vector<int> dep_h = {0, 1, 2, 3, 48, 335};
  dep->add_option("--supply-region", dep_region)->required();
  dep->add_option("--lags", dep_h, "lag list")->delimiter(',');

  try {
    app.parse(argc, argv);
    if (!ctx.config_path.empty()) ctx.config = toml::parse_file(ctx.config_path);
    fs::create_directories(ctx.run_dir);

    if (gen->parsed()) return cmd_generate(ctx, preset, gen_T);
    if (ing->parsed()) return cmd_ingest(ctx, net_path, csv_paths);
    if (fit->parsed()) {
      if (!fit_all && (fit_supply.empty() || fit_price.empty()))
        throw ValidationError("fit: pass --all or both --supply-region and --price-region");
      return cmd_fit(ctx, fit_supply, fit_price, fit_all, fit_sweeps, fit_burnin);
    }
    if (app.get_subcommand("copula")->parsed()) return cmd_copula(ctx);
    if (fc->parsed()) return cmd_forecast(ctx, fc_origin, fc_h, fc_mode, fc_draws, fc_dump);
    if (ev->parsed()) {
      if (evs->parsed()) return cmd_event_supply(ctx, evs_region, evs_mwh, evs_at);
      if (evi->parsed())
        return cmd_event_impulse(ctx, evi_region, evi_dollars, evi_window, evi_h, evi_draws,
                                 evi_density);
    }
    if (val->parsed()) return cmd_validate(ctx, val_cfg);
    if (dep->parsed()) return cmd_deps(ctx, dep_region, dep_h);
    return 0;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return 0;  // --help
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
