#include "elspot/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "elspot/csv.hpp"
#include "elspot/errors.hpp"
#include "elspot/timeutil.hpp"

namespace elspot {

double TransformSpec::to_log(double price) const {
  const double arg = price + floor_offset;
  if (!(arg > 0.0))
    throw ValidationError("log transform: price " + std::to_string(price) +
                          " at or below -floor_offset");
  return std::log(arg);
}

double TransformSpec::from_log(double logprice) const {
  return std::exp(logprice) - floor_offset;
}

double NormBounds::normalize(double x) const {
  if (!(hi > lo)) throw ValidationError("degenerate covariate: max == min");
  return (x - lo) / (hi - lo);
}

NormBounds bounds_of(const std::vector<double>& training_values) {
  if (training_values.empty())
    throw ValidationError("cannot take bounds of an empty training series");
  const auto [lo, hi] = std::minmax_element(training_values.begin(), training_values.end());
  NormBounds b{*lo, *hi};
  if (!(b.hi > b.lo)) throw ValidationError("degenerate covariate: max == min");
  return b;
}

std::vector<double> normalize_covariate(const std::vector<double>& x, const NormBounds& b) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = b.normalize(x[i]);
  return out;
}

int PanelDataset::index_of_time(std::int64_t t) const {
  auto it = std::lower_bound(timestamps.begin(), timestamps.end(), t);
  if (it == timestamps.end() || *it != t) return -1;
  return static_cast<int>(it - timestamps.begin());
}

std::vector<double> build_supply(const PanelDataset& data, const MarketNetwork& net,
                                 int region) {
  if (region < 0 || region >= net.n_regions())
    throw ValidationError("build_supply: unknown region index " + std::to_string(region));
  const std::size_t T = data.T();
  std::vector<double> b(T);
  for (std::size_t t = 0; t < T; ++t) {
    double exports = 0.0, imports = 0.0;
    for (int a : net.arcs_out(region)) exports += data.flow[a][t];
    for (int a : net.arcs_in(region)) imports += data.flow[a][t];
    b[t] = data.load[region][t] + exports - imports + data.loss_adj[region][t];
  }
  return b;
}

void PanelDataset::finalize(const MarketNetwork& net, const IngestOptions& opts) {
  const std::size_t T = timestamps.size();
  const int r = net.n_regions();
  const int na = net.n_arcs();
  transform.floor_offset = opts.floor_offset;

  auto check_dims = [&](const std::vector<std::vector<double>>& s, int want,
                        const char* name) {
    if (static_cast<int>(s.size()) != want)
      throw ValidationError(std::string("dataset: wrong series count for ") + name);
    for (const auto& col : s)
      if (col.size() != T)
        throw ValidationError(std::string("dataset: length mismatch in ") + name);
  };
  check_dims(price, r, "price");
  check_dims(load, r, "load");
  check_dims(flow, na, "flow");
  if (loss_adj.empty()) loss_adj.assign(r, std::vector<double>(T, 0.0));
  check_dims(loss_adj, r, "loss_adj");

  if (T < 2) throw ValidationError("dataset: need at least two observations");
  const std::int64_t step = static_cast<std::int64_t>(period_minutes) * 60;
  for (std::size_t t = 1; t < T; ++t)
    if (timestamps[t] - timestamps[t - 1] != step)
      throw ValidationError("dataset: timestamps not equally spaced at " +
                            format_timestamp(timestamps[t]));

  for (int a = 0; a < na; ++a)
    for (std::size_t t = 0; t < T; ++t)
      if (flow[a][t] < 0.0)
        throw ValidationError("dataset: negative flow on arc '" + net.arcs()[a].id +
                              "' at t=" + std::to_string(t) + " (" +
                              format_timestamp(timestamps[t]) + ")");

  for (const auto& p : net.arc_pairs()) {
    for (std::size_t t = 0; t < T; ++t) {
      double& f = flow[p.forward][t];
      double& g = flow[p.reverse][t];
      if (f > 0.0 && g > 0.0) {
        if (!opts.lenient_complementarity)
          throw ValidationError("dataset: arcs '" + net.arcs()[p.forward].id + "' and '" +
                                net.arcs()[p.reverse].id +
                                "' both positive at t=" + std::to_string(t) + " (" +
                                format_timestamp(timestamps[t]) + ")");
        if (f >= g)
          g = 0.0;
        else
          f = 0.0;
      }
    }
  }

  for (int j = 0; j < r; ++j)
    for (std::size_t t = 0; t < T; ++t)
      if (price[j][t] < opts.floor_price)
        throw ValidationError("dataset: price below floor in region '" +
                              net.regions()[j] + "' at " +
                              format_timestamp(timestamps[t]));

  supply.clear();
  for (int i = 0; i < r; ++i) supply.push_back(build_supply(*this, net, i));
  for (int i = 0; i < r; ++i)
    for (std::size_t t = 0; t < T; ++t)
      if (!(supply[i][t] > 0.0))
        throw ValidationError("dataset: nonpositive derived supply in region '" +
                              net.regions()[i] + "' at " +
                              format_timestamp(timestamps[t]));

  log_price.assign(r, std::vector<double>(T));
  for (int j = 0; j < r; ++j)
    for (std::size_t t = 0; t < T; ++t)
      log_price[j][t] = transform.to_log(price[j][t]);
}

PanelDataset slice_dataset(const PanelDataset& data, int begin, int end) {
  if (begin < 0 || end > static_cast<int>(data.T()) || begin >= end)
    throw ValidationError("slice_dataset: bad range");
  PanelDataset out;
  out.period_minutes = data.period_minutes;
  out.transform = data.transform;
  out.timestamps.assign(data.timestamps.begin() + begin, data.timestamps.begin() + end);
  auto cut = [&](const std::vector<std::vector<double>>& src) {
    std::vector<std::vector<double>> dst;
    for (const auto& col : src) dst.emplace_back(col.begin() + begin, col.begin() + end);
    return dst;
  };
  out.price = cut(data.price);
  out.load = cut(data.load);
  out.flow = cut(data.flow);
  out.loss_adj = cut(data.loss_adj);
  out.supply = cut(data.supply);
  out.log_price = cut(data.log_price);
  return out;
}

namespace {

std::vector<std::vector<double>> columns_for(const CsvTable& t,
                                             const std::vector<std::string>& names,
                                             const std::string& path) {
  std::vector<std::vector<double>> out;
  for (const auto& n : names) {
    const int c = t.column_index(n);
    if (c < 0) throw ValidationError(path + ": missing column '" + n + "'");
    out.push_back(t.values[c]);
  }
  return out;
}

void check_alignment(const CsvTable& a, const CsvTable& b, const std::string& pa,
                     const std::string& pb) {
  if (a.timestamps.size() != b.timestamps.size())
    throw ValidationError(pa + " and " + pb + ": row counts differ");
  for (std::size_t t = 0; t < a.timestamps.size(); ++t)
    if (a.timestamps[t] != b.timestamps[t])
      throw ValidationError(pa + " and " + pb + ": timestamps diverge at " +
                            format_timestamp(a.timestamps[t]) + " vs " +
                            format_timestamp(b.timestamps[t]));
}

}  // namespace

PanelDataset ingest_csv(const CsvPaths& paths, const MarketNetwork& net,
                        const IngestOptions& opts) {
  const CsvTable prices = read_csv(paths.prices);
  const CsvTable loads = read_csv(paths.loads);
  const CsvTable flows = read_csv(paths.flows);
  check_alignment(prices, loads, paths.prices, paths.loads);
  check_alignment(prices, flows, paths.prices, paths.flows);

  PanelDataset d;
  d.timestamps = prices.timestamps;
  if (d.timestamps.size() >= 2)
    d.period_minutes =
        static_cast<int>((d.timestamps[1] - d.timestamps[0]) / 60);

  d.price = columns_for(prices, net.regions(), paths.prices);
  d.load = columns_for(loads, net.regions(), paths.loads);
  std::vector<std::string> arc_ids;
  for (const auto& a : net.arcs()) arc_ids.push_back(a.id);
  d.flow = columns_for(flows, arc_ids, paths.flows);

  if (!paths.losses.empty() && std::filesystem::exists(paths.losses)) {
    const CsvTable losses = read_csv(paths.losses);
    check_alignment(prices, losses, paths.prices, paths.losses);
    d.loss_adj = columns_for(losses, net.regions(), paths.losses);
  }

  d.finalize(net, opts);
  return d;
}

void write_dataset_csv(const PanelDataset& data, const MarketNetwork& net,
                       const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  auto table_of = [&](const std::vector<std::string>& cols,
                      const std::vector<std::vector<double>>& vals) {
    CsvTable t;
    t.columns = cols;
    t.timestamps = data.timestamps;
    t.values = vals;
    return t;
  };
  std::vector<std::string> arc_ids;
  for (const auto& a : net.arcs()) arc_ids.push_back(a.id);
  write_csv(dir + "/prices.csv", table_of(net.regions(), data.price));
  write_csv(dir + "/loads.csv", table_of(net.regions(), data.load));
  write_csv(dir + "/flows.csv", table_of(arc_ids, data.flow));
  write_csv(dir + "/losses.csv", table_of(net.regions(), data.loss_adj));
}

}  // namespace elspot
