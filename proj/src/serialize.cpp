#include "elspot/serialize.hpp"

#include <fstream>

#include "elspot/errors.hpp"

namespace elspot {

using nlohmann::json;

namespace {

json vec_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vec_from_json(const json& a) {
  Eigen::VectorXd v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v[i] = a[i].get<double>();
  return v;
}

json mat_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

Eigen::MatrixXd mat_from_json(const json& rows) {
  const int nr = static_cast<int>(rows.size());
  const int nc = nr > 0 ? static_cast<int>(rows[0].size()) : 0;
  Eigen::MatrixXd m(nr, nc);
  for (int i = 0; i < nr; ++i)
    for (int j = 0; j < nc; ++j) m(i, j) = rows[i][j].get<double>();
  return m;
}

}  // namespace

json to_json(const MonotoneFunction& fn) {
  json j;
  j["knots"] = fn.basis().knots;
  j["inclusion"] = fn.inclusion();
  j["gamma"] = vec_to_json(fn.gamma());
  j["bounds"] = {{"lo", fn.bounds().lo}, {"hi", fn.bounds().hi}};
  j["shift"] = fn.shift();
  return j;
}

MonotoneFunction monotone_from_json(const json& j) {
  SplineBasis basis{j.at("knots").get<std::vector<double>>()};
  auto inc = j.at("inclusion").get<std::vector<std::uint8_t>>();
  Eigen::VectorXd gamma = vec_from_json(j.at("gamma"));
  NormBounds b{j.at("bounds").at("lo").get<double>(), j.at("bounds").at("hi").get<double>()};
  return MonotoneFunction(std::move(basis), std::move(inc), std::move(gamma), b,
                          j.value("shift", 0.0));
}

json to_json(const MixtureParams& m) {
  return json{{"weights", m.weights}, {"means", m.means}, {"stddevs", m.stddevs}};
}

MixtureParams mixture_from_json(const json& j) {
  MixtureParams m;
  m.weights = j.at("weights").get<std::array<double, 3>>();
  m.means = j.at("means").get<std::array<double, 3>>();
  m.stddevs = j.at("stddevs").get<std::array<double, 3>>();
  return m;
}

json to_json(const RegressionFit& fit, bool include_label_probs) {
  json j;
  j["schema"] = "elspot.fit/1";
  j["supply_region"] = fit.supply_region;
  j["price_region"] = fit.price_region;
  j["floor_offset"] = fit.floor_offset;
  j["supply_fn"] = to_json(fit.supply_fn);
  json costs = json::array();
  for (std::size_t a = 0; a < fit.cost_fns.size(); ++a) {
    json c = to_json(fit.cost_fns[a]);
    c["arc"] = fit.arc_ids[a];
    costs.push_back(c);
  }
  j["cost_fns"] = costs;
  j["mixture"] = to_json(fit.mixture);
  j["inclusion_freq"] = fit.inclusion_freq;
  j["warnings"] = fit.diagnostics.warnings;
  j["converged"] = fit.diagnostics.converged;
  if (include_label_probs && !fit.label_probs.empty()) {
    json lp = json::array();
    for (const auto& row : fit.label_probs) lp.push_back(row);
    j["label_probs"] = lp;
  }
  return j;
}

RegressionFit fit_from_json(const json& j) {
  RegressionFit fit;
  fit.supply_region = j.at("supply_region").get<int>();
  fit.price_region = j.at("price_region").get<int>();
  fit.floor_offset = j.at("floor_offset").get<double>();
  fit.supply_fn = monotone_from_json(j.at("supply_fn"));
  for (const auto& c : j.at("cost_fns")) {
    fit.arc_ids.push_back(c.at("arc").get<std::string>());
    fit.cost_fns.push_back(monotone_from_json(c));
  }
  fit.mixture = mixture_from_json(j.at("mixture"));
  if (j.contains("inclusion_freq"))
    fit.inclusion_freq = j.at("inclusion_freq").get<std::vector<std::vector<double>>>();
  if (j.contains("warnings"))
    fit.diagnostics.warnings = j.at("warnings").get<std::vector<std::string>>();
  fit.diagnostics.converged = j.value("converged", true);
  if (j.contains("label_probs"))
    fit.label_probs = j.at("label_probs").get<std::vector<std::array<double, 3>>>();
  return fit;
}

json to_json(const CopulaModel& m) {
  json j;
  j["schema"] = "elspot.copula/1";
  j["lags"] = m.lags;
  json coefs = json::array();
  for (const auto& A : m.coef) coefs.push_back(mat_to_json(A));
  j["coef"] = coefs;
  j["innovation_cov"] = mat_to_json(m.innovation_cov);
  j["marginal_var"] = vec_to_json(m.marginal_var);
  j["warnings"] = m.warnings;
  return j;
}

CopulaModel copula_from_json(const json& j) {
  CopulaModel m;
  m.lags = j.at("lags").get<std::vector<int>>();
  for (const auto& A : j.at("coef")) m.coef.push_back(mat_from_json(A));
  m.innovation_cov = mat_from_json(j.at("innovation_cov"));
  m.marginal_var = vec_from_json(j.at("marginal_var"));
  if (j.contains("warnings")) m.warnings = j.at("warnings").get<std::vector<std::string>>();
  return m;
}

json to_json(const SupplyRegionModel& m, bool include_tables) {
  json j;
  j["schema"] = "elspot.model/1";
  j["supply_region"] = m.supply_region;
  json fits = json::array();
  for (const auto& f : m.fits) fits.push_back(to_json(f));
  j["fits"] = fits;
  j["copula"] = to_json(m.copula);
  if (include_tables) {
    json trs = json::array();
    for (const auto& tr : m.transforms) {
      json t;
      t["mixture"] = to_json(tr.mixture);
      t["u_table"] = tr.u_table;
      trs.push_back(t);
    }
    j["transforms"] = trs;
  }
  return j;
}

SupplyRegionModel supply_model_from_json(const json& j) {
  SupplyRegionModel m;
  m.supply_region = j.at("supply_region").get<int>();
  for (const auto& f : j.at("fits")) m.fits.push_back(fit_from_json(f));
  m.copula = copula_from_json(j.at("copula"));
  for (const auto& t : j.at("transforms")) {
    MarginalTransform tr;
    tr.mixture = mixture_from_json(t.at("mixture"));
    tr.u_table = t.at("u_table").get<std::vector<double>>();
    m.transforms.push_back(std::move(tr));
  }
  return m;
}

json to_json(const TruthRecord& t, bool include_series) {
  json j;
  j["schema"] = "elspot.truth/1";
  j["supply_region"] = t.supply_region;
  json curves = json::array();
  for (const auto& c : t.price_curves) curves.push_back(to_json(c));
  j["price_curves"] = curves;
  j["cost_arc_ids"] = t.cost_arc_ids;
  json costs = json::array();
  for (const auto& c : t.cost_curves) costs.push_back(to_json(c));
  j["cost_curves"] = costs;
  json mixes = json::array();
  for (const auto& m : t.mixtures) mixes.push_back(to_json(m));
  j["mixtures"] = mixes;
  j["copula"] = to_json(t.copula);
  j["supply_bounds"] = {{"lo", t.supply_bounds.lo}, {"hi", t.supply_bounds.hi}};
  if (include_series) {
    j["eta"] = t.eta;
    j["eps"] = t.eps;
    j["labels"] = t.labels;
  }
  return j;
}

void save_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << j.dump(1, '\t') << '\n';
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ValidationError(path + ": " + e.what());
  }
  return j;
}

void write_forecast_csv(const std::string& path, const ForecastSet& fs,
                        const std::vector<std::string>& regions,
                        const std::vector<double>& probs) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << "horizon,region,mean";
  for (double p : probs) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "q%02d", static_cast<int>(p * 100 + 0.5));
    out << ',' << buf;
  }
  out << '\n';
  std::vector<Eigen::MatrixXd> qs;
  for (double p : probs) qs.push_back(fs.quantile(p));
  char num[40];
  for (int h = 0; h < fs.mean.rows(); ++h)
    for (std::size_t j = 0; j < regions.size(); ++j) {
      out << (h + 1) << ',' << regions[j];
      std::snprintf(num, sizeof(num), "%.10g", fs.mean(h, j));
      out << ',' << num;
      for (const auto& q : qs) {
        std::snprintf(num, sizeof(num), "%.10g", q(h, static_cast<int>(j)));
        out << ',' << num;
      }
      out << '\n';
    }
}

}  // namespace elspot
