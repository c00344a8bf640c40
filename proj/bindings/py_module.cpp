#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "elspot/backtest.hpp"
#include "elspot/copula.hpp"
#include "elspot/errors.hpp"
#include "elspot/events.hpp"
#include "elspot/forecast.hpp"
#include "elspot/generator.hpp"
#include "elspot/mcmc.hpp"
#include "elspot/serialize.hpp"

namespace py = pybind11;
using namespace elspot;

namespace {

GeneratorSpec preset_spec(const std::string& name, std::uint64_t seed) {
  if (name == "two_region") return two_region_spec(seed);
  if (name == "five_region") return five_region_spec(seed);
  throw ValidationError("unknown preset '" + name + "'");
}

}  // namespace

PYBIND11_MODULE(_elspot, m) {
  m.doc() = "Regional spot-price modeling: monotone supply regressions, mixture "
            "disturbances, Gaussian-copula VAR dependence, forecasting and backtesting";
  m.attr("__version__") = kVersion;

  py::register_exception<ValidationError>(m, "ValidationError");
  py::register_exception<NumericalError>(m, "NumericalError");

  py::class_<NormBounds>(m, "NormBounds")
      .def(py::init<double, double>())
      .def_readonly("lo", &NormBounds::lo)
      .def_readonly("hi", &NormBounds::hi)
      .def("normalize", &NormBounds::normalize);

  py::class_<MixtureParams>(m, "MixtureParams")
      .def(py::init<>())
      .def_readwrite("weights", &MixtureParams::weights)
      .def_readwrite("means", &MixtureParams::means)
      .def_readwrite("stddevs", &MixtureParams::stddevs)
      .def("mean", &MixtureParams::mean)
      .def("pdf", &MixtureParams::pdf)
      .def("cdf", &MixtureParams::cdf)
      .def("quantile", &MixtureParams::quantile);

  py::class_<MonotoneFunction>(m, "MonotoneFunction")
      .def("__call__", &MonotoneFunction::eval)
      .def("eval_normalized", &MonotoneFunction::eval_normalized)
      .def("shifted_mwh", [](const MonotoneFunction& f, double mwh) {
        return shift_supply(f, mwh);
      })
      .def_property_readonly("gamma", &MonotoneFunction::gamma)
      .def_property_readonly("bounds", &MonotoneFunction::bounds);

  m.def("make_true_curve", &make_true_curve, py::arg("knots"), py::arg("derivatives"),
        py::arg("bounds"));

  py::class_<MarketNetwork>(m, "MarketNetwork")
      .def_static("from_file", &MarketNetwork::from_file)
      .def_property_readonly("regions", &MarketNetwork::regions)
      .def("region_index", &MarketNetwork::region_index);

  py::class_<PanelDataset>(m, "PanelDataset")
      .def_property_readonly("T", &PanelDataset::T)
      .def_readonly("price", &PanelDataset::price)
      .def_readonly("load", &PanelDataset::load)
      .def_readonly("flow", &PanelDataset::flow)
      .def_readonly("supply", &PanelDataset::supply)
      .def_readonly("log_price", &PanelDataset::log_price);

  m.def(
      "ingest_csv",
      [](const std::string& prices, const std::string& loads, const std::string& flows,
         const std::string& losses, const MarketNetwork& net, bool lenient) {
        IngestOptions opts;
        opts.lenient_complementarity = lenient;
        return ingest_csv({prices, loads, flows, losses}, net, opts);
      },
      py::arg("prices"), py::arg("loads"), py::arg("flows"), py::arg("losses"),
      py::arg("network"), py::arg("lenient_complementarity") = false);

  py::class_<GeneratorSpec>(m, "GeneratorSpec")
      .def_readonly("network", &GeneratorSpec::network)
      .def_readwrite("seed", &GeneratorSpec::seed)
      .def_readwrite("zero_noise", &GeneratorSpec::zero_noise)
      .def_readwrite("supply_region", &GeneratorSpec::supply_region);

  py::class_<TruthRecord>(m, "TruthRecord")
      .def_readonly("supply_region", &TruthRecord::supply_region)
      .def_readonly("price_curves", &TruthRecord::price_curves)
      .def_readonly("mixtures", &TruthRecord::mixtures)
      .def_readonly("eta", &TruthRecord::eta)
      .def_readonly("eps", &TruthRecord::eps)
      .def_readonly("labels", &TruthRecord::labels);

  py::class_<GeneratedData>(m, "GeneratedData")
      .def_readonly("data", &GeneratedData::data)
      .def_readonly("truth", &GeneratedData::truth);

  m.def("preset_spec", &preset_spec, py::arg("name"), py::arg("seed") = 1);
  m.def("generate", &generate, py::arg("spec"), py::arg("T"),
        py::call_guard<py::gil_scoped_release>());

  py::class_<SamplerConfig>(m, "SamplerConfig")
      .def(py::init<>())
      .def_readwrite("sweeps", &SamplerConfig::sweeps)
      .def_readwrite("burnin", &SamplerConfig::burnin)
      .def_readwrite("seed", &SamplerConfig::seed)
      .def_readwrite("knots", &SamplerConfig::knots)
      .def_readwrite("p_zero", &SamplerConfig::p_zero)
      .def_readwrite("single_component", &SamplerConfig::single_component);

  py::class_<RegressionFit>(m, "RegressionFit")
      .def_readonly("supply_region", &RegressionFit::supply_region)
      .def_readonly("price_region", &RegressionFit::price_region)
      .def_readonly("supply_fn", &RegressionFit::supply_fn)
      .def_readonly("cost_fns", &RegressionFit::cost_fns)
      .def_readonly("mixture", &RegressionFit::mixture)
      .def("eta", &RegressionFit::eta);

  m.def("fit_regression", &fit_regression, py::arg("data"), py::arg("network"),
        py::arg("supply_region"), py::arg("price_region"), py::arg("config"),
        py::call_guard<py::gil_scoped_release>());

  py::class_<CopulaModel>(m, "CopulaModel")
      .def_readonly("lags", &CopulaModel::lags)
      .def_readonly("coef", &CopulaModel::coef)
      .def_readonly("innovation_cov", &CopulaModel::innovation_cov)
      .def_readonly("marginal_var", &CopulaModel::marginal_var);

  py::class_<SupplyRegionModel>(m, "SupplyRegionModel")
      .def_readonly("supply_region", &SupplyRegionModel::supply_region)
      .def_readonly("fits", &SupplyRegionModel::fits)
      .def_readonly("copula", &SupplyRegionModel::copula);

  m.def("build_supply_model", &build_supply_model, py::arg("supply_region"),
        py::arg("fits"), py::arg("data"), py::arg("network"), py::arg("day_length"),
        py::arg("forced_lags") = std::vector<int>{},
        py::call_guard<py::gil_scoped_release>());

  m.def("kendall_tau", &kendall_tau, py::arg("phi"));
  m.def("auto_dependence", &auto_dependence, py::arg("model"), py::arg("lag"));
  m.def("autocorr_block", &autocorr_block, py::arg("model"), py::arg("lag"));
  m.def("spectral_radius", &spectral_radius);
  m.def("select_lags", [](const Eigen::MatrixXd& w, int day_length) {
    const auto sel = select_lags(w, day_length);
    return py::make_tuple(sel.lags, sel.bic);
  });
  m.def("fit_var", &fit_var, py::arg("scores"), py::arg("lags"));

  m.def("gap_objective", &gap_objective, py::arg("prices"), py::arg("pair_weights"));
  m.def("demand_pair_weights", &demand_pair_weights, py::arg("loads"));

  py::class_<FlowSolution>(m, "FlowSolution")
      .def_readonly("flows", &FlowSolution::flows)
      .def_readonly("supply", &FlowSolution::supply)
      .def_readonly("objective", &FlowSolution::objective)
      .def_readonly("objective_zero_flow", &FlowSolution::objective_zero_flow);

  m.def("optimize_flows", &optimize_flows, py::arg("model"), py::arg("network"),
        py::arg("loads"), py::arg("loss_adj"));

  py::class_<ForecastSet>(m, "ForecastSet")
      .def_readonly("weights", &ForecastSet::weights)
      .def_readonly("mean", &ForecastSet::mean)
      .def_readonly("component_means", &ForecastSet::component_means)
      .def("quantile", &ForecastSet::quantile);

  m.def(
      "conditional_forecast",
      [](const std::vector<SupplyRegionModel>& models, const PanelDataset& data,
         const MarketNetwork& net, int t_idx, int horizon, int n_draws,
         std::uint64_t seed) {
        const HorizonInputs in = actual_inputs(data, net, t_idx, horizon);
        return conditional_forecast(models, data, net, t_idx, horizon, in, n_draws, seed);
      },
      py::arg("models"), py::arg("data"), py::arg("network"), py::arg("origin"),
      py::arg("horizon"), py::arg("draws"), py::arg("seed"),
      py::call_guard<py::gil_scoped_release>());

  py::class_<SupplyShockResult>(m, "SupplyShockResult")
      .def_readonly("base_price", &SupplyShockResult::base_price)
      .def_readonly("shocked_price", &SupplyShockResult::shocked_price)
      .def_readonly("delta", &SupplyShockResult::delta);

  m.def("supply_shock_study", &supply_shock_study, py::arg("model"), py::arg("data"),
        py::arg("network"), py::arg("t_idx"), py::arg("mwh"));

  m.def("expected_price",
        py::overload_cast<const MixtureParams&, double, double>(&expected_price),
        py::arg("mixture"), py::arg("eta"), py::arg("floor_offset"));
}
