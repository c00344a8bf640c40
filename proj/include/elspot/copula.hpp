#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "elspot/mcmc.hpp"
#include "elspot/mixture.hpp"

namespace elspot {

// Nonparametric marginal for a mean-corrected price series: the fitted
// mixture CDF composed with the empirical distribution of the mixture-PIT
// values. The EDF leg is piecewise linear through the plotting positions
// k/(T+1) and extends into the mixture tails outside the training range, so
// extreme simulated quantiles produce prices beyond the observed ones.
struct MarginalTransform {
  MixtureParams mixture;
  std::vector<double> u_table;  // sorted mixture CDF values of the residuals

  double u_of_eps(double eps) const;
  double eps_of_u(double u) const;
};

MarginalTransform make_transform(const MixtureParams& mixture,
                                 const std::vector<double>& residuals);

// Regression mean / residuals of one fitted (i,j) regression over a dataset.
std::vector<double> eta_series(const RegressionFit& fit, const PanelDataset& data,
                               const MarketNetwork& net);
std::vector<double> residual_series(const RegressionFit& fit, const PanelDataset& data,
                                    const MarketNetwork& net);

struct CopulaData {
  Eigen::MatrixXd u;  // T x r copula data, ranks mapped to k/(T+1)
  Eigen::MatrixXd w;  // normal scores
  std::vector<MarginalTransform> transforms;  // per price region
};

// fits[j] must be the supply-region-i regression for price region j.
CopulaData compute_copula_data(const std::vector<const RegressionFit*>& fits,
                               const PanelDataset& data, const MarketNetwork& net);

// Sparse-lag stationary VAR on the normal scores: only the listed lags carry
// coefficient matrices.
struct CopulaModel {
  std::vector<int> lags;                 // ascending
  std::vector<Eigen::MatrixXd> coef;     // A_h, aligned with lags
  Eigen::MatrixXd innovation_cov;        // Sigma_w
  Eigen::VectorXd marginal_var;          // diag of Gamma(0)
  std::vector<std::string> warnings;

  int dim() const { return static_cast<int>(innovation_cov.rows()); }
  int markov_order() const { return lags.empty() ? 0 : lags.back(); }
};

struct LagSelection {
  std::vector<int> lags;
  int short_lags = 1;  // q: contiguous lags 1..q
  int daily_lags = 1;  // D: lags day_length*(1..D)
  double bic = 0.0;
};

// Conditional Gaussian log-likelihood of a least-squares VAR on the given
// lags, using rows t >= cond_rows as the estimation sample.
double var_conditional_loglik(const Eigen::MatrixXd& w, const std::vector<int>& lags,
                              int cond_rows);
double var_bic(const Eigen::MatrixXd& w, const std::vector<int>& lags, int cond_rows);

// BIC over the 35 combinations of q in 1..5 and D in 1..7 (daily lag spacing
// day_length), all scored on the common sample conditioning on the first
// 7*day_length rows.
LagSelection select_lags(const Eigen::MatrixXd& w, int day_length);

CopulaModel fit_var(const Eigen::MatrixXd& w, const std::vector<int>& lags);

// Autocovariance blocks Gamma(0..hmax) of the stationary VAR, computed from
// the companion-form solution restricted to the first block row: the moving
// average series sum_k Psi_{k+h} Sigma Psi_k', accumulated with the sparse
// lag structure and verified against the Yule-Walker identity at 1e-10.
std::vector<Eigen::MatrixXd> autocov_blocks(const CopulaModel& model, int hmax);
Eigen::MatrixXd autocorr_block(const CopulaModel& model, int h);
std::vector<Eigen::MatrixXd> autocorr_blocks(const CopulaModel& model,
                                             const std::vector<int>& hs);

// Kendall's tau between two margins of a Gaussian copula with latent
// correlation phi.
double kendall_tau(double phi);

// T(h): elementwise Kendall's tau over R(h).
Eigen::MatrixXd auto_dependence(const CopulaModel& model, int h);

// Dominant-eigenvalue estimate of the companion matrix via power iteration
// with the sparse block apply.
double spectral_radius(const CopulaModel& model);

// Noise-free VAR recursion from the history (rows oldest..latest, at least
// markov_order of them).
Eigen::MatrixXd conditional_mean_path(const CopulaModel& model,
                                      const Eigen::MatrixXd& history, int horizon);

// Latent paths with Gaussian innovations; draw d uses derive_seed(seed, d).
std::vector<Eigen::MatrixXd> simulate_w_paths(const CopulaModel& model,
                                              const Eigen::MatrixXd& history, int horizon,
                                              int n_draws, std::uint64_t seed);

// Disturbance paths: w standardized by the stationary marginal variance,
// mapped through Phi and the inverse marginal transforms.
std::vector<Eigen::MatrixXd> simulate_eps(const CopulaModel& model,
                                          const std::vector<MarginalTransform>& transforms,
                                          const Eigen::MatrixXd& history, int horizon,
                                          int n_draws, std::uint64_t seed);

// One supply region's complete model: the r marginal regressions, their
// transforms, and the copula over the normal scores.
struct SupplyRegionModel {
  int supply_region = -1;
  std::vector<RegressionFit> fits;            // indexed by price region
  std::vector<MarginalTransform> transforms;  // indexed by price region
  CopulaModel copula;
};

SupplyRegionModel build_supply_model(int supply_region, std::vector<RegressionFit> fits,
                                     const PanelDataset& data, const MarketNetwork& net,
                                     int day_length,
                                     const std::vector<int>& forced_lags = {});

// Normal-score history for the last `depth` observations ending at t_end
// (inclusive), rows oldest..latest.
Eigen::MatrixXd score_history(const SupplyRegionModel& model, const PanelDataset& data,
                              const MarketNetwork& net, int t_end, int depth);

}  // namespace elspot
