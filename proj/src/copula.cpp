#include "elspot/copula.hpp"

#include <algorithm>
#include <cmath>

#include "elspot/errors.hpp"
#include "elspot/stats.hpp"

namespace elspot {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

double clamp01(double p) { return std::clamp(p, 1e-15, 1.0 - 1e-15); }

}  // namespace

MarginalTransform make_transform(const MixtureParams& mixture,
                                 const std::vector<double>& residuals) {
  MarginalTransform tr;
  tr.mixture = mixture;
  tr.u_table.reserve(residuals.size());
  for (double e : residuals) tr.u_table.push_back(clamp01(mixture.cdf(e)));
  std::sort(tr.u_table.begin(), tr.u_table.end());
  return tr;
}

double MarginalTransform::u_of_eps(double eps) const {
  const double tau = clamp01(mixture.cdf(eps));
  const std::size_t T = u_table.size();
  // piecewise linear through (0,0), (u_(k), k/(T+1)), (1,1); ties take the
  // upper rank, matching the count(<=)/(T+1) convention on training points
  const auto lo = std::lower_bound(u_table.begin(), u_table.end(), tau);
  const auto hi = std::upper_bound(u_table.begin(), u_table.end(), tau);
  if (lo != hi)  // exact table value
    return static_cast<double>(hi - u_table.begin()) / (T + 1);
  const std::size_t a = static_cast<std::size_t>(lo - u_table.begin());  // values < tau
  const double xa = a == 0 ? 0.0 : u_table[a - 1];
  const double xb = a == T ? 1.0 : u_table[a];
  const double ya = static_cast<double>(a) / (T + 1);
  const double yb = static_cast<double>(a + 1) / (T + 1);
  if (!(xb > xa)) return yb;
  return ya + (tau - xa) / (xb - xa) * (yb - ya);
}

double MarginalTransform::eps_of_u(double u) const {
  const std::size_t T = u_table.size();
  u = std::clamp(u, 1e-12, 1.0 - 1e-12);
  const double pos = u * (T + 1);
  std::size_t a = static_cast<std::size_t>(pos);
  if (a > T) a = T;
  const double xa = a == 0 ? 0.0 : u_table[a - 1];
  const double xb = a == T ? 1.0 : u_table[a];
  const double ya = static_cast<double>(a) / (T + 1);
  const double yb = static_cast<double>(a + 1) / (T + 1);
  const double tau = clamp01(xa + (u - ya) / (yb - ya) * (xb - xa));
  return mixture.quantile(tau);
}

std::vector<double> eta_series(const RegressionFit& fit, const PanelDataset& data,
                               const MarketNetwork& net) {
  const std::size_t T = data.T();
  std::vector<int> arc_idx;
  for (const auto& id : fit.arc_ids) arc_idx.push_back(net.arc_index(id));
  std::vector<double> eta(T);
  std::vector<double> flows(arc_idx.size());
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t a = 0; a < arc_idx.size(); ++a) flows[a] = data.flow[arc_idx[a]][t];
    eta[t] = fit.eta(data.supply[fit.supply_region][t], flows);
  }
  return eta;
}

std::vector<double> residual_series(const RegressionFit& fit, const PanelDataset& data,
                                    const MarketNetwork& net) {
  std::vector<double> r = eta_series(fit, data, net);
  for (std::size_t t = 0; t < r.size(); ++t)
    r[t] = data.log_price[fit.price_region][t] - r[t];
  return r;
}

CopulaData compute_copula_data(const std::vector<const RegressionFit*>& fits,
                               const PanelDataset& data, const MarketNetwork& net) {
  const int r = static_cast<int>(fits.size());
  const int T = static_cast<int>(data.T());
  CopulaData out;
  out.u.resize(T, r);
  out.w.resize(T, r);
  for (int j = 0; j < r; ++j) {
    const auto resid = residual_series(*fits[j], data, net);
    out.transforms.push_back(make_transform(fits[j]->mixture, resid));
    const auto& tr = out.transforms.back();
    for (int t = 0; t < T; ++t) {
      out.u(t, j) = tr.u_of_eps(resid[t]);
      out.w(t, j) = normal_quantile(out.u(t, j));
    }
  }
  return out;
}

namespace {

struct VarLS {
  std::vector<Eigen::MatrixXd> coef;
  Eigen::MatrixXd sigma;  // MLE (divides by rows)
  double loglik = 0.0;
  int rows = 0;
};

VarLS var_least_squares(const Eigen::MatrixXd& w, const std::vector<int>& lags,
                        int cond_rows) {
  const int T = static_cast<int>(w.rows());
  const int r = static_cast<int>(w.cols());
  const int k = static_cast<int>(lags.size());
  if (cond_rows >= T)
    throw ValidationError("VAR: conditioning window exceeds sample; need T > " +
                          std::to_string(cond_rows));
  const int n = T - cond_rows;
  Eigen::MatrixXd X(n, r * k), Y(n, r);
  for (int t = cond_rows; t < T; ++t) {
    Y.row(t - cond_rows) = w.row(t);
    for (int c = 0; c < k; ++c) X.block(t - cond_rows, c * r, 1, r) = w.row(t - lags[c]);
  }
  const Eigen::MatrixXd XtX = X.transpose() * X;
  const Eigen::MatrixXd XtY = X.transpose() * Y;
  const Eigen::MatrixXd B = XtX.ldlt().solve(XtY);  // (r k) x r
  const Eigen::MatrixXd E = Y - X * B;
  VarLS out;
  out.rows = n;
  out.sigma = E.transpose() * E / n;
  for (int c = 0; c < k; ++c) out.coef.push_back(B.middleRows(c * r, r).transpose());
  const double logdet = Eigen::LDLT<Eigen::MatrixXd>(out.sigma)
                            .vectorD()
                            .array()
                            .max(1e-300)
                            .log()
                            .sum();
  out.loglik = -0.5 * n * (r * kLog2Pi + logdet + r);
  return out;
}

int param_count(int r, int n_lags) { return r * r * n_lags + r * (r + 1) / 2; }

}  // namespace

double var_conditional_loglik(const Eigen::MatrixXd& w, const std::vector<int>& lags,
                              int cond_rows) {
  return var_least_squares(w, lags, cond_rows).loglik;
}

double var_bic(const Eigen::MatrixXd& w, const std::vector<int>& lags, int cond_rows) {
  const auto ls = var_least_squares(w, lags, cond_rows);
  const int k = param_count(static_cast<int>(w.cols()), static_cast<int>(lags.size()));
  return -2.0 * ls.loglik + k * std::log(static_cast<double>(ls.rows));
}

LagSelection select_lags(const Eigen::MatrixXd& w, int day_length) {
  const int p_max = 7 * day_length;
  if (w.rows() <= 2 * p_max)
    throw ValidationError("lag selection needs T > " + std::to_string(2 * p_max) +
                          " observations, have " + std::to_string(w.rows()));
  LagSelection best;
  best.bic = INFINITY;
  for (int q = 1; q <= 5; ++q) {
    for (int D = 1; D <= 7; ++D) {
      std::vector<int> lags;
      for (int h = 1; h <= q; ++h) lags.push_back(h);
      for (int d = 1; d <= D; ++d) lags.push_back(day_length * d);
      const double bic = var_bic(w, lags, p_max);
      if (bic < best.bic) {
        best.bic = bic;
        best.lags = lags;
        best.short_lags = q;
        best.daily_lags = D;
      }
    }
  }
  return best;
}

namespace {

// y <- companion(x): first block is the VAR step, the rest shift down.
void companion_apply(const CopulaModel& m, const Eigen::VectorXd& x, Eigen::VectorXd& y) {
  const int r = m.dim();
  const int p = m.markov_order();
  y.head(r).setZero();
  for (std::size_t c = 0; c < m.lags.size(); ++c)
    y.head(r) += m.coef[c] * x.segment((m.lags[c] - 1) * r, r);
  y.segment(r, (p - 1) * r) = x.head((p - 1) * r);
}

}  // namespace

double spectral_radius(const CopulaModel& model) {
  const int p = model.markov_order();
  if (p == 0) return 0.0;
  const int n = model.dim() * p;
  Rng rng(0x5eedf00du);  // fixed internal stream; the estimate is deterministic
  Eigen::VectorXd x(n), y(n);
  for (int i = 0; i < n; ++i) x[i] = rng.normal();
  x.normalize();
  const int iters = 1200, window = 240;
  double sum_log = 0.0;
  for (int it = 0; it < iters; ++it) {
    companion_apply(model, x, y);
    const double g = y.norm();
    if (!(g > 0.0)) return 0.0;
    x = y / g;
    if (it >= iters - window) sum_log += std::log(g);
  }
  return std::exp(sum_log / window);
}

CopulaModel fit_var(const Eigen::MatrixXd& w, const std::vector<int>& lags) {
  if (lags.empty()) throw ValidationError("fit_var: empty lag set");
  std::vector<int> sorted(lags);
  std::sort(sorted.begin(), sorted.end());
  if (!w.allFinite()) throw ValidationError("fit_var: scores contain non-finite values");
  const auto ls = var_least_squares(w, sorted, sorted.back());

  CopulaModel m;
  m.lags = sorted;
  m.coef = ls.coef;
  m.innovation_cov = ls.sigma;

  double rho = spectral_radius(m);
  for (int attempt = 0; attempt < 5 && rho >= 1.0; ++attempt) {
    const double lambda = 0.995 / rho;
    for (std::size_t c = 0; c < m.lags.size(); ++c)
      m.coef[c] *= std::pow(lambda, m.lags[c]);
    m.warnings.push_back("nonstationary estimate (radius " + std::to_string(rho) +
                         "); coefficients shrunk toward zero");
    rho = spectral_radius(m);
  }
  if (rho >= 1.0) throw NumericalError("fit_var: could not restore stationarity");

  m.marginal_var = autocov_blocks(m, 0)[0].diagonal();
  return m;
}

std::vector<Eigen::MatrixXd> autocov_blocks(const CopulaModel& model, int hmax) {
  const int r = model.dim();
  const int keep = std::max(hmax, model.markov_order()) + 1;
  std::vector<Eigen::MatrixXd> gamma(keep, Eigen::MatrixXd::Zero(r, r));
  std::vector<Eigen::MatrixXd> psi_ring(keep, Eigen::MatrixXd::Zero(r, r));

  const double sig_norm = model.innovation_cov.norm();
  const long max_terms = 2000000;
  int quiet = 0;
  Eigen::MatrixXd psi = Eigen::MatrixXd::Identity(r, r);
  for (long k = 0; k < max_terms; ++k) {
    if (k > 0) {
      // Psi_k = sum_h A_h Psi_{k-h}; every needed Psi is still in the ring
      // because keep exceeds the largest lag.
      psi.setZero();
      for (std::size_t c = 0; c < model.lags.size(); ++c) {
        const int h = model.lags[c];
        if (h <= k) psi += model.coef[c] * psi_ring[(k - h) % keep];
      }
    }
    psi_ring[k % keep] = psi;
    const Eigen::MatrixXd ps = psi * model.innovation_cov;
    for (int h = 0; h <= hmax && h <= k; ++h)
      gamma[h] += ps * psi_ring[(k - h) % keep].transpose();

    const double nrm = psi.norm();
    if (k > model.markov_order() && nrm < 1e-14 * (1.0 + sig_norm)) {
      if (++quiet >= keep) break;
    } else {
      quiet = 0;
    }
    if (k == max_terms - 1)
      throw NumericalError("autocovariance series did not converge (tail norm " +
                           std::to_string(nrm) + ")");
  }

  // Yule-Walker residual: Gamma(0) = sum_h A_h Gamma(h)' + Sigma.
  Eigen::MatrixXd resid = gamma[0] - model.innovation_cov;
  for (std::size_t c = 0; c < model.lags.size(); ++c)
    resid -= model.coef[c] * gamma[model.lags[c]].transpose();
  const double rel = resid.norm() / (1.0 + gamma[0].norm());
  if (rel > 1e-10)
    throw NumericalError("autocovariance solution residual " + std::to_string(rel) +
                         " exceeds 1e-10");
  gamma.resize(hmax + 1);
  return gamma;
}

Eigen::MatrixXd autocorr_block(const CopulaModel& model, int h) {
  return autocorr_blocks(model, {h})[0];
}

std::vector<Eigen::MatrixXd> autocorr_blocks(const CopulaModel& model,
                                             const std::vector<int>& hs) {
  int hmax = 0;
  for (int h : hs) hmax = std::max(hmax, h);
  const auto gamma = autocov_blocks(model, hmax);
  const Eigen::VectorXd d = gamma[0].diagonal().array().sqrt().inverse();
  std::vector<Eigen::MatrixXd> out;
  for (int h : hs) out.push_back(d.asDiagonal() * gamma[h] * d.asDiagonal());
  return out;
}

double kendall_tau(double phi) {
  if (std::fabs(phi) > 1.0 + 1e-12)
    throw NumericalError("kendall_tau: |phi| > 1");
  phi = std::clamp(phi, -1.0, 1.0);
  return 6.0 / M_PI * std::asin(0.5 * phi);
}

Eigen::MatrixXd auto_dependence(const CopulaModel& model, int h) {
  Eigen::MatrixXd R = autocorr_block(model, h);
  for (int i = 0; i < R.rows(); ++i)
    for (int j = 0; j < R.cols(); ++j) R(i, j) = kendall_tau(R(i, j));
  return R;
}

Eigen::MatrixXd conditional_mean_path(const CopulaModel& model,
                                      const Eigen::MatrixXd& history, int horizon) {
  const int r = model.dim();
  const int p = model.markov_order();
  if (history.rows() < p)
    throw ValidationError("conditional_mean_path: history shorter than the Markov order");
  std::vector<Eigen::VectorXd> buf;
  for (int t = 0; t < history.rows(); ++t) buf.push_back(history.row(t).transpose());
  Eigen::MatrixXd out(horizon, r);
  for (int h = 0; h < horizon; ++h) {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(r);
    for (std::size_t c = 0; c < model.lags.size(); ++c)
      w += model.coef[c] * buf[buf.size() - model.lags[c]];
    out.row(h) = w.transpose();
    buf.push_back(w);
  }
  return out;
}

namespace {

Eigen::MatrixXd cov_sqrt(const Eigen::MatrixXd& sigma) {
  if (sigma.norm() == 0.0) return Eigen::MatrixXd::Zero(sigma.rows(), sigma.cols());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
  const Eigen::VectorXd lam = es.eigenvalues().array().max(0.0).sqrt().matrix();
  return es.eigenvectors() * lam.asDiagonal();
}

}  // namespace

std::vector<Eigen::MatrixXd> simulate_w_paths(const CopulaModel& model,
                                              const Eigen::MatrixXd& history, int horizon,
                                              int n_draws, std::uint64_t seed) {
  const int r = model.dim();
  const int p = model.markov_order();
  if (history.rows() < p)
    throw ValidationError("simulate: history shorter than the Markov order");
  if (!history.allFinite())
    throw ValidationError("simulate: history contains non-finite values");
  const Eigen::MatrixXd L = cov_sqrt(model.innovation_cov);

  std::vector<Eigen::MatrixXd> draws(n_draws);
  const int hist_rows = static_cast<int>(history.rows());
  for (int d = 0; d < n_draws; ++d) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(d)));
    std::vector<Eigen::VectorXd> buf;
    for (int t = hist_rows - p; t < hist_rows; ++t)
      buf.push_back(history.row(t).transpose());
    Eigen::MatrixXd path(horizon, r);
    Eigen::VectorXd z(r);
    for (int h = 0; h < horizon; ++h) {
      Eigen::VectorXd w = Eigen::VectorXd::Zero(r);
      for (std::size_t c = 0; c < model.lags.size(); ++c)
        w += model.coef[c] * buf[buf.size() - model.lags[c]];
      for (int i = 0; i < r; ++i) z[i] = rng.normal();
      w += L * z;
      path.row(h) = w.transpose();
      buf.push_back(w);
    }
    draws[d] = std::move(path);
  }
  return draws;
}

std::vector<Eigen::MatrixXd> simulate_eps(const CopulaModel& model,
                                          const std::vector<MarginalTransform>& transforms,
                                          const Eigen::MatrixXd& history, int horizon,
                                          int n_draws, std::uint64_t seed) {
  auto draws = simulate_w_paths(model, history, horizon, n_draws, seed);
  const int r = model.dim();
  Eigen::VectorXd scale(r);
  for (int j = 0; j < r; ++j) scale[j] = std::sqrt(std::max(model.marginal_var[j], 1e-300));
  for (auto& path : draws) {
    for (int h = 0; h < path.rows(); ++h)
      for (int j = 0; j < r; ++j) {
        const double u = normal_cdf(path(h, j) / scale[j]);
        path(h, j) = transforms[j].eps_of_u(u);
      }
  }
  return draws;
}

SupplyRegionModel build_supply_model(int supply_region, std::vector<RegressionFit> fits,
                                     const PanelDataset& data, const MarketNetwork& net,
                                     int day_length, const std::vector<int>& forced_lags) {
  SupplyRegionModel m;
  m.supply_region = supply_region;
  m.fits = std::move(fits);
  std::vector<const RegressionFit*> ptrs;
  for (const auto& f : m.fits) ptrs.push_back(&f);
  CopulaData cd = compute_copula_data(ptrs, data, net);
  m.transforms = std::move(cd.transforms);
  const std::vector<int> lags =
      forced_lags.empty() ? select_lags(cd.w, day_length).lags : forced_lags;
  m.copula = fit_var(cd.w, lags);
  return m;
}

Eigen::MatrixXd score_history(const SupplyRegionModel& model, const PanelDataset& data,
                              const MarketNetwork& net, int t_end, int depth) {
  const int r = static_cast<int>(model.fits.size());
  if (t_end + 1 < depth)
    throw ValidationError("score_history: not enough observations before the origin");
  Eigen::MatrixXd w(depth, r);
  for (int j = 0; j < r; ++j) {
    const auto resid = residual_series(model.fits[j], data, net);
    for (int k = 0; k < depth; ++k) {
      const double u = model.transforms[j].u_of_eps(resid[t_end - depth + 1 + k]);
      w(k, j) = normal_quantile(u);
    }
  }
  return w;
}

}  // namespace elspot
