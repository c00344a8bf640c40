#include "elspot/mcmc.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>

#include "elspot/errors.hpp"
#include "elspot/parallel.hpp"
#include "elspot/stats.hpp"

namespace elspot {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

std::vector<int> included_list(const std::vector<std::uint8_t>& J) {
  std::vector<int> inc;
  for (std::size_t j = 0; j < J.size(); ++j)
    if (J[j]) inc.push_back(static_cast<int>(j));
  return inc;
}

}  // namespace

double RegressionFit::eta(double supply_raw, const std::vector<double>& arc_flows_raw) const {
  double v = supply_fn.eval(supply_raw);
  for (std::size_t a = 0; a < cost_fns.size(); ++a) v += cost_fns[a].eval(arc_flows_raw[a]);
  return v;
}

GibbsSampler::GibbsSampler(std::vector<double> y, std::vector<FunctionBlock> funcs,
                           SamplerConfig cfg)
    : y_(std::move(y)), funcs_(std::move(funcs)), cfg_(cfg), rng_(cfg.seed) {
  if (y_.empty()) throw ValidationError("sampler: empty response");
  for (const auto& f : funcs_)
    if (f.covariate.size() != y_.size())
      throw ValidationError("sampler: covariate length mismatch in block '" + f.name + "'");
  for (const auto& f : funcs_) X_.push_back(f.basis.design(f.covariate));
  coef_c_ = cfg_.coef_prior_c > 0.0 ? cfg_.coef_prior_c : static_cast<double>(y_.size());
}

Eigen::VectorXd GibbsSampler::fit_under(int f, const std::vector<std::uint8_t>& J,
                                        const Eigen::VectorXd& gamma) const {
  const auto inc = included_list(J);
  Eigen::VectorXd F = Eigen::VectorXd::Zero(y_.size());
  if (inc.empty()) return F;
  const Eigen::MatrixXd L = build_LJ(J, funcs_[f].basis.knots);
  const Eigen::VectorXd beta = L.triangularView<Eigen::Lower>().solve(gamma);
  for (std::size_t k = 0; k < inc.size(); ++k) F += beta[k] * X_[f].col(inc[k]);
  return F;
}

void GibbsSampler::refresh_caches() {
  const int T = n_obs();
  total_fit_ = Eigen::VectorXd::Zero(T);
  fits_.clear();
  for (std::size_t f = 0; f < funcs_.size(); ++f) {
    fits_.push_back(fit_under(static_cast<int>(f), st_.inclusion[f], st_.gamma[f]));
    total_fit_ += fits_.back();
  }
  resid_.resize(T);
  for (int t = 0; t < T; ++t) resid_[t] = y_[t] - total_fit_[t];
  counts_ = {0, 0, 0};
  for (int t = 0; t < T; ++t) ++counts_[st_.labels[t]];
  s_cur_ = neg_loglik();
}

double GibbsSampler::label_term(int t, int l) const {
  const double v = st_.vars[l];
  const double d = resid_[t] - st_.means[l];
  return 0.5 * (kLog2Pi + std::log(v)) + d * d / (2.0 * v);
}

double GibbsSampler::neg_loglik() const {
  double s = 0.0;
  for (int t = 0; t < n_obs(); ++t) s += label_term(t, st_.labels[t]);
  return s;
}

void GibbsSampler::init() {
  const int T = n_obs();
  // Linear-term-only start: J = (1,0,...), gamma from nonnegative least
  // squares of the demeaned response on each block's linear term.
  st_.inclusion.clear();
  st_.gamma.clear();
  const double ybar = std::accumulate(y_.begin(), y_.end(), 0.0) / T;
  Eigen::VectorXd work(T);
  for (int t = 0; t < T; ++t) work[t] = y_[t] - ybar;
  for (std::size_t f = 0; f < funcs_.size(); ++f) {
    std::vector<std::uint8_t> J(funcs_[f].basis.dim(), 0);
    J[0] = 1;
    const auto& col = X_[f].col(0);
    const double denom = col.squaredNorm();
    double slope = denom > 0.0 ? std::max(0.0, col.dot(work) / denom) : 0.0;
    Eigen::VectorXd g(1);
    g[0] = slope;  // L for the linear term alone is [1], so gamma == beta
    work -= slope * col;
    if (cfg_.force_all_inclusion) {
      J.assign(funcs_[f].basis.dim(), 1);
      Eigen::VectorXd gfull = Eigen::VectorXd::Zero(funcs_[f].basis.dim());
      gfull[0] = slope;  // derivative slope at every checkpoint
      for (int k = 1; k < gfull.size(); ++k) gfull[k] = slope;
      st_.inclusion.push_back(J);
      st_.gamma.push_back(gfull);
    } else {
      st_.inclusion.push_back(J);
      st_.gamma.push_back(g);
    }
  }

  // Mixture start from demeaned log prices: means at the 20/50/80 percentiles
  // reordered to the constraint alpha_2 < alpha_1 < alpha_3, std devs from
  // tercile spreads adjusted to the variance separation.
  std::vector<double> yc(y_.size());
  for (int t = 0; t < T; ++t) yc[t] = y_[t] - ybar;
  std::vector<double> sorted(yc);
  std::sort(sorted.begin(), sorted.end());
  double p20 = quantile_sorted(sorted, 0.20);
  double p50 = quantile_sorted(sorted, 0.50);
  double p80 = quantile_sorted(sorted, 0.80);
  const double spread = std::max(1e-3, sorted.back() - sorted.front());
  if (p20 >= p50) p20 = p50 - 1e-3 * spread;
  if (p80 <= p50) p80 = p50 + 1e-3 * spread;
  st_.means = {p50, p20, p80};
  st_.weights = {1.0 / 3, 1.0 / 3, 1.0 / 3};

  auto group_sd = [&](std::size_t lo, std::size_t hi) {
    std::vector<double> g(sorted.begin() + lo, sorted.begin() + hi);
    return std::max(1e-4 * spread, stddev(g));
  };
  const std::size_t third = sorted.size() / 3;
  double s_mid = group_sd(third, 2 * third);
  double s_low = group_sd(0, third);
  double s_high = group_sd(2 * third, sorted.size());
  double v1 = s_mid * s_mid, v2 = s_low * s_low, v3 = s_high * s_high;
  v2 = std::max(v2, 4.0001 * v1);
  v3 = std::max(v3, 4.0001 * v1);
  const double cap = cfg_.var_prior_cap;
  v1 = std::min(v1, 0.999 * cap);
  v2 = std::min(std::max(v2, 4.0001 * v1), cap);
  v3 = std::min(std::max(v3, 4.0001 * v1), cap);
  v1 = std::min(v1, 0.2499 * std::min(v2, v3));
  st_.vars = {v1, v2, v3};

  if (cfg_.single_component) {
    st_.weights = {1.0, 0.0, 0.0};
    st_.means = {p50, p50 - spread, p50 + spread};
    st_.vars = {std::min(stddev(yc) * stddev(yc) + 1e-12, 0.2 * cap), 0.9 * cap, 0.9 * cap};
  }

  // Initial labels by component density at the current residuals.
  refresh_caches();
  st_.labels.assign(T, 0);
  if (!cfg_.single_component) {
    for (int t = 0; t < T; ++t) {
      double best = INFINITY;
      int pick = 0;
      for (int l = 0; l < 3; ++l) {
        const double lt = label_term(t, l) - std::log(st_.weights[l]);
        if (lt < best) {
          best = lt;
          pick = l;
        }
      }
      if (cfg_.swap_init_23 && pick >= 1) pick = 3 - pick;  // exchange labels 2 and 3
      st_.labels[t] = pick;
    }
  }
  refresh_caches();
  st_.z = s_cur_ + 1.0;
}

double GibbsSampler::step_slice() {
  st_.z = s_cur_ + rng_.exponential();
  return st_.z;
}

void GibbsSampler::step_labels() {
  if (cfg_.single_component) return;
  const int T = n_obs();
  for (int t = 0; t < T; ++t) {
    const int cur = st_.labels[t];
    const double base = s_cur_ - label_term(t, cur);
    double w[3], total = 0.0, term[3];
    for (int l = 0; l < 3; ++l) {
      term[l] = label_term(t, l);
      const bool feasible = base + term[l] < st_.z;
      w[l] = feasible ? st_.weights[l] : 0.0;
      total += w[l];
    }
    int pick = cur;
    if (total > 0.0) {
      double u = rng_.uniform() * total;
      for (int l = 0; l < 3; ++l) {
        if (u < w[l]) {
          pick = l;
          break;
        }
        u -= w[l];
      }
    }
    if (pick != cur) {
      --counts_[cur];
      ++counts_[pick];
      st_.labels[t] = pick;
      s_cur_ = base + term[pick];
    }
  }
}

void GibbsSampler::step_weights() {
  if (cfg_.single_component) {
    st_.weights = {1.0, 0.0, 0.0};
    return;
  }
  const std::array<double, 3> alpha = {counts_[0] + 1.0, counts_[1] + 1.0, counts_[2] + 1.0};
  st_.weights = rng_.dirichlet(alpha);
}

void GibbsSampler::step_mean(int l) {
  if (cfg_.single_component && l != 0) return;
  const int n_l = counts_[l];
  const double v = st_.vars[l];
  const double cur = st_.means[l];

  double b_lo = -INFINITY, b_hi = INFINITY;
  double a = 0.0, b = 0.0;
  if (n_l > 0) {
    double S1 = 0.0;
    for (int t = 0; t < n_obs(); ++t)
      if (st_.labels[t] == l) S1 += resid_[t];
    a = n_l / (2.0 * v);
    b = -S1 / v;
    const double rhs = st_.z - s_cur_ + a * cur * cur + b * cur;
    const double disc = b * b + 4.0 * a * rhs;
    if (disc <= 0.0) return;  // float edge: keep current value
    const double root = std::sqrt(disc);
    b_lo = (-b - root) / (2.0 * a);
    b_hi = (-b + root) / (2.0 * a);
  }
  if (!cfg_.single_component) {
    if (l == 0) {
      b_lo = std::max(b_lo, st_.means[1]);
      b_hi = std::min(b_hi, st_.means[2]);
    } else if (l == 1) {
      b_hi = std::min(b_hi, st_.means[0]);
    } else {
      b_lo = std::max(b_lo, st_.means[0]);
    }
  }
  if (!(b_lo < b_hi)) return;
  const double draw =
      rng_.truncated_normal(0.0, std::sqrt(cfg_.mean_prior_var), b_lo, b_hi);
  st_.means[l] = draw;
  if (n_l > 0) s_cur_ += (a * draw * draw + b * draw) - (a * cur * cur + b * cur);
}

std::pair<double, double> var_slice_roots_impl(double n_l, double SS, double v_cur,
                                               double target) {
  // f(v) = (n/2) log(2 pi v) + SS/(2v) is quasi-convex on (0, inf) and
  // f(v_cur) < target, so {f < target} is an interval containing v_cur.
  auto f = [&](double v) { return 0.5 * n_l * (kLog2Pi + std::log(v)) + SS / (2.0 * v); };
  double lo_root = 0.0;
  if (SS > 0.0) {
    double a = v_cur;
    while (a > 1e-300 && f(a) < target) a *= 0.5;
    if (a <= 1e-300) {
      lo_root = 0.0;
    } else {
      double hi = v_cur, lo = a;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) < target ? hi : lo) = mid;
      }
      lo_root = 0.5 * (lo + hi);
    }
  }
  double b = std::max(v_cur, 1e-12);
  while (std::isfinite(b) && f(b) < target) b *= 2.0;
  double hi_root;
  if (!std::isfinite(b)) {
    hi_root = INFINITY;
  } else {
    double lo = v_cur, hi = b;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (f(mid) < target ? lo : hi) = mid;
    }
    hi_root = 0.5 * (lo + hi);
  }
  return {lo_root, hi_root};
}

void GibbsSampler::step_var(int l) {
  if (cfg_.single_component && l != 0) return;
  const int n_l = counts_[l];
  const double v_cur = st_.vars[l];
  const double alpha = st_.means[l];

  double b_lo = 0.0, b_hi = INFINITY;
  double f_cur = 0.0;
  double SS = 0.0;
  if (n_l > 0) {
    for (int t = 0; t < n_obs(); ++t)
      if (st_.labels[t] == l) {
        const double d = resid_[t] - alpha;
        SS += d * d;
      }
    f_cur = 0.5 * n_l * (kLog2Pi + std::log(v_cur)) + SS / (2.0 * v_cur);
    const double target = st_.z - s_cur_ + f_cur;
    auto roots = var_slice_roots_impl(n_l, SS, v_cur, target);
    b_lo = roots.first;
    b_hi = roots.second;
  }

  double a_lo = std::max(0.0, b_lo);
  double a_hi = std::min(cfg_.var_prior_cap, b_hi);
  if (!cfg_.single_component) {
    if (l == 0)
      a_hi = std::min(a_hi, 0.25 * std::min(st_.vars[1], st_.vars[2]));
    else
      a_lo = std::max(a_lo, 4.0 * st_.vars[0]);
  }
  if (!(a_lo < a_hi)) return;
  const double draw = rng_.uniform(a_lo, a_hi);
  st_.vars[l] = draw;
  if (n_l > 0) {
    const double f_new = 0.5 * n_l * (kLog2Pi + std::log(draw)) + SS / (2.0 * draw);
    s_cur_ += f_new - f_cur;
  }
}

std::pair<double, double> GibbsSampler::var_slice_roots(int l) const {
  const int n_l = counts_[l];
  if (n_l == 0) return {0.0, INFINITY};
  double SS = 0.0;
  for (int t = 0; t < n_obs(); ++t)
    if (st_.labels[t] == l) {
      const double d = resid_[t] - st_.means[l];
      SS += d * d;
    }
  const double v_cur = st_.vars[l];
  const double f_cur = 0.5 * n_l * (kLog2Pi + std::log(v_cur)) + SS / (2.0 * v_cur);
  return var_slice_roots_impl(n_l, SS, v_cur, st_.z - s_cur_ + f_cur);
}

std::pair<double, double> GibbsSampler::mean_slice_roots(int l) const {
  const int n_l = counts_[l];
  if (n_l == 0) return {-INFINITY, INFINITY};
  double S1 = 0.0;
  for (int t = 0; t < n_obs(); ++t)
    if (st_.labels[t] == l) S1 += resid_[t];
  const double v = st_.vars[l];
  const double cur = st_.means[l];
  const double a = n_l / (2.0 * v);
  const double b = -S1 / v;
  const double rhs = st_.z - s_cur_ + a * cur * cur + b * cur;
  const double disc = b * b + 4.0 * a * rhs;
  if (disc <= 0.0) return {cur, cur};
  const double root = std::sqrt(disc);
  return {(-b - root) / (2.0 * a), (-b + root) / (2.0 * a)};
}

void GibbsSampler::step_coef(int f, int j) {
  const auto& blk = funcs_[f];
  const int T = n_obs();

  // Residual target for this block and observation weights; both constant
  // across the j-loop since labels and other blocks are fixed here.
  Eigen::VectorXd e(T), w(T);
  for (int t = 0; t < T; ++t) {
    e[t] = y_[t] - (total_fit_[t] - fits_[f][t]) - st_.means[st_.labels[t]];
    w[t] = 1.0 / st_.vars[st_.labels[t]];
  }
  double logC = 0.0;
  for (int l = 0; l < 3; ++l) logC += counts_[l] * 0.5 * (kLog2Pi + std::log(st_.vars[l]));

  const bool cur_in = st_.inclusion[f][j] != 0;

  // Option J_j = 0.
  std::vector<std::uint8_t> J0 = st_.inclusion[f];
  J0[j] = 0;
  Eigen::VectorXd g0(included_list(J0).size());
  {
    int k = 0, kk = 0;
    for (int c = 0; c < static_cast<int>(st_.inclusion[f].size()); ++c) {
      if (!st_.inclusion[f][c]) continue;
      if (c != j) g0[kk++] = st_.gamma[f][k];
      ++k;
    }
  }
  const Eigen::VectorXd F0 = fit_under(f, J0, g0);
  const double s0 = logC + 0.5 * (w.array() * (e - F0).array().square()).sum();
  const bool feas0 = s0 < st_.z;

  // Option J_j = 1: fit is affine in gamma_j.
  std::vector<std::uint8_t> J1 = st_.inclusion[f];
  J1[j] = 1;
  const auto inc1 = included_list(J1);
  const int pos = static_cast<int>(std::lower_bound(inc1.begin(), inc1.end(), j) - inc1.begin());
  Eigen::VectorXd gbase = Eigen::VectorXd::Zero(inc1.size());
  {
    int kk = 0;
    for (int c = 0; c < static_cast<int>(st_.inclusion[f].size()); ++c) {
      if (!st_.inclusion[f][c]) continue;
      const auto it = std::lower_bound(inc1.begin(), inc1.end(), c);
      gbase[it - inc1.begin()] = (c == j) ? 0.0 : st_.gamma[f][kk];
      ++kk;
    }
  }
  const Eigen::MatrixXd L1 = build_LJ(J1, blk.basis.knots);
  const Eigen::VectorXd beta_base = L1.triangularView<Eigen::Lower>().solve(gbase);
  Eigen::VectorXd unit = Eigen::VectorXd::Zero(inc1.size());
  unit[pos] = 1.0;
  const Eigen::VectorXd u_dir = L1.triangularView<Eigen::Lower>().solve(unit);
  Eigen::VectorXd F1b = Eigen::VectorXd::Zero(T), g_dir = Eigen::VectorXd::Zero(T);
  for (std::size_t k = 0; k < inc1.size(); ++k) {
    F1b += beta_base[k] * X_[f].col(inc1[k]);
    g_dir += u_dir[k] * X_[f].col(inc1[k]);
  }
  const Eigen::ArrayXd res1 = (e - F1b).array();
  const double A = 0.5 * (w.array() * g_dir.array().square()).sum();
  const double B = -(w.array() * g_dir.array() * res1).sum();
  const double C1 = logC + 0.5 * (w.array() * res1.square()).sum();

  double r_lo = 0.0, r_hi = 0.0;
  bool r_nonempty = false;
  if (A <= 1e-300) {
    if (C1 < st_.z) {
      r_lo = 0.0;
      r_hi = INFINITY;
      r_nonempty = true;
    }
  } else {
    const double disc = B * B - 4.0 * A * (C1 - st_.z);
    if (disc > 0.0) {
      const double root = std::sqrt(disc);
      r_lo = std::max(0.0, (-B - root) / (2.0 * A));
      r_hi = (-B + root) / (2.0 * A);
      r_nonempty = r_hi > r_lo;
    }
  }

  const double prior_sd = std::sqrt(coef_c_ * st_.vars[0]);
  double mass1 = 0.0;
  if (r_nonempty) {
    // Normalized positive-half-normal mass of R.
    mass1 = std::isfinite(r_hi)
                ? 2.0 * (normal_cdf(r_hi / prior_sd) - normal_cdf(r_lo / prior_sd))
                : 2.0 * (1.0 - normal_cdf(r_lo / prior_sd));
    mass1 = std::max(mass1, 0.0);
  }

  double p0 = feas0 ? cfg_.p_zero : 0.0;
  double p1 = (1.0 - cfg_.p_zero) * mass1;
  if (cfg_.force_all_inclusion) p0 = 0.0;
  bool pick_zero;
  if (p0 + p1 <= 0.0) {
    if (cfg_.force_all_inclusion || cur_in) {
      if (!r_nonempty) return;  // keep current state (float edge)
      pick_zero = false;
      p1 = 1.0;
    } else {
      return;
    }
  } else {
    pick_zero = rng_.uniform() * (p0 + p1) < p0;
  }

  if (pick_zero) {
    st_.inclusion[f] = std::move(J0);
    st_.gamma[f] = std::move(g0);
    total_fit_ += F0 - fits_[f];
    for (int t = 0; t < T; ++t) resid_[t] = y_[t] - total_fit_[t];
    fits_[f] = F0;
    s_cur_ = s0;
  } else {
    const double hi = std::isfinite(r_hi) ? r_hi : r_lo + 40.0 * prior_sd + 1.0;
    double gj = rng_.truncated_normal(0.0, prior_sd, r_lo, hi);
    gj = std::clamp(gj, std::nextafter(r_lo, INFINITY), std::nextafter(hi, -INFINITY));
    Eigen::VectorXd g1 = gbase;
    g1[pos] = gj;
    const Eigen::VectorXd F1 = F1b + gj * g_dir;
    st_.inclusion[f] = std::move(J1);
    st_.gamma[f] = std::move(g1);
    total_fit_ += F1 - fits_[f];
    for (int t = 0; t < T; ++t) resid_[t] = y_[t] - total_fit_[t];
    fits_[f] = F1;
    s_cur_ = A * gj * gj + B * gj + C1;
  }
}

void GibbsSampler::sweep() {
  refresh_caches();
  step_slice();
  step_labels();
  step_weights();
  for (int l = 0; l < 3; ++l) step_mean(l);
  for (int l = 0; l < 3; ++l) step_var(l);
  for (std::size_t f = 0; f < funcs_.size(); ++f)
    for (int j = 0; j < funcs_[f].basis.dim(); ++j) step_coef(static_cast<int>(f), j);
  assert(s_cur_ < st_.z + 1e-6);
}

GibbsSampler::Result GibbsSampler::run() {
  init();
  for (int it = 0; it < cfg_.burnin; ++it) sweep();

  const int T = n_obs();
  const int R = cfg_.sweeps;
  std::vector<Eigen::VectorXd> beta_sum;
  for (const auto& f : funcs_) beta_sum.push_back(Eigen::VectorXd::Zero(f.basis.dim()));
  std::array<double, 3> wsum{}, msum{}, vsum{};
  std::vector<std::array<double, 3>> label_sum;
  if (cfg_.store_label_probs) label_sum.assign(T, {0.0, 0.0, 0.0});
  std::vector<std::vector<double>> inc_sum(funcs_.size());
  for (std::size_t f = 0; f < funcs_.size(); ++f)
    inc_sum[f].assign(funcs_[f].basis.dim(), 0.0);

  Result out;
  std::vector<std::array<double, 3>>& tw = out.trace_weights;
  std::vector<double> fit_trace;
  fit_trace.reserve(R);

  for (int it = 0; it < R; ++it) {
    sweep();
    for (std::size_t f = 0; f < funcs_.size(); ++f) {
      const auto inc = included_list(st_.inclusion[f]);
      if (!inc.empty()) {
        const Eigen::MatrixXd L = build_LJ(st_.inclusion[f], funcs_[f].basis.knots);
        const Eigen::VectorXd beta = L.triangularView<Eigen::Lower>().solve(st_.gamma[f]);
        for (std::size_t k = 0; k < inc.size(); ++k) beta_sum[f][inc[k]] += beta[k];
        for (int c : inc) inc_sum[f][c] += 1.0;
      }
    }
    for (int l = 0; l < 3; ++l) {
      wsum[l] += st_.weights[l];
      msum[l] += st_.means[l];
      vsum[l] += st_.vars[l];
    }
    if (cfg_.store_label_probs)
      for (int t = 0; t < T; ++t) label_sum[t][st_.labels[t]] += 1.0;
    if (cfg_.store_traces) {
      tw.push_back(st_.weights);
      out.trace_means.push_back(st_.means);
      out.trace_vars.push_back(st_.vars);
      Eigen::VectorXd gfull = Eigen::VectorXd::Zero(funcs_[0].basis.dim());
      const auto inc = included_list(st_.inclusion[0]);
      for (std::size_t k = 0; k < inc.size(); ++k) gfull[inc[k]] = st_.gamma[0][k];
      out.trace_gamma_full.push_back(std::move(gfull));
    }
    fit_trace.push_back(total_fit_.mean());
  }

  for (std::size_t f = 0; f < funcs_.size(); ++f) {
    beta_sum[f] /= R;
    out.fn_means.push_back(
        MonotoneFunction::from_beta(funcs_[f].basis, beta_sum[f], funcs_[f].bounds));
    for (double& v : inc_sum[f]) v /= R;
  }
  out.inclusion_freq = std::move(inc_sum);
  for (int l = 0; l < 3; ++l) {
    out.mixture.weights[l] = wsum[l] / R;
    out.mixture.means[l] = msum[l] / R;
    out.mixture.stddevs[l] = std::sqrt(vsum[l] / R);
  }
  if (cfg_.store_label_probs) {
    out.label_probs.resize(T);
    for (int t = 0; t < T; ++t)
      for (int l = 0; l < 3; ++l) out.label_probs[t][l] = label_sum[t][l] / R;
  }

  // Split-half drift heuristic on the mean fitted value: warn, never fail.
  const int half = R / 2;
  if (half > 10) {
    std::vector<double> a(fit_trace.begin(), fit_trace.begin() + half);
    std::vector<double> b(fit_trace.begin() + half, fit_trace.end());
    const double sd = stddev(fit_trace);
    const double zshift = sd > 0.0 ? std::fabs(mean(a) - mean(b)) / sd : 0.0;
    out.diagnostics.split_half_z.push_back(zshift);
    if (zshift > 0.5) {
      out.diagnostics.converged = false;
      out.diagnostics.warnings.push_back(
          "posterior mean fit drifts between chain halves (z=" + std::to_string(zshift) +
          "); consider more sweeps");
    }
  }
  return out;
}

RegressionFit fit_regression(const PanelDataset& data, const MarketNetwork& net,
                             int supply_region, int price_region,
                             const SamplerConfig& cfg) {
  if (supply_region < 0 || supply_region >= net.n_regions() || price_region < 0 ||
      price_region >= net.n_regions())
    throw ValidationError("fit_regression: region index out of range");

  std::vector<FunctionBlock> blocks;
  {
    FunctionBlock s;
    s.name = "supply";
    s.bounds = bounds_of(data.supply[supply_region]);
    s.covariate = normalize_covariate(data.supply[supply_region], s.bounds);
    s.basis = SplineBasis::from_quantiles(s.covariate, cfg.knots);
    blocks.push_back(std::move(s));
  }
  std::vector<std::string> arc_ids;
  for (int a : net.arcs_between(supply_region, price_region)) {
    FunctionBlock c;
    c.name = net.arcs()[a].id;
    c.bounds = bounds_of(data.flow[a]);
    c.covariate = normalize_covariate(data.flow[a], c.bounds);
    c.basis = SplineBasis::from_quantiles(c.covariate, cfg.knots);
    arc_ids.push_back(c.name);
    blocks.push_back(std::move(c));
  }

  GibbsSampler sampler(data.log_price[price_region], std::move(blocks), cfg);
  auto res = sampler.run();

  RegressionFit fit;
  fit.supply_region = supply_region;
  fit.price_region = price_region;
  fit.floor_offset = data.transform.floor_offset;
  fit.supply_fn = res.fn_means[0];
  fit.arc_ids = std::move(arc_ids);
  fit.cost_fns.assign(res.fn_means.begin() + 1, res.fn_means.end());
  fit.mixture = res.mixture;
  fit.label_probs = std::move(res.label_probs);
  fit.inclusion_freq = std::move(res.inclusion_freq);
  fit.diagnostics = std::move(res.diagnostics);
  return fit;
}

std::vector<RegressionFit> fit_all_regressions(const PanelDataset& data,
                                               const MarketNetwork& net,
                                               const SamplerConfig& cfg, int threads) {
  const int r = net.n_regions();
  std::vector<RegressionFit> fits(r * r);
  parallel_for(static_cast<std::size_t>(r) * r, threads, [&](std::size_t k) {
    const int i = static_cast<int>(k) / r;
    const int j = static_cast<int>(k) % r;
    SamplerConfig c = cfg;
    c.seed = derive_seed(cfg.seed, k);
    fits[k] = fit_regression(data, net, i, j, c);
  });
  return fits;
}

}  // namespace elspot
