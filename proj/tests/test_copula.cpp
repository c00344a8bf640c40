#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "elspot/copula.hpp"
#include "elspot/rng.hpp"
#include "elspot/stats.hpp"

using namespace elspot;

namespace {

MixtureParams simple_mixture() {
  MixtureParams m;
  m.weights = {0.9, 0.07, 0.03};
  m.means = {0.0, -0.2, 0.7};
  m.stddevs = {0.05, 0.15, 0.4};
  return m;
}

Eigen::MatrixXd white_noise(int T, int r, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd w(T, r);
  for (int t = 0; t < T; ++t)
    for (int j = 0; j < r; ++j) w(t, j) = rng.normal();
  return w;
}

Eigen::MatrixXd simulate_var(const CopulaModel& m, int T, std::uint64_t seed) {
  const int p = m.markov_order();
  auto paths = simulate_w_paths(m, Eigen::MatrixXd::Zero(std::max(p, 1), m.dim()),
                                T + 8 * p, 1, seed);
  return paths[0].bottomRows(T);
}

// Kendall tau estimated over random index pairs (unbiased, cheap)
double sample_kendall(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                      std::uint64_t seed) {
  Rng rng(seed);
  const int n = static_cast<int>(x.size());
  long s = 0;
  const int M = 2000000;
  for (int k = 0; k < M; ++k) {
    const int i = static_cast<int>(rng.uniform() * n);
    int j = static_cast<int>(rng.uniform() * n);
    if (i == j) j = (j + 1) % n;
    const double v = (x[i] - x[j]) * (y[i] - y[j]);
    s += v > 0 ? 1 : (v < 0 ? -1 : 0);
  }
  return static_cast<double>(s) / M;
}

}  // namespace

TEST_SUITE_BEGIN("copula");

TEST_CASE("PIT: ranks map to k/(T+1) and the median maps to zero score") {
  const std::vector<double> resid = {0.3, -0.1, 0.9};
  const auto tr = make_transform(simple_mixture(), resid);
  std::vector<double> u;
  for (double e : resid) u.push_back(tr.u_of_eps(e));
  std::vector<double> sorted_u(u);
  std::sort(sorted_u.begin(), sorted_u.end());
  CHECK(sorted_u[0] == doctest::Approx(0.25));
  CHECK(sorted_u[1] == doctest::Approx(0.50));
  CHECK(sorted_u[2] == doctest::Approx(0.75));
  CHECK(normal_quantile(tr.u_of_eps(0.3)) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("PIT round trip lands within the bracketing order statistics") {
  Rng rng(3);
  std::vector<double> resid;
  const auto mix = simple_mixture();
  for (int t = 0; t < 400; ++t) resid.push_back(mix.quantile(rng.uniform()));
  const auto tr = make_transform(mix, resid);
  std::vector<double> sorted(resid);
  std::sort(sorted.begin(), sorted.end());
  for (double e : resid) {
    const double back = tr.eps_of_u(tr.u_of_eps(e));
    auto it = std::lower_bound(sorted.begin(), sorted.end(), e);
    const double lo = it == sorted.begin() ? sorted.front() : *(it - 1);
    auto hi_it = std::upper_bound(sorted.begin(), sorted.end(), e);
    const double hi = hi_it == sorted.end() ? sorted.back() : *hi_it;
    CHECK(back >= lo - 1e-9);
    CHECK(back <= hi + 1e-9);
  }
}

TEST_CASE("EDF resampling fixes misspecified margins") {
  // residuals from a shifted exponential, scored against a wrong mixture
  Rng rng(7);
  std::vector<double> resid;
  for (int t = 0; t < 2000; ++t) resid.push_back(rng.exponential() - 1.0);
  MixtureParams wrong;  // standard-normal-ish, far from exponential
  wrong.weights = {0.98, 0.01, 0.01};
  wrong.means = {0.0, -0.1, 0.1};
  wrong.stddevs = {1.0, 2.0, 2.0};
  const auto tr = make_transform(wrong, resid);
  std::vector<double> u_tilde, u_hat;
  for (double e : resid) {
    u_tilde.push_back(wrong.cdf(e));
    u_hat.push_back(tr.u_of_eps(e));
  }
  CHECK(ks_statistic_uniform(u_hat) <= ks_statistic_uniform(u_tilde));
  CHECK(ks_statistic_uniform(u_hat) < 0.01);
}

TEST_CASE("tail extension produces residuals beyond the training range") {
  Rng rng(9);
  std::vector<double> resid;
  const auto mix = simple_mixture();
  for (int t = 0; t < 500; ++t) resid.push_back(mix.quantile(rng.uniform()));
  const auto tr = make_transform(mix, resid);
  const double max_resid = *std::max_element(resid.begin(), resid.end());
  CHECK(tr.eps_of_u(0.99999) > max_resid);
  const double min_resid = *std::min_element(resid.begin(), resid.end());
  CHECK(tr.eps_of_u(0.00001) < min_resid);
}

TEST_CASE("BIC matches its definition") {
  const auto w = white_noise(3000, 2, 11);
  const std::vector<int> lags = {1, 2, 48};
  const double ll = var_conditional_loglik(w, lags, 336);
  const int k = 2 * 2 * 3 + 3;
  CHECK(var_bic(w, lags, 336) ==
        doctest::Approx(-2.0 * ll + k * std::log(3000.0 - 336.0)).epsilon(1e-12));
}

TEST_CASE("lag selection: white noise picks the smallest model") {
  int smallest = 0;
  const int reps = 10;
  for (int rep = 0; rep < reps; ++rep) {
    const auto w = white_noise(10000, 2, 100 + rep);
    const auto sel = select_lags(w, 48);
    if (sel.short_lags == 1 && sel.daily_lags == 1) ++smallest;
  }
  CHECK(smallest >= 9);
}

TEST_CASE("lag selection recovers planted structure") {
  CopulaModel truth;
  truth.lags = {1, 2, 3, 48};
  const auto block = [](double d) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2, 2);
    A(0, 0) = A(1, 1) = d;
    return A;
  };
  truth.coef = {block(0.35), block(0.25), block(0.15), block(0.2)};
  truth.innovation_cov = Eigen::MatrixXd::Identity(2, 2);
  truth.marginal_var = autocov_blocks(truth, 0)[0].diagonal();
  int good = 0;
  const int reps = 10;
  for (int rep = 0; rep < reps; ++rep) {
    const auto w = simulate_var(truth, 10000, 500 + rep);
    const auto sel = select_lags(w, 48);
    if (sel.short_lags >= 3 && sel.daily_lags >= 1) ++good;
  }
  CHECK(good >= 9);
}

TEST_CASE("VAR estimation: univariate AR(1) coefficient recovery") {
  CopulaModel truth;
  truth.lags = {1};
  truth.coef = {Eigen::MatrixXd::Constant(1, 1, 0.6)};
  truth.innovation_cov = Eigen::MatrixXd::Identity(1, 1);
  truth.marginal_var = autocov_blocks(truth, 0)[0].diagonal();
  const auto w = simulate_var(truth, 100000, 21);
  const auto fit = fit_var(w, {1});
  CHECK(fit.coef[0](0, 0) == doctest::Approx(0.6).epsilon(0.017));
}

TEST_CASE("VAR estimation: white noise gives near-zero coefficients") {
  const int T = 20000;
  const auto w = white_noise(T, 2, 23);
  const auto fit = fit_var(w, {1});
  const double se = 1.0 / std::sqrt(static_cast<double>(T));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(std::fabs(fit.coef[0](i, j)) < 3.5 * se);
}

TEST_CASE("conditional likelihood at the estimate dominates the truth") {
  CopulaModel truth;
  truth.lags = {1, 2};
  Eigen::MatrixXd A1(2, 2), A2(2, 2);
  A1 << 0.5, 0.1, 0.0, 0.4;
  A2 << 0.2, 0.0, 0.1, 0.1;
  truth.coef = {A1, A2};
  truth.innovation_cov = Eigen::MatrixXd::Identity(2, 2);
  truth.marginal_var = autocov_blocks(truth, 0)[0].diagonal();
  const auto w = simulate_var(truth, 20000, 29);
  const auto fit = fit_var(w, {1, 2});
  auto profile_logdet = [&](const std::vector<Eigen::MatrixXd>& coef) {
    const int p = 2, T = static_cast<int>(w.rows());
    Eigen::MatrixXd E(T - p, 2);
    for (int t = p; t < T; ++t) {
      Eigen::Vector2d pred = Eigen::Vector2d::Zero();
      pred += coef[0] * w.row(t - 1).transpose();
      pred += coef[1] * w.row(t - 2).transpose();
      E.row(t - p) = w.row(t) - pred.transpose();
    }
    const Eigen::MatrixXd S = E.transpose() * E / (T - p);
    return std::log(S.determinant());
  };
  CHECK(profile_logdet(fit.coef) <= profile_logdet(truth.coef) + 1e-12);
}

TEST_CASE("autocovariance closed form: AR(1)") {
  CopulaModel m;
  m.lags = {1};
  m.coef = {Eigen::MatrixXd::Constant(1, 1, 0.5)};
  m.innovation_cov = Eigen::MatrixXd::Identity(1, 1);
  const auto gamma = autocov_blocks(m, 5);
  CHECK(gamma[0](0, 0) == doctest::Approx(4.0 / 3.0).epsilon(1e-10));
  for (int h = 0; h <= 5; ++h) {
    const auto R = autocorr_block(m, h);
    CHECK(R(0, 0) == doctest::Approx(std::pow(0.5, h)).epsilon(1e-10));
  }
}

TEST_CASE("diagonal VAR keeps autocorrelation diagonal") {
  CopulaModel m;
  m.lags = {1};
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2, 2);
  A(0, 0) = 0.7;
  A(1, 1) = 0.3;
  m.coef = {A};
  m.innovation_cov = Eigen::MatrixXd::Identity(2, 2);
  for (int h : {0, 1, 3}) {
    const auto R = autocorr_block(m, h);
    CHECK(std::fabs(R(0, 1)) < 1e-12);
    CHECK(std::fabs(R(1, 0)) < 1e-12);
  }
}

TEST_CASE("sparse Markov-336 autocorrelation matches a million-step simulation") {
  CopulaModel m;
  m.lags = {1, 2, 336};
  Eigen::MatrixXd A1(2, 2), A2(2, 2), A336(2, 2);
  A1 << 0.45, 0.10, 0.05, 0.40;
  A2 << 0.10, 0.0, 0.0, 0.10;
  A336 << 0.15, 0.0, 0.0, 0.20;
  m.coef = {A1, A2, A336};
  m.innovation_cov = Eigen::MatrixXd::Identity(2, 2) * 0.5;
  m.innovation_cov(0, 1) = m.innovation_cov(1, 0) = 0.15;
  m.marginal_var = autocov_blocks(m, 0)[0].diagonal();

  const int T = 1000000;
  const auto w = simulate_var(m, T, 31);
  for (int h : {0, 1, 2, 3, 336}) {
    const auto R = autocorr_block(m, h);
    Eigen::MatrixXd sample = Eigen::MatrixXd::Zero(2, 2);
    Eigen::Vector2d mu = w.colwise().mean();
    Eigen::Vector2d sd;
    for (int j = 0; j < 2; ++j)
      sd[j] = std::sqrt((w.col(j).array() - mu[j]).square().mean());
    for (int t = h; t < T; ++t)
      sample += (w.row(t).transpose() - mu) * (w.row(t - h) - mu.transpose());
    sample /= (T - h);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        CHECK(std::fabs(R(i, j) - sample(i, j) / (sd[i] * sd[j])) < 0.01);
  }
}

TEST_CASE("kendall tau closed forms and odd symmetry") {
  CHECK(kendall_tau(0.0) == 0.0);
  CHECK(kendall_tau(1.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(kendall_tau(-1.0) == doctest::Approx(-1.0).epsilon(1e-14));
  for (double phi = -1.0; phi <= 1.0; phi += 0.125)
    CHECK(kendall_tau(-phi) == doctest::Approx(-kendall_tau(phi)).epsilon(1e-14));
  CHECK_THROWS_AS(kendall_tau(1.5), NumericalError);
}

TEST_CASE("auto-dependence matrices: symmetry at lag zero, transpose identity") {
  CopulaModel m;
  m.lags = {1};
  Eigen::MatrixXd A(2, 2);
  A << 0.6, 0.2, 0.05, 0.5;
  m.coef = {A};
  m.innovation_cov = Eigen::MatrixXd::Identity(2, 2);
  const auto T0 = auto_dependence(m, 0);
  CHECK(T0(0, 0) == doctest::Approx(1.0));
  CHECK(T0(1, 1) == doctest::Approx(1.0));
  CHECK(T0(0, 1) == doctest::Approx(T0(1, 0)).epsilon(1e-12));
  // Gamma(-h) = Gamma(h)' carries over to the tau map
  const auto gamma = autocov_blocks(m, 3);
  const Eigen::VectorXd d = gamma[0].diagonal().array().sqrt().inverse().matrix();
  const Eigen::MatrixXd Rm3 = d.asDiagonal() * gamma[3].transpose() * d.asDiagonal();
  const auto T3 = auto_dependence(m, 3);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      CHECK(T3(j, i) == doctest::Approx(kendall_tau(Rm3(i, j))).epsilon(1e-12));
}

TEST_CASE("block-Toeplitz window is symmetric positive definite") {
  const auto w = white_noise(2000, 3, 37);
  // add persistence so the fit is nontrivial
  Eigen::MatrixXd wp = w;
  for (int t = 1; t < wp.rows(); ++t) wp.row(t) += 0.7 * wp.row(t - 1);
  const auto m = fit_var(wp, {1, 2});
  const auto R = autocorr_blocks(m, {0, 1, 2});
  Eigen::MatrixXd omega(9, 9);
  for (int s = 0; s < 3; ++s)
    for (int t = 0; t < 3; ++t) {
      const int h = s - t;
      omega.block(3 * s, 3 * t, 3, 3) = h >= 0 ? R[h] : R[-h].transpose();
    }
  CHECK((omega - omega.transpose()).norm() < 1e-12);
  Eigen::LLT<Eigen::MatrixXd> llt(omega);
  CHECK(llt.info() == Eigen::Success);
}

TEST_CASE("stationarity is asserted and restored by rescaling") {
  // mildly explosive scores: the estimate lands above one and gets shrunk
  Rng rng(41);
  Eigen::MatrixXd w(4000, 1);
  w(0, 0) = 0.1;
  for (int t = 1; t < 4000; ++t) w(t, 0) = 1.002 * w(t - 1, 0) + 0.02 * rng.normal();
  const auto m = fit_var(w, {1});
  CHECK(spectral_radius(m) < 1.0);
  CHECK(!m.warnings.empty());
  CHECK(m.coef[0](0, 0) == doctest::Approx(0.995).epsilon(1e-6));
}

TEST_CASE("simulation degenerate case and one-step conditional mean") {
  CopulaModel m;
  m.lags = {1};
  m.coef = {Eigen::MatrixXd::Zero(2, 2)};
  m.innovation_cov = Eigen::MatrixXd::Zero(2, 2);
  m.marginal_var = Eigen::VectorXd::Ones(2);
  Rng rng(43);
  std::vector<double> resid1, resid2;
  const auto mix = simple_mixture();
  for (int t = 0; t < 200; ++t) {
    resid1.push_back(mix.quantile(rng.uniform()));
    resid2.push_back(mix.quantile(rng.uniform()));
  }
  std::vector<MarginalTransform> trs = {make_transform(mix, resid1),
                                        make_transform(mix, resid2)};
  Eigen::MatrixXd hist = Eigen::MatrixXd::Ones(1, 2);
  auto eps = simulate_eps(m, trs, hist, 3, 4, 99);
  const double expect0 = trs[0].eps_of_u(0.5);
  for (const auto& path : eps)
    for (int h = 0; h < 3; ++h) {
      CHECK(path(h, 0) == doctest::Approx(expect0).epsilon(1e-12));
    }

  CopulaModel m2;
  m2.lags = {1, 3};
  Eigen::MatrixXd B1(2, 2), B3(2, 2);
  B1 << 0.5, 0.1, 0.2, 0.4;
  B3 << 0.1, 0.0, 0.0, 0.1;
  m2.coef = {B1, B3};
  m2.innovation_cov = Eigen::MatrixXd::Identity(2, 2);
  m2.marginal_var = autocov_blocks(m2, 0)[0].diagonal();
  Eigen::MatrixXd hist2(3, 2);
  hist2 << 0.3, -0.2, 0.1, 0.5, -0.4, 0.2;
  const auto mean_path = conditional_mean_path(m2, hist2, 1);
  const Eigen::Vector2d expect =
      B1 * hist2.row(2).transpose() + B3 * hist2.row(0).transpose();
  CHECK(mean_path(0, 0) == doctest::Approx(expect[0]).epsilon(1e-12));
  CHECK(mean_path(0, 1) == doctest::Approx(expect[1]).epsilon(1e-12));
}

TEST_CASE("long-horizon simulated margins match the training distribution") {
  CopulaModel m;
  m.lags = {1};
  m.coef = {Eigen::MatrixXd::Constant(1, 1, 0.8)};
  m.innovation_cov = Eigen::MatrixXd::Identity(1, 1);
  m.marginal_var = autocov_blocks(m, 0)[0].diagonal();
  Rng rng(47);
  const auto mix = simple_mixture();
  std::vector<double> resid;
  for (int t = 0; t < 3000; ++t) resid.push_back(mix.quantile(rng.uniform()));
  std::vector<MarginalTransform> trs = {make_transform(mix, resid)};
  Eigen::MatrixXd hist = Eigen::MatrixXd::Constant(1, 1, 2.5);  // far from the mean
  const int H = 60;
  auto eps = simulate_eps(m, trs, hist, H, 50000, 51);
  std::vector<double> u;
  for (const auto& path : eps) u.push_back(trs[0].u_of_eps(path(H - 1, 0)));
  CHECK(ks_statistic_uniform(u) < ks_critical(u.size(), 0.01));
}

TEST_CASE("simulated pairwise Kendall tau matches the closed form") {
  CopulaModel m;
  m.lags = {1};
  Eigen::MatrixXd A(2, 2);
  A << 0.6, 0.15, 0.1, 0.5;
  m.coef = {A};
  m.innovation_cov = Eigen::MatrixXd::Identity(2, 2);
  m.innovation_cov(0, 1) = m.innovation_cov(1, 0) = 0.4;
  m.marginal_var = autocov_blocks(m, 0)[0].diagonal();
  const int T = 1000000;
  const auto w = simulate_var(m, T, 53);
  for (int h : {0, 1}) {
    const auto R = autocorr_block(m, h);
    const Eigen::VectorXd x = w.col(0).tail(T - h);
    const Eigen::VectorXd y = w.col(1).head(T - h);
    const double tau = sample_kendall(x, y, 57);
    CHECK(std::fabs(tau - kendall_tau(R(0, 1))) < 0.02);
  }
}

TEST_SUITE_END();
