#include "elspot/spline.hpp"

#include <algorithm>
#include <cmath>

#include "elspot/errors.hpp"
#include "elspot/stats.hpp"

namespace elspot {

double SplineBasis::term(int j, double b) const {
  if (j == 0) return b;
  if (j == 1) return b * b;
  const double z = b - knots[j - 2];
  return z > 0.0 ? z * z : 0.0;
}

double SplineBasis::dterm(int j, double b) const {
  if (j == 0) return 1.0;
  if (j == 1) return 2.0 * b;
  const double z = b - knots[j - 2];
  return z > 0.0 ? 2.0 * z : 0.0;
}

Eigen::VectorXd SplineBasis::row(double b) const {
  Eigen::VectorXd r(dim());
  for (int j = 0; j < dim(); ++j) r[j] = term(j, b);
  return r;
}

Eigen::MatrixXd SplineBasis::design(const std::vector<double>& b) const {
  Eigen::MatrixXd X(b.size(), dim());
  for (std::size_t t = 0; t < b.size(); ++t)
    for (int j = 0; j < dim(); ++j) X(t, j) = term(j, b[t]);
  return X;
}

SplineBasis SplineBasis::from_quantiles(const std::vector<double>& training, int m) {
  std::vector<double> sorted(training);
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> knots;
  for (int k = 1; k <= m; ++k) {
    const double q = quantile_sorted(sorted, static_cast<double>(k) / (m + 1));
    if (q <= 0.0 || q >= 1.0) continue;               // boundary mass
    if (!knots.empty() && q <= knots.back()) continue;  // ties collapse
    knots.push_back(q);
  }
  return SplineBasis{std::move(knots)};
}

namespace {

// Activation point of basis function j: the covariate value above which its
// derivative becomes nonzero. The linear term is active everywhere.
double activation(int j, const std::vector<double>& knots) {
  return j <= 1 ? 0.0 : knots[j - 2];
}

}  // namespace

std::vector<double> derivative_checkpoints(const std::vector<std::uint8_t>& J,
                                           const std::vector<double>& knots) {
  std::vector<int> inc;
  for (std::size_t j = 0; j < J.size(); ++j)
    if (J[j]) inc.push_back(static_cast<int>(j));
  std::vector<double> cp;
  cp.reserve(inc.size());
  for (std::size_t i = 1; i < inc.size(); ++i) cp.push_back(activation(inc[i], knots));
  if (!inc.empty()) cp.push_back(1.0);
  return cp;
}

Eigen::MatrixXd build_LJ(const std::vector<std::uint8_t>& J,
                         const std::vector<double>& knots) {
  SplineBasis basis{knots};
  std::vector<int> inc;
  for (std::size_t j = 0; j < J.size(); ++j)
    if (J[j]) inc.push_back(static_cast<int>(j));
  const auto cp = derivative_checkpoints(J, knots);
  const int d = static_cast<int>(inc.size());
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < d; ++i)
    for (int k = 0; k < d; ++k) L(i, k) = basis.dterm(inc[k], cp[i]);
  // Columns above the diagonal vanish because basis k activates at or after
  // checkpoint i < k; the diagonal is positive for distinct knots.
  for (int i = 0; i < d; ++i)
    if (!(L(i, i) > 0.0)) throw NumericalError("build_LJ: singular constraint matrix");
  return L;
}

MonotoneFunction::MonotoneFunction(SplineBasis basis, std::vector<std::uint8_t> J,
                                   Eigen::VectorXd gamma, NormBounds bounds, double shift)
    : basis_(std::move(basis)),
      J_(std::move(J)),
      gamma_(std::move(gamma)),
      bounds_(bounds),
      shift_(shift) {
  std::vector<int> inc;
  for (std::size_t j = 0; j < J_.size(); ++j)
    if (J_[j]) inc.push_back(static_cast<int>(j));
  if (static_cast<int>(inc.size()) != gamma_.size())
    throw ValidationError("MonotoneFunction: gamma length does not match inclusion");
  beta_ = Eigen::VectorXd::Zero(basis_.dim());
  if (!inc.empty()) {
    const Eigen::MatrixXd L = build_LJ(J_, basis_.knots);
    const Eigen::VectorXd beta_J =
        L.triangularView<Eigen::Lower>().solve(gamma_);
    for (std::size_t k = 0; k < inc.size(); ++k) beta_[inc[k]] = beta_J[k];
  }
}

MonotoneFunction MonotoneFunction::from_beta(SplineBasis basis,
                                             const Eigen::VectorXd& beta_full,
                                             NormBounds bounds) {
  std::vector<std::uint8_t> J(basis.dim(), 1);
  const Eigen::MatrixXd L = build_LJ(J, basis.knots);
  Eigen::VectorXd gamma = L * beta_full;
  // Averages of monotone functions stay monotone; clamp float dust.
  for (int i = 0; i < gamma.size(); ++i)
    if (gamma[i] < 0.0) {
      if (gamma[i] < -1e-8)
        throw ValidationError("from_beta: coefficients violate monotonicity");
      gamma[i] = 0.0;
    }
  return MonotoneFunction(std::move(basis), std::move(J), std::move(gamma), bounds);
}

double MonotoneFunction::spline_at(double b) const {
  auto deriv = [&](double x) {
    double dv = 0.0;
    for (int j = 0; j < basis_.dim(); ++j) dv += beta_[j] * basis_.dterm(j, x);
    return dv;
  };
  if (b < 0.0) return deriv(0.0) * b;
  double v = 0.0;
  if (b > 1.0) {
    for (int j = 0; j < basis_.dim(); ++j) v += beta_[j] * basis_.term(j, 1.0);
    return v + deriv(1.0) * (b - 1.0);
  }
  for (int j = 0; j < basis_.dim(); ++j) v += beta_[j] * basis_.term(j, b);
  return v;
}

double MonotoneFunction::derivative_normalized(double b) const {
  const double bc = std::clamp(b + shift_, 0.0, 1.0);
  double dv = 0.0;
  for (int j = 0; j < basis_.dim(); ++j) dv += beta_[j] * basis_.dterm(j, bc);
  return dv;
}

double MonotoneFunction::eval_normalized(double b) const { return spline_at(b + shift_); }

double MonotoneFunction::eval(double x_raw) const {
  return eval_normalized(bounds_.normalize(x_raw));
}

MonotoneFunction MonotoneFunction::shifted(double delta_normalized) const {
  MonotoneFunction out(*this);
  out.shift_ += delta_normalized;
  return out;
}

}  // namespace elspot
