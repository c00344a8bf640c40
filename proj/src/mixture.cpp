#include "elspot/mixture.hpp"

#include <cmath>

#include "elspot/errors.hpp"
#include "elspot/stats.hpp"

namespace elspot {

double MixtureParams::mean() const {
  return weights[0] * means[0] + weights[1] * means[1] + weights[2] * means[2];
}

double MixtureParams::pdf(double x) const {
  double f = 0.0;
  for (int l = 0; l < 3; ++l) {
    if (weights[l] <= 0.0) continue;
    if (stddevs[l] <= 0.0) continue;  // degenerate component has no density
    f += weights[l] * normal_pdf((x - means[l]) / stddevs[l]) / stddevs[l];
  }
  return f;
}

double MixtureParams::cdf(double x) const {
  double F = 0.0;
  for (int l = 0; l < 3; ++l) {
    if (weights[l] <= 0.0) continue;
    if (stddevs[l] <= 0.0)
      F += weights[l] * (x >= means[l] ? 1.0 : 0.0);
    else
      F += weights[l] * normal_cdf((x - means[l]) / stddevs[l]);
  }
  return F;
}

double MixtureParams::quantile(double p) const {
  if (!(p > 0.0 && p < 1.0))
    throw NumericalError("mixture quantile: p must lie strictly in (0,1)");
  // Bracket with the extreme component quantiles, then bisect.
  double lo = INFINITY, hi = -INFINITY;
  const double z = normal_quantile(p);
  for (int l = 0; l < 3; ++l) {
    if (weights[l] <= 0.0) continue;
    lo = std::min(lo, means[l] + stddevs[l] * std::min(z, -40.0));
    hi = std::max(hi, means[l] + stddevs[l] * std::max(z, 40.0));
  }
  lo -= 1.0;
  hi += 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-13 * (1.0 + std::fabs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (cdf(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double MixtureParams::exp_mean(double eta) const {
  double m = 0.0;
  for (int l = 0; l < 3; ++l)
    m += weights[l] * std::exp(eta + means[l] + 0.5 * stddevs[l] * stddevs[l]);
  return m;
}

bool MixtureParams::satisfies_constraints() const {
  for (int l = 0; l < 3; ++l)
    if (!(weights[l] > 0.0)) return false;
  const double sum = weights[0] + weights[1] + weights[2];
  if (std::fabs(sum - 1.0) > 1e-9) return false;
  if (!(means[1] < means[0] && means[0] < means[2])) return false;
  if (!(stddevs[0] < stddevs[1] && stddevs[0] < stddevs[2])) return false;
  return true;
}

}  // namespace elspot
