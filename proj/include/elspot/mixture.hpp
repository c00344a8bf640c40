#pragma once

#include <array>

namespace elspot {

// Three-component normal mixture for the regression disturbance, with the
// identification constraints: component 2 has lower mean, component 3 higher
// mean, and both have larger variance than the baseline component 1.
struct MixtureParams {
  std::array<double, 3> weights{1.0 / 3, 1.0 / 3, 1.0 / 3};
  std::array<double, 3> means{0.0, 0.0, 0.0};
  std::array<double, 3> stddevs{1.0, 1.0, 1.0};

  double mean() const;  // marginal mean, the alpha-tilde constant
  double pdf(double x) const;
  double cdf(double x) const;
  double quantile(double p) const;  // bisection on the (monotone) cdf

  // exp-mean of eta + disturbance, i.e. the expected dollar price before
  // subtracting the floor offset (lognormal mixture mean).
  double exp_mean(double eta) const;

  bool satisfies_constraints() const;
};

}  // namespace elspot
