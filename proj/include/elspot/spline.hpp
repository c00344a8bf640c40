#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "elspot/dataset.hpp"

namespace elspot {

// Quadratic regression spline basis on the normalized domain [0,1]:
//   (b, b^2, (b - k_1)_+^2, ..., (b - k_m)_+^2)
// with interior knots 0 < k_1 < ... < k_m < 1.
struct SplineBasis {
  std::vector<double> knots;

  int dim() const { return static_cast<int>(knots.size()) + 2; }

  Eigen::VectorXd row(double b) const;
  double term(int j, double b) const;        // j-th basis function at b
  double dterm(int j, double b) const;       // its derivative
  Eigen::MatrixXd design(const std::vector<double>& b) const;

  // m knots at equally spaced quantiles of the training covariate; duplicate
  // or boundary quantiles are dropped, so the returned basis may be smaller.
  static SplineBasis from_quantiles(const std::vector<double>& training, int m);
};

// Derivative checkpoints for an inclusion pattern J: the activation points of
// the 2nd..d-th included basis functions followed by 1. The spline derivative
// is piecewise linear with breaks only at included knots, so nonnegativity at
// these d points is equivalent to monotonicity on [0,1], and the resulting
// constraint matrix is square lower triangular with a positive diagonal.
std::vector<double> derivative_checkpoints(const std::vector<std::uint8_t>& J,
                                           const std::vector<double>& knots);

// L_J with rows = spline derivative at the checkpoints, restricted to the
// included coefficients. L_J beta_J >= 0 iff the spline is monotone.
Eigen::MatrixXd build_LJ(const std::vector<std::uint8_t>& J,
                         const std::vector<double>& knots);

// A fitted monotone function: inclusion pattern, nonnegative reparameterized
// coefficients gamma_J = L_J beta_J, normalization bounds for the covariate,
// and an optional domain shift (used by supply-shock studies). Evaluation
// outside [0,1] extends linearly with the boundary derivative, which keeps
// the function monotone for shocked or out-of-sample covariates.
class MonotoneFunction {
 public:
  MonotoneFunction() = default;
  MonotoneFunction(SplineBasis basis, std::vector<std::uint8_t> J, Eigen::VectorXd gamma,
                   NormBounds bounds, double shift = 0.0);

  static MonotoneFunction from_beta(SplineBasis basis, const Eigen::VectorXd& beta_full,
                                    NormBounds bounds);

  const SplineBasis& basis() const { return basis_; }
  const std::vector<std::uint8_t>& inclusion() const { return J_; }
  const Eigen::VectorXd& gamma() const { return gamma_; }
  const NormBounds& bounds() const { return bounds_; }
  double shift() const { return shift_; }
  const Eigen::VectorXd& beta_full() const { return beta_; }

  double eval_normalized(double b) const;   // includes the shift
  double eval(double x_raw) const;          // normalizes, then evaluates
  double derivative_normalized(double b) const;

  MonotoneFunction shifted(double delta_normalized) const;

 private:
  double spline_at(double b) const;         // raw spline with linear extension
  SplineBasis basis_;
  std::vector<std::uint8_t> J_;
  Eigen::VectorXd gamma_;
  NormBounds bounds_;
  double shift_ = 0.0;
  Eigen::VectorXd beta_;                    // full-length, zeros where excluded
};

}  // namespace elspot
