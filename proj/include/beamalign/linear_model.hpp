#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace beamalign {

/// Affine multi-output least-squares fit: y = coefficients * [x; 1].
struct LinearModel {
  Eigen::MatrixXd coefficients;  // outcomes x (predictors + 1), intercept last
  std::vector<double> r_squared;          // per outcome; NaN for a constant outcome
  std::vector<double> residual_variance;  // SS_res / max(rows - rank, 1)
  int rank = 0;
  Eigen::MatrixXd x;  // fit data, one row per sample
  Eigen::MatrixXd y;

  int predictors() const { return static_cast<int>(coefficients.cols()) - 1; }
  int outcomes() const { return static_cast<int>(coefficients.rows()); }
  Eigen::VectorXd predict(const Eigen::VectorXd& predictors) const;
  Eigen::VectorXd intercept() const { return coefficients.col(coefficients.cols() - 1); }
  double mean_r_squared() const;
};

// Relative singular-value cut-off below which directions are treated as
// unobservable and left at zero (minimum-norm solution).
inline constexpr double kRankTolerance = 1e-10;

/// Minimum-norm least squares via SVD of the intercept-augmented design.
/// Throws UnderdeterminedError when rows < predictors + 1.
LinearModel least_squares(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y);

// R^2 and residual variance of `coefficients` on (x, y).
void compute_diagnostics(LinearModel& model);

std::string linear_model_to_json(const LinearModel& model);
LinearModel linear_model_from_json(const std::string& text);

}  // namespace beamalign
