#pragma once

// Pooled OLS with classical or HC1 covariance, and the White and
// Breusch-Godfrey auxiliary-regression diagnostics.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace overtrade::econometrics {

enum class Covariance { Classical, HC1 };
std::optional<Covariance> parse_covariance(std::string_view text);
std::string_view to_string(Covariance c);

struct Coefficient {
  std::string name;
  double estimate = 0.0;
  double std_error = 0.0;
  double t_stat = 0.0;
  double p_value = 1.0;
};

struct OlsFit {
  std::vector<Coefficient> coefficients;  // [0] is the intercept
  std::size_t n_obs = 0;
  std::size_t n_params = 0;  // intercept included
  double rss = 0.0;
  double tss = 0.0;
  double r_squared = 0.0;
  double adj_r_squared = 0.0;
  double f_statistic = 0.0;
  double f_p_value = 1.0;
  // Single-restriction Wald statistic on coefficient 1 (the first regressor).
  double wald_chi2 = 0.0;
  double wald_p_value = 1.0;
  Eigen::VectorXd residuals;
};

// `regressors` excludes the intercept column, which is added first. Needs
// n >= columns + 3 rows (Error Underdetermined) and a full-rank design
// (Error Collinear).
OlsFit fit_ols(const Eigen::MatrixXd& regressors, const Eigen::VectorXd& y,
               const std::vector<std::string>& names, Covariance covariance = Covariance::Classical);

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  int df = 0;
  std::size_t n_used = 0;
};

// n * R^2 of squared residuals on the regressors, their squares and
// cross-products. Error(DegenerateAuxiliary) when that design is rank deficient.
TestResult white_test(const Eigen::VectorXd& residuals, const Eigen::MatrixXd& regressors);

// Breusch-Godfrey: residuals on regressors plus `lags` lagged residuals. Rows
// belong to groups (contiguous runs of equal `group_ids`); a lag never crosses
// a group boundary and rows without a full set of lags are left out.
TestResult lm_serial_test(const Eigen::VectorXd& residuals, const Eigen::MatrixXd& regressors,
                          std::span<const std::int64_t> group_ids, int lags);

// Right-tail probabilities.
double chi2_sf(double x, double df);
double f_sf(double x, double df1, double df2);
double t_two_sided_p(double t, double df);

}  // namespace overtrade::econometrics
