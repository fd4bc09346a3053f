#include "overtrade/econometrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <fmt/format.h>

#include "overtrade/common.hpp"

namespace overtrade::econometrics {

std::optional<Covariance> parse_covariance(std::string_view text) {
  if (text == "classical") return Covariance::Classical;
  if (text == "hc1") return Covariance::HC1;
  return std::nullopt;
}

std::string_view to_string(Covariance c) { return c == Covariance::Classical ? "classical" : "hc1"; }

double chi2_sf(double x, double df) {
  if (std::isnan(x)) return std::numeric_limits<double>::quiet_NaN();
  if (x <= 0.0) return 1.0;
  if (!std::isfinite(x)) return 0.0;
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared(df), x));
}

double f_sf(double x, double df1, double df2) {
  if (std::isnan(x)) return std::numeric_limits<double>::quiet_NaN();
  if (x <= 0.0) return 1.0;
  if (!std::isfinite(x)) return 0.0;
  return boost::math::cdf(boost::math::complement(boost::math::fisher_f(df1, df2), x));
}

double t_two_sided_p(double t, double df) {
  if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
  if (!std::isfinite(t)) return 0.0;
  return 2.0 * boost::math::cdf(boost::math::complement(boost::math::students_t(df), std::abs(t)));
}

namespace {

constexpr double kRankThreshold = 1e-10;

struct LeastSquares {
  Eigen::VectorXd coef;
  Eigen::VectorXd residuals;
  Eigen::MatrixXd xtx_inverse;
  double rss = 0.0;
  double tss = 0.0;  // centered
};

// Solves min ||y - X b|| with X already holding the intercept column.
LeastSquares solve(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  const auto k = X.cols();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(kRankThreshold);
  if (qr.rank() < k) {
    throw Error(ErrorCode::Collinear,
                fmt::format("design matrix has rank {} < {} columns", qr.rank(), k));
  }
  LeastSquares ls;
  ls.coef = qr.solve(y);
  ls.residuals = y - X * ls.coef;
  ls.rss = ls.residuals.squaredNorm();
  const double mean = y.mean();
  ls.tss = (y.array() - mean).square().sum();

  // (X'X)^-1 = P R^-1 R^-T P'
  const Eigen::MatrixXd R = qr.matrixR().topLeftCorner(k, k).template triangularView<Eigen::Upper>();
  const Eigen::MatrixXd r_inv =
      R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
  const Eigen::MatrixXd inner = r_inv * r_inv.transpose();
  const auto& perm = qr.colsPermutation();
  ls.xtx_inverse = perm * inner * perm.transpose();
  return ls;
}

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& regressors) {
  Eigen::MatrixXd X(regressors.rows(), regressors.cols() + 1);
  X.col(0).setOnes();
  X.rightCols(regressors.cols()) = regressors;
  return X;
}

double r_squared(const LeastSquares& ls) {
  if (!(ls.tss > 0.0)) return 0.0;
  return std::clamp(1.0 - ls.rss / ls.tss, 0.0, 1.0);
}

// n * R^2 of an auxiliary regression; rank problems are reported as degenerate.
TestResult auxiliary_nr2(const Eigen::MatrixXd& aux, const Eigen::VectorXd& target, int df) {
  const auto n = static_cast<std::size_t>(aux.rows());
  if (n < static_cast<std::size_t>(aux.cols()) + 3) {
    throw Error(ErrorCode::Underdetermined, "auxiliary regression has too few rows");
  }
  LeastSquares ls;
  try {
    ls = solve(with_intercept(aux), target);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Collinear) throw;
    throw Error(ErrorCode::DegenerateAuxiliary, e.what());
  }
  TestResult r;
  r.statistic = static_cast<double>(n) * r_squared(ls);
  r.df = df;
  r.p_value = chi2_sf(r.statistic, df);
  r.n_used = n;
  return r;
}

}  // namespace

OlsFit fit_ols(const Eigen::MatrixXd& regressors, const Eigen::VectorXd& y,
               const std::vector<std::string>& names, Covariance covariance) {
  const auto n = static_cast<std::size_t>(y.size());
  const auto k = static_cast<std::size_t>(regressors.cols()) + 1;
  if (regressors.cols() < 1) throw Error(ErrorCode::InvalidArgument, "no regressors given");
  if (static_cast<std::size_t>(regressors.rows()) != n) {
    throw Error(ErrorCode::InvalidArgument, "regressor and response lengths differ");
  }
  if (names.size() != k) throw Error(ErrorCode::InvalidArgument, "need one name per coefficient");
  if (n < k + 2) {
    throw Error(ErrorCode::Underdetermined, fmt::format("{} rows for {} coefficients", n, k));
  }

  const Eigen::MatrixXd X = with_intercept(regressors);
  LeastSquares ls = solve(X, y);
  const double dof = static_cast<double>(n - k);

  Eigen::MatrixXd cov;
  if (covariance == Covariance::Classical) {
    cov = ls.xtx_inverse * (ls.rss / dof);
  } else {
    const Eigen::MatrixXd meat =
        X.transpose() * ls.residuals.array().square().matrix().asDiagonal() * X;
    cov = ls.xtx_inverse * meat * ls.xtx_inverse * (static_cast<double>(n) / dof);
  }

  OlsFit fit;
  fit.n_obs = n;
  fit.n_params = k;
  for (std::size_t j = 0; j < k; ++j) {
    Coefficient c;
    c.name = names[j];
    c.estimate = ls.coef(static_cast<Eigen::Index>(j));
    const double var = cov(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j));
    c.std_error = std::sqrt(std::max(var, 0.0));
    c.t_stat = c.estimate / c.std_error;
    c.p_value = t_two_sided_p(c.t_stat, dof);
    fit.coefficients.push_back(std::move(c));
  }
  fit.rss = ls.rss;
  fit.tss = ls.tss;
  fit.r_squared = r_squared(ls);
  fit.adj_r_squared =
      1.0 - (1.0 - fit.r_squared) * static_cast<double>(n - 1) / dof;
  const double explained = std::max(ls.tss - ls.rss, 0.0);
  const double df_model = static_cast<double>(k - 1);
  fit.f_statistic = ls.rss > 0.0 ? (explained / df_model) / (ls.rss / dof)
                                 : std::numeric_limits<double>::infinity();
  fit.f_p_value = f_sf(fit.f_statistic, df_model, dof);

  // Quadratic form b' (R V R')^-1 b for the restriction on coefficient 1.
  const double b = ls.coef(1);
  fit.wald_chi2 = b * b / cov(1, 1);
  fit.wald_p_value = chi2_sf(fit.wald_chi2, 1.0);
  fit.residuals = std::move(ls.residuals);
  return fit;
}

TestResult white_test(const Eigen::VectorXd& residuals, const Eigen::MatrixXd& regressors) {
  const auto n = regressors.rows();
  const auto p = regressors.cols();
  if (residuals.size() != n) throw Error(ErrorCode::InvalidArgument, "length mismatch");
  const auto cols = p + p * (p + 1) / 2;
  Eigen::MatrixXd aux(n, cols);
  aux.leftCols(p) = regressors;
  Eigen::Index c = p;
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = i; j < p; ++j) {
      aux.col(c++) = regressors.col(i).cwiseProduct(regressors.col(j));
    }
  }
  const Eigen::VectorXd e2 = residuals.array().square().matrix();
  return auxiliary_nr2(aux, e2, static_cast<int>(cols));
}

TestResult lm_serial_test(const Eigen::VectorXd& residuals, const Eigen::MatrixXd& regressors,
                          std::span<const std::int64_t> group_ids, int lags) {
  const auto n = residuals.size();
  if (lags < 1) throw Error(ErrorCode::InvalidArgument, "LM test needs lags >= 1");
  if (regressors.rows() != n || static_cast<Eigen::Index>(group_ids.size()) != n) {
    throw Error(ErrorCode::InvalidArgument, "length mismatch");
  }
  std::vector<Eigen::Index> usable;
  Eigen::Index run_start = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i > 0 && group_ids[static_cast<std::size_t>(i)] != group_ids[static_cast<std::size_t>(i - 1)]) {
      run_start = i;
    }
    if (i - run_start >= lags) usable.push_back(i);
  }
  if (usable.empty()) {
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("lags = {} is not below any group length", lags));
  }
  const auto m = static_cast<Eigen::Index>(usable.size());
  const auto p = regressors.cols();
  Eigen::MatrixXd aux(m, p + lags);
  Eigen::VectorXd target(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    const auto i = usable[static_cast<std::size_t>(r)];
    target(r) = residuals(i);
    aux.row(r).head(p) = regressors.row(i);
    for (int l = 1; l <= lags; ++l) aux(r, p + l - 1) = residuals(i - l);
  }
  return auxiliary_nr2(aux, target, lags);
}

}  // namespace overtrade::econometrics
