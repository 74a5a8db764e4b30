#pragma once

// OLS and the semiparametric regression estimator for one linear model.
//
// Both estimators are defined by per-observation estimating-function rows
// Psi_i(theta), theta = (beta, sigma2):
//
//   OLS             x_i e_i,                                e_i^2 n/(n-p) - sigma2
//   semiparametric  e_i,  (x_ij - xbar_j) s_c(e_i) (j > 0),  e_i^2 - sigma2
//
// where e_i = y_i - x_i' beta and s_c is the kernel score estimate of the
// residuals (leave-own-out at each residual) centred to sample mean zero. The
// semiparametric system re-estimates the score from the current residuals on
// every evaluation; the root is located by a deterministic five-start Newton
// search and screened for implausible solutions.

#include "semimed/core.hpp"
#include "semimed/newton.hpp"
#include "semimed/score.hpp"

#include <Eigen/Dense>

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace semimed {

enum class Method { ols, semiparametric };

const char* to_string(Method m);

struct ParameterPoint {
  Eigen::VectorXd beta;
  double sigma2 = 0.0;

  Eigen::VectorXd theta() const;
  static ParameterPoint from_theta(const Eigen::VectorXd& theta);
};

struct FitDiagnostics {
  int start_index_used = 0;
  int iterations = 0;
  double residual_norm = 0.0;
  double rcond = 0.0;  // of the estimating-equation Jacobian A
  bool pseudo_inverse_used = false;
  std::vector<std::string> screened_reasons;  // one per rejected earlier start
};

struct RegressionFit {
  ParameterPoint params;
  Method method = Method::ols;
  Eigen::MatrixXd psi_values;  // n x (p+1), at params
  Eigen::MatrixXd jacobian_A;  // (p+1) x (p+1), mean d Psi_i / d theta'
  Eigen::MatrixXd cov;         // sandwich A^{-1} B A^{-T} / n
  FitDiagnostics diagnostics;

  std::shared_ptr<const DesignMatrix> design;
  std::shared_ptr<const Eigen::VectorXd> response;
  // Score function frozen at the fitted residuals (semiparametric only). Used
  // to differentiate Psi for the sandwich.
  std::shared_ptr<const KernelScore> score;

  std::size_t n() const { return design ? design->rows() : 0; }
  std::size_t dim() const { return static_cast<std::size_t>(params.beta.size()) + 1; }
  Eigen::VectorXd standard_errors() const { return cov.diagonal().cwiseMax(0.0).cwiseSqrt(); }
};

Eigen::MatrixXd ols_psi(const DesignMatrix& design, const Eigen::VectorXd& y,
                        const ParameterPoint& point);

// Fully implicit rows: the score is re-estimated from the residuals at `point`.
Eigen::MatrixXd semiparam_psi(const DesignMatrix& design, const Eigen::VectorXd& y,
                              const ParameterPoint& point);

// Rows with a fixed score function (reference residuals paired with rows).
Eigen::MatrixXd semiparam_psi(const DesignMatrix& design, const Eigen::VectorXd& y,
                              const ParameterPoint& point, const KernelScore& frozen);

// Psi rows of the fit's own estimator at an arbitrary theta.
Eigen::MatrixXd evaluate_psi(const RegressionFit& fit, const Eigen::VectorXd& theta);

// Step for the numerical A matrix, times max(1, |theta_j|).
inline constexpr double kSandwichStep = 1e-5;

RegressionFit fit_ols(const DesignMatrix& design, const Eigen::VectorXd& response);

struct StartSet {
  std::vector<ParameterPoint> starts;
  Eigen::VectorXd d;  // per-coefficient perturbation
  Eigen::VectorXd s;  // alternating signs 1, -1, 1, ...
};

// (b, s2), (b + d, s2), (b - d, s2), (b + s.d, s2), (b - s.d, s2) with
// d_j = max(0.05, 0.1 max(1, |b_j|)).
StartSet make_starts(const RegressionFit& ols);

struct ScreeningRule {
  double rcond_min = 1e-10;
  double sigma2_max_ratio = 25.0;
  double coef_abs_max = 100.0;
  double coef_ols_dev_max = 15.0;  // times max(1, |b_ols_j|)
};

struct ScreenVerdict {
  bool accepted = true;
  std::string reason;  // first violated rule, empty when accepted
};

// Rules in order: non-finite coefficient, non-positive variance, variance
// ratio, coefficient magnitude, coefficient deviation, ill-conditioned
// jacobian, non-finite covariance. The Jacobian check precedes the covariance
// check because the covariance is undefined for a singular Jacobian.
ScreenVerdict screen_root(const ParameterPoint& candidate, const Eigen::MatrixXd& cov,
                          double jacobian_rcond, const RegressionFit& ols,
                          const ScreeningRule& rule = {});

struct SemiparametricOptions {
  ScreeningRule rule;
  NewtonOptions newton;
  // Diagnostic only: invert near-singular Jacobians with a pseudo-inverse
  // instead of rejecting the start.
  bool allow_pseudo_inverse = false;
};

struct StartAttempt {
  int index = 0;
  bool converged = false;
  int iterations = 0;
  double residual_norm = 0.0;
  double rcond = 0.0;
  std::string outcome;  // "accepted", a screening reason, or a solver failure
};

struct SemiparametricResult {
  std::optional<RegressionFit> fit;  // empty: numerical failure
  RegressionFit ols;
  std::vector<StartAttempt> attempts;

  bool numerical_failure() const { return !fit.has_value(); }
};

SemiparametricResult fit_semiparametric(const DesignMatrix& design, const Eigen::VectorXd& response,
                                        const SemiparametricOptions& options = {});

}  // namespace semimed
