#include "semimed/estimators.hpp"

#include "semimed/linalg.hpp"

#include <cmath>
#include <sstream>

namespace semimed {

const char* to_string(Method m) {
  return m == Method::ols ? "ols" : "semiparametric";
}

Eigen::VectorXd ParameterPoint::theta() const {
  Eigen::VectorXd t(beta.size() + 1);
  t.head(beta.size()) = beta;
  t[beta.size()] = sigma2;
  return t;
}

ParameterPoint ParameterPoint::from_theta(const Eigen::VectorXd& theta) {
  ParameterPoint p;
  p.beta = theta.head(theta.size() - 1);
  p.sigma2 = theta[theta.size() - 1];
  return p;
}

namespace {

void check_point(const DesignMatrix& design, const Eigen::VectorXd& y, const ParameterPoint& point) {
  if (static_cast<std::size_t>(y.size()) != design.rows()) {
    throw DataError("response length does not match design rows");
  }
  if (static_cast<std::size_t>(point.beta.size()) != design.p()) {
    throw DataError("parameter length does not match design columns");
  }
}

Eigen::MatrixXd assemble_semiparam(const DesignMatrix& design, const Eigen::VectorXd& e,
                                   const std::vector<double>& scores, double sigma2) {
  const Eigen::Index n = e.size();
  const Eigen::Index p = design.values.cols();
  Eigen::Map<const Eigen::VectorXd> s(scores.data(), n);
  const Eigen::VectorXd sc = s.array() - s.mean();
  Eigen::MatrixXd psi(n, p + 1);
  psi.col(0) = e;
  for (Eigen::Index j = 1; j < p; ++j) {
    const auto x = design.values.col(j);
    psi.col(j) = (x.array() - x.mean()) * sc.array();
  }
  psi.col(p) = e.array().square() - sigma2;
  return psi;
}

Eigen::MatrixXd mean_rows(const Eigen::MatrixXd& psi) { return psi.colwise().mean().transpose(); }

}  // namespace

Eigen::MatrixXd ols_psi(const DesignMatrix& design, const Eigen::VectorXd& y,
                        const ParameterPoint& point) {
  check_point(design, y, point);
  const Eigen::Index n = y.size();
  const Eigen::Index p = design.values.cols();
  const Eigen::VectorXd e = y - design.values * point.beta;
  Eigen::MatrixXd psi(n, p + 1);
  psi.leftCols(p) = design.values.array().colwise() * e.array();
  const double dof = static_cast<double>(n) / static_cast<double>(n - p);
  psi.col(p) = e.array().square() * dof - point.sigma2;
  return psi;
}

Eigen::MatrixXd semiparam_psi(const DesignMatrix& design, const Eigen::VectorXd& y,
                              const ParameterPoint& point) {
  check_point(design, y, point);
  const Eigen::VectorXd e = y - design.values * point.beta;
  KernelScore ks(std::vector<double>(e.data(), e.data() + e.size()));
  return assemble_semiparam(design, e, ks.reference_scores(), point.sigma2);
}

Eigen::MatrixXd semiparam_psi(const DesignMatrix& design, const Eigen::VectorXd& y,
                              const ParameterPoint& point, const KernelScore& frozen) {
  check_point(design, y, point);
  const Eigen::VectorXd e = y - design.values * point.beta;
  return assemble_semiparam(design, e, frozen.paired({e.data(), static_cast<std::size_t>(e.size())}),
                            point.sigma2);
}

Eigen::MatrixXd evaluate_psi(const RegressionFit& fit, const Eigen::VectorXd& theta) {
  const auto point = ParameterPoint::from_theta(theta);
  if (fit.method == Method::ols) return ols_psi(*fit.design, *fit.response, point);
  if (!fit.score) throw NumericalError("semiparametric fit has no frozen score");
  return semiparam_psi(*fit.design, *fit.response, point, *fit.score);
}

RegressionFit fit_ols(const DesignMatrix& design, const Eigen::VectorXd& response) {
  const auto n = design.rows();
  const auto p = design.p();
  if (static_cast<std::size_t>(response.size()) != n) {
    throw DataError("response length does not match design rows");
  }
  if (n <= p) {
    throw RankDeficientError("OLS needs more rows than columns (n=" + std::to_string(n) +
                             ", p=" + std::to_string(p) + ")");
  }
  if (!(rcond(design.values) > kRankTolerance)) throw RankDeficientError("OLS: design is rank deficient");

  RegressionFit fit;
  fit.method = Method::ols;
  fit.design = std::make_shared<const DesignMatrix>(design);
  fit.response = std::make_shared<const Eigen::VectorXd>(response);

  fit.params.beta = design.values.colPivHouseholderQr().solve(response);
  const Eigen::VectorXd e = response - design.values * fit.params.beta;
  fit.params.sigma2 = e.squaredNorm() / static_cast<double>(n - p);

  const Eigen::VectorXd theta = fit.params.theta();
  fit.psi_values = ols_psi(design, response, fit.params);
  fit.jacobian_A = central_jacobian(
      [&](const Eigen::VectorXd& t) {
        return mean_rows(ols_psi(design, response, ParameterPoint::from_theta(t)));
      },
      theta, kSandwichStep);
  fit.diagnostics.rcond = rcond(fit.jacobian_A);
  fit.diagnostics.residual_norm = mean_rows(fit.psi_values).cwiseAbs().maxCoeff();
  fit.cov = sandwich_cov(fit.jacobian_A, outer_product_mean(fit.psi_values), n);
  return fit;
}

StartSet make_starts(const RegressionFit& ols) {
  const auto& b = ols.params.beta;
  const Eigen::Index p = b.size();
  StartSet set;
  set.d.resize(p);
  set.s.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    set.d[j] = std::max(0.05, 0.1 * std::max(1.0, std::abs(b[j])));
    set.s[j] = (j % 2 == 0) ? 1.0 : -1.0;
  }
  const Eigen::VectorXd sd = set.s.cwiseProduct(set.d);
  const double s2 = ols.params.sigma2;
  set.starts = {{b, s2}, {b + set.d, s2}, {b - set.d, s2}, {b + sd, s2}, {b - sd, s2}};
  return set;
}

ScreenVerdict screen_root(const ParameterPoint& candidate, const Eigen::MatrixXd& cov,
                          double jacobian_rcond, const RegressionFit& ols,
                          const ScreeningRule& rule) {
  auto reject = [](const char* why) { return ScreenVerdict{false, why}; };
  const auto& b = candidate.beta;
  const auto& b_ols = ols.params.beta;
  if (!b.allFinite() || !std::isfinite(candidate.sigma2)) return reject("non-finite coefficient");
  if (!(candidate.sigma2 > 0.0)) return reject("non-positive variance");
  if (candidate.sigma2 > rule.sigma2_max_ratio * ols.params.sigma2) return reject("variance ratio");
  for (Eigen::Index j = 0; j < b.size(); ++j) {
    if (std::abs(b[j]) > rule.coef_abs_max) return reject("coefficient magnitude");
  }
  for (Eigen::Index j = 0; j < b.size(); ++j) {
    if (std::abs(b[j] - b_ols[j]) > rule.coef_ols_dev_max * std::max(1.0, std::abs(b_ols[j]))) {
      return reject("coefficient deviation");
    }
  }
  if (!(jacobian_rcond > rule.rcond_min)) return reject("ill-conditioned jacobian");
  if (!cov.allFinite()) return reject("non-finite covariance");
  return {};
}

SemiparametricResult fit_semiparametric(const DesignMatrix& design, const Eigen::VectorXd& response,
                                        const SemiparametricOptions& options) {
  const auto n = design.rows();
  const auto p = design.p();
  if (n < p + kMinScoreResiduals) {
    throw DataError("semiparametric fit needs n >= p + " + std::to_string(kMinScoreResiduals) +
                    " (n=" + std::to_string(n) + ", p=" + std::to_string(p) + ")");
  }

  SemiparametricResult result;
  result.ols = fit_ols(design, response);
  const StartSet starts = make_starts(result.ols);
  auto shared_design = std::make_shared<const DesignMatrix>(design);
  auto shared_response = std::make_shared<const Eigen::VectorXd>(response);

  const VectorMap implicit_mean = [&](const Eigen::VectorXd& t) -> Eigen::VectorXd {
    try {
      return mean_rows(semiparam_psi(design, response, ParameterPoint::from_theta(t)));
    } catch (const NumericalError&) {
      return Eigen::VectorXd::Constant(t.size(), NAN);
    }
  };

  std::vector<std::string> rejected;
  for (std::size_t k = 0; k < starts.starts.size(); ++k) {
    StartAttempt attempt;
    attempt.index = static_cast<int>(k);
    const NewtonResult root = newton_root(implicit_mean, starts.starts[k].theta(), options.newton);
    attempt.converged = root.converged;
    attempt.iterations = root.iterations;
    attempt.residual_norm = root.residual_norm;
    if (!root.converged) {
      attempt.outcome = "solver: " + root.failure;
      rejected.push_back("start " + std::to_string(k) + ": " + attempt.outcome);
      result.attempts.push_back(std::move(attempt));
      continue;
    }

    const ParameterPoint candidate = ParameterPoint::from_theta(root.x);
    RegressionFit fit;
    fit.method = Method::semiparametric;
    fit.params = candidate;
    fit.design = shared_design;
    fit.response = shared_response;
    Eigen::MatrixXd cov;
    double rc = 0.0;
    bool pinv = false;
    try {
      const Eigen::VectorXd e = response - design.values * candidate.beta;
      fit.score = std::make_shared<const KernelScore>(std::vector<double>(e.data(), e.data() + e.size()));
      fit.psi_values = semiparam_psi(design, response, candidate, *fit.score);
      fit.jacobian_A = central_jacobian(
          [&](const Eigen::VectorXd& t) {
            return mean_rows(semiparam_psi(design, response, ParameterPoint::from_theta(t), *fit.score));
          },
          root.x, kSandwichStep);
      rc = rcond(fit.jacobian_A);
      const Eigen::MatrixXd B = outer_product_mean(fit.psi_values);
      if (rc > options.rule.rcond_min) {
        cov = sandwich_cov(fit.jacobian_A, B, n, options.rule.rcond_min);
      } else if (options.allow_pseudo_inverse && fit.jacobian_A.allFinite()) {
        const Eigen::MatrixXd a_pinv =
            fit.jacobian_A.completeOrthogonalDecomposition().pseudoInverse();
        cov = a_pinv * B * a_pinv.transpose() / static_cast<double>(n);
        cov = 0.5 * (cov + cov.transpose());
        pinv = true;
      } else {
        cov = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(p + 1),
                                        static_cast<Eigen::Index>(p + 1), NAN);
      }
    } catch (const NumericalError&) {
      cov = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(p + 1),
                                      static_cast<Eigen::Index>(p + 1), NAN);
      rc = 0.0;
    }
    attempt.rcond = rc;

    ScreeningRule rule = options.rule;
    if (pinv) rule.rcond_min = -1.0;
    const ScreenVerdict verdict = screen_root(candidate, cov, rc, result.ols, rule);
    if (!verdict.accepted) {
      attempt.outcome = verdict.reason;
      rejected.push_back("start " + std::to_string(k) + ": " + verdict.reason);
      result.attempts.push_back(std::move(attempt));
      continue;
    }

    attempt.outcome = "accepted";
    result.attempts.push_back(attempt);
    fit.cov = std::move(cov);
    fit.diagnostics.start_index_used = static_cast<int>(k);
    fit.diagnostics.iterations = root.iterations;
    fit.diagnostics.residual_norm = root.residual_norm;
    fit.diagnostics.rcond = rc;
    fit.diagnostics.pseudo_inverse_used = pinv;
    fit.diagnostics.screened_reasons = rejected;
    result.fit = std::move(fit);
    return result;
  }
  return result;
}

}  // namespace semimed
