#include "semimed/inference.hpp"

#include "semimed/linalg.hpp"

#include <cmath>
#include <sstream>

namespace semimed {

const std::vector<std::string>& effect_names(EffectKind kind) {
  static const std::vector<std::string> three{"ACME", "ADE", "ATE"};
  static const std::vector<std::string> five{"ACME(0)", "ACME(1)", "ADE(0)", "ADE(1)", "ATE"};
  return kind == EffectKind::interaction ? five : three;
}

ParameterIndex make_parameter_index(const DesignMatrix& mediator_design,
                                    const DesignMatrix& outcome_design) {
  ParameterIndex idx;
  bool has_beta3 = false;
  bool has_gamma = false;
  for (std::size_t j = 0; j < mediator_design.p(); ++j) {
    switch (mediator_design.column_roles[j]) {
      case ColumnRole::intercept: idx.alpha2 = j; break;
      case ColumnRole::treatment: idx.beta2 = j; break;
      case ColumnRole::covariate: idx.xi2.push_back(j); break;
      default: throw DataError("mediator model must not contain mediator or interaction columns");
    }
  }
  idx.sigma2_m = mediator_design.p();
  const std::size_t off = mediator_design.p() + 1;
  for (std::size_t j = 0; j < outcome_design.p(); ++j) {
    switch (outcome_design.column_roles[j]) {
      case ColumnRole::intercept: idx.alpha3 = off + j; break;
      case ColumnRole::treatment: idx.beta3 = off + j; has_beta3 = true; break;
      case ColumnRole::mediator: idx.gamma = off + j; has_gamma = true; break;
      case ColumnRole::interaction: idx.eta = off + j; break;
      case ColumnRole::covariate: idx.xi3.push_back(off + j); break;
    }
  }
  if (!has_beta3 || !has_gamma) throw DataError("outcome model needs treatment and mediator columns");
  idx.sigma2_y = off + outcome_design.p();
  idx.size = idx.sigma2_y + 1;
  return idx;
}

StackedFit stack_fits(const RegressionFit& mediator, const RegressionFit& outcome) {
  if (mediator.n() != outcome.n()) {
    throw DataError("stack_fits: mediator and outcome fits use different n (" +
                    std::to_string(mediator.n()) + " vs " + std::to_string(outcome.n()) + ")");
  }
  if (mediator.method != outcome.method) throw DataError("stack_fits: fits use different methods");

  StackedFit s;
  s.n = mediator.n();
  s.index_map = make_parameter_index(*mediator.design, *outcome.design);
  const auto dm = static_cast<Eigen::Index>(mediator.dim());
  const auto dy = static_cast<Eigen::Index>(outcome.dim());
  const Eigen::VectorXd tm = mediator.params.theta();
  const Eigen::VectorXd ty = outcome.params.theta();
  s.theta.resize(dm + dy);
  s.theta << tm, ty;

  s.psi.resize(static_cast<Eigen::Index>(s.n), dm + dy);
  s.psi << evaluate_psi(mediator, tm), evaluate_psi(outcome, ty);

  auto block_jacobian = [](const RegressionFit& fit, const Eigen::VectorXd& theta) {
    return central_jacobian(
        [&](const Eigen::VectorXd& t) -> Eigen::VectorXd {
          return evaluate_psi(fit, t).colwise().mean().transpose();
        },
        theta, kSandwichStep);
  };
  s.A = Eigen::MatrixXd::Zero(dm + dy, dm + dy);
  s.A.topLeftCorner(dm, dm) = block_jacobian(mediator, tm);
  s.A.bottomRightCorner(dy, dy) = block_jacobian(outcome, ty);
  s.B = outer_product_mean(s.psi);
  s.cov = sandwich_cov(s.A, s.B, s.n);
  return s;
}

Eigen::Vector3d effect_map_g0(double beta2, double beta3, double gamma) {
  const double acme = beta2 * gamma;
  return {acme, beta3, beta3 + acme};
}

Eigen::Matrix3d jacobian_g0(double beta2, double /*beta3*/, double gamma) {
  Eigen::Matrix3d j;
  j << gamma, 0.0, beta2,
       0.0,   1.0, 0.0,
       gamma, 1.0, beta2;
  return j;
}

namespace {

void check_xbar(const InteractionParams& t, const Eigen::VectorXd& xbar) {
  if (t.xi2.size() != xbar.size()) {
    throw DataError("effect map: xbar has " + std::to_string(xbar.size()) + " entries for " +
                    std::to_string(t.xi2.size()) + " covariate coefficients");
  }
}

double mediator_mean_control(const InteractionParams& t, const Eigen::VectorXd& xbar) {
  return t.alpha2 + (xbar.size() ? t.xi2.dot(xbar) : 0.0);
}

}  // namespace

Eigen::VectorXd effect_map_g1(const InteractionParams& t, const Eigen::VectorXd& xbar) {
  check_xbar(t, xbar);
  const double mu0 = mediator_mean_control(t, xbar);
  const double mu1 = mu0 + t.beta2;
  Eigen::VectorXd g(5);
  g << t.beta2 * t.gamma,
       t.beta2 * (t.gamma + t.eta),
       t.beta3 + t.eta * mu0,
       t.beta3 + t.eta * mu1,
       t.beta3 + t.beta2 * t.gamma + t.eta * mu1;
  return g;
}

Eigen::MatrixXd jacobian_g1(const InteractionParams& t, const Eigen::VectorXd& xbar) {
  check_xbar(t, xbar);
  const Eigen::Index q = xbar.size();
  const double mu0 = mediator_mean_control(t, xbar);
  const double mu1 = mu0 + t.beta2;
  const double b2 = t.beta2;
  const double g = t.gamma;
  const double eta = t.eta;
  // Column layout: alpha2 | beta2 | xi2 (q) | beta3 | gamma | eta
  const Eigen::Index c_b3 = 2 + q;
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(5, 5 + q);
  auto row = [&](Eigen::Index r, double a2, double db2, double xscale, double b3, double dg, double de) {
    j(r, 0) = a2;
    j(r, 1) = db2;
    if (q) j.block(r, 2, 1, q) = (xscale * xbar).transpose();
    j(r, c_b3) = b3;
    j(r, c_b3 + 1) = dg;
    j(r, c_b3 + 2) = de;
  };
  row(0, 0.0, g, 0.0, 0.0, b2, 0.0);
  row(1, 0.0, g + eta, 0.0, 0.0, b2, b2);
  row(2, eta, 0.0, eta, 1.0, 0.0, mu0);
  row(3, eta, eta, eta, 1.0, 0.0, mu1);
  row(4, eta, g + eta, eta, 1.0, b2, mu1);
  return j;
}

Eigen::MatrixXd embed_g0(const Eigen::Matrix3d& jac, const ParameterIndex& idx) {
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(3, static_cast<Eigen::Index>(idx.size));
  const std::size_t cols[3] = {idx.beta2, idx.beta3, idx.gamma};
  for (int c = 0; c < 3; ++c) G.col(static_cast<Eigen::Index>(cols[c])) = jac.col(c);
  return G;
}

Eigen::MatrixXd embed_g1(const Eigen::MatrixXd& jac, const ParameterIndex& idx) {
  if (!idx.eta) throw DataError("embed_g1: parameter index has no interaction coefficient");
  const auto q = static_cast<Eigen::Index>(idx.xi2.size());
  if (jac.rows() != 5 || jac.cols() != 5 + q) throw DataError("embed_g1: Jacobian shape mismatch");
  std::vector<std::size_t> cols{idx.alpha2, idx.beta2};
  cols.insert(cols.end(), idx.xi2.begin(), idx.xi2.end());
  cols.insert(cols.end(), {idx.beta3, idx.gamma, *idx.eta});
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(5, static_cast<Eigen::Index>(idx.size));
  for (std::size_t c = 0; c < cols.size(); ++c) {
    G.col(static_cast<Eigen::Index>(cols[c])) = jac.col(static_cast<Eigen::Index>(c));
  }
  return G;
}

EffectEstimates delta_intervals(EffectKind kind, const Eigen::VectorXd& values,
                                const Eigen::MatrixXd& G, const Eigen::MatrixXd& cov_theta) {
  if (G.rows() != values.size() || G.cols() != cov_theta.rows() ||
      cov_theta.rows() != cov_theta.cols()) {
    throw DataError("delta_intervals: non-conforming dimensions");
  }
  EffectEstimates est;
  est.kind = kind;
  const auto& names = effect_names(kind);
  if (static_cast<std::size_t>(values.size()) == names.size()) {
    est.names = names;
  } else {
    for (Eigen::Index i = 0; i < values.size(); ++i) est.names.push_back("effect" + std::to_string(i));
  }
  est.values = values;
  est.jacobian_G = G;
  Eigen::MatrixXd c = G * cov_theta * G.transpose();
  est.cov = 0.5 * (c + c.transpose());
  est.se.resize(values.size());
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    double v = est.cov(i, i);
    if (!std::isfinite(v) || v < -1e-12) {
      std::ostringstream msg;
      msg << "delta_intervals: effect variance " << v << " for " << est.names[static_cast<std::size_t>(i)];
      throw NumericalError(msg.str());
    }
    est.se[i] = std::sqrt(std::max(v, 0.0));
  }
  est.ci_lower = values - kZ975 * est.se;
  est.ci_upper = values + kZ975 * est.se;
  return est;
}

EffectEstimates compute_effects(const StackedFit& stacked, const Eigen::VectorXd& xbar,
                                bool interaction) {
  const auto& idx = stacked.index_map;
  const auto& th = stacked.theta;
  auto at = [&](std::size_t k) { return th[static_cast<Eigen::Index>(k)]; };
  EffectEstimates est;
  if (!interaction) {
    const double b2 = at(idx.beta2), b3 = at(idx.beta3), g = at(idx.gamma);
    est = delta_intervals(EffectKind::no_interaction, effect_map_g0(b2, b3, g),
                          embed_g0(jacobian_g0(b2, b3, g), idx), stacked.cov);
  } else {
    if (!idx.eta) throw DataError("interaction effects requested for a model without T:M");
    InteractionParams p;
    p.alpha2 = at(idx.alpha2);
    p.beta2 = at(idx.beta2);
    p.xi2.resize(static_cast<Eigen::Index>(idx.xi2.size()));
    for (std::size_t k = 0; k < idx.xi2.size(); ++k) p.xi2[static_cast<Eigen::Index>(k)] = at(idx.xi2[k]);
    p.beta3 = at(idx.beta3);
    p.gamma = at(idx.gamma);
    p.eta = at(*idx.eta);
    est = delta_intervals(EffectKind::interaction, effect_map_g1(p, xbar),
                          embed_g1(jacobian_g1(p, xbar), idx), stacked.cov);
  }
  est.xbar = xbar;
  return est;
}

const MethodResult* MediationResult::find(Method m) const {
  for (const auto& r : methods) {
    if (r.method == m) return &r;
  }
  return nullptr;
}

MediationResult mediate(const Dataset& data, const MediationRequest& req) {
  ModelSpec med_spec;
  med_spec.response = req.mediator;
  med_spec.treatment = req.treatment;
  med_spec.covariates = req.covariates;

  ModelSpec out_spec;
  out_spec.response = req.outcome;
  out_spec.treatment = req.treatment;
  out_spec.mediator = req.mediator;
  out_spec.covariates = req.covariates;
  out_spec.interaction = req.interaction;
  if (req.outcome == req.mediator) throw DataError("outcome and mediator must differ");

  const DesignMatrix med_design = build_design(data, med_spec);
  const DesignMatrix out_design = build_design(data, out_spec);
  const Eigen::VectorXd& m = data.column(req.mediator);
  const Eigen::VectorXd& y = data.column(req.outcome);

  Eigen::VectorXd xbar(static_cast<Eigen::Index>(req.covariates.size()));
  for (std::size_t k = 0; k < req.covariates.size(); ++k) {
    xbar[static_cast<Eigen::Index>(k)] = data.column(req.covariates[k]).mean();
  }

  MediationResult result;
  result.n = data.rows();
  result.interaction = req.interaction;

  auto finish = [&](MethodResult& r) {
    r.stacked = stack_fits(*r.mediator_fit, *r.outcome_fit);
    r.effects = compute_effects(*r.stacked, xbar, req.interaction);
    if (r.stacked->index_map.eta) {
      const auto k = static_cast<Eigen::Index>(*r.stacked->index_map.eta);
      const double var = r.stacked->cov(k, k);
      if (var > 0.0) r.interaction_p_value = two_sided_p(r.stacked->theta[k] / std::sqrt(var));
    }
  };

  if (req.method != MethodChoice::semiparametric) {
    MethodResult r;
    r.method = Method::ols;
    r.mediator_fit = fit_ols(med_design, m);
    r.outcome_fit = fit_ols(out_design, y);
    finish(r);
    result.methods.push_back(std::move(r));
  }
  if (req.method != MethodChoice::ols) {
    MethodResult r;
    r.method = Method::semiparametric;
    auto med = fit_semiparametric(med_design, m, req.semiparametric);
    auto out = fit_semiparametric(out_design, y, req.semiparametric);
    r.mediator_attempts = med.attempts;
    r.outcome_attempts = out.attempts;
    if (med.numerical_failure()) r.failed_models.emplace_back("mediator");
    if (out.numerical_failure()) r.failed_models.emplace_back("outcome");
    if (r.failed_models.empty()) {
      r.mediator_fit = std::move(med.fit);
      r.outcome_fit = std::move(out.fit);
      try {
        finish(r);
      } catch (const NumericalError&) {
        r.failed_models.emplace_back("stacked");
      }
    }
    r.numerical_failure = !r.failed_models.empty();
    if (r.numerical_failure) {
      r.stacked.reset();
      r.effects.reset();
    }
    result.methods.push_back(std::move(r));
  }
  return result;
}

}  // namespace semimed
