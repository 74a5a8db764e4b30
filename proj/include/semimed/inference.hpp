#pragma once

// Stacked mediator/outcome covariance and the causal effect maps.
//
// No interaction:  (ACME, ADE, ATE) = (b2 g, b3, b3 + b2 g)
// Interaction:     ACME(t) = b2 (g + eta t)
//                  ADE(t)  = b3 + eta mu_M(t)
//                  ATE     = b3 + b2 g + eta mu_M(1)
//                  mu_M(0) = a2 + xi2' xbar,  mu_M(1) = mu_M(0) + b2
//
// with (a2, b2, xi2) from the mediator model and (b3, g, eta) the treatment,
// mediator and treatment x mediator coefficients of the outcome model.

#include "semimed/core.hpp"
#include "semimed/estimators.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace semimed {

// Positions of the named coordinates in the stacked parameter vector
// (mediator block then outcome block; each block is (beta, sigma2)).
struct ParameterIndex {
  std::size_t alpha2 = 0;
  std::size_t beta2 = 0;
  std::vector<std::size_t> xi2;
  std::size_t sigma2_m = 0;
  std::size_t alpha3 = 0;
  std::size_t beta3 = 0;
  std::size_t gamma = 0;
  std::optional<std::size_t> eta;
  std::vector<std::size_t> xi3;
  std::size_t sigma2_y = 0;
  std::size_t size = 0;
};

struct StackedFit {
  Eigen::VectorXd theta;
  Eigen::MatrixXd psi;  // n x dim, stacked rows at theta
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::MatrixXd cov;  // A^{-1} B A^{-T} / n
  ParameterIndex index_map;
  std::size_t n = 0;
};

// Builds the index map from the two fits' design column roles.
ParameterIndex make_parameter_index(const DesignMatrix& mediator_design,
                                    const DesignMatrix& outcome_design);

// Fits must share n and method. A is the central-difference mean Jacobian of
// the stacked rows (step 1e-5 max(1, |theta_j|)); the blocks are
// differentiated separately since the two models share no parameters.
StackedFit stack_fits(const RegressionFit& mediator, const RegressionFit& outcome);

enum class EffectKind { no_interaction, interaction };

struct EffectEstimates {
  EffectKind kind = EffectKind::no_interaction;
  std::vector<std::string> names;
  Eigen::VectorXd values;
  Eigen::VectorXd se;
  Eigen::VectorXd ci_lower;
  Eigen::VectorXd ci_upper;
  Eigen::MatrixXd jacobian_G;  // effects x stacked dim
  Eigen::MatrixXd cov;         // G Sigma G'
  Eigen::VectorXd xbar;        // covariate means used for mu_M(t)
};

inline constexpr double kZ975 = 1.959963985;

const std::vector<std::string>& effect_names(EffectKind kind);

// (ACME, ADE, ATE)
Eigen::Vector3d effect_map_g0(double beta2, double beta3, double gamma);
// Rows/cols ordered (beta2, beta3, gamma).
Eigen::Matrix3d jacobian_g0(double beta2, double beta3, double gamma);

struct InteractionParams {
  double alpha2 = 0.0;
  double beta2 = 0.0;
  Eigen::VectorXd xi2;
  double beta3 = 0.0;
  double gamma = 0.0;
  double eta = 0.0;
};

// (ACME(0), ACME(1), ADE(0), ADE(1), ATE)
Eigen::VectorXd effect_map_g1(const InteractionParams& theta, const Eigen::VectorXd& xbar);
// 5 x (5 + dim xi2), columns ordered (alpha2, beta2, xi2, beta3, gamma, eta).
Eigen::MatrixXd jacobian_g1(const InteractionParams& theta, const Eigen::VectorXd& xbar);

// Zero-padded embeddings into the stacked parameter vector.
Eigen::MatrixXd embed_g0(const Eigen::Matrix3d& jac, const ParameterIndex& index);
Eigen::MatrixXd embed_g1(const Eigen::MatrixXd& jac, const ParameterIndex& index);

// Wald intervals value +/- z * sqrt(diag(G Sigma G')). Diagonal entries below
// -1e-12 are an upstream error; smaller negatives are clipped to zero.
EffectEstimates delta_intervals(EffectKind kind, const Eigen::VectorXd& values,
                                const Eigen::MatrixXd& G, const Eigen::MatrixXd& cov_theta);

// Effects, Jacobian and intervals from a stacked fit.
EffectEstimates compute_effects(const StackedFit& stacked, const Eigen::VectorXd& xbar,
                                bool interaction);

enum class MethodChoice { ols, semiparametric, both };

struct MediationRequest {
  std::string treatment;
  std::string mediator;
  std::string outcome;
  std::vector<std::string> covariates;
  bool interaction = false;
  MethodChoice method = MethodChoice::both;
  SemiparametricOptions semiparametric;
};

struct MethodResult {
  Method method = Method::ols;
  bool numerical_failure = false;
  std::vector<std::string> failed_models;  // "mediator" and/or "outcome"
  std::optional<RegressionFit> mediator_fit;
  std::optional<RegressionFit> outcome_fit;
  std::vector<StartAttempt> mediator_attempts;
  std::vector<StartAttempt> outcome_attempts;
  std::optional<StackedFit> stacked;
  std::optional<EffectEstimates> effects;
  std::optional<double> interaction_p_value;  // Wald test of eta, stacked covariance
};

struct MediationResult {
  std::size_t n = 0;
  bool interaction = false;
  std::vector<MethodResult> methods;

  const MethodResult* find(Method m) const;
};

// Mediator model M ~ T + X; outcome model Y ~ T + M (+ T:M) + X.
MediationResult mediate(const Dataset& data, const MediationRequest& request);

}  // namespace semimed
