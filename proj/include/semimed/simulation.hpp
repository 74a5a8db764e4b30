#pragma once

// Monte Carlo harness for the interaction mediation model
//
//   M = a2 + b2 T + e2,   Y = b3 T + g M + eta T M + e3,   T ~ Bernoulli(1/2),
//
// with e2, e3 independent draws from a standardised error law. Every replicate
// draws from its own RNG streams keyed by (seed, replicate, purpose), so results
// do not depend on how replicates are scheduled across threads.

#include "semimed/core.hpp"
#include "semimed/inference.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace semimed {

enum class ErrorLaw { gaussian, skew_normal, asymmetric_mixture, symmetric_bimodal };

// CLI scenario names: gaussian, skewnormal, asymmix, symbimodal.
const char* scenario_name(ErrorLaw law);
std::optional<ErrorLaw> parse_scenario(const std::string& name);
std::string valid_scenarios();

// Every law is standardised analytically to mean 0, variance 1.
//   skew_normal        shape 5 via delta|U0| + sqrt(1 - delta^2) U1
//   asymmetric_mixture 0.9 N(-0.3, 0.5^2) + 0.1 N(2.7, 0.5^2), scaled by 1/sqrt(1.06)
//   symmetric_bimodal  0.5 N(-1, 0.5^2) + 0.5 N(1, 0.5^2), scaled by 1/sqrt(1.25)
struct ErrorSpec {
  ErrorLaw law = ErrorLaw::gaussian;
};

inline constexpr double kSkewNormalShape = 5.0;

// Population skewness of the standardised skew-normal law.
double skew_normal_skewness(double shape);

using Rng = std::mt19937_64;

enum class StreamPurpose : std::uint64_t { treatment = 1, mediator_error = 2, outcome_error = 3 };

// Pure function of its arguments.
std::uint64_t stream_id(std::uint64_t seed, std::uint64_t replicate, StreamPurpose purpose);
Rng make_stream(std::uint64_t seed, std::uint64_t replicate, StreamPurpose purpose);

std::vector<double> sample_error(const ErrorSpec& spec, Rng& rng, std::size_t count);

struct DgpConstants {
  double alpha2 = 0.2;
  double beta2 = 0.4;
  double beta3 = 0.5;
  double gamma = -0.8;
  double eta = 1.0;

  static DgpConstants main_design() { return {}; }
  // beta3 and alpha2 carried over from the main design.
  static DgpConstants power_design() { return {0.2, 0.26, 0.5, -0.26, 0.8}; }

  // (ACME(0), ACME(1), ADE(0), ADE(1), ATE) at these constants (no covariates).
  Eigen::VectorXd true_effects() const;
};

inline constexpr std::size_t kPowerDesignN = 220;

struct ScenarioConfig {
  ErrorSpec error;
  std::size_t n = 300;
  std::size_t reps = 1000;
  std::uint64_t seed = 1;
  DgpConstants dgp;
  std::string name = "gaussian";
  double error_scale = 1.0;  // 0 gives the noiseless limb
  int threads = 0;           // 0: OpenMP default

  void validate() const;
};

// Columns T, M, Y.
Dataset generate_interaction_dataset(const ScenarioConfig& config, std::size_t replicate);

struct MethodReplicate {
  Method method = Method::ols;
  bool success = false;
  Eigen::VectorXd estimate;  // five effects when success
  Eigen::VectorXd ci_lower;
  Eigen::VectorXd ci_upper;
};

struct ReplicateResult {
  std::size_t replicate_index = 0;
  std::uint64_t rng_stream_id = 0;  // id of the treatment stream
  std::vector<MethodReplicate> methods;  // ols, semiparametric
};

struct MetricsRow {
  std::string scenario;
  std::string method;
  std::string effect;
  double bias = 0.0;
  double rmse = 0.0;
  double coverage = 0.0;
  double avg_length = 0.0;
  double success_rate = 0.0;
  std::size_t reps_used = 0;
};

struct ScenarioResult {
  ScenarioConfig config;
  Eigen::VectorXd truth;
  std::vector<ReplicateResult> replicates;  // ordered by replicate index
  std::vector<MetricsRow> metrics;          // method-major, effects in map order
  std::vector<std::string> warnings;
};

// Runs one replicate: simulate, then interaction-model mediation with both
// methods.
ReplicateResult run_replicate(const ScenarioConfig& config, std::size_t replicate);

// Aggregates over successful replicates. Deterministic, single-threaded.
std::vector<MetricsRow> aggregate_metrics(const std::string& scenario, const Eigen::VectorXd& truth,
                                          const std::vector<ReplicateResult>& replicates);

ScenarioResult run_scenario(const ScenarioConfig& config);

struct PowerMethodSummary {
  std::string method;
  double rejection_rate = 0.0;  // share of ACME(0) intervals excluding zero
  double mean_estimate = 0.0;
  double avg_length = 0.0;
  double success_rate = 0.0;
  std::size_t reps_used = 0;
};

struct PowerReport {
  ScenarioConfig config;
  double truth_acme0 = 0.0;
  std::vector<PowerMethodSummary> methods;
  std::vector<std::string> warnings;
};

// Published comparison values for the near-boundary design (context only).
struct PowerReference {
  static constexpr double ols_power = 0.183;
  static constexpr double semiparametric_power = 1.0;
  static constexpr double ols_avg_length = 0.1781;
  static constexpr double semiparametric_avg_length = 0.0439;
};

// Defaults to the near-boundary design (n = 220, asymmetric mixture errors).
ScenarioConfig power_config(std::size_t reps, std::uint64_t seed);

PowerReport run_power_study(const ScenarioConfig& config);
PowerReport summarize_power(const ScenarioResult& scenario);

// Shortest round-trip decimal for a double ("nan"/"inf" for non-finite).
std::string format_double(double v);

std::string metrics_csv(const std::vector<MetricsRow>& rows);
// Columns replicate, method, effect, estimate, ci_lo, ci_hi, success.
std::string replicate_log_csv(const ScenarioResult& result);

}  // namespace semimed
