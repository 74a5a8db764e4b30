#include "semimed/simulation.hpp"

#include <omp.h>

#include <array>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

namespace semimed {

const char* scenario_name(ErrorLaw law) {
  switch (law) {
    case ErrorLaw::gaussian: return "gaussian";
    case ErrorLaw::skew_normal: return "skewnormal";
    case ErrorLaw::asymmetric_mixture: return "asymmix";
    case ErrorLaw::symmetric_bimodal: return "symbimodal";
  }
  return "?";
}

std::optional<ErrorLaw> parse_scenario(const std::string& name) {
  for (auto law : {ErrorLaw::gaussian, ErrorLaw::skew_normal, ErrorLaw::asymmetric_mixture,
                   ErrorLaw::symmetric_bimodal}) {
    if (name == scenario_name(law)) return law;
  }
  return std::nullopt;
}

std::string valid_scenarios() { return "gaussian, skewnormal, asymmix, symbimodal"; }

double skew_normal_skewness(double shape) {
  const double delta = shape / std::sqrt(1.0 + shape * shape);
  const double m = delta * std::sqrt(2.0 / std::numbers::pi);
  return (4.0 - std::numbers::pi) / 2.0 * m * m * m / std::pow(1.0 - m * m, 1.5);
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t stream_id(std::uint64_t seed, std::uint64_t replicate, StreamPurpose purpose) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ replicate);
  return splitmix64(h ^ static_cast<std::uint64_t>(purpose));
}

Rng make_stream(std::uint64_t seed, std::uint64_t replicate, StreamPurpose purpose) {
  const std::uint64_t id = stream_id(seed, replicate, purpose);
  std::seed_seq seq{static_cast<std::uint32_t>(id), static_cast<std::uint32_t>(id >> 32)};
  return Rng(seq);
}

std::vector<double> sample_error(const ErrorSpec& spec, Rng& rng, std::size_t count) {
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> out(count);
  switch (spec.law) {
    case ErrorLaw::gaussian:
      for (auto& v : out) v = z(rng);
      break;
    case ErrorLaw::skew_normal: {
      const double delta = kSkewNormalShape / std::sqrt(1.0 + kSkewNormalShape * kSkewNormalShape);
      const double mean = delta * std::sqrt(2.0 / std::numbers::pi);
      const double sd = std::sqrt(1.0 - mean * mean);
      const double tail = std::sqrt(1.0 - delta * delta);
      for (auto& v : out) {
        const double u0 = z(rng);
        const double u1 = z(rng);
        v = (delta * std::abs(u0) + tail * u1 - mean) / sd;
      }
      break;
    }
    case ErrorLaw::asymmetric_mixture: {
      const double scale = 1.0 / std::sqrt(1.06);
      for (auto& v : out) {
        const bool minor = u(rng) < 0.1;
        v = ((minor ? 2.7 : -0.3) + 0.5 * z(rng)) * scale;
      }
      break;
    }
    case ErrorLaw::symmetric_bimodal: {
      const double scale = 1.0 / std::sqrt(1.25);
      for (auto& v : out) {
        const bool upper = u(rng) < 0.5;
        v = ((upper ? 1.0 : -1.0) + 0.5 * z(rng)) * scale;
      }
      break;
    }
  }
  return out;
}

Eigen::VectorXd DgpConstants::true_effects() const {
  InteractionParams p;
  p.alpha2 = alpha2;
  p.beta2 = beta2;
  p.beta3 = beta3;
  p.gamma = gamma;
  p.eta = eta;
  return effect_map_g1(p, Eigen::VectorXd());
}

void ScenarioConfig::validate() const {
  if (n < 30) throw DataError("scenario: n must be at least 30");
  if (reps < 1) throw DataError("scenario: reps must be at least 1");
  if (!(error_scale >= 0.0)) throw DataError("scenario: error_scale must be non-negative");
}

Dataset generate_interaction_dataset(const ScenarioConfig& config, std::size_t replicate) {
  config.validate();
  const auto n = static_cast<Eigen::Index>(config.n);
  Rng t_rng = make_stream(config.seed, replicate, StreamPurpose::treatment);
  Rng m_rng = make_stream(config.seed, replicate, StreamPurpose::mediator_error);
  Rng y_rng = make_stream(config.seed, replicate, StreamPurpose::outcome_error);

  std::bernoulli_distribution coin(0.5);
  const auto e2 = sample_error(config.error, m_rng, config.n);
  const auto e3 = sample_error(config.error, y_rng, config.n);
  const auto& c = config.dgp;

  Eigen::VectorXd t(n), m(n), y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    t[i] = coin(t_rng) ? 1.0 : 0.0;
    m[i] = c.alpha2 + c.beta2 * t[i] + config.error_scale * e2[k];
    y[i] = c.beta3 * t[i] + c.gamma * m[i] + c.eta * t[i] * m[i] + config.error_scale * e3[k];
  }
  return Dataset({"T", "M", "Y"}, {std::move(t), std::move(m), std::move(y)});
}

ReplicateResult run_replicate(const ScenarioConfig& config, std::size_t replicate) {
  ReplicateResult rep;
  rep.replicate_index = replicate;
  rep.rng_stream_id = stream_id(config.seed, replicate, StreamPurpose::treatment);

  MediationRequest req;
  req.treatment = "T";
  req.mediator = "M";
  req.outcome = "Y";
  req.interaction = true;
  req.method = MethodChoice::both;

  std::vector<MethodReplicate> methods(2);
  methods[0].method = Method::ols;
  methods[1].method = Method::semiparametric;
  try {
    const Dataset data = generate_interaction_dataset(config, replicate);
    const MediationResult res = mediate(data, req);
    for (auto& mr : methods) {
      const MethodResult* r = res.find(mr.method);
      if (r && r->effects) {
        mr.success = true;
        mr.estimate = r->effects->values;
        mr.ci_lower = r->effects->ci_lower;
        mr.ci_upper = r->effects->ci_upper;
      }
    }
  } catch (const Error&) {
    // counted as a failed replicate for every method that did not finish
  }
  rep.methods = std::move(methods);
  return rep;
}

std::vector<MetricsRow> aggregate_metrics(const std::string& scenario, const Eigen::VectorXd& truth,
                                          const std::vector<ReplicateResult>& replicates) {
  std::vector<MetricsRow> rows;
  const auto& names = effect_names(EffectKind::interaction);
  const double total = static_cast<double>(replicates.size());
  for (Method method : {Method::ols, Method::semiparametric}) {
    for (std::size_t e = 0; e < names.size(); ++e) {
      const auto k = static_cast<Eigen::Index>(e);
      MetricsRow row;
      row.scenario = scenario;
      row.method = to_string(method);
      row.effect = names[e];
      double sum_err = 0.0, sum_sq = 0.0, sum_len = 0.0;
      std::size_t covered = 0, used = 0;
      for (const auto& rep : replicates) {
        for (const auto& mr : rep.methods) {
          if (mr.method != method || !mr.success) continue;
          const double err = mr.estimate[k] - truth[k];
          sum_err += err;
          sum_sq += err * err;
          sum_len += mr.ci_upper[k] - mr.ci_lower[k];
          if (mr.ci_lower[k] <= truth[k] && truth[k] <= mr.ci_upper[k]) ++covered;
          ++used;
        }
      }
      row.reps_used = used;
      row.success_rate = total > 0 ? static_cast<double>(used) / total : 0.0;
      if (used > 0) {
        const double u = static_cast<double>(used);
        row.bias = sum_err / u;
        row.rmse = std::sqrt(sum_sq / u);
        row.coverage = static_cast<double>(covered) / u;
        row.avg_length = sum_len / u;
      } else {
        row.bias = row.rmse = row.coverage = row.avg_length = NAN;
      }
      rows.push_back(row);
    }
  }
  return rows;
}

namespace {

std::vector<ReplicateResult> run_all(const ScenarioConfig& config) {
  config.validate();
  const auto reps = static_cast<std::ptrdiff_t>(config.reps);
  std::vector<ReplicateResult> out(config.reps);
  const int threads = config.threads > 0 ? config.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (std::ptrdiff_t r = 0; r < reps; ++r) {
    out[static_cast<std::size_t>(r)] = run_replicate(config, static_cast<std::size_t>(r));
  }
  return out;
}

}  // namespace

ScenarioResult run_scenario(const ScenarioConfig& config) {
  ScenarioResult res;
  res.config = config;
  res.truth = config.dgp.true_effects();
  res.replicates = run_all(config);
  res.metrics = aggregate_metrics(config.name, res.truth, res.replicates);
  for (const auto& row : res.metrics) {
    if (row.success_rate < 0.5 && row.effect == "ATE") {
      res.warnings.push_back(row.method + ": pervasive numerical failure (success rate " +
                             format_double(row.success_rate) + ")");
    }
  }
  return res;
}

ScenarioConfig power_config(std::size_t reps, std::uint64_t seed) {
  ScenarioConfig c;
  c.error.law = ErrorLaw::asymmetric_mixture;
  c.n = kPowerDesignN;
  c.reps = reps;
  c.seed = seed;
  c.dgp = DgpConstants::power_design();
  c.name = "power";
  return c;
}

PowerReport summarize_power(const ScenarioResult& scenario) {
  PowerReport rep;
  rep.config = scenario.config;
  rep.truth_acme0 = scenario.truth[0];
  rep.warnings = scenario.warnings;
  const double total = static_cast<double>(scenario.replicates.size());
  for (Method method : {Method::ols, Method::semiparametric}) {
    PowerMethodSummary s;
    s.method = to_string(method);
    std::size_t rejected = 0;
    double sum_est = 0.0, sum_len = 0.0;
    for (const auto& r : scenario.replicates) {
      for (const auto& mr : r.methods) {
        if (mr.method != method || !mr.success) continue;
        ++s.reps_used;
        sum_est += mr.estimate[0];
        sum_len += mr.ci_upper[0] - mr.ci_lower[0];
        if (mr.ci_lower[0] > 0.0 || mr.ci_upper[0] < 0.0) ++rejected;
      }
    }
    s.success_rate = total > 0 ? static_cast<double>(s.reps_used) / total : 0.0;
    if (s.reps_used > 0) {
      const double u = static_cast<double>(s.reps_used);
      s.rejection_rate = static_cast<double>(rejected) / u;
      s.mean_estimate = sum_est / u;
      s.avg_length = sum_len / u;
    } else {
      s.rejection_rate = s.mean_estimate = s.avg_length = NAN;
    }
    rep.methods.push_back(s);
  }
  return rep;
}

PowerReport run_power_study(const ScenarioConfig& config) {
  return summarize_power(run_scenario(config));
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

std::string metrics_csv(const std::vector<MetricsRow>& rows) {
  std::ostringstream out;
  out << "scenario,method,effect,bias,rmse,coverage,avg_length,success_rate,reps_used\n";
  for (const auto& r : rows) {
    out << r.scenario << ',' << r.method << ',' << r.effect << ',' << format_double(r.bias) << ','
        << format_double(r.rmse) << ',' << format_double(r.coverage) << ','
        << format_double(r.avg_length) << ',' << format_double(r.success_rate) << ','
        << r.reps_used << '\n';
  }
  return out.str();
}

std::string replicate_log_csv(const ScenarioResult& result) {
  std::ostringstream out;
  out << "replicate,method,effect,estimate,ci_lo,ci_hi,success\n";
  const auto& names = effect_names(EffectKind::interaction);
  for (const auto& rep : result.replicates) {
    for (const auto& mr : rep.methods) {
      for (std::size_t e = 0; e < names.size(); ++e) {
        const auto k = static_cast<Eigen::Index>(e);
        out << rep.replicate_index << ',' << to_string(mr.method) << ',' << names[e] << ',';
        if (mr.success) {
          out << format_double(mr.estimate[k]) << ',' << format_double(mr.ci_lower[k]) << ','
              << format_double(mr.ci_upper[k]) << ",1\n";
        } else {
          out << "nan,nan,nan,0\n";
        }
      }
    }
  }
  return out.str();
}

}  // namespace semimed
