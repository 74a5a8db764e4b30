#include "semimed/simulation.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace semimed;

namespace {

struct Moments {
  double mean, var, skew;
};

Moments moments(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  double m = 0;
  for (double x : v) m += x;
  m /= n;
  double m2 = 0, m3 = 0;
  for (double x : v) {
    m2 += (x - m) * (x - m);
    m3 += (x - m) * (x - m) * (x - m);
  }
  m2 /= n;
  m3 /= n;
  return {m, m2, m3 / std::pow(m2, 1.5)};
}

std::map<std::string, double> truth_map(const Eigen::VectorXd& t) {
  const char* names[5] = {"ACME(0)", "ACME(1)", "ADE(0)", "ADE(1)", "ATE"};
  std::map<std::string, double> out;
  for (int k = 0; k < 5; ++k) out[names[k]] = t[k];
  return out;
}

}  // namespace

TEST_CASE("error laws are standardised") {
  for (auto law : {ErrorLaw::gaussian, ErrorLaw::skew_normal, ErrorLaw::asymmetric_mixture,
                   ErrorLaw::symmetric_bimodal}) {
    Rng rng = make_stream(1, 0, StreamPurpose::outcome_error);
    const auto m = moments(sample_error({law}, rng, 1000000));
    CAPTURE(scenario_name(law));
    CHECK(std::abs(m.mean) < 0.01);
    CHECK(std::abs(m.var - 1.0) < 0.01);
  }
}

TEST_CASE("skew-normal skewness") {
  const double delta = 5.0 / std::sqrt(26.0);
  const double c = delta * std::sqrt(2.0 / std::numbers::pi);
  const double analytic = (4.0 - std::numbers::pi) / 2.0 * c * c * c /
                          std::pow(1.0 - 2.0 * delta * delta / std::numbers::pi, 1.5);
  CHECK(skew_normal_skewness(5.0) == doctest::Approx(analytic).epsilon(1e-12));
  Rng rng = make_stream(2, 0, StreamPurpose::outcome_error);
  const auto m = moments(sample_error({ErrorLaw::skew_normal}, rng, 1000000));
  CHECK(std::abs(m.skew - analytic) < 0.05);
}

TEST_CASE("bimodal law is symmetric") {
  Rng rng = make_stream(3, 0, StreamPurpose::outcome_error);
  const auto m = moments(sample_error({ErrorLaw::symmetric_bimodal}, rng, 1000000));
  CHECK(std::abs(m.skew) < 0.01);
}

TEST_CASE("stream ids") {
  CHECK(stream_id(1, 2, StreamPurpose::treatment) == stream_id(1, 2, StreamPurpose::treatment));
  CHECK(stream_id(1, 2, StreamPurpose::treatment) != stream_id(1, 2, StreamPurpose::outcome_error));
  CHECK(stream_id(1, 2, StreamPurpose::treatment) != stream_id(1, 3, StreamPurpose::treatment));
  CHECK(stream_id(1, 2, StreamPurpose::treatment) != stream_id(2, 2, StreamPurpose::treatment));
}

TEST_CASE("noiseless limb") {
  ScenarioConfig c;
  c.error_scale = 0.0;
  c.n = 100;
  const auto d = generate_interaction_dataset(c, 0);
  const auto& t = d.column("T");
  const auto& m = d.column("M");
  const auto& y = d.column("Y");
  for (Eigen::Index i = 0; i < 100; ++i) {
    CHECK(m[i] == 0.2 + 0.4 * t[i]);
    CHECK(y[i] == 0.5 * t[i] - 0.8 * m[i] + t[i] * m[i]);
  }
}

TEST_CASE("main design population moments") {
  ScenarioConfig c;
  c.n = 1000000;
  const auto d = generate_interaction_dataset(c, 0);
  const auto& t = d.column("T");
  const auto& m = d.column("M");
  const auto& y = d.column("Y");
  double m1 = 0, n1 = 0, y1 = 0, y0 = 0;
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    if (t[i] == 1.0) {
      m1 += m[i];
      y1 += y[i];
      ++n1;
    } else {
      y0 += y[i];
    }
  }
  const double n0 = static_cast<double>(t.size()) - n1;
  CHECK(std::abs(m1 / n1 - 0.6) < 0.01);
  CHECK(std::abs(y1 / n1 - y0 / n0 - 0.78) < 0.01);
}

TEST_CASE("scenario config validation") {
  ScenarioConfig c;
  c.n = 10;
  CHECK_THROWS_AS(c.validate(), DataError);
  c.n = 30;
  c.reps = 0;
  CHECK_THROWS_AS(c.validate(), DataError);
  CHECK(parse_scenario("asymmix") == ErrorLaw::asymmetric_mixture);
  CHECK_FALSE(parse_scenario("cauchy"));
}

TEST_CASE("single replicate metrics") {
  ScenarioConfig c;
  c.reps = 1;
  c.n = 120;
  const auto res = run_scenario(c);
  REQUIRE(res.metrics.size() == 10);
  const auto& rep = res.replicates.at(0);
  for (std::size_t k = 0; k < 10; ++k) {
    const auto& row = res.metrics[k];
    const auto& mr = rep.methods[k / 5];
    REQUIRE(mr.success);
    const auto e = static_cast<Eigen::Index>(k % 5);
    CHECK(row.bias == mr.estimate[e] - res.truth[e]);
    CHECK((row.coverage == 0.0 || row.coverage == 1.0));
    CHECK(row.reps_used == 1);
  }
}

TEST_CASE("metrics re-aggregated from the replicate log") {
  ScenarioConfig c;
  c.reps = 50;
  c.n = 150;
  c.seed = 77;
  c.error.law = ErrorLaw::skew_normal;
  c.name = "skewnormal";
  const auto res = run_scenario(c);
  const auto log = replicate_log_csv(res);
  const auto agg = oracle::aggregate_log(log, truth_map(res.truth));
  REQUIRE(agg.size() == 10);
  for (const auto& row : res.metrics) {
    const auto& a = agg.at({row.method, row.effect});
    CHECK(row.bias == a.bias);
    CHECK(row.rmse == a.rmse);
    CHECK(row.coverage == a.coverage);
    CHECK(row.avg_length == a.avg_length);
    CHECK(row.success_rate == a.success_rate);
    CHECK(row.reps_used == a.used);
  }
}

TEST_CASE("results do not depend on thread count") {
  ScenarioConfig c;
  c.reps = 12;
  c.n = 100;
  c.error.law = ErrorLaw::asymmetric_mixture;
  c.threads = 1;
  const auto a = metrics_csv(run_scenario(c).metrics);
  c.threads = 4;
  const auto b = metrics_csv(run_scenario(c).metrics);
  CHECK(a == b);
}

TEST_CASE("large-effect power variant rejects") {
  ScenarioConfig c = power_config(40, 3);
  c.dgp.beta2 = 1.0;
  c.dgp.gamma = -1.0;
  const auto rep = run_power_study(c);
  CHECK(rep.truth_acme0 == doctest::Approx(-1.0));
  for (const auto& m : rep.methods) CHECK(m.rejection_rate >= 0.99);
}

TEST_CASE("power config") {
  const auto c = power_config(5, 1);
  CHECK(c.n == 220);
  CHECK(c.error.law == ErrorLaw::asymmetric_mixture);
  CHECK(std::abs(c.dgp.true_effects()[0] + 0.0676) < 1e-12);
}

TEST_CASE("format_double round-trips") {
  for (double v : {0.1, -0.3209, 1e-300, 123456789.125, 1.0 / 3.0}) {
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(NAN) == "nan");
}
