// semimed: mediation analysis, Monte Carlo scenarios and the power study.
//
// exit codes: 0 ok, 1 I/O, 2 usage or validation, 3 semiparametric failure
// (report still written).

#include "semimed/core.hpp"
#include "semimed/inference.hpp"
#include "semimed/report.hpp"
#include "semimed/simulation.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

enum Exit { kOk = 0, kIo = 1, kUsage = 2, kNumerical = 3 };

struct MediateArgs {
  std::string data;
  std::string treatment, mediator, outcome;
  std::vector<std::string> covariates;
  bool interaction = false;
  std::string method = "both";
  std::optional<double> scale_outcome;
  std::string out;
  std::string plot;
};

struct SimulateArgs {
  std::string scenario;
  std::size_t n = 300;
  std::size_t reps = 1000;
  std::uint64_t seed = 1;
  std::string out;
  std::string log;
  int threads = 0;
};

struct PowerArgs {
  std::size_t reps = 1000;
  std::uint64_t seed = 1;
  std::string out;
  int threads = 0;
};

void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
  } else {
    semimed::write_text_file(path, content);
  }
}

int run_mediate(const MediateArgs& a, const std::string& command_line) {
  using namespace semimed;
  MediationRequest req;
  req.treatment = a.treatment;
  req.mediator = a.mediator;
  req.outcome = a.outcome;
  req.covariates = a.covariates;
  req.interaction = a.interaction;
  if (a.method == "ols") req.method = MethodChoice::ols;
  else if (a.method == "semi") req.method = MethodChoice::semiparametric;
  else req.method = MethodChoice::both;
  if (a.scale_outcome && !(std::isfinite(*a.scale_outcome) && *a.scale_outcome != 0.0)) {
    throw DataError("--scale-outcome must be finite and non-zero");
  }

  std::vector<std::string> keep{a.treatment, a.mediator, a.outcome};
  keep.insert(keep.end(), a.covariates.begin(), a.covariates.end());
  Dataset data = load_csv(a.data, keep);
  if (a.scale_outcome) data.set_column(a.outcome, data.column(a.outcome) * *a.scale_outcome);

  const MediationResult result = mediate(data, req);

  ReportMetadata meta;
  meta.command = command_line;
  meta.timestamp = utc_timestamp();
  meta.data_path = a.data;
  meta.rows_used = data.rows();
  meta.rows_dropped = data.rows_dropped;
  std::vector<std::string> warnings;
  if (data.rows_dropped > 0) {
    warnings.push_back(std::to_string(data.rows_dropped) + " rows dropped for missing values");
  }
  if (a.scale_outcome) warnings.push_back("outcome multiplied by " + format_double(*a.scale_outcome));
  const auto report = mediation_report(result, req, meta, warnings);
  emit(a.out, report.dump(2) + "\n");

  if (!a.plot.empty()) {
    std::vector<ForestSeries> series;
    for (const auto& m : result.methods) {
      if (m.effects) series.push_back({m.method, *m.effects});
    }
    if (!series.empty()) write_text_file(a.plot, forest_svg(series));
  }

  for (const auto& m : result.methods) {
    if (m.numerical_failure) {
      std::cerr << "semimed: " << to_string(m.method) << " estimator failed; see report diagnostics\n";
      return kNumerical;
    }
  }
  return kOk;
}

int run_simulate(const SimulateArgs& a) {
  using namespace semimed;
  const auto law = parse_scenario(a.scenario);
  if (!law) {
    std::cerr << "semimed: unknown scenario '" << a.scenario << "' (valid: " << valid_scenarios() << ")\n";
    return kUsage;
  }
  ScenarioConfig c;
  c.error.law = *law;
  c.name = a.scenario;
  c.n = a.n;
  c.reps = a.reps;
  c.seed = a.seed;
  c.threads = a.threads;
  const ScenarioResult res = run_scenario(c);
  for (const auto& w : res.warnings) std::cerr << "semimed: warning: " << w << "\n";
  emit(a.out, metrics_csv(res.metrics));
  if (!a.log.empty()) write_text_file(a.log, replicate_log_csv(res));
  return kOk;
}

int run_power(const PowerArgs& a, const std::string& command_line) {
  using namespace semimed;
  ScenarioConfig c = power_config(a.reps, a.seed);
  c.threads = a.threads;
  const PowerReport rep = run_power_study(c);
  for (const auto& w : rep.warnings) std::cerr << "semimed: warning: " << w << "\n";
  ReportMetadata meta;
  meta.command = command_line;
  meta.seed = a.seed;
  meta.timestamp = utc_timestamp();
  meta.rows_used = c.n;
  emit(a.out, power_report(rep, meta).dump(2) + "\n");
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Causal mediation effects with OLS and semiparametric estimators"};
  app.require_subcommand(1);
  app.set_version_flag("--version", SEMIMED_VERSION);

  MediateArgs med;
  auto* mediate_cmd = app.add_subcommand("mediate", "Estimate mediation effects on a CSV dataset");
  mediate_cmd->add_option("--data", med.data, "CSV file with a header row")->required();
  mediate_cmd->add_option("--treatment", med.treatment, "Binary treatment column")->required();
  mediate_cmd->add_option("--mediator", med.mediator, "Mediator column")->required();
  mediate_cmd->add_option("--outcome", med.outcome, "Outcome column")->required();
  mediate_cmd->add_option("--covariates", med.covariates, "Comma-separated covariate columns")->delimiter(',');
  mediate_cmd->add_flag("--interaction", med.interaction, "Include a treatment x mediator term");
  mediate_cmd->add_option("--method", med.method, "ols, semi or both")
      ->check(CLI::IsMember({"ols", "semi", "both"}));
  mediate_cmd->add_option("--scale-outcome", med.scale_outcome, "Multiply the outcome by FACTOR");
  mediate_cmd->add_option("--out", med.out, "JSON report path (stdout when omitted)");
  mediate_cmd->add_option("--plot", med.plot, "Forest plot SVG path");

  SimulateArgs sim;
  auto* simulate_cmd = app.add_subcommand("simulate", "Run a Monte Carlo scenario");
  simulate_cmd->add_option("--scenario", sim.scenario, "gaussian, skewnormal, asymmix or symbimodal")->required();
  simulate_cmd->add_option("--n", sim.n, "Sample size")->check(CLI::Range(30, 1000000));
  simulate_cmd->add_option("--reps", sim.reps, "Replicates")->check(CLI::Range(1, 100000000));
  simulate_cmd->add_option("--seed", sim.seed, "Master seed");
  simulate_cmd->add_option("--out", sim.out, "Metrics CSV path (stdout when omitted)");
  simulate_cmd->add_option("--log", sim.log, "Per-replicate CSV path");
  simulate_cmd->add_option("--threads", sim.threads, "Worker threads (0: OpenMP default)")->check(CLI::NonNegativeNumber);

  PowerArgs pow;
  auto* power_cmd = app.add_subcommand("power", "Near-boundary power study");
  power_cmd->add_option("--reps", pow.reps, "Replicates")->check(CLI::Range(1, 100000000));
  power_cmd->add_option("--seed", pow.seed, "Master seed");
  power_cmd->add_option("--out", pow.out, "JSON path (stdout when omitted)");
  power_cmd->add_option("--threads", pow.threads, "Worker threads (0: OpenMP default)")->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  std::string command_line = "semimed";
  for (int i = 1; i < argc; ++i) command_line += std::string(" ") + argv[i];

  try {
    if (*mediate_cmd) return run_mediate(med, command_line);
    if (*simulate_cmd) return run_simulate(sim);
    if (*power_cmd) return run_power(pow, command_line);
  } catch (const semimed::IoError& e) {
    std::cerr << "semimed: " << e.what() << "\n";
    return kIo;
  } catch (const semimed::DataError& e) {
    std::cerr << "semimed: " << e.what() << "\n";
    return kUsage;
  } catch (const semimed::Error& e) {
    std::cerr << "semimed: " << e.what() << "\n";
    return kNumerical;
  }
  return kUsage;
}
