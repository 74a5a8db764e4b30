// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the number
// of failed criteria.

#include "semimed/inference.hpp"
#include "semimed/simulation.hpp"

#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace semimed;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
  std::printf("criterion %d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

const MetricsRow& row(const ScenarioResult& r, const std::string& method, const std::string& effect) {
  for (const auto& m : r.metrics) {
    if (m.method == method && m.effect == effect) return m;
  }
  throw std::runtime_error("missing metrics row " + method + " " + effect);
}

const std::vector<std::string>& five() { return effect_names(EffectKind::interaction); }

void print_metrics(const ScenarioResult& r, double seconds) {
  std::printf("  [%s] n=%zu reps=%zu (%.0f s)\n", r.config.name.c_str(), r.config.n, r.config.reps, seconds);
  for (const auto& m : r.metrics) {
    std::printf("    %-14s %-8s bias=% .4f rmse=%.4f cover=%.3f len=%.4f ok=%.3f\n", m.method.c_str(),
                m.effect.c_str(), m.bias, m.rmse, m.coverage, m.avg_length, m.success_rate);
  }
}

ScenarioResult timed_scenario(ErrorLaw law, std::uint64_t seed) {
  ScenarioConfig c;
  c.error.law = law;
  c.name = scenario_name(law);
  c.n = 300;
  c.reps = 1000;
  c.seed = seed;
  const auto t0 = std::chrono::steady_clock::now();
  auto r = run_scenario(c);
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  print_metrics(r, s);
  return r;
}

InteractionParams unpack(const Eigen::VectorXd& v) {
  const Eigen::Index q = v.size() - 5;
  InteractionParams p;
  p.alpha2 = v[0];
  p.beta2 = v[1];
  p.xi2 = v.segment(2, q);
  p.beta3 = v[2 + q];
  p.gamma = v[3 + q];
  p.eta = v[4 + q];
  return p;
}

double worst_decomposition_gap(const Eigen::VectorXd& v) {
  return std::max(std::abs(v[4] - (v[1] + v[2])), std::abs(v[4] - (v[0] + v[3])));
}

void criterion1() {
  InteractionParams p;
  p.alpha2 = 0.2;
  p.beta2 = 0.4;
  p.beta3 = 0.5;
  p.gamma = -0.8;
  p.eta = 1.0;
  const auto g = effect_map_g1(p, Eigen::VectorXd());
  const double expect[5] = {-0.32, 0.08, 0.70, 1.10, 0.78};
  double worst = 0;
  for (int k = 0; k < 5; ++k) worst = std::max(worst, std::abs(g[k] - expect[k]));
  const double power = DgpConstants::power_design().true_effects()[0];
  worst = std::max(worst, std::abs(power + 0.0676));
  report(1, worst <= 1e-12, "max |g - target| = " + fmt("%.3g", worst));
}

void criterion2() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  double worst = 0;
  int points = 0;
  auto rel = [](const Eigen::MatrixXd& fd, const Eigen::MatrixXd& j) {
    return ((fd - j).array().abs() / j.array().abs().max(1.0)).maxCoeff();
  };
  for (int k = 0; k < 100; ++k, ++points) {
    const Eigen::Vector3d t(u(rng), u(rng), u(rng));
    const auto fd = oracle::central_diff(
        [](const Eigen::VectorXd& v) { return Eigen::VectorXd(effect_map_g0(v[0], v[1], v[2])); }, t, 1e-6);
    worst = std::max(worst, rel(fd, jacobian_g0(t[0], t[1], t[2])));
  }
  for (Eigen::Index q : {0, 1, 3}) {
    for (int k = 0; k < 100; ++k, ++points) {
      const Eigen::VectorXd v = Eigen::VectorXd::NullaryExpr(5 + q, [&] { return u(rng); });
      const Eigen::VectorXd xbar = Eigen::VectorXd::NullaryExpr(q, [&] { return u(rng); });
      const auto fd = oracle::central_diff([&](const Eigen::VectorXd& w) { return effect_map_g1(unpack(w), xbar); },
                                           v, 1e-6);
      worst = std::max(worst, rel(fd, jacobian_g1(unpack(v), xbar)));
    }
  }
  report(2, worst <= 1e-6, std::to_string(points) + " points, max relative error " + fmt("%.3g", worst));
}

struct Published {
  double est, lo, hi, len;
};

bool rows_match(const EffectEstimates& e, const std::vector<Published>& pub, double& worst) {
  for (std::size_t k = 0; k < pub.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    worst = std::max({worst, std::abs(e.values[i] - pub[k].est), std::abs(e.ci_lower[i] - pub[k].lo),
                      std::abs(e.ci_upper[i] - pub[k].hi),
                      std::abs(e.ci_upper[i] - e.ci_lower[i] - pub[k].len)});
  }
  return worst <= 1e-3;
}

std::vector<EffectEstimates> criterion3() {
  std::vector<EffectEstimates> produced;
  const fs::path uis = fs::path(SEMIMED_DATA_DIR) / "uis.csv";
  const fs::path jobs = fs::path(SEMIMED_DATA_DIR) / "jobs.csv";
  if (!fs::exists(uis) || !fs::exists(jobs)) {
    report(3, false, "datasets missing under " + std::string(SEMIMED_DATA_DIR) + " (run tools/fetch_datasets.py)");
    return produced;
  }
  Dataset du = load_csv(uis, {"TREAT", "FRAC", "TIME"});
  du.set_column("TIME", du.column("TIME") / 100.0);
  const auto ru = mediate(du, {"TREAT", "FRAC", "TIME", {}, true, MethodChoice::both, {}});
  const Dataset dj = load_csv(jobs, {"treat", "job_seek", "depress2", "econ_hard", "sex", "age"});
  const auto rj = mediate(dj, {"treat", "job_seek", "depress2", {"econ_hard", "sex", "age"}, true, MethodChoice::both, {}});

  const std::vector<Published> uis_pub{{-0.3209, -0.4583, -0.1835, 0.2748},
                                       {-0.4626, -0.6677, -0.2575, 0.4102},
                                       {0.9353, 0.6484, 1.2222, 0.5738},
                                       {0.7936, 0.4940, 1.0932, 0.5992},
                                       {0.4727, 0.1479, 0.7974, 0.6495}};
  const std::vector<Published> jobs_pub{{-0.0198, -0.0495, 0.0100, 0.0595},
                                        {-0.0140, -0.0360, 0.0079, 0.0439},
                                        {-0.0420, -0.1286, 0.0447, 0.1733},
                                        {-0.0362, -0.1219, 0.0494, 0.1713},
                                        {-0.0560, -0.1460, 0.0340, 0.1800}};
  bool ok = true;
  std::string detail;
  double worst = 0;
  for (const auto* r : {&ru, &rj}) {
    const auto* o = r->find(Method::ols);
    const auto* s = r->find(Method::semiparametric);
    if (!o || !o->effects || !s || !s->effects) {
      ok = false;
      detail += " missing estimates;";
      continue;
    }
    produced.push_back(*o->effects);
    produced.push_back(*s->effects);
    ok = rows_match(*o->effects, r == &ru ? uis_pub : jobs_pub, worst) && ok;
    const char* name = r == &ru ? "uis" : "jobs";
    for (Eigen::Index k = 0; k < 2; ++k) {
      const double lo = o->effects->ci_upper[k] - o->effects->ci_lower[k];
      const double ls = s->effects->ci_upper[k] - s->effects->ci_lower[k];
      const bool shorter = ls < lo;
      const bool same_sign = std::signbit(o->effects->values[k]) == std::signbit(s->effects->values[k]);
      ok = ok && shorter && same_sign;
      detail += std::string(" ") + name + " " + five()[static_cast<std::size_t>(k)] + " len " + fmt("%.4f", lo) +
                "->" + fmt("%.4f", ls) + (same_sign ? "" : " SIGN MISMATCH") + ";";
    }
  }
  report(3, ok, "max OLS deviation " + fmt("%.2g", worst) + ";" + detail);
  return produced;
}

void criterion4(const ScenarioResult& g) {
  struct Ref {
    const char* effect;
    double rmse, cover, len;
  };
  const Ref refs[5] = {{"ACME(0)", 0.1003, 0.944, 0.3853},
                       {"ACME(1)", 0.0412, 0.917, 0.1588},
                       {"ADE(0)", 0.1524, 0.940, 0.5688},
                       {"ADE(1)", 0.1492, 0.947, 0.5696},
                       {"ATE", 0.1412, 0.938, 0.5233}};
  bool ok = true;
  std::string detail;
  for (const auto& r : refs) {
    const auto& m = row(g, "ols", r.effect);
    const bool pass = std::abs(m.rmse - r.rmse) <= 0.01 && std::abs(m.coverage - r.cover) <= 0.02 &&
                      std::abs(m.avg_length - r.len) <= 0.02;
    ok = ok && pass;
    detail += std::string(" ") + r.effect + " " + fmt("%.4f", m.rmse) + "/" + fmt("%.3f", m.coverage) + "/" +
              fmt("%.4f", m.avg_length) + (pass ? "" : " (out of tolerance)") + ";";
  }
  report(4, ok, "gaussian OLS rmse/coverage/length:" + detail);
}

void criterion5(const ScenarioResult& g) {
  bool ok = true;
  std::string detail;
  for (const auto& e : five()) {
    const double ratio = row(g, "semiparametric", e).rmse / row(g, "ols", e).rmse;
    ok = ok && ratio <= 1.15;
    detail += " " + e + " " + fmt("%.3f", ratio) + ";";
  }
  report(5, ok, "semiparametric/OLS rmse:" + detail);
}

void criterion6(const ScenarioResult& asym, const ScenarioResult& bimodal, const ScenarioResult& skew) {
  bool ok = true;
  std::string detail;
  for (const auto* r : {&asym, &bimodal}) {
    double min_cov = 1, max_cov = 0;
    bool dominates = true;
    for (const auto& e : five()) {
      const auto& o = row(*r, "ols", e);
      const auto& s = row(*r, "semiparametric", e);
      dominates = dominates && s.rmse < o.rmse && s.avg_length < o.avg_length;
      min_cov = std::min(min_cov, s.coverage);
      max_cov = std::max(max_cov, s.coverage);
    }
    const bool cov_ok = min_cov >= 0.90 && max_cov <= 0.97;
    ok = ok && dominates && cov_ok;
    detail += " " + r->config.name + (dominates ? " dominates" : " DOES NOT dominate") + ", coverage [" +
              fmt("%.3f", min_cov) + ", " + fmt("%.3f", max_cov) + "];";
  }
  const auto& o = row(skew, "ols", "ATE");
  const auto& s = row(skew, "semiparametric", "ATE");
  const bool skew_ok = s.rmse < o.rmse && s.avg_length < o.avg_length;
  ok = ok && skew_ok;
  detail += " skewnormal ATE rmse " + fmt("%.4f", o.rmse) + "->" + fmt("%.4f", s.rmse) + ", len " +
            fmt("%.4f", o.avg_length) + "->" + fmt("%.4f", s.avg_length) + ";";
  report(6, ok, detail);
}

PowerReport criterion7(ScenarioResult& out) {
  const ScenarioConfig c = power_config(1000, 7);
  const auto t0 = std::chrono::steady_clock::now();
  out = run_scenario(c);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const PowerReport p = summarize_power(out);
  const auto& o = p.methods[0];
  const auto& s = p.methods[1];
  std::printf("  [power] n=%zu reps=%zu (%.0f s) truth=%.4f\n", c.n, c.reps, secs, p.truth_acme0);
  for (const auto& m : p.methods) {
    std::printf("    %-14s reject=%.3f mean=% .4f len=%.4f ok=%.3f\n", m.method.c_str(), m.rejection_rate,
                m.mean_estimate, m.avg_length, m.success_rate);
  }
  const bool ok = s.rejection_rate - o.rejection_rate >= 0.30 && s.avg_length < 0.5 * o.avg_length;
  report(7, ok, "rejection " + fmt("%.3f", o.rejection_rate) + " vs " + fmt("%.3f", s.rejection_rate) +
                    ", length " + fmt("%.4f", o.avg_length) + " vs " + fmt("%.4f", s.avg_length) + " (ratio " +
                    fmt("%.3f", s.avg_length / o.avg_length) + ")");
  return p;
}

void criterion8(const std::vector<const ScenarioResult*>& scenarios, const std::vector<EffectEstimates>& extra) {
  bool ok = true;
  std::string detail;
  double min_success = 1;
  for (const auto* r : scenarios) {
    if (r->config.n != 300) continue;
    for (const auto& m : r->metrics) min_success = std::min(min_success, m.success_rate);
  }
  ok = ok && min_success >= 0.99;
  detail += "min success " + fmt("%.3f", min_success) + ";";

  ScenarioConfig c;
  c.error.law = ErrorLaw::asymmetric_mixture;
  c.name = "asymmix";
  c.reps = 40;
  c.seed = 99;
  std::string base;
  bool identical = true;
  for (int threads : {1, 4, 8}) {
    c.threads = threads;
    const auto csv = metrics_csv(run_scenario(c).metrics);
    if (threads == 1) base = csv;
    else identical = identical && csv == base;
  }
  ok = ok && identical;
  detail += identical ? " CSVs identical under 1/4/8 threads;" : " CSVs DIFFER across thread counts;";

  double gap = 0;
  std::size_t checked = 0;
  for (const auto* r : scenarios) {
    for (const auto& rep : r->replicates) {
      for (const auto& m : rep.methods) {
        if (!m.success) continue;
        gap = std::max(gap, worst_decomposition_gap(m.estimate));
        ++checked;
      }
    }
  }
  for (const auto& e : extra) {
    if (e.kind != EffectKind::interaction) continue;
    gap = std::max(gap, worst_decomposition_gap(e.values));
    ++checked;
  }
  ok = ok && gap <= 1e-12;
  detail += " decomposition gap " + fmt("%.2g", gap) + " over " + std::to_string(checked) + " estimates";
  report(8, ok, detail);
}

void criterion9(const ScenarioResult& g) {
  std::mt19937_64 rng(909);
  std::normal_distribution<double> z;
  std::bernoulli_distribution b(0.5);
  double beta_gap = 0, cov_gap = 0;
  for (Eigen::Index extra : {0, 1, 3}) {
    const Eigen::Index n = 200;
    std::vector<std::string> names{"T"};
    std::vector<Eigen::VectorXd> cols;
    Eigen::VectorXd t(n), m(n), y(n);
    std::vector<Eigen::VectorXd> xs(static_cast<std::size_t>(extra), Eigen::VectorXd(n));
    for (Eigen::Index i = 0; i < n; ++i) {
      t[i] = b(rng) ? 1.0 : 0.0;
      double lin = 0;
      for (auto& x : xs) {
        x[i] = z(rng);
        lin += 0.3 * x[i];
      }
      m[i] = 0.2 + 0.5 * t[i] + lin + (1.0 + t[i]) * z(rng);
      y[i] = 0.1 + 0.4 * t[i] - 0.7 * m[i] + 0.6 * t[i] * m[i] - lin + std::exp(0.5 * z(rng));
    }
    cols.push_back(t);
    std::vector<std::string> cov_names;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      names.push_back("X" + std::to_string(k));
      cov_names.push_back(names.back());
      cols.push_back(xs[k]);
    }
    names.push_back("M");
    cols.push_back(m);
    names.push_back("Y");
    cols.push_back(y);
    const Dataset d(names, cols);
    const auto res = mediate(d, {"T", "M", "Y", cov_names, true, MethodChoice::ols, {}});
    const auto& r = res.methods.at(0);
    for (const auto* fit : {&*r.mediator_fit, &*r.outcome_fit}) {
      const auto& X = fit->design->values;
      const auto& resp = *fit->response;
      const Eigen::VectorXd beta = oracle::normal_equations(X, resp);
      beta_gap = std::max(beta_gap, (fit->params.beta - beta).cwiseAbs().maxCoeff());
    }
    const auto& s = *r.stacked;
    const auto& Xm = r.mediator_fit->design->values;
    const auto& Xy = r.outcome_fit->design->values;
    const Eigen::VectorXd em = m - Xm * oracle::normal_equations(Xm, m);
    const Eigen::VectorXd ey = y - Xy * oracle::normal_equations(Xy, y);
    const auto pm = Xm.cols();
    const auto py = Xy.cols();
    cov_gap = std::max(cov_gap, (s.cov.topLeftCorner(pm, pm) - oracle::hc0(Xm, em)).cwiseAbs().maxCoeff());
    cov_gap = std::max(cov_gap, (s.cov.block(pm + 1, pm + 1, py, py) - oracle::hc0(Xy, ey)).cwiseAbs().maxCoeff());
  }

  std::map<std::string, double> truth;
  for (std::size_t k = 0; k < 5; ++k) truth[five()[k]] = g.truth[static_cast<Eigen::Index>(k)];
  const auto agg = oracle::aggregate_log(replicate_log_csv(g), truth);
  bool exact = agg.size() == g.metrics.size();
  for (const auto& m : g.metrics) {
    const auto it = agg.find({m.method, m.effect});
    if (it == agg.end()) {
      exact = false;
      continue;
    }
    const auto& a = it->second;
    exact = exact && a.bias == m.bias && a.rmse == m.rmse && a.coverage == m.coverage &&
            a.avg_length == m.avg_length && a.success_rate == m.success_rate && a.used == m.reps_used;
  }
  const bool ok = beta_gap <= 1e-10 && cov_gap <= 1e-8 && exact;
  report(9, ok, "beta gap " + fmt("%.2g", beta_gap) + ", HC0 gap " + fmt("%.2g", cov_gap) + ", re-aggregation " +
                    (exact ? "exact" : "MISMATCH"));
}

}  // namespace

int main() {
  try {
    criterion1();
    criterion2();
    const auto dataset_effects = criterion3();

    const auto gauss = timed_scenario(ErrorLaw::gaussian, 1);
    criterion4(gauss);
    criterion5(gauss);

    const auto skew = timed_scenario(ErrorLaw::skew_normal, 2);
    const auto asym = timed_scenario(ErrorLaw::asymmetric_mixture, 3);
    const auto bimodal = timed_scenario(ErrorLaw::symmetric_bimodal, 4);
    criterion6(asym, bimodal, skew);

    ScenarioResult power;
    criterion7(power);
    criterion8({&gauss, &skew, &asym, &bimodal, &power}, dataset_effects);
    criterion9(gauss);
  } catch (const std::exception& e) {
    std::printf("acceptance aborted: %s\n", e.what());
    return 100;
  }
  std::printf("%d criteria failed\n", failures);
  return failures;
}
