#include "semimed/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

namespace semimed {

using nlohmann::json;

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

namespace {

json metadata_json(const ReportMetadata& meta) {
  json j;
  j["command"] = meta.command;
  j["version"] = meta.version;
  j["seed"] = meta.seed ? json(*meta.seed) : json(nullptr);
  j["timestamp"] = meta.timestamp;
  if (meta.data_path) j["data"] = *meta.data_path;
  j["rows_used"] = meta.rows_used;
  j["rows_dropped"] = meta.rows_dropped;
  return j;
}

json attempts_json(const std::vector<StartAttempt>& attempts) {
  json arr = json::array();
  for (const auto& a : attempts) {
    arr.push_back({{"start", a.index},
                   {"converged", a.converged},
                   {"iterations", a.iterations},
                   {"residual_norm", a.residual_norm},
                   {"rcond", a.rcond},
                   {"outcome", a.outcome}});
  }
  return arr;
}

json fit_json(const RegressionFit& fit, const std::vector<StartAttempt>& attempts) {
  json j;
  j["coefficients"] = json::object();
  const auto& names = fit.design->column_names;
  const Eigen::VectorXd se = fit.standard_errors();
  for (std::size_t c = 0; c < names.size(); ++c) {
    const auto k = static_cast<Eigen::Index>(c);
    j["coefficients"][names[c]] = {{"estimate", fit.params.beta[k]}, {"se", se[k]}};
  }
  j["sigma2"] = fit.params.sigma2;
  j["iterations"] = fit.diagnostics.iterations;
  j["start_index"] = fit.diagnostics.start_index_used;
  j["rcond"] = fit.diagnostics.rcond;
  j["residual_norm"] = fit.diagnostics.residual_norm;
  j["pseudo_inverse_used"] = fit.diagnostics.pseudo_inverse_used;
  j["screened"] = fit.diagnostics.screened_reasons;
  if (!attempts.empty()) j["attempts"] = attempts_json(attempts);
  return j;
}

}  // namespace

json effects_json(const EffectEstimates& effects) {
  json arr = json::array();
  for (std::size_t e = 0; e < effects.names.size(); ++e) {
    const auto k = static_cast<Eigen::Index>(e);
    arr.push_back({{"effect", effects.names[e]},
                   {"estimate", effects.values[k]},
                   {"se", effects.se[k]},
                   {"ci_lower", effects.ci_lower[k]},
                   {"ci_upper", effects.ci_upper[k]},
                   {"length", effects.ci_upper[k] - effects.ci_lower[k]}});
  }
  return arr;
}

json mediation_report(const MediationResult& result, const MediationRequest& request,
                      const ReportMetadata& meta, const std::vector<std::string>& warnings) {
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["metadata"] = metadata_json(meta);
  j["model"] = {{"treatment", request.treatment},
                {"mediator", request.mediator},
                {"outcome", request.outcome},
                {"covariates", request.covariates},
                {"interaction", request.interaction},
                {"n", result.n}};
  j["methods"] = json::array();
  std::vector<std::string> all_warnings = warnings;
  for (const auto& m : result.methods) {
    json mj;
    mj["method"] = to_string(m.method);
    mj["numerical_failure"] = m.numerical_failure;
    mj["failed_models"] = m.failed_models;
    mj["effects"] = m.effects ? effects_json(*m.effects) : json::array();
    mj["interaction_p_value"] = m.interaction_p_value ? json(*m.interaction_p_value) : json(nullptr);
    json diag = json::object();
    if (m.mediator_fit) diag["mediator"] = fit_json(*m.mediator_fit, m.mediator_attempts);
    else if (!m.mediator_attempts.empty()) diag["mediator"] = {{"attempts", attempts_json(m.mediator_attempts)}};
    if (m.outcome_fit) diag["outcome"] = fit_json(*m.outcome_fit, m.outcome_attempts);
    else if (!m.outcome_attempts.empty()) diag["outcome"] = {{"attempts", attempts_json(m.outcome_attempts)}};
    mj["diagnostics"] = diag;
    if (m.numerical_failure) {
      std::string w = std::string(to_string(m.method)) + ": numerical failure in";
      for (const auto& f : m.failed_models) w += " " + f;
      all_warnings.push_back(w);
    }
    j["methods"].push_back(mj);
  }
  j["warnings"] = all_warnings;
  return j;
}

json power_report(const PowerReport& report, const ReportMetadata& meta) {
  const auto& c = report.config;
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["metadata"] = metadata_json(meta);
  j["design"] = {{"n", c.n},
                 {"reps", c.reps},
                 {"error_law", scenario_name(c.error.law)},
                 {"alpha2", c.dgp.alpha2},
                 {"beta2", c.dgp.beta2},
                 {"beta3", c.dgp.beta3},
                 {"gamma", c.dgp.gamma},
                 {"eta", c.dgp.eta}};
  j["truth"] = {{"ACME(0)", report.truth_acme0}};
  j["methods"] = json::array();
  for (const auto& m : report.methods) {
    j["methods"].push_back({{"method", m.method},
                            {"rejection_rate", m.rejection_rate},
                            {"mean_estimate", m.mean_estimate},
                            {"avg_length", m.avg_length},
                            {"success_rate", m.success_rate},
                            {"reps_used", m.reps_used}});
  }
  j["published_reference"] = {
      {"note", "published values for this design; the error mixture there is not fully specified"},
      {"ols", {{"rejection_rate", PowerReference::ols_power}, {"avg_length", PowerReference::ols_avg_length}}},
      {"semiparametric",
       {{"rejection_rate", PowerReference::semiparametric_power},
        {"avg_length", PowerReference::semiparametric_avg_length}}}};
  j["warnings"] = report.warnings;
  return j;
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

}  // namespace

std::string forest_svg(const std::vector<ForestSeries>& series) {
  if (series.empty()) throw DataError("forest plot needs at least one method");
  const auto& names = series.front().effects.names;
  for (const auto& s : series) {
    if (s.effects.names != names) throw DataError("forest plot series have different effects");
  }

  double lo = 0.0, hi = 0.0;
  for (const auto& s : series) {
    for (Eigen::Index k = 0; k < s.effects.values.size(); ++k) {
      for (double v : {s.effects.ci_lower[k], s.effects.ci_upper[k], s.effects.values[k]}) {
        if (std::isfinite(v)) {
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
      }
    }
  }
  const double pad = 0.05 * std::max(hi - lo, 1e-6);
  lo -= pad;
  hi += pad;

  const double left = 110.0, right = 30.0, top = 30.0, plot_w = 420.0;
  const double row_h = 40.0, bottom = 50.0;
  const double width = left + plot_w + right;
  const double height = top + row_h * static_cast<double>(names.size()) + bottom;
  auto xpos = [&](double v) { return left + (v - lo) / (hi - lo) * plot_w; };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width) << "\" height=\""
      << fmt(height) << "\" viewBox=\"0 0 " << fmt(width) << ' ' << fmt(height) << "\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << fmt(width) << "\" height=\"" << fmt(height)
      << "\" fill=\"white\"/>\n";

  const double axis_y = top + row_h * static_cast<double>(names.size());
  svg << "<line class=\"zero-line\" x1=\"" << fmt(xpos(0.0)) << "\" y1=\"" << fmt(top - 10.0)
      << "\" x2=\"" << fmt(xpos(0.0)) << "\" y2=\"" << fmt(axis_y) << "\" stroke=\"#808080\" stroke-width=\"1\"/>\n";
  svg << "<line class=\"axis\" x1=\"" << fmt(left) << "\" y1=\"" << fmt(axis_y) << "\" x2=\""
      << fmt(left + plot_w) << "\" y2=\"" << fmt(axis_y) << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double v = lo + (hi - lo) * t / 4.0;
    svg << "<text x=\"" << fmt(xpos(v)) << "\" y=\"" << fmt(axis_y + 18.0)
        << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">" << fmt(v) << "</text>\n";
  }

  const double n_series = static_cast<double>(series.size());
  for (std::size_t e = 0; e < names.size(); ++e) {
    const double row_mid = top + row_h * (static_cast<double>(e) + 0.5);
    svg << "<text x=\"" << fmt(left - 10.0) << "\" y=\"" << fmt(row_mid + 4.0)
        << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">" << escape_xml(names[e])
        << "</text>\n";
    for (std::size_t s = 0; s < series.size(); ++s) {
      const auto& est = series[s].effects;
      const auto k = static_cast<Eigen::Index>(e);
      const bool semi = series[s].method == Method::semiparametric;
      const double y = row_mid + (static_cast<double>(s) - (n_series - 1.0) / 2.0) * 12.0;
      svg << "<g class=\"marker\" data-method=\"" << to_string(series[s].method) << "\" data-effect=\""
          << escape_xml(names[e]) << "\">";
      if (std::isfinite(est.ci_lower[k]) && std::isfinite(est.ci_upper[k])) {
        svg << "<line x1=\"" << fmt(xpos(est.ci_lower[k])) << "\" y1=\"" << fmt(y) << "\" x2=\""
            << fmt(xpos(est.ci_upper[k])) << "\" y2=\"" << fmt(y)
            << "\" stroke=\"black\" stroke-width=\"1.5\"";
        if (semi) svg << " stroke-dasharray=\"5,3\"";
        svg << "/>";
      }
      if (std::isfinite(est.values[k])) {
        svg << "<circle cx=\"" << fmt(xpos(est.values[k])) << "\" cy=\"" << fmt(y)
            << "\" r=\"4\" stroke=\"black\" stroke-width=\"1.5\" fill=\"" << (semi ? "black" : "white")
            << "\"/>";
      }
      svg << "</g>\n";
    }
  }

  // legend
  double lx = left;
  const double ly = height - 12.0;
  for (const auto& s : series) {
    const bool semi = s.method == Method::semiparametric;
    svg << "<line x1=\"" << fmt(lx) << "\" y1=\"" << fmt(ly) << "\" x2=\"" << fmt(lx + 24.0) << "\" y2=\""
        << fmt(ly) << "\" stroke=\"black\" stroke-width=\"1.5\"" << (semi ? " stroke-dasharray=\"5,3\"" : "")
        << "/><circle cx=\"" << fmt(lx + 12.0) << "\" cy=\"" << fmt(ly) << "\" r=\"4\" stroke=\"black\" fill=\""
        << (semi ? "black" : "white") << "\"/><text x=\"" << fmt(lx + 30.0) << "\" y=\"" << fmt(ly + 4.0)
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << (semi ? "semiparametric" : "OLS")
        << "</text>\n";
    lx += 140.0;
  }
  svg << "</svg>\n";
  return svg.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << content;
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace semimed
