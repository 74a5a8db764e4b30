#include "semimed/core.hpp"

#include "semimed/linalg.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace semimed {

Dataset::Dataset(std::vector<std::string> names, std::vector<Eigen::VectorXd> columns)
    : names_(std::move(names)), columns_(std::move(columns)) {
  if (names_.size() != columns_.size()) {
    throw DataError("dataset: " + std::to_string(names_.size()) + " names for " +
                    std::to_string(columns_.size()) + " columns");
  }
  n_ = columns_.empty() ? 0 : static_cast<std::size_t>(columns_.front().size());
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    if (static_cast<std::size_t>(columns_[j].size()) != n_) {
      throw DataError("dataset: column '" + names_[j] + "' has a different length");
    }
    if (!columns_[j].allFinite()) {
      throw DataError("dataset: column '" + names_[j] + "' contains non-finite values");
    }
  }
  std::unordered_set<std::string> seen;
  for (const auto& name : names_) {
    if (!seen.insert(name).second) throw DataError("dataset: duplicate column '" + name + "'");
  }
}

bool Dataset::has_column(const std::string& name) const {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

const Eigen::VectorXd& Dataset::column(const std::string& name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw DataError("unknown column '" + name + "'");
  return columns_[static_cast<std::size_t>(it - names_.begin())];
}

void Dataset::set_column(const std::string& name, Eigen::VectorXd values) {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw DataError("unknown column '" + name + "'");
  if (static_cast<std::size_t>(values.size()) != n_ || !values.allFinite()) {
    throw DataError("set_column: bad replacement for '" + name + "'");
  }
  columns_[static_cast<std::size_t>(it - names_.begin())] = std::move(values);
}

namespace {

// Minimal RFC 4180 field splitter: handles quoted fields and doubled quotes.
std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::optional<double> parse_cell(const std::string& raw) {
  const std::string cell = trim(raw);
  if (cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan") return std::nullopt;
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  if (*begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end || !std::isfinite(value)) return std::nullopt;
  return value;
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path, const std::vector<std::string>& keep) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");

  std::string line;
  if (!std::getline(in, line)) throw DataError("'" + path.string() + "' is empty");
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // BOM
  std::vector<std::string> header = split_csv_line(line);
  for (auto& h : header) h = trim(h);

  std::vector<std::size_t> selected;
  std::vector<std::string> names;
  if (keep.empty()) {
    for (std::size_t j = 0; j < header.size(); ++j) selected.push_back(j);
    names = header;
  } else {
    for (const auto& k : keep) {
      auto it = std::find(header.begin(), header.end(), k);
      if (it == header.end()) {
        throw DataError("column '" + k + "' not found in '" + path.string() + "'");
      }
      selected.push_back(static_cast<std::size_t>(it - header.begin()));
      names.push_back(k);
    }
  }

  std::vector<std::vector<double>> values(selected.size());
  std::size_t dropped = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw DataError("'" + path.string() + "' line " + std::to_string(line_no) + ": " +
                      std::to_string(fields.size()) + " fields, header has " +
                      std::to_string(header.size()));
    }
    std::vector<double> row;
    row.reserve(selected.size());
    for (std::size_t j : selected) {
      auto v = parse_cell(fields[j]);
      if (!v) break;
      row.push_back(*v);
    }
    if (row.size() != selected.size()) {
      ++dropped;
      continue;
    }
    for (std::size_t j = 0; j < row.size(); ++j) values[j].push_back(row[j]);
  }

  if (values.empty() || values.front().empty()) {
    throw DataError("'" + path.string() + "' has no usable rows (" + std::to_string(dropped) +
                    " dropped)");
  }
  std::vector<Eigen::VectorXd> columns;
  columns.reserve(values.size());
  for (const auto& v : values) {
    columns.emplace_back(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
  }
  Dataset data(std::move(names), std::move(columns));
  data.rows_dropped = dropped;
  return data;
}

void ModelSpec::validate(const Dataset& data) const {
  auto require = [&](const std::string& name, const char* what) {
    if (name.empty()) throw DataError(std::string("model spec: empty ") + what + " name");
    if (!data.has_column(name)) {
      throw DataError(std::string("model spec: ") + what + " column '" + name + "' not found");
    }
  };
  require(response, "response");
  require(treatment, "treatment");
  if (mediator) require(*mediator, "mediator");
  for (const auto& c : covariates) require(c, "covariate");
  if (interaction && !mediator) throw DataError("model spec: interaction needs a mediator");

  std::unordered_set<std::string> regressors{treatment};
  for (const auto& c : covariates) {
    if (!regressors.insert(c).second) throw DataError("model spec: column '" + c + "' repeated");
  }
  if (mediator && regressors.count(*mediator)) {
    throw DataError("model spec: mediator '" + *mediator + "' is also a treatment/covariate");
  }
  if (regressors.count(response) || (mediator && *mediator == response)) {
    throw DataError("model spec: response '" + response + "' is also a regressor");
  }
  const auto& t = data.column(treatment);
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    if (t[i] != 0.0 && t[i] != 1.0) {
      throw DataError("model spec: treatment '" + treatment + "' takes values outside {0,1}");
    }
  }
}

const char* to_string(ColumnRole role) {
  switch (role) {
    case ColumnRole::intercept: return "intercept";
    case ColumnRole::treatment: return "treatment";
    case ColumnRole::mediator: return "mediator";
    case ColumnRole::interaction: return "interaction";
    case ColumnRole::covariate: return "covariate";
  }
  return "?";
}

DesignMatrix build_design(const Dataset& data, const ModelSpec& spec) {
  spec.validate(data);
  const auto n = static_cast<Eigen::Index>(data.rows());

  DesignMatrix d;
  std::vector<Eigen::VectorXd> cols;
  auto add = [&](Eigen::VectorXd v, ColumnRole role, std::string name) {
    cols.push_back(std::move(v));
    d.column_roles.push_back(role);
    d.column_names.push_back(std::move(name));
  };
  add(Eigen::VectorXd::Ones(n), ColumnRole::intercept, "(intercept)");
  const auto& t = data.column(spec.treatment);
  add(t, ColumnRole::treatment, spec.treatment);
  if (spec.mediator) {
    const auto& m = data.column(*spec.mediator);
    add(m, ColumnRole::mediator, *spec.mediator);
    if (spec.interaction) {
      add(t.cwiseProduct(m), ColumnRole::interaction, spec.treatment + ":" + *spec.mediator);
    }
  }
  for (const auto& c : spec.covariates) add(data.column(c), ColumnRole::covariate, c);

  d.values.resize(n, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) d.values.col(static_cast<Eigen::Index>(j)) = cols[j];

  if (n < d.values.cols()) {
    throw RankDeficientError("design has " + std::to_string(n) + " rows for " +
                             std::to_string(d.values.cols()) + " columns");
  }
  const double rc = rcond(d.values);
  if (!(rc > kRankTolerance)) {
    std::ostringstream msg;
    msg << "design matrix is rank deficient (relative singular value " << rc << ")";
    throw RankDeficientError(msg.str());
  }
  return d;
}

}  // namespace semimed
