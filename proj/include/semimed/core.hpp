#pragma once

// Data ingestion, model specification and design-matrix construction.

#include <Eigen/Dense>

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace semimed {

// Error hierarchy. The CLI maps these onto exit codes.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Malformed input, unknown columns, invalid specifications.
struct DataError : Error {
  using Error::Error;
};
struct IoError : Error {
  using Error::Error;
};
struct RankDeficientError : DataError {
  using DataError::DataError;
};
// A numerical procedure could not produce a usable result.
struct NumericalError : Error {
  using Error::Error;
};

class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<std::string> names, std::vector<Eigen::VectorXd> columns);

  std::size_t rows() const { return n_; }
  std::size_t cols() const { return columns_.size(); }
  const std::vector<std::string>& column_names() const { return names_; }
  bool has_column(const std::string& name) const;
  const Eigen::VectorXd& column(const std::string& name) const;
  const Eigen::VectorXd& column(std::size_t j) const { return columns_.at(j); }

  // Replace a column's values (used for outcome rescaling).
  void set_column(const std::string& name, Eigen::VectorXd values);

  // Rows removed by load_csv because a kept cell was missing or unparseable.
  std::size_t rows_dropped = 0;

 private:
  std::vector<std::string> names_;
  std::vector<Eigen::VectorXd> columns_;
  std::size_t n_ = 0;
};

// Reads a comma-separated file with a header row. When `keep` is non-empty only
// those columns are parsed and returned (in `keep` order); otherwise every
// column is. Rows with a missing ("", "NA") or non-numeric cell in a kept column
// are dropped and counted in Dataset::rows_dropped.
Dataset load_csv(const std::filesystem::path& path,
                 const std::vector<std::string>& keep = {});

struct ModelSpec {
  std::string response;
  std::string treatment;
  std::optional<std::string> mediator;
  std::vector<std::string> covariates;
  bool interaction = false;

  // Throws DataError when the spec does not fit the dataset.
  void validate(const Dataset& data) const;
};

enum class ColumnRole { intercept, treatment, mediator, interaction, covariate };

const char* to_string(ColumnRole role);

struct DesignMatrix {
  Eigen::MatrixXd values;
  std::vector<ColumnRole> column_roles;
  std::vector<std::string> column_names;

  std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t p() const { return static_cast<std::size_t>(values.cols()); }
};

// Relative singular-value threshold used for the rank check.
inline constexpr double kRankTolerance = 1e-10;

// Columns: [intercept, treatment, mediator?, treatment*mediator?, covariates...].
DesignMatrix build_design(const Dataset& data, const ModelSpec& spec);

}  // namespace semimed
