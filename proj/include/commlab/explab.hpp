#pragma once

// Experiment harness: symbol generators, two-sided commutator / BMO ratio
// studies, shift-bound studies and their reports.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "commlab/commutator.hpp"
#include "commlab/dyadic.hpp"
#include "commlab/lattice.hpp"

namespace commlab {

inline constexpr const char* kReportVersion = "commlab-report/1";

struct SymbolConfig {
  std::string kind = "random-haar";  // random-haar | separable | frozen-variable | file
  std::uint64_t seed = 1;
  double decay = 0.5;  // alpha in 2^{-alpha * sum of levels}
  double scale = 1.0;
  std::size_t param = 1;  // separable: 0-based variable the symbol depends on
  bool constant = false;  // separable: beta constant
  std::vector<std::size_t> frozen;  // frozen-variable: 0-based frozen parameters
  std::size_t slice = 0;            // frozen-variable: local point carrying the oscillation
  std::string path;                 // file
};

struct ExperimentConfig {
  GridSpec grid;
  PartitionSpec partition;
  /// Operator tuples; each entry lists one operator per partition block,
  /// separated by '|'. "auto:riesz" and "auto:journe" expand to families.
  std::vector<std::string> family;
  SymbolConfig symbol;
  int samples = 50;
  NormMethod method = NormMethod::kPower;
  double tol = 1e-6;
  int max_iter = 500;
  std::uint64_t norm_seed = 0;
  int budget = kDefaultOpenSetBudget;
  int journe_degree = 21;
  std::vector<std::array<int, 4>> complexities;  // shift-bound; empty: all up to max_complexity
  int max_complexity = 3;
  std::string output;

  /// Flat "key = value" lines; '#' starts a comment. Keys are documented in
  /// docs/explab-config.md. Repeated `family` keys accumulate.
  static ExperimentConfig parse(const std::string& text);
  static ExperimentConfig load(const std::string& path);
  nlohmann::json to_json() const;
};

/// Symbol for sample `index` (seed derived from symbol.seed and index).
Field gen_symbol(const ExperimentConfig& config, std::size_t index = 0);

/// Random-haar symbol: c_R = scale |R|^{1/2} 2^{-alpha sum_k level_k} z_R with
/// z_R complex Gaussian, over fully cancellative coefficients of `params`.
Field random_haar_symbol(const GridSpec& grid, const std::vector<std::size_t>& params, double decay,
                         double scale, std::uint64_t seed);

/// Expands the family strings into operator tuples.
std::vector<std::vector<LinearOperator>> build_family(const ExperimentConfig& config);

struct RatioRow {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  double bmo = 0.0;
  double commutator = 0.0;
  double weight = 1.0;  // ratio = commutator / (weight * bmo)
  double ratio = 0.0;
  bool flagged = false;
  std::string detail;
};

struct RatioSummary {
  std::size_t rows = 0, used = 0;
  double min = 0.0, max = 0.0, median = 0.0, band = 0.0;
};

struct RatioReport {
  std::string kind;
  nlohmann::json config;
  std::vector<RatioRow> rows;
  RatioSummary summary;
  nlohmann::json environment;

  bool flagged_only() const { return summary.used == 0; }
  nlohmann::json to_json() const;
  static RatioReport from_json(const nlohmann::json& j);
  std::string to_csv() const;
  std::string to_markdown() const;
};

/// Rows with bmo <= kFlagThreshold are flagged and left out of the summary.
inline constexpr double kFlagThreshold = 1e-9;

RatioSummary summarize(const std::vector<RatioRow>& rows);

/// Per symbol: little product BMO norm for the partition and the sup over
/// the family of iterated commutator norms.
RatioReport run_two_sided(const ExperimentConfig& config);

/// Per sample (b, f, S): |[b,S]f| / ((1+max(i1,j1))(1+max(i2,j2)) little_bmo(b) |f|).
RatioReport run_shift_bound(const ExperimentConfig& config);

}  // namespace commlab
