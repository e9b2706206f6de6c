#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "rfis/estimators.hpp"
#include "rfis/variance.hpp"

namespace rfis {

/// Flat key = value experiment configuration. Every key has a documented
/// default; setting an unknown key is a config error.
class Config {
 public:
  Config();

  /// Parses `key = value` lines ('#' starts a comment) on top of the current values.
  void merge_text(std::string_view text, std::string_view origin);
  void merge_file(const std::string& path);
  void set(std::string_view key, std::string_view value, std::string_view origin = "api");
  /// "key=value", as passed to --set.
  void apply_assignment(std::string_view assignment);

  const std::string& get(std::string_view key) const;
  double get_double(std::string_view key) const;
  std::uint64_t get_u64(std::string_view key) const;
  /// Positive integer.
  std::size_t get_count(std::string_view key) const;
  std::vector<double> get_list(std::string_view key) const;
  std::vector<std::string> get_words(std::string_view key) const;

  const std::map<std::string, std::string, std::less<>>& entries() const noexcept { return values_; }
  static const std::map<std::string, std::string, std::less<>>& defaults();

 private:
  [[noreturn]] void bad_value(std::string_view key, const std::string& why) const;

  std::map<std::string, std::string, std::less<>> values_;
  std::map<std::string, std::string, std::less<>> origins_;
};

enum class DataKind { gaussian_blob, uniform_cube, point_mass, csv };

struct DataSpec {
  DataKind kind = DataKind::gaussian_blob;
  std::size_t n = 1;
  std::size_t d = 1;
  std::vector<double> mean{0.0};      // gaussian_blob / uniform_cube centre (scalar broadcasts)
  double sd = 1.0;                    // gaussian_blob
  double clip = 0.0;                  // gaussian_blob: redraw points with |x - mean| > clip (0 disables)
  double half_width = 1.0;            // uniform_cube
  std::vector<double> point{0.0};     // point_mass
  std::string path;                   // csv
};

DataKind parse_data_kind(std::string_view name);
Dataset generate_dataset(const DataSpec& spec, RandomSource& source);

/// CSV with header x1,...,xd and 17 significant digits per value, LF line endings.
std::string dataset_to_csv(const Dataset& data);
void write_dataset_csv(const std::string& path, const Dataset& data);
Dataset parse_dataset_csv(std::string_view text, std::string_view origin);
Dataset read_dataset_csv(const std::string& path);

/// Resolved, validated inputs shared by all experiment commands.
struct ExperimentSetup {
  KernelSpec kernel{KernelKind::gaussian};
  std::vector<FeatureRepresentation> reps;
  SamplerStrategy strategy = SamplerStrategy::grid_oracle;
  Dataset d1{1, {0.0}};
  Dataset d2{1, {0.0}};
  bool same_marginals = true;
  std::size_t k = 0, n_pairs = 0, n_omega = 0, pool_size = 0, check_pairs = 0;
  GridSpec grid;
  std::uint64_t seed = 0;
};

ExperimentSetup resolve_setup(const Config& config);

inline constexpr const char* kReportSchema = "rfis-report/1";

struct ReportDocument {
  nlohmann::ordered_json json;
  bool pass = false;
  std::string dump() const { return json.dump(2) + "\n"; }
};

/// Runs one representation/sampler cell: optimal and naive variance rows.
struct CellResult {
  VarianceReport optimal;
  VarianceReport naive;
  Estimate z_hat;
  bool bound_ok = false;
  std::optional<bool> equality_ok;
  std::optional<bool> dominance_ok;
  std::optional<bool> consistency_ok;
};

CellResult run_variance_cell(const ExperimentSetup& setup, const FeatureRepresentation& rep);

ReportDocument check_rep(const Config& config);
ReportDocument variance_report(const Config& config);
ReportDocument compare_reps(const Config& config);
/// CSV table, one row per axis value.
std::string sweep(const Config& config);
/// Generates data1 as CSV text.
std::string gen_data(const Config& config);

}  // namespace rfis
