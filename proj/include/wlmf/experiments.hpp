#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace wlmf::experiments {

inline constexpr const char* kLibraryVersion = "1.0.0";

/// Parameters of one CLI run. Unset grids and counts take the per-experiment
/// defaults in `with_defaults`.
struct ExperimentSpec {
  std::string experiment;  // gain-bias | gain-surface | mf-demo | cnn-train | design-sequence
  std::vector<double> rho_u;
  std::vector<int> filter_len;
  int signal_len = 0;
  int trials = 0;
  std::uint64_t seed = 1;
  std::string mode;  // analytic | empirical (SL | WL filter for cnn-train is not selectable: both run)
  std::string out_dir = ".";
  int threads = 1;
  int noise_len = 2000;     // per-trial noise record for empirical covariance estimates
  double noise_std = 0.3;   // mf-demo observation noise (complex std)
  double learning_rate = 0.05;
  int epochs = 10;
  int realizations = 200;

  /// Fills in defaults for the selected experiment and validates everything.
  ExperimentSpec with_defaults() const;
  nlohmann::json to_json() const;
};

struct ExperimentResult {
  std::string csv_name;  // empty when the experiment emits no CSV
  std::string csv;
  std::string json_name;
  nlohmann::json summary;
};

ExperimentResult run_gain_bias(const ExperimentSpec& spec);
ExperimentResult run_gain_surface(const ExperimentSpec& spec);
ExperimentResult run_mf_demo(const ExperimentSpec& spec);
ExperimentResult run_cnn_train(const ExperimentSpec& spec);
ExperimentResult run_design_sequence(const ExperimentSpec& spec);

/// Dispatches on spec.experiment (after applying defaults).
ExperimentResult run(const ExperimentSpec& spec);

/// Writes the CSV / JSON files and a `<experiment>.manifest.json` into
/// spec.out_dir; returns the manifest.
nlohmann::json write_outputs(const ExperimentSpec& spec, const ExperimentResult& result,
                             const std::string& started_at);

std::string sha256_hex(const std::string& data);
std::string utc_timestamp();

/// Minimal reader for the CSVs above: header + rows of cells.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;
};
CsvTable parse_csv(const std::string& text);

}  // namespace wlmf::experiments
