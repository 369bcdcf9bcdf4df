#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "courtphase/analysis.hpp"
#include "courtphase/clustering.hpp"
#include "courtphase/features.hpp"
#include "courtphase/ingest.hpp"
#include "courtphase/kalman.hpp"
#include "courtphase/synth.hpp"

namespace courtphase {

/// Everything that shapes the numerical result (echoed into report.json).
struct AnalysisSettings {
  std::vector<PlayerId> roster;
  Court court;
  TimestampMs grid_step = 1;
  bool kalman_enabled = true;
  KalmanParams kalman;
  std::optional<std::size_t> fixed_k;
  std::optional<std::pair<std::size_t, std::size_t>> k_range;
  std::uint64_t seed = 0;
  std::size_t restarts = 10;
  std::size_t max_iter = 300;
  double tol = 1e-8;
  double min_ratio = 0.5;
  double min_gain = 0.03;
  bool standardize = false;
};

struct PipelineConfig {
  std::filesystem::path input;
  RecordFormat format;
  MatchTimeline timeline;
  AnalysisSettings settings;
  std::filesystem::path out_dir = "out";
  bool plots = true;
  bool quiet = false;

  /// Throws ConfigError describing the first problem found.
  void validate() const;
};

/// Loads a YAML pipeline config. Relative input paths resolve against the file's directory.
PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig parse_config(const std::string& yaml, const std::filesystem::path& base_dir = {});

/// Renders a config back to YAML (paths as given).
std::string config_to_yaml(const PipelineConfig& config);

/// Loads a YAML scenario. `preset: eight_formations` builds formations and schedule.
Scenario load_scenario(const std::filesystem::path& path);
Scenario parse_scenario(const std::string& yaml);

/// An error raised inside a named pipeline stage.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& message)
      : Error(stage + ": " + message), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

/// Output file names inside the output directory.
namespace files {
inline constexpr const char* kFrames = "frames.csv";
inline constexpr const char* kFiltered = "filtered.csv";
inline constexpr const char* kFeatures = "features.csv";
inline constexpr const char* kLabels = "labels.csv";
inline constexpr const char* kModel = "model.txt";
inline constexpr const char* kSelection = "selection.csv";
inline constexpr const char* kSummaries = "summaries.csv";
inline constexpr const char* kTransitions = "transitions.csv";
inline constexpr const char* kReport = "report.json";
}  // namespace files

struct IngestSummary {
  ParseDiagnostics diagnostics;
  std::size_t retained_samples = 0;
  std::size_t frames = 0;
  std::size_t segments = 0;
};

// Staged execution. Each stage reads the previous stage's export from config.out_dir.

/// parse + clip + roster + regularize, streamed straight to frames.csv.
IngestSummary run_ingest_stage(const PipelineConfig& config);
/// frames.csv -> filtered.csv (streaming). No-op when Kalman filtering is disabled.
void run_filter_stage(const PipelineConfig& config);
/// filtered.csv (or frames.csv) -> features.csv (streaming).
std::size_t run_features_stage(const PipelineConfig& config);
/// features.csv -> labels.csv, model.txt, and selection.csv when a k range is configured.
ClusterModel run_fit_stage(const PipelineConfig& config);
/// features/labels/model/frames -> summaries, transitions, MDS tables, plots, report.json.
PhaseReport run_report_stage(const PipelineConfig& config);

struct PipelineResult {
  IngestSummary ingest;
  FeatureMatrix features;
  ClusterModel model;
  std::optional<KSelection> selection;
  std::vector<Side> sides;
  PhaseReport report;
};

/// All stages in memory, writing every export. Stage failures surface as StageError and leave
/// no report.json behind.
PipelineResult run_pipeline(const PipelineConfig& config);

/// Name of the frames file consumed by the features and report stages.
const char* analysis_frames_file(const AnalysisSettings& settings);

}  // namespace courtphase
