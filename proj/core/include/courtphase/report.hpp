#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "courtphase/analysis.hpp"
#include "courtphase/clustering.hpp"
#include "courtphase/io.hpp"
#include "courtphase/pipeline.hpp"

namespace courtphase {

/// Model facts carried into the report, as stored in model.txt.
struct ModelFacts {
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::size_t restarts = 0;
  std::size_t iterations = 0;
  Deviances deviance;

  static ModelFacts from(const ClusterModel& model);
};

/// Serializes the report as a JSON document (stable key order, full-precision numbers).
std::string render_report_json(const PhaseReport& report, const ModelFacts& model,
                               const std::optional<SelectionTable>& selection,
                               const AnalysisSettings& settings);

/// Writes summaries.csv, transitions.csv, mds_<c>.csv, optional plots/*.svg and finally
/// report.json into `dir`, each through write-then-rename.
void write_report_bundle(const std::filesystem::path& dir, const PhaseReport& report,
                         const ModelFacts& model, const std::optional<SelectionTable>& selection,
                         const AnalysisSettings& settings, bool plots);

}  // namespace courtphase
