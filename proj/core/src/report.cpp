#include "courtphase/report.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "courtphase/plots.hpp"

namespace courtphase {

using Json = nlohmann::ordered_json;

ModelFacts ModelFacts::from(const ClusterModel& model) {
  ModelFacts f;
  f.k = model.k;
  f.seed = model.seed;
  f.restarts = model.restarts;
  f.iterations = model.iterations;
  f.deviance = model.deviance;
  return f;
}

namespace {

Json settings_json(const AnalysisSettings& s) {
  Json j;
  j["roster"] = s.roster;
  j["court"] = {{"length", s.court.length}, {"width", s.court.width}};
  j["grid_ms"] = s.grid_step;
  j["kalman"] = {{"enabled", s.kalman_enabled},
                 {"process_noise_accel", s.kalman.process_noise_accel},
                 {"measurement_noise", s.kalman.measurement_noise},
                 {"initial_velocity_variance", s.kalman.initial_velocity_variance}};
  Json c;
  if (s.fixed_k) c["k"] = *s.fixed_k;
  if (s.k_range) c["k_range"] = {s.k_range->first, s.k_range->second};
  c["seed"] = s.seed;
  c["restarts"] = s.restarts;
  c["max_iter"] = s.max_iter;
  c["tol"] = s.tol;
  c["min_ratio"] = s.min_ratio;
  c["min_gain"] = s.min_gain;
  c["standardize"] = s.standardize;
  j["clustering"] = c;
  return j;
}

Json matrix_rows(std::span<const double> values, std::size_t rows, std::size_t cols) {
  Json out = Json::array();
  for (std::size_t r = 0; r < rows; ++r) {
    out.push_back(std::vector<double>(values.begin() + static_cast<std::ptrdiff_t>(r * cols),
                                      values.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols)));
  }
  return out;
}

}  // namespace

std::string render_report_json(const PhaseReport& report, const ModelFacts& model,
                               const std::optional<SelectionTable>& selection,
                               const AnalysisSettings& settings) {
  Json doc;
  doc["format"] = "courtphase-report/1";
  doc["settings"] = settings_json(settings);
  doc["instants"] = report.instants;
  doc["players"] = report.players;
  Json pairs = Json::array();
  for (const PlayerPair& p : report.pairs) pairs.push_back(std::to_string(p.first) + "-" + std::to_string(p.second));
  doc["pairs"] = pairs;
  doc["model"] = {{"k", model.k},
                  {"seed", model.seed},
                  {"restarts", model.restarts},
                  {"iterations", model.iterations},
                  {"within_deviance", model.deviance.within},
                  {"between_deviance", model.deviance.between},
                  {"total_deviance", model.deviance.total},
                  {"bd_td_ratio", model.deviance.ratio()}};
  if (selection) {
    Json candidates = Json::array();
    for (const KCandidate& c : selection->candidates) candidates.push_back({{"k", c.k}, {"bd_td_ratio", c.ratio}});
    doc["selection"] = {{"candidates", candidates},
                        {"chosen_k", selection->chosen_k},
                        {"fallback", selection->fallback},
                        {"min_ratio", settings.min_ratio},
                        {"min_gain", settings.min_gain}};
  }
  doc["global_mean_distances"] = report.global_mean_distances;

  Json clusters = Json::array();
  for (std::size_t j = 0; j < report.summaries.size(); ++j) {
    const ClusterSummary& s = report.summaries[j];
    const MdsEmbedding& e = report.embeddings[j];
    Json c;
    c["cluster"] = s.cluster;
    c["name"] = "C" + std::to_string(s.cluster + 1);
    c["count"] = s.count;
    c["share"] = s.share;
    c["offense_share"] = s.offense_share ? Json(*s.offense_share) : Json(nullptr);
    c["mean_distances"] = s.mean_distances;
    c["profile_deviations"] = report.profiles[j];
    c["mds"] = {{"coordinates", matrix_rows(e.coordinates, e.points, e.dim)},
                {"eigenvalues", e.eigenvalues},
                {"stress_abs", e.stress_abs},
                {"non_euclidean", e.non_euclidean}};
    clusters.push_back(c);
  }
  doc["clusters"] = clusters;

  const TransitionMatrix& tm = report.transitions;
  Json counts = Json::array();
  for (std::size_t a = 0; a < tm.k; ++a) {
    counts.push_back(std::vector<std::uint64_t>(tm.counts.begin() + static_cast<std::ptrdiff_t>(a * tm.k),
                                                tm.counts.begin() + static_cast<std::ptrdiff_t>((a + 1) * tm.k)));
  }
  std::vector<bool> active;
  for (std::uint8_t r : tm.row_active) active.push_back(r != 0);
  doc["transitions"] = {{"total", tm.total},
                        {"counts", counts},
                        {"probabilities", matrix_rows(tm.probabilities, tm.k, tm.k)},
                        {"row_active", active}};
  return doc.dump(2) + "\n";
}

void write_report_bundle(const std::filesystem::path& dir, const PhaseReport& report,
                         const ModelFacts& model, const std::optional<SelectionTable>& selection,
                         const AnalysisSettings& settings, bool plots) {
  std::filesystem::create_directories(dir);
  {
    std::ostringstream out;
    write_summaries_csv(out, report);
    write_file_atomic(dir / files::kSummaries, out.str());
  }
  {
    std::ostringstream out;
    write_transitions_csv(out, report.transitions);
    write_file_atomic(dir / files::kTransitions, out.str());
  }
  for (std::size_t j = 0; j < report.embeddings.size(); ++j) {
    std::ostringstream out;
    write_mds_csv(out, report.embeddings[j], report.players);
    write_file_atomic(dir / ("mds_" + std::to_string(j) + ".csv"), out.str());
  }
  if (plots) {
    const std::filesystem::path plot_dir = dir / "plots";
    std::filesystem::create_directories(plot_dir);
    double mds_extent = 0.0;
    for (const MdsEmbedding& e : report.embeddings) {
      for (double v : e.coordinates) mds_extent = std::max(mds_extent, std::abs(v));
    }
    double profile_extent = 0.0;
    for (const auto& p : report.profiles) {
      for (double v : p) profile_extent = std::max(profile_extent, std::abs(v));
    }
    for (std::size_t j = 0; j < report.embeddings.size(); ++j) {
      const auto id = static_cast<ClusterId>(j);
      write_file_atomic(plot_dir / ("mds_" + std::to_string(j) + ".svg"),
                        render_mds_svg(report.embeddings[j], report.players, id, mds_extent * 1.15));
      write_file_atomic(plot_dir / ("profile_" + std::to_string(j) + ".svg"),
                        render_profile_svg(report.profiles[j], report.pairs, id, profile_extent * 1.1));
    }
    write_file_atomic(plot_dir / "transitions.svg", render_transition_svg(report.transitions));
  }
  write_file_atomic(dir / files::kReport, render_report_json(report, model, selection, settings));
}

}  // namespace courtphase
