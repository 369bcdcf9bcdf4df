#pragma once

#include <string>

#include "courtphase/analysis.hpp"

namespace courtphase {

// Static SVG renderings of a PhaseReport. Output is deterministic for a given report.

/// Scatter of one cluster's 2-D MDS map; `extent` is the half-width of both axes.
std::string render_mds_svg(const MdsEmbedding& embedding, std::span<const PlayerId> players,
                           ClusterId cluster, double extent);

/// Bars of (cluster mean - global mean) per player pair.
std::string render_profile_svg(const std::vector<double>& deviations,
                               std::span<const PlayerPair> pairs, ClusterId cluster, double extent);

/// k x k heatmap of switch probabilities with counts printed in each cell.
std::string render_transition_svg(const TransitionMatrix& transitions);

}  // namespace courtphase
