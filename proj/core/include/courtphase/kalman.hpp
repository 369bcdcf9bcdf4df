#pragma once

#include <array>
#include <span>
#include <vector>

#include "courtphase/common.hpp"
#include "courtphase/ingest.hpp"

namespace courtphase {

/// Noise model of the 1-D constant-velocity filter.
///
/// Process noise is piecewise-constant white acceleration:
///   Q = q * [[dt^4/4, dt^3/2], [dt^3/2, dt^2]]
struct KalmanParams {
  double process_noise_accel = 1.0;        // m^2/s^4
  double measurement_noise = 0.04;         // m^2
  double initial_velocity_variance = 10.0; // m^2/s^2
  double dt = 0.001;                       // s

  /// Throws ConfigError on negative variances or non-positive dt.
  void validate() const;

  /// Same noise settings with dt taken from a grid step in milliseconds.
  KalmanParams with_grid_step(TimestampMs step_ms) const;
};

/// Position/velocity estimate and its 2x2 covariance (row-major).
struct FilterState {
  std::array<double, 2> state{0.0, 0.0};
  std::array<double, 4> covariance{0.0, 0.0, 0.0, 0.0};
};

/// Causal constant-velocity Kalman filter over one coordinate axis.
class AxisFilter {
 public:
  explicit AxisFilter(const KalmanParams& params);

  /// Feeds one measurement and returns the filtered position. The first call initializes the
  /// state at the measurement with zero velocity and returns it unchanged.
  double step(double measurement);

  bool initialized() const { return initialized_; }
  const FilterState& state() const { return state_; }
  /// Gain used by the last update, (position, velocity).
  const std::array<double, 2>& gain() const { return gain_; }

 private:
  KalmanParams params_;
  FilterState state_;
  std::array<double, 2> gain_{0.0, 0.0};
  bool initialized_ = false;
};

/// Filters one series. Throws InputError naming the index of a non-finite value.
std::vector<double> filter_axis(std::span<const double> series, const KalmanParams& params);

/// Filters every player's x and y series independently; dt comes from the grid step.
FrameSeries filter_frames(const FrameSeries& frames, const KalmanParams& params);

/// Per-player x/y filters for streaming frame pipelines.
class FrameFilter {
 public:
  FrameFilter(std::size_t players, const KalmanParams& params);
  /// Replaces positions with their filtered values.
  void apply(std::span<Point> positions);

 private:
  std::vector<AxisFilter> x_;
  std::vector<AxisFilter> y_;
};

/// Closed-form steady-state alpha-beta gains for the same noise model.
struct AlphaBetaGains {
  double alpha = 0.0;  // position gain
  double beta = 0.0;   // velocity gain times dt
};
AlphaBetaGains steady_state_gains(const KalmanParams& params);

}  // namespace courtphase
