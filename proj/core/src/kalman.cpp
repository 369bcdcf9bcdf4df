#include "courtphase/kalman.hpp"

#include <cmath>
#include <string>

namespace courtphase {

void KalmanParams::validate() const {
  if (!(process_noise_accel >= 0.0) || !(measurement_noise >= 0.0) ||
      !(initial_velocity_variance >= 0.0)) {
    throw ConfigError("kalman: variances must be non-negative");
  }
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("kalman: dt must be positive");
}

KalmanParams KalmanParams::with_grid_step(TimestampMs step_ms) const {
  KalmanParams out = *this;
  out.dt = static_cast<double>(step_ms) / 1000.0;
  return out;
}

AxisFilter::AxisFilter(const KalmanParams& params) : params_(params) { params_.validate(); }

double AxisFilter::step(double z) {
  if (!initialized_) {
    state_.state = {z, 0.0};
    state_.covariance = {params_.measurement_noise, 0.0, 0.0, params_.initial_velocity_variance};
    initialized_ = true;
    return z;
  }
  const double dt = params_.dt;
  const double q = params_.process_noise_accel;
  auto& x = state_.state;
  auto& P = state_.covariance;

  // Predict: x = F x, P = F P F' + Q with F = [[1, dt], [0, 1]].
  const double px = x[0] + dt * x[1];
  const double pv = x[1];
  const double p00 = P[0] + dt * (P[1] + P[2]) + dt * dt * P[3] + q * dt * dt * dt * dt / 4.0;
  const double p01 = P[1] + dt * P[3] + q * dt * dt * dt / 2.0;
  const double p11 = P[3] + q * dt * dt;

  // Update with H = [1, 0].
  const double s = p00 + params_.measurement_noise;
  if (s <= 0.0) {
    // Degenerate: zero predicted and measurement variance. Keep the prediction.
    x = {px, pv};
    P = {p00, p01, p01, p11};
    gain_ = {0.0, 0.0};
    return x[0];
  }
  const double k0 = p00 / s;
  const double k1 = p01 / s;
  const double innovation = z - px;
  x = {px + k0 * innovation, pv + k1 * innovation};

  // Joseph form: P = (I - K H) P (I - K H)' + K R K'.
  const double r = params_.measurement_noise;
  const double a = 1.0 - k0;
  const double n00 = a * a * p00 + k0 * k0 * r;
  const double n01 = a * (p01 - k1 * p00) + k0 * k1 * r;
  const double n11 = p11 - 2.0 * k1 * p01 + k1 * k1 * p00 + k1 * k1 * r;
  P = {n00, n01, n01, n11};
  gain_ = {k0, k1};
  return x[0];
}

std::vector<double> filter_axis(std::span<const double> series, const KalmanParams& params) {
  if (series.empty()) throw InputError("filter_axis: empty series");
  AxisFilter filter(params);
  std::vector<double> out;
  out.reserve(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (!std::isfinite(series[i])) {
      throw InputError("filter_axis: non-finite value at index " + std::to_string(i));
    }
    out.push_back(filter.step(series[i]));
  }
  return out;
}

FrameSeries filter_frames(const FrameSeries& frames, const KalmanParams& params) {
  const KalmanParams tuned = params.with_grid_step(frames.grid_step);
  tuned.validate();
  FrameSeries out = frames;
  out.filtered = true;
  const std::size_t n = frames.frame_count();
  if (n == 0) return out;
  std::vector<double> column(n);
  for (std::size_t p = 0; p < frames.player_count(); ++p) {
    for (int axis = 0; axis < 2; ++axis) {
      for (std::size_t i = 0; i < n; ++i) {
        const Point& pt = frames.frame(i)[p];
        column[i] = axis == 0 ? pt.x : pt.y;
      }
      std::vector<double> filtered;
      try {
        filtered = filter_axis(column, tuned);
      } catch (const InputError& e) {
        throw InputError(std::string(e.what()) + " (player " + std::to_string(frames.players[p]) +
                         (axis == 0 ? ", x)" : ", y)"));
      }
      for (std::size_t i = 0; i < n; ++i) {
        Point& pt = out.frame(i)[p];
        (axis == 0 ? pt.x : pt.y) = filtered[i];
      }
    }
  }
  return out;
}

FrameFilter::FrameFilter(std::size_t players, const KalmanParams& params)
    : x_(players, AxisFilter(params)), y_(players, AxisFilter(params)) {}

void FrameFilter::apply(std::span<Point> positions) {
  if (positions.size() != x_.size()) throw InputError("FrameFilter: player count mismatch");
  for (std::size_t p = 0; p < positions.size(); ++p) {
    if (!std::isfinite(positions[p].x) || !std::isfinite(positions[p].y)) {
      throw InputError("FrameFilter: non-finite coordinate for player slot " + std::to_string(p));
    }
    positions[p].x = x_[p].step(positions[p].x);
    positions[p].y = y_[p].step(positions[p].y);
  }
}

AlphaBetaGains steady_state_gains(const KalmanParams& params) {
  params.validate();
  if (params.measurement_noise <= 0.0) return {1.0, params.process_noise_accel > 0.0 ? 2.0 : 0.0};
  // Tracking index lambda = sigma_a dt^2 / sigma_r.
  const double lambda = std::sqrt(params.process_noise_accel) * params.dt * params.dt /
                        std::sqrt(params.measurement_noise);
  const double root = std::sqrt(lambda * lambda + 8.0 * lambda);
  AlphaBetaGains g;
  g.alpha = -(lambda * lambda + 8.0 * lambda - (lambda + 4.0) * root) / 8.0;
  g.beta = (lambda * lambda + 4.0 * lambda - lambda * root) / 4.0;
  return g;
}

}  // namespace courtphase
