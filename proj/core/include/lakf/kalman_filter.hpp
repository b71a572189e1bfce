#pragma once

#include <utility>
#include <vector>

#include "lakf/linear_models.hpp"

namespace lakf {

/// Filter state at one frame: mean, covariance, frame index.
struct FilterState {
  Vec8 x = Vec8::Zero();
  Mat8 P = Mat8::Zero();
  int t = 0;
};

/// Per-update quantities exposed for inspection and tests.
struct UpdateDiagnostics {
  Vec4 y_pred = Vec4::Zero();
  Mat4 S = Mat4::Zero();
  Mat8x4 K = Mat8x4::Zero();
  Vec4 innovation = Vec4::Zero();
};

/// One (predicted, updated) box pair per frame, as produced by a filter
/// pass over a measurement sequence. On the initialization frame both
/// entries carry the initial box.
struct FilterOutput {
  std::vector<BBox> predicted;
  std::vector<BBox> updated;
};

/// Zero-velocity state from a measurement; P is diagonal, scaled from the
/// box size like the process noise but with widened factors (2x position,
/// 10x velocity).
FilterState init_from_measurement(const BBox& meas, const LinearModelConfig& cfg);

/// CV mean propagation only: x <- F x. Used by the learned filters, which
/// do not track a covariance.
Vec8 predict_mean(const Vec8& x, const LinearModelConfig& cfg);

/// Full prediction: x <- F x, P <- F P F^T + Q, with Q sized from the
/// pre-prediction state.
FilterState predict(const FilterState& state, const LinearModelConfig& cfg);

/// Measurement update with the analytic gain K = P H^T S^-1. P is
/// symmetrized afterwards and the size channels are floored at 1e-4.
std::pair<FilterState, UpdateDiagnostics> update(const FilterState& state,
                                                 const BBox& meas,
                                                 const LinearModelConfig& cfg);

/// Initialize from the first measurement, then alternate predict/update
/// over the rest of the sequence.
FilterOutput run_filter(std::span<const BBox> meas_seq, const LinearModelConfig& cfg);

/// Size-channel floor shared by every filter variant.
inline constexpr double kSizeFloor = 1e-4;

/// Clamp the p3/h channels of a state to kSizeFloor.
void clamp_size_channels(Vec8& x);

}  // namespace lakf
