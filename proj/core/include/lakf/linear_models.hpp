#pragma once

#include <Eigen/Dense>

#include "lakf/geometry.hpp"

namespace lakf {

using Vec4 = Eigen::Vector4d;
using Vec8 = Eigen::Matrix<double, 8, 1>;
using Mat4 = Eigen::Matrix4d;
using Mat8 = Eigen::Matrix<double, 8, 8>;
using Mat4x8 = Eigen::Matrix<double, 4, 8>;
using Mat8x4 = Eigen::Matrix<double, 8, 4>;

/// State layout shared by every filter in this library:
///   x = [cx, vcx, cy, vcy, p3, vp3, h, vh]
/// with p3 = aspect ratio (XYAH) or width (XYWH). Measurements pick the
/// even components [cx, cy, p3, h].
inline constexpr int kStateDim = 8;
inline constexpr int kMeasDim = 4;
inline constexpr int kPosIdx[kMeasDim] = {0, 2, 4, 6};

/// Constant-velocity model configuration. `alpha_p` and `alpha_v` are the
/// position and velocity noise factors; the per-channel noise scales are
/// rebuilt each step from the current box size.
struct LinearModelConfig {
  BoxMode mode = BoxMode::XYAH;
  double dt = 1.0;
  double alpha_p = 0.05;
  double alpha_v = 0.00625;

  /// Throws DomainError unless dt, alpha_p and alpha_v are positive.
  void validate() const;
};

struct NoiseMatrices {
  Mat8 Q;
  Mat4 R;
};

/// Block-diagonal CV transition: four [[1, dt], [0, 1]] blocks.
Mat8 build_transition(const LinearModelConfig& cfg);

/// Measurement matrix selecting [cx, cy, p3, h] from the 8-dim state.
Mat4x8 build_measurement();

/// Diagonal process noise, sized from the box dimensions carried in
/// `state` (h, and w in XYWH mode). Every diagonal entry is positive.
Mat8 build_process_noise(const LinearModelConfig& cfg, const Vec8& state);

/// Diagonal measurement noise sized like build_process_noise.
Mat4 build_measurement_noise(const LinearModelConfig& cfg, const Vec8& state);

/// Extract the measurement-space box from a state vector.
BBox state_to_box(const Vec8& state, BoxMode mode);

/// Zero-velocity state with positions taken from `box`.
Vec8 box_to_state(const BBox& box);

}  // namespace lakf
