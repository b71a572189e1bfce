#pragma once

#include <span>
#include <vector>

namespace lakf {

/// Bounding-box state parameterization.
///
/// XYAH: [center-x, center-y, aspect-ratio (w/h), height]
/// XYWH: [center-x, center-y, width, height]
enum class BoxMode { XYAH, XYWH };

const char* to_string(BoxMode mode);

/// A bounding box in one of the two parameterizations. `p3` holds the
/// width in XYWH mode and the aspect ratio in XYAH mode; everything else
/// is pixels.
struct BBox {
  double cx = 0.0;
  double cy = 0.0;
  double p3 = 0.0;
  double h = 0.0;
  BoxMode mode = BoxMode::XYAH;

  double width() const { return mode == BoxMode::XYWH ? p3 : p3 * h; }
  double aspect() const { return mode == BoxMode::XYAH ? p3 : p3 / h; }
  double height() const { return h; }

  bool valid() const { return h > 0.0 && p3 > 0.0; }

  bool operator==(const BBox& other) const = default;
};

/// Re-parameterize a box; the pixel extent is unchanged.
BBox convert_mode(const BBox& box, BoxMode target);

/// Intersection-over-union of the pixel extents of two valid boxes.
/// Inputs in either mode; overlap is computed on XYWH corners.
double iou(const BBox& est, const BBox& gt);

/// Mean IoU of adjacent-frame box pairs over a set of per-object
/// sequences. Each sequence must cover consecutive frames and have
/// length >= 2. Ragged lengths are handled by dividing the summed pair
/// IoUs by the total pair count.
double aiou(std::span<const std::vector<BBox>> trajectories);

}  // namespace lakf
