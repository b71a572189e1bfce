#include "lakf/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "lakf/errors.hpp"

namespace lakf {

namespace {

void require_valid(const BBox& box, const char* who) {
  if (!(box.h > 0.0) || !(box.p3 > 0.0) || !std::isfinite(box.cx) ||
      !std::isfinite(box.cy) || !std::isfinite(box.p3) || !std::isfinite(box.h)) {
    throw DomainError("geometry", std::string(who) + ": invalid box (h and p3 must be positive and finite)");
  }
}

}  // namespace

const char* to_string(BoxMode mode) {
  return mode == BoxMode::XYAH ? "xyah" : "xywh";
}

BBox convert_mode(const BBox& box, BoxMode target) {
  require_valid(box, "convert_mode");
  if (box.mode == target) return box;
  BBox out = box;
  out.mode = target;
  if (target == BoxMode::XYWH) {
    out.p3 = box.p3 * box.h;  // a -> w
  } else {
    out.p3 = box.p3 / box.h;  // w -> a
  }
  return out;
}

double iou(const BBox& est, const BBox& gt) {
  require_valid(est, "iou");
  require_valid(gt, "iou");
  const double w1 = est.width(), h1 = est.h;
  const double w2 = gt.width(), h2 = gt.h;

  const double ix = std::min(est.cx + 0.5 * w1, gt.cx + 0.5 * w2) -
                    std::max(est.cx - 0.5 * w1, gt.cx - 0.5 * w2);
  const double iy = std::min(est.cy + 0.5 * h1, gt.cy + 0.5 * h2) -
                    std::max(est.cy - 0.5 * h1, gt.cy - 0.5 * h2);
  if (ix <= 0.0 || iy <= 0.0) return 0.0;

  const double inter = ix * iy;
  const double uni = w1 * h1 + w2 * h2 - inter;
  return inter / uni;
}

double aiou(std::span<const std::vector<BBox>> trajectories) {
  double total = 0.0;
  std::size_t pairs = 0;
  for (const auto& seq : trajectories) {
    if (seq.size() < 2) {
      throw DomainError("geometry", "aiou: every sequence needs length >= 2");
    }
    for (std::size_t t = 0; t + 1 < seq.size(); ++t) {
      total += iou(seq[t], seq[t + 1]);
    }
    pairs += seq.size() - 1;
  }
  if (pairs == 0) {
    throw DomainError("geometry", "aiou: no trajectories given");
  }
  return total / static_cast<double>(pairs);
}

}  // namespace lakf
