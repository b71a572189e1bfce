#include "lakf/linear_models.hpp"

#include <cmath>

#include "lakf/errors.hpp"

namespace lakf {

namespace {

// Per-channel noise factor/scale vectors. XYAH uses fixed constants on the
// aspect channel; XYWH scales every channel with the box size.
void noise_vectors_q(const LinearModelConfig& cfg, double w, double h,
                     Vec8& q, Vec8& qd) {
  const double ap = cfg.alpha_p, av = cfg.alpha_v;
  if (cfg.mode == BoxMode::XYAH) {
    q << ap, av, ap, av, 0.01, 0.00001, ap, av;
    qd << h, h, h, h, 1.0, 1.0, h, h;
  } else {
    q << ap, av, ap, av, ap, av, ap, av;
    qd << w, h, w, h, w, h, w, h;
  }
}

void noise_vectors_r(const LinearModelConfig& cfg, double w, double h,
                     Vec4& r, Vec4& rd) {
  const double ap = cfg.alpha_p;
  if (cfg.mode == BoxMode::XYAH) {
    r << ap, ap, 0.1, ap;
    rd << h, h, 1.0, h;
  } else {
    r << ap, ap, ap, ap;
    rd << w, h, w, h;
  }
}

void check_sizes(const LinearModelConfig& cfg, const Vec8& state,
                 double& w, double& h) {
  h = state[6];
  w = cfg.mode == BoxMode::XYWH ? state[4] : state[4] * state[6];
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw DomainError("linear_models", "state height must be positive");
  }
  if (cfg.mode == BoxMode::XYWH && (!(w > 0.0) || !std::isfinite(w))) {
    throw DomainError("linear_models", "state width must be positive");
  }
}

}  // namespace

void LinearModelConfig::validate() const {
  if (!(dt > 0.0)) throw DomainError("linear_models", "dt must be positive");
  if (!(alpha_p > 0.0)) throw DomainError("linear_models", "alpha_p must be positive");
  if (!(alpha_v > 0.0)) throw DomainError("linear_models", "alpha_v must be positive");
}

Mat8 build_transition(const LinearModelConfig& cfg) {
  cfg.validate();
  Mat8 F = Mat8::Identity();
  for (int i : kPosIdx) F(i, i + 1) = cfg.dt;
  return F;
}

Mat4x8 build_measurement() {
  Mat4x8 H = Mat4x8::Zero();
  for (int i = 0; i < kMeasDim; ++i) H(i, kPosIdx[i]) = 1.0;
  return H;
}

Mat8 build_process_noise(const LinearModelConfig& cfg, const Vec8& state) {
  cfg.validate();
  double w, h;
  check_sizes(cfg, state, w, h);
  Vec8 q, qd;
  noise_vectors_q(cfg, w, h, q, qd);
  return Vec8((q.array() * qd.array()).square()).asDiagonal();
}

Mat4 build_measurement_noise(const LinearModelConfig& cfg, const Vec8& state) {
  cfg.validate();
  double w, h;
  check_sizes(cfg, state, w, h);
  Vec4 r, rd;
  noise_vectors_r(cfg, w, h, r, rd);
  return Vec4((r.array() * rd.array()).square()).asDiagonal();
}

BBox state_to_box(const Vec8& state, BoxMode mode) {
  return BBox{state[0], state[2], state[4], state[6], mode};
}

Vec8 box_to_state(const BBox& box) {
  Vec8 x = Vec8::Zero();
  x[0] = box.cx;
  x[2] = box.cy;
  x[4] = box.p3;
  x[6] = box.h;
  return x;
}

}  // namespace lakf
