#include "lakf/kalman_filter.hpp"

#include <cmath>

#include "lakf/errors.hpp"

namespace lakf {

namespace {

void require_finite(const Vec8& x, const char* where) {
  if (!x.allFinite()) {
    throw NumericError("kalman_core", std::string(where) + ": non-finite state");
  }
}

}  // namespace

void clamp_size_channels(Vec8& x) {
  x[4] = std::max(x[4], kSizeFloor);
  x[6] = std::max(x[6], kSizeFloor);
}

FilterState init_from_measurement(const BBox& meas, const LinearModelConfig& cfg) {
  cfg.validate();
  const BBox box = convert_mode(meas, cfg.mode);

  FilterState s;
  s.x = box_to_state(box);
  s.t = 1;

  // Same q o q_d scheme as Q, with widened factors for the initial
  // uncertainty: 2x on position/size channels, 10x on velocities.
  const double h = box.h;
  const double w = box.width();
  Vec8 p, pd;
  if (cfg.mode == BoxMode::XYAH) {
    p << 2 * cfg.alpha_p, 10 * cfg.alpha_v, 2 * cfg.alpha_p, 10 * cfg.alpha_v,
        2 * 0.01, 10 * 0.00001, 2 * cfg.alpha_p, 10 * cfg.alpha_v;
    pd << h, h, h, h, 1.0, 1.0, h, h;
  } else {
    p << 2 * cfg.alpha_p, 10 * cfg.alpha_v, 2 * cfg.alpha_p, 10 * cfg.alpha_v,
        2 * cfg.alpha_p, 10 * cfg.alpha_v, 2 * cfg.alpha_p, 10 * cfg.alpha_v;
    pd << w, h, w, h, w, h, w, h;
  }
  s.P = Vec8((p.array() * pd.array()).square()).asDiagonal();
  return s;
}

Vec8 predict_mean(const Vec8& x, const LinearModelConfig& cfg) {
  Vec8 out = x;
  for (int i : kPosIdx) out[i] += cfg.dt * x[i + 1];
  return out;
}

FilterState predict(const FilterState& state, const LinearModelConfig& cfg) {
  require_finite(state.x, "predict");
  const Mat8 F = build_transition(cfg);
  const Mat8 Q = build_process_noise(cfg, state.x);

  FilterState out;
  out.x = F * state.x;
  out.P = F * state.P * F.transpose() + Q;
  out.t = state.t + 1;
  require_finite(out.x, "predict");
  return out;
}

std::pair<FilterState, UpdateDiagnostics> update(const FilterState& state,
                                                 const BBox& meas,
                                                 const LinearModelConfig& cfg) {
  require_finite(state.x, "update");
  const BBox box = convert_mode(meas, cfg.mode);
  const Mat4x8 H = build_measurement();
  const Mat4 R = build_measurement_noise(cfg, state.x);

  UpdateDiagnostics diag;
  diag.y_pred = H * state.x;
  diag.S = H * state.P * H.transpose() + R;

  Eigen::LLT<Mat4> llt(diag.S);
  if (llt.info() != Eigen::Success) {
    throw NumericError("kalman_core", "innovation covariance is not positive definite");
  }
  // K = P H^T S^-1, via S K^T = H P^T.
  diag.K = llt.solve(H * state.P.transpose()).transpose();

  Vec4 y;
  y << box.cx, box.cy, box.p3, box.h;
  diag.innovation = y - diag.y_pred;

  FilterState out;
  out.x = state.x + diag.K * diag.innovation;
  out.P = (Mat8::Identity() - diag.K * H) * state.P;
  out.P = 0.5 * (out.P + out.P.transpose()).eval();
  out.t = state.t;
  clamp_size_channels(out.x);
  require_finite(out.x, "update");
  return {out, diag};
}

FilterOutput run_filter(std::span<const BBox> meas_seq, const LinearModelConfig& cfg) {
  if (meas_seq.empty()) {
    throw DomainError("kalman_core", "run_filter: empty measurement sequence");
  }
  FilterOutput out;
  out.predicted.reserve(meas_seq.size());
  out.updated.reserve(meas_seq.size());

  FilterState state = init_from_measurement(meas_seq[0], cfg);
  BBox init_box = state_to_box(state.x, cfg.mode);
  out.predicted.push_back(init_box);
  out.updated.push_back(init_box);

  for (std::size_t t = 1; t < meas_seq.size(); ++t) {
    state = predict(state, cfg);
    out.predicted.push_back(state_to_box(state.x, cfg.mode));
    auto [updated, diag] = update(state, meas_seq[t], cfg);
    state = updated;
    out.updated.push_back(state_to_box(state.x, cfg.mode));
  }
  return out;
}

}  // namespace lakf
