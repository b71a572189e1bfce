#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "lakf/geometry.hpp"

namespace lakf {

/// One track's ground-truth bbox sequence over consecutive frames.
/// Boxes are stored in XYAH; other modes are derived by conversion.
struct Trajectory {
  std::string dataset;
  std::string sequence;
  int track_id = 0;
  std::string category;
  int img_w = 0;
  int img_h = 0;
  std::vector<int> frames;
  std::vector<BBox> gt;

  std::size_t length() const { return frames.size(); }
};

/// A trajectory paired with its simulated noisy measurement sequence.
struct SemiSimTrajectory {
  Trajectory base;
  std::vector<BBox> meas;
  double alpha_p = 0.0;
  std::uint64_t seed = 0;
};

struct DatasetSplit {
  std::vector<SemiSimTrajectory> train;
  std::vector<SemiSimTrajectory> val;
  std::vector<SemiSimTrajectory> test;

  bool empty() const { return train.empty() && val.empty() && test.empty(); }
};

/// Parse MOTChallenge gt.txt rows:
///   frame,id,bb_left,bb_top,bb_width,bb_height,conf,class,visibility
/// Rows with conf = 0 are dropped. Tracks are split at frame gaps into
/// consecutive runs; runs shorter than two frames are discarded.
std::vector<Trajectory> parse_mot_gt(std::istream& text,
                                     const std::string& dataset,
                                     const std::string& sequence,
                                     int img_w, int img_h,
                                     const std::string& category = "pedestrian");

/// Draw the measurement sequence y_t = x_t + v_t, v_t ~ N(0, R_t), with
/// R_t built in XYAH mode from the GT height at t. Deterministic in
/// (trajectory identity, alpha_p, seed); alpha_p = 0 is an exact
/// passthrough. Noisy aspect/height are floored at 1e-4.
SemiSimTrajectory simulate_measurements(const Trajectory& traj, double alpha_p,
                                        std::uint64_t seed);

/// Cut every trajectory at floor(T/2): first half to the train pool,
/// second half to test. A seeded fraction of train-pool trajectories
/// moves to val. Trajectories shorter than 4 frames are skipped and
/// counted in *skipped when given.
DatasetSplit make_splits(const std::vector<SemiSimTrajectory>& trajs,
                         double val_fraction, std::uint64_t seed,
                         std::size_t* skipped = nullptr);

/// Line-delimited dataset file, one trajectory per line after a header
/// record carrying the schema version "lakf-ds-v1". Numeric fields round
/// trip bit-exactly (decimals with 17 significant digits).
void write_dataset(const DatasetSplit& split, const std::filesystem::path& path);
DatasetSplit read_dataset(const std::filesystem::path& path);

struct AiouRow {
  std::string dataset;
  std::string category;
  double aiou = 0.0;
  std::size_t tracks = 0;
  std::size_t pairs = 0;
};

/// Adjacent-frame mean IoU per (dataset, category), sorted by key.
std::vector<AiouRow> dataset_aiou_report(const std::vector<Trajectory>& trajs);

/// Synthetic ground-truth generator used for desk-scale experiments and
/// as a stand-in when no MOT dataset is on disk.
struct SynthConfig {
  enum class Motion { Linear, Sinusoidal };

  int count = 200;
  int length = 100;
  int img_w = 1920;
  int img_h = 1080;
  Motion motion = Motion::Sinusoidal;
  std::string dataset = "synth";
  std::string category = "object";
};

/// Generate `cfg.count` trajectories with either constant-velocity or
/// piecewise-sinusoidal-velocity motion, deterministic in `seed`.
std::vector<Trajectory> synthesize_trajectories(const SynthConfig& cfg,
                                                std::uint64_t seed);

/// Scan a MOTChallenge-style directory (root/<sequence>/gt/gt.txt, image
/// size from seqinfo.ini when present) and parse every sequence found.
std::vector<Trajectory> load_mot_directory(const std::filesystem::path& root,
                                           const std::string& dataset,
                                           const std::string& category,
                                           int fallback_img_w = 1920,
                                           int fallback_img_h = 1080);

}  // namespace lakf
