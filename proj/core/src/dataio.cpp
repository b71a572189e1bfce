#include "lakf/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "lakf/errors.hpp"
#include "lakf/random.hpp"

namespace lakf {

namespace {

constexpr const char* kSchema = "lakf-ds-v1";

// %.17g: enough digits for a bit-exact double round trip.
std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

void append_box_rows(std::string& out, const std::vector<BBox>& boxes) {
  out += '[';
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    if (i) out += ',';
    const BBox& b = boxes[i];
    out += '[';
    out += fmt_double(b.cx);
    out += ',';
    out += fmt_double(b.cy);
    out += ',';
    out += fmt_double(b.p3);
    out += ',';
    out += fmt_double(b.h);
    out += ']';
  }
  out += ']';
}

std::uint64_t trajectory_stream_seed(std::uint64_t global_seed, const Trajectory& t) {
  std::string key = t.dataset;
  key += '\x1f';
  key += t.sequence;
  key += '\x1f';
  key += std::to_string(t.track_id);
  return mix64(global_seed ^ stable_hash64(key));
}

}  // namespace

std::vector<Trajectory> parse_mot_gt(std::istream& text,
                                     const std::string& dataset,
                                     const std::string& sequence,
                                     int img_w, int img_h,
                                     const std::string& category) {
  struct Row {
    int frame;
    BBox box;
  };
  std::map<int, std::vector<Row>> by_id;

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(text, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    double v[9];
    int n = std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf",
                        &v[0], &v[1], &v[2], &v[3], &v[4], &v[5], &v[6], &v[7], &v[8]);
    if (n < 7) {
      throw ParseError("dataio", lineno, "expected at least 7 comma-separated fields");
    }
    const double conf = v[6];
    if (conf == 0.0) continue;  // MOT convention: conf 0 marks ignored rows
    const double w = v[4], h = v[5];
    if (!(w > 0.0) || !(h > 0.0)) {
      throw ParseError("dataio", lineno, "non-positive box size");
    }
    BBox box{v[2] + 0.5 * w, v[3] + 0.5 * h, w / h, h, BoxMode::XYAH};
    by_id[static_cast<int>(v[1])].push_back({static_cast<int>(v[0]), box});
  }

  std::vector<Trajectory> out;
  for (auto& [id, rows] : by_id) {
    std::stable_sort(rows.begin(), rows.end(),
                     [](const Row& a, const Row& b) { return a.frame < b.frame; });
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
      if (rows[i].frame == rows[i + 1].frame) {
        throw ParseError("dataio", 0,
                         "duplicate frame " + std::to_string(rows[i].frame) +
                             " for track " + std::to_string(id));
      }
    }
    // Tracks are cut at frame gaps; each consecutive run becomes its own
    // trajectory so every downstream consumer sees unit time steps.
    std::size_t start = 0;
    while (start < rows.size()) {
      std::size_t end = start + 1;
      while (end < rows.size() && rows[end].frame == rows[end - 1].frame + 1) ++end;
      if (end - start >= 2) {
        Trajectory t;
        t.dataset = dataset;
        t.sequence = sequence;
        t.track_id = id;
        t.category = category;
        t.img_w = img_w;
        t.img_h = img_h;
        for (std::size_t i = start; i < end; ++i) {
          t.frames.push_back(rows[i].frame);
          t.gt.push_back(rows[i].box);
        }
        out.push_back(std::move(t));
      }
      start = end;
    }
  }
  return out;
}

SemiSimTrajectory simulate_measurements(const Trajectory& traj, double alpha_p,
                                        std::uint64_t seed) {
  if (alpha_p < 0.0) {
    throw DomainError("dataio", "alpha_p must be nonnegative");
  }
  SemiSimTrajectory out;
  out.base = traj;
  out.alpha_p = alpha_p;
  out.seed = seed;
  out.meas.reserve(traj.gt.size());

  if (alpha_p == 0.0) {
    out.meas = traj.gt;
    return out;
  }

  auto rng = make_rng(trajectory_stream_seed(seed, traj));
  std::normal_distribution<double> normal(0.0, 1.0);
  for (const BBox& gt : traj.gt) {
    const double h = gt.h;
    BBox m = gt;
    m.cx += alpha_p * h * normal(rng);
    m.cy += alpha_p * h * normal(rng);
    m.p3 += 0.1 * normal(rng);
    m.h += alpha_p * h * normal(rng);
    m.p3 = std::max(m.p3, 1e-4);
    m.h = std::max(m.h, 1e-4);
    out.meas.push_back(m);
  }
  return out;
}

DatasetSplit make_splits(const std::vector<SemiSimTrajectory>& trajs,
                         double val_fraction, std::uint64_t seed,
                         std::size_t* skipped) {
  if (val_fraction < 0.0 || val_fraction >= 1.0) {
    throw DomainError("dataio", "val_fraction must be in [0, 1)");
  }
  DatasetSplit split;
  std::size_t too_short = 0;

  auto slice = [](const SemiSimTrajectory& t, std::size_t begin, std::size_t end) {
    SemiSimTrajectory s;
    s.base.dataset = t.base.dataset;
    s.base.sequence = t.base.sequence;
    s.base.track_id = t.base.track_id;
    s.base.category = t.base.category;
    s.base.img_w = t.base.img_w;
    s.base.img_h = t.base.img_h;
    s.base.frames.assign(t.base.frames.begin() + begin, t.base.frames.begin() + end);
    s.base.gt.assign(t.base.gt.begin() + begin, t.base.gt.begin() + end);
    s.meas.assign(t.meas.begin() + begin, t.meas.begin() + end);
    s.alpha_p = t.alpha_p;
    s.seed = t.seed;
    return s;
  };

  for (const auto& t : trajs) {
    const std::size_t T = t.base.length();
    if (T < 4) {
      ++too_short;
      continue;
    }
    const std::size_t cut = T / 2;
    split.train.push_back(slice(t, 0, cut));
    split.test.push_back(slice(t, cut, T));
  }

  // Move a seeded fraction of train-pool trajectories to val.
  const std::size_t n_val =
      static_cast<std::size_t>(static_cast<double>(split.train.size()) * val_fraction + 1e-9);
  if (n_val > 0) {
    std::vector<std::size_t> idx(split.train.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    auto rng = make_rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(n_val);
    std::sort(idx.begin(), idx.end());
    std::vector<SemiSimTrajectory> train_kept;
    train_kept.reserve(split.train.size() - n_val);
    std::size_t next = 0;
    for (std::size_t i = 0; i < split.train.size(); ++i) {
      if (next < idx.size() && idx[next] == i) {
        split.val.push_back(std::move(split.train[i]));
        ++next;
      } else {
        train_kept.push_back(std::move(split.train[i]));
      }
    }
    split.train = std::move(train_kept);
  }

  if (skipped) *skipped = too_short;
  return split;
}

void write_dataset(const DatasetSplit& split, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw FormatError("dataio", "cannot open " + path.string() + " for writing");
  }
  out << "{\"schema\":\"" << kSchema << "\"}\n";

  auto write_one = [&](const SemiSimTrajectory& t, const char* tag) {
    std::string line = "{\"dataset\":\"" + json_escape(t.base.dataset) +
                       "\",\"sequence\":\"" + json_escape(t.base.sequence) +
                       "\",\"track_id\":" + std::to_string(t.base.track_id) +
                       ",\"category\":\"" + json_escape(t.base.category) +
                       "\",\"img_w\":" + std::to_string(t.base.img_w) +
                       ",\"img_h\":" + std::to_string(t.base.img_h) +
                       ",\"alpha_p\":" + fmt_double(t.alpha_p) +
                       ",\"seed\":" + std::to_string(t.seed) + ",\"frames\":[";
    for (std::size_t i = 0; i < t.base.frames.size(); ++i) {
      if (i) line += ',';
      line += std::to_string(t.base.frames[i]);
    }
    line += "],\"gt\":";
    append_box_rows(line, t.base.gt);
    line += ",\"meas\":";
    append_box_rows(line, t.meas);
    line += ",\"split\":\"";
    line += tag;
    line += "\"}";
    out << line << '\n';
  };

  for (const auto& t : split.train) write_one(t, "train");
  for (const auto& t : split.val) write_one(t, "val");
  for (const auto& t : split.test) write_one(t, "test");
}

DatasetSplit read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw FormatError("dataio", "cannot open " + path.string());
  }

  DatasetSplit split;
  std::string line;
  std::size_t lineno = 0;
  bool saw_header = false;

  static const std::vector<std::string> kFields = {
      "dataset", "sequence", "track_id", "category", "img_w", "img_h",
      "alpha_p", "seed", "frames", "gt", "meas", "split"};

  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("dataio", lineno, e.what());
    }
    if (!saw_header) {
      if (!j.contains("schema") || !j["schema"].is_string()) {
        throw FormatError("dataio", "missing schema header record");
      }
      if (j["schema"] != kSchema) {
        throw FormatError("dataio", "schema version mismatch: expected " +
                                        std::string(kSchema) + ", got " +
                                        j["schema"].get<std::string>());
      }
      saw_header = true;
      continue;
    }

    for (auto it = j.begin(); it != j.end(); ++it) {
      if (std::find(kFields.begin(), kFields.end(), it.key()) == kFields.end()) {
        throw FormatError("dataio", "unknown field \"" + it.key() + "\" at line " +
                                        std::to_string(lineno));
      }
    }
    for (const auto& f : kFields) {
      if (!j.contains(f)) {
        throw FormatError("dataio", "missing field \"" + f + "\" at line " +
                                        std::to_string(lineno));
      }
    }

    SemiSimTrajectory t;
    try {
      t.base.dataset = j["dataset"].get<std::string>();
      t.base.sequence = j["sequence"].get<std::string>();
      t.base.track_id = j["track_id"].get<int>();
      t.base.category = j["category"].get<std::string>();
      t.base.img_w = j["img_w"].get<int>();
      t.base.img_h = j["img_h"].get<int>();
      t.alpha_p = j["alpha_p"].get<double>();
      t.seed = j["seed"].get<std::uint64_t>();
      t.base.frames = j["frames"].get<std::vector<int>>();
      auto read_boxes = [&](const nlohmann::json& rows) {
        std::vector<BBox> boxes;
        boxes.reserve(rows.size());
        for (const auto& r : rows) {
          if (!r.is_array() || r.size() != 4) {
            throw FormatError("dataio", "box rows must have 4 entries (line " +
                                            std::to_string(lineno) + ")");
          }
          boxes.push_back(BBox{r[0].get<double>(), r[1].get<double>(),
                               r[2].get<double>(), r[3].get<double>(), BoxMode::XYAH});
        }
        return boxes;
      };
      t.base.gt = read_boxes(j["gt"]);
      t.meas = read_boxes(j["meas"]);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("dataio", "bad field at line " + std::to_string(lineno) +
                                      ": " + e.what());
    }
    if (t.base.gt.size() != t.base.frames.size() ||
        t.meas.size() != t.base.frames.size()) {
      throw FormatError("dataio", "field \"frames\"/\"gt\"/\"meas\" lengths disagree at line " +
                                      std::to_string(lineno));
    }

    const std::string tag = j["split"].get<std::string>();
    if (tag == "train") {
      split.train.push_back(std::move(t));
    } else if (tag == "val") {
      split.val.push_back(std::move(t));
    } else if (tag == "test") {
      split.test.push_back(std::move(t));
    } else {
      throw FormatError("dataio", "field \"split\" must be train/val/test at line " +
                                      std::to_string(lineno));
    }
  }
  return split;
}

std::vector<AiouRow> dataset_aiou_report(const std::vector<Trajectory>& trajs) {
  std::map<std::pair<std::string, std::string>, std::vector<std::vector<BBox>>> groups;
  for (const auto& t : trajs) {
    groups[{t.dataset, t.category}].push_back(t.gt);
  }
  std::vector<AiouRow> rows;
  for (const auto& [key, seqs] : groups) {
    AiouRow row;
    row.dataset = key.first;
    row.category = key.second;
    row.aiou = aiou(seqs);
    row.tracks = seqs.size();
    for (const auto& s : seqs) row.pairs += s.size() - 1;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<Trajectory> synthesize_trajectories(const SynthConfig& cfg,
                                                std::uint64_t seed) {
  if (cfg.count < 1 || cfg.length < 2) {
    throw DomainError("dataio", "synthesize_trajectories: need count >= 1, length >= 2");
  }
  std::vector<Trajectory> out;
  out.reserve(cfg.count);

  for (int k = 0; k < cfg.count; ++k) {
    auto rng = make_rng(mix64(seed ^ (0x51e5u + static_cast<std::uint64_t>(k))));
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    const double h0 = 80.0 + 220.0 * uni(rng);
    const double a0 = 0.45 + 0.40 * uni(rng);
    const int T = cfg.length;

    std::vector<double> cx(T), cy(T), aa(T), hh(T);

    if (cfg.motion == SynthConfig::Motion::Linear) {
      // Constant velocity; start chosen so the box stays inside the image.
      const double vx = -4.0 + 8.0 * uni(rng);
      const double vy = -3.0 + 6.0 * uni(rng);
      const double wmax = a0 * h0;
      auto pick_start = [&](double v, double lo, double hi) {
        const double travel = v * (T - 1);
        double lo2 = lo - std::min(0.0, travel);
        double hi2 = hi - std::max(0.0, travel);
        if (lo2 >= hi2) return 0.5 * (lo + hi);  // tiny image fallback
        return lo2 + (hi2 - lo2) * uni(rng);
      };
      const double x0 = pick_start(vx, wmax / 2 + 2, cfg.img_w - wmax / 2 - 2);
      const double y0 = pick_start(vy, h0 / 2 + 2, cfg.img_h - h0 / 2 - 2);
      for (int t = 0; t < T; ++t) {
        cx[t] = x0 + vx * t;
        cy[t] = y0 + vy * t;
        aa[t] = a0;
        hh[t] = h0;
      }
    } else {
      // Piecewise sinusoidal velocities with size oscillation; positions
      // are folded back into the image.
      const double two_pi = 2.0 * std::numbers::pi;
      auto gen_vel = [&](double amp_lo, double amp_hi) {
        std::vector<double> v(T);
        int t = 0;
        while (t < T) {
          const int seg = 25 + static_cast<int>(25 * uni(rng));
          const double A = amp_lo + (amp_hi - amp_lo) * uni(rng);
          const double P = 20.0 + 60.0 * uni(rng);
          const double phi = two_pi * uni(rng);
          for (int i = 0; i < seg && t < T; ++i, ++t) {
            v[t] = A * std::sin(two_pi * i / P + phi);
          }
        }
        return v;
      };
      const auto vx = gen_vel(2.0, 8.0);
      const auto vy = gen_vel(1.5, 6.0);

      const double ph = 30.0 + 60.0 * uni(rng);
      const double pa = 40.0 + 80.0 * uni(rng);
      const double phih = two_pi * uni(rng);
      const double phia = two_pi * uni(rng);

      double x = cfg.img_w * (0.25 + 0.5 * uni(rng));
      double y = cfg.img_h * (0.25 + 0.5 * uni(rng));
      for (int t = 0; t < T; ++t) {
        if (t > 0) {
          x += vx[t - 1];
          y += vy[t - 1];
        }
        cx[t] = x;
        cy[t] = y;
        hh[t] = h0 * (1.0 + 0.12 * std::sin(two_pi * t / ph + phih));
        aa[t] = a0 * (1.0 + 0.06 * std::sin(two_pi * t / pa + phia));
      }
      // Triangular fold keeps boxes inside the frame while preserving
      // speed, adding direction reversals at the borders.
      const double hmax = h0 * 1.12;
      const double wmax = a0 * 1.06 * hmax;
      auto fold = [](double v, double lo, double hi) {
        const double span = hi - lo;
        if (span <= 0.0) return 0.5 * (lo + hi);
        double u = std::fmod(v - lo, 2.0 * span);
        if (u < 0.0) u += 2.0 * span;
        return lo + (u <= span ? u : 2.0 * span - u);
      };
      for (int t = 0; t < T; ++t) {
        cx[t] = fold(cx[t], wmax / 2 + 2, cfg.img_w - wmax / 2 - 2);
        cy[t] = fold(cy[t], hmax / 2 + 2, cfg.img_h - hmax / 2 - 2);
      }
    }

    Trajectory traj;
    traj.dataset = cfg.dataset;
    traj.sequence = cfg.dataset + "-" + std::to_string(k / 50);
    traj.track_id = k;
    traj.category = cfg.category;
    traj.img_w = cfg.img_w;
    traj.img_h = cfg.img_h;
    traj.frames.resize(T);
    std::iota(traj.frames.begin(), traj.frames.end(), 1);
    traj.gt.reserve(T);
    for (int t = 0; t < T; ++t) {
      traj.gt.push_back(BBox{cx[t], cy[t], aa[t], hh[t], BoxMode::XYAH});
    }
    out.push_back(std::move(traj));
  }
  return out;
}

std::vector<Trajectory> load_mot_directory(const std::filesystem::path& root,
                                           const std::string& dataset,
                                           const std::string& category,
                                           int fallback_img_w, int fallback_img_h) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) {
    throw FormatError("dataio", "not a directory: " + root.string());
  }
  std::vector<fs::path> seq_dirs;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory() && fs::exists(entry.path() / "gt" / "gt.txt")) {
      seq_dirs.push_back(entry.path());
    }
  }
  std::sort(seq_dirs.begin(), seq_dirs.end());

  std::vector<Trajectory> out;
  for (const auto& dir : seq_dirs) {
    int img_w = fallback_img_w, img_h = fallback_img_h;
    std::ifstream ini(dir / "seqinfo.ini");
    std::string line;
    while (ini && std::getline(ini, line)) {
      int v;
      if (std::sscanf(line.c_str(), "imWidth=%d", &v) == 1) img_w = v;
      if (std::sscanf(line.c_str(), "imHeight=%d", &v) == 1) img_h = v;
    }
    std::ifstream gt(dir / "gt" / "gt.txt");
    auto trajs = parse_mot_gt(gt, dataset, dir.filename().string(), img_w, img_h, category);
    out.insert(out.end(), std::make_move_iterator(trajs.begin()),
               std::make_move_iterator(trajs.end()));
  }
  return out;
}

}  // namespace lakf
