#include "mftiq/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "mftiq/flow.hpp"

namespace mftiq::synth {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double lattice(std::uint64_t key, std::int64_t i, std::int64_t j) {
  const std::uint64_t h = splitmix64(key ^ splitmix64(static_cast<std::uint64_t>(i) * 0x632be59bd9b4e019ULL ^
                                                      splitmix64(static_cast<std::uint64_t>(j))));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double value_noise(std::uint64_t key, double u, double v) {
  const double fu = std::floor(u), fv = std::floor(v);
  const auto i = static_cast<std::int64_t>(fu), j = static_cast<std::int64_t>(fv);
  const double tu = u - fu, tv = v - fv;
  const double top = (1.0 - tu) * lattice(key, i, j) + tu * lattice(key, i + 1, j);
  const double bottom = (1.0 - tu) * lattice(key, i, j + 1) + tu * lattice(key, i + 1, j + 1);
  return (1.0 - tv) * top + tv * bottom;
}

Pose lerp(const Pose& a, const Pose& b, double t) {
  return {a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t, a.angle + (b.angle - a.angle) * t,
          a.scale + (b.scale - a.scale) * t};
}

Pose interpolate_keyframes(const std::vector<Keyframe>& keys, int frame) {
  if (frame <= keys.front().frame) return keys.front().pose;
  if (frame >= keys.back().frame) return keys.back().pose;
  for (std::size_t k = 1; k < keys.size(); ++k) {
    if (frame <= keys[k].frame) {
      const Keyframe& lo = keys[k - 1];
      const Keyframe& hi = keys[k];
      if (frame == hi.frame) return hi.pose;
      const double t = static_cast<double>(frame - lo.frame) / static_cast<double>(hi.frame - lo.frame);
      return lerp(lo.pose, hi.pose, t);
    }
  }
  return keys.back().pose;
}

Point2 to_local(const Pose& pose, Point2 world) {
  const double dx = world.x - pose.x, dy = world.y - pose.y;
  const double c = std::cos(pose.angle), s = std::sin(pose.angle);
  return {(c * dx + s * dy) / pose.scale, (-s * dx + c * dy) / pose.scale};
}

Point2 to_world(const Pose& pose, Point2 local) {
  const double c = std::cos(pose.angle), s = std::sin(pose.angle);
  return {pose.x + pose.scale * (c * local.x - s * local.y), pose.y + pose.scale * (s * local.x + c * local.y)};
}

bool inside_rect(const LayerSpec& layer, Point2 local) {
  return local.x >= -0.5 * layer.width && local.x < 0.5 * layer.width && local.y >= -0.5 * layer.height &&
         local.y < 0.5 * layer.height;
}

}  // namespace

float texture_value(const TextureSpec& texture, std::uint64_t seed, double u, double v) {
  const std::uint64_t key = splitmix64(texture.seed ^ splitmix64(seed));
  const double s = texture.scale;
  const double coarse = value_noise(key, u / s, v / s);
  const double fine = value_noise(key ^ 0x5851f42d4c957f2dULL, 2.0 * u / s, 2.0 * v / s);
  return static_cast<float>((coarse + 0.5 * fine) / 1.5);
}

void validate(const SceneSpec& spec) {
  if (spec.resolution.width <= 0 || spec.resolution.height <= 0) {
    throw ArgumentError("scene: resolution must be positive, got " + to_string(spec.resolution));
  }
  if (spec.frame_count < 2) {
    throw ArgumentError("scene: frame_count must be >= 2, got " + std::to_string(spec.frame_count));
  }
  if (!(spec.background.scale > 0.0)) throw ArgumentError("scene: background texture scale must be positive");
  if (spec.simulation_frames < 0) throw ArgumentError("scene: simulation_frames must be >= 0");
  if (spec.replay_back_and_forth && spec.simulation_frames == 1) {
    throw ArgumentError("scene: replay needs simulation_frames >= 2");
  }
  if (spec.noise_sigma < 0.0) throw ArgumentError("scene: noise_sigma must be >= 0");
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const LayerSpec& layer = spec.layers[i];
    const std::string where = "scene: layer " + std::to_string(i) + ": ";
    if (!(layer.width > 0.0) || !(layer.height > 0.0)) throw ArgumentError(where + "size must be positive");
    if (!(layer.texture.scale > 0.0)) throw ArgumentError(where + "texture scale must be positive");
    if (layer.keyframes.empty()) throw ArgumentError(where + "needs at least one keyframe");
    for (std::size_t k = 0; k < layer.keyframes.size(); ++k) {
      if (!(layer.keyframes[k].pose.scale > 0.0)) throw ArgumentError(where + "keyframe scale must be positive");
      if (k > 0 && layer.keyframes[k].frame <= layer.keyframes[k - 1].frame) {
        throw ArgumentError(where + "keyframes must have strictly increasing frame indices");
      }
    }
  }
}

int replay_frame(int index, int simulation_frames) {
  if (simulation_frames < 2 || index <= simulation_frames) return index;
  const int period = 2 * (simulation_frames - 1);
  const int u = (index - 1) % period;
  return 1 + (u <= simulation_frames - 1 ? u : period - u);
}

void SyntheticSequence::check_index(int index) const {
  if (index < 1 || index > spec_.frame_count) {
    throw IndexError("frame index " + std::to_string(index) + " outside [1, " +
                     std::to_string(spec_.frame_count) + "]");
  }
}

const Image& SyntheticSequence::frame(int index) const {
  check_index(index);
  return frames_[static_cast<std::size_t>(index - 1)];
}

Pose SyntheticSequence::layer_pose(int layer, int index) const {
  check_index(index);
  return poses_[static_cast<std::size_t>(index - 1)].at(static_cast<std::size_t>(layer));
}

Point2 SyntheticSequence::camera_offset(int index) const {
  return {spec_.camera_motion.x * (index - 1), spec_.camera_motion.y * (index - 1)};
}

bool SyntheticSequence::layer_covers(int layer, int index, Point2 p) const {
  const Point2 off = camera_offset(index);
  const Pose& pose = poses_[static_cast<std::size_t>(index - 1)][static_cast<std::size_t>(layer)];
  return inside_rect(spec_.layers[static_cast<std::size_t>(layer)], to_local(pose, {p.x - off.x, p.y - off.y}));
}

int SyntheticSequence::owner_at(int index, Point2 p) const {
  check_index(index);
  for (int l = static_cast<int>(spec_.layers.size()) - 1; l >= 0; --l) {
    if (layer_covers(l, index, p)) return l;
  }
  return -1;
}

Point2 SyntheticSequence::transfer(int owner, int from, int to, Point2 p) const {
  const Point2 off_a = camera_offset(from);
  const Point2 off_b = camera_offset(to);
  if (owner < 0) return {p.x + (off_b.x - off_a.x), p.y + (off_b.y - off_a.y)};
  const Pose& pa = poses_[static_cast<std::size_t>(from - 1)][static_cast<std::size_t>(owner)];
  const Pose& pb = poses_[static_cast<std::size_t>(to - 1)][static_cast<std::size_t>(owner)];
  const Point2 local = to_local(pa, {p.x - off_a.x, p.y - off_a.y});
  const Point2 w = to_world(pb, local);
  return {w.x + off_b.x, w.y + off_b.y};
}

TrackPoint SyntheticSequence::observe(int owner, int from, int to, Point2 p) const {
  TrackPoint tp{transfer(owner, from, to, p), true};
  if (!in_bounds(spec_.resolution, tp.position)) {
    tp.visible = false;
    return tp;
  }
  for (int l = owner + 1; l < static_cast<int>(spec_.layers.size()); ++l) {
    if (layer_covers(l, to, tp.position)) {
      tp.visible = false;
      break;
    }
  }
  return tp;
}

SyntheticSequence generate_sequence(const SceneSpec& spec, std::uint64_t seed) {
  validate(spec);
  SyntheticSequence seq;
  seq.spec_ = spec;
  seq.seed_ = seed;
  const int sim = spec.replay_back_and_forth
                      ? (spec.simulation_frames > 0 ? spec.simulation_frames : spec.frame_count)
                      : 0;
  seq.poses_.resize(static_cast<std::size_t>(spec.frame_count));
  for (int k = 1; k <= spec.frame_count; ++k) {
    const int source = replay_frame(k, sim);
    auto& poses = seq.poses_[static_cast<std::size_t>(k - 1)];
    for (const LayerSpec& layer : spec.layers) poses.push_back(interpolate_keyframes(layer.keyframes, source));
  }

  std::mt19937_64 noise_rng(splitmix64(seed ^ 0xa0761d6478bd642fULL));
  std::normal_distribution<double> noise(0.0, spec.noise_sigma > 0.0 ? spec.noise_sigma : 1.0);

  const int w = spec.resolution.width;
  const int h = spec.resolution.height;
  seq.frames_.reserve(static_cast<std::size_t>(spec.frame_count));
  for (int k = 1; k <= spec.frame_count; ++k) {
    Image img(w, h);
    const Point2 off = seq.camera_offset(k);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const Point2 p{static_cast<double>(x), static_cast<double>(y)};
        const int owner = seq.owner_at(k, p);
        float value = 0.0f;
        if (owner < 0) {
          value = texture_value(spec.background, seed, p.x - off.x, p.y - off.y);
        } else {
          const LayerSpec& layer = spec.layers[static_cast<std::size_t>(owner)];
          const Point2 local = to_local(seq.poses_[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(owner)],
                                        {p.x - off.x, p.y - off.y});
          value = texture_value(layer.texture, seed, local.x + 0.5 * layer.width, local.y + 0.5 * layer.height);
        }
        if (spec.noise_sigma > 0.0) {
          value = std::clamp(static_cast<float>(value + noise(noise_rng)), 0.0f, 1.0f);
        }
        img(x, y) = value;
      }
    }
    seq.frames_.push_back(std::move(img));
  }
  return seq;
}

GroundTruthFlow gt_flow(const SyntheticSequence& seq, int a, int b) {
  seq.frame(a);
  seq.frame(b);
  const Resolution r = seq.resolution();
  GroundTruthFlow out{FlowField(r), ValidityMask(r, 1)};
  if (a == b) return out;
  for (int y = 0; y < r.height; ++y) {
    for (int x = 0; x < r.width; ++x) {
      const Point2 p{static_cast<double>(x), static_cast<double>(y)};
      const Point2 q = seq.transfer(seq.owner_at(a, p), a, b, p);
      out.flow(x, y) = {static_cast<float>(q.x - p.x), static_cast<float>(q.y - p.y)};
    }
  }
  return out;
}

OcclusionMap gt_occlusion(const SyntheticSequence& seq, int a, int b) {
  seq.frame(a);
  seq.frame(b);
  const Resolution r = seq.resolution();
  OcclusionMap out(r, 0.0f);
  for (int y = 0; y < r.height; ++y) {
    for (int x = 0; x < r.width; ++x) {
      const Point2 p{static_cast<double>(x), static_cast<double>(y)};
      if (!seq.observe(seq.owner_at(a, p), a, b, p).visible) out(x, y) = 1.0f;
    }
  }
  return out;
}

std::vector<TrackPoint> gt_track_from(const SyntheticSequence& seq, int query_frame, Point2 p,
                                      std::span<const int> frames) {
  seq.frame(query_frame);
  if (!in_bounds(seq.resolution(), p)) {
    throw ArgumentError("gt_track: query point outside frame " + std::to_string(query_frame));
  }
  const int owner = seq.owner_at(query_frame, p);
  std::vector<TrackPoint> out;
  out.reserve(frames.size());
  for (int f : frames) {
    seq.frame(f);
    out.push_back(seq.observe(owner, query_frame, f, p));
  }
  return out;
}

std::vector<TrackPoint> gt_track(const SyntheticSequence& seq, Point2 p, std::span<const int> frames) {
  return gt_track_from(seq, 1, p, frames);
}

}  // namespace mftiq::synth
