#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mftiq/map2d.hpp"
#include "mftiq/track.hpp"

// Layered 2D sprite scenes with closed-form ground truth.
//
// World coordinates coincide with image coordinates of frame 1. The camera is a
// pure image-space pan: at frame k every world point w is seen at
// w + camera_motion * (k - 1). Layers are textured rectangles whose pose
// (center, rotation, uniform scale) follows a piecewise-linear keyframe
// trajectory in world space. Later layers are drawn on top of earlier ones.
namespace mftiq::synth {

struct TextureSpec {
  std::uint64_t seed = 0;
  // Lattice spacing of the value noise, in pixels. Larger is smoother.
  double scale = 4.0;
};

struct Pose {
  double x = 0.0;
  double y = 0.0;
  double angle = 0.0;  // radians; positive turns +x towards +y
  double scale = 1.0;
};

struct Keyframe {
  int frame = 1;
  Pose pose;
};

struct LayerSpec {
  double width = 0.0;
  double height = 0.0;
  std::vector<Keyframe> keyframes;
  TextureSpec texture;
};

struct SceneSpec {
  Resolution resolution{64, 64};
  int frame_count = 2;
  TextureSpec background;
  std::vector<LayerSpec> layers;  // topmost last
  Point2 camera_motion{0.0, 0.0};  // pixels per frame
  bool replay_back_and_forth = false;
  // Span over which layer motion is simulated before replay kicks in; 0 means
  // "the whole sequence".
  int simulation_frames = 0;
  double noise_sigma = 0.0;
};

// Throws ArgumentError when the spec cannot be rendered.
void validate(const SceneSpec& spec);

// JSON document form of a scene. Unknown keys are rejected; errors carry the
// offending line number.
SceneSpec parse_scene_spec(std::string_view json_text);
SceneSpec load_scene_spec(const std::filesystem::path& path);
std::string to_json(const SceneSpec& spec);

class SyntheticSequence {
 public:
  const SceneSpec& spec() const { return spec_; }
  std::uint64_t seed() const { return seed_; }
  int frame_count() const { return spec_.frame_count; }
  Resolution resolution() const { return spec_.resolution; }

  // 1-based.
  const Image& frame(int index) const;
  const std::vector<Image>& frames() const { return frames_; }

  // World pose of layer `layer` at frame `index` after replay mapping.
  Pose layer_pose(int layer, int index) const;
  Point2 camera_offset(int index) const;

  // Topmost layer covering image position p at frame `index`; -1 for background.
  int owner_at(int index, Point2 p) const;
  bool layer_covers(int layer, int index, Point2 p) const;

  // Image position at frame `to` of the surface point seen at p in frame
  // `from` on surface `owner` (-1 background).
  Point2 transfer(int owner, int from, int to, Point2 p) const;

  // Same point, plus whether it is visible at `to` (inside the image and not
  // covered by a layer above its own).
  TrackPoint observe(int owner, int from, int to, Point2 p) const;

 private:
  friend SyntheticSequence generate_sequence(const SceneSpec& spec, std::uint64_t seed);

  void check_index(int index) const;

  SceneSpec spec_;
  std::uint64_t seed_ = 0;
  std::vector<Image> frames_;
  // poses_[frame - 1][layer]
  std::vector<std::vector<Pose>> poses_;
};

// Maps a frame index onto the simulated span, bouncing back and forth.
int replay_frame(int index, int simulation_frames);

SyntheticSequence generate_sequence(const SceneSpec& spec, std::uint64_t seed);

struct GroundTruthFlow {
  FlowField flow;
  ValidityMask valid;
};

GroundTruthFlow gt_flow(const SyntheticSequence& seq, int a, int b);
OcclusionMap gt_occlusion(const SyntheticSequence& seq, int a, int b);

// Trajectory of the scene point seen at p on frame 1.
std::vector<TrackPoint> gt_track(const SyntheticSequence& seq, Point2 p, std::span<const int> frames);
// Trajectory of the scene point seen at p on frame `query_frame`.
std::vector<TrackPoint> gt_track_from(const SyntheticSequence& seq, int query_frame, Point2 p,
                                      std::span<const int> frames);

// Deterministic value-noise texture in [0, 1].
float texture_value(const TextureSpec& texture, std::uint64_t seed, double u, double v);

}  // namespace mftiq::synth
