#pragma once

#include <array>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mftiq/map2d.hpp"

namespace mftiq {
class FlowProvider;
namespace synth {
class SyntheticSequence;
}
}  // namespace mftiq

namespace mftiq::quality {

// EPE thresholds theta = 1..5 px of the binary match classifiers.
inline constexpr int kNumThresholds = 5;
inline constexpr float kMaxCost = 31.0f;  // sum of 2^(theta-1), theta = 1..5

struct QualityOutput {
  CostMap cost;
  OcclusionMap occlusion;
};

// Independent quality: {E, O} = Q(chain, I_1, I_t). The result must depend on
// the chain and the two frames only, never on how the chain was assembled.
class QualityEstimator {
 public:
  virtual ~QualityEstimator() = default;

  virtual QualityOutput estimate(const FlowField& chain, FrameView template_frame, FrameView current_frame) const = 0;
  virtual std::string name() const = 0;
};

// Soft outputs E_theta in [0, 1] of the five threshold classifiers.
class ThresholdClassifierBank {
 public:
  explicit ThresholdClassifierBank(std::vector<ScalarMap> maps);

  // theta in 1..5
  const ScalarMap& map(int theta) const { return maps_.at(static_cast<std::size_t>(theta - 1)); }
  Resolution resolution() const { return maps_.front().resolution(); }

 private:
  std::vector<ScalarMap> maps_;
};

// E = sum_theta 2^(theta-1) E_theta.
CostMap aggregate_cost(const ThresholdClassifierBank& bank);

using LabelMap = Map2D<std::uint8_t>;

// 1 where EPE > theta or the pixel is occluded, 0 where visible and EPE <= theta.
LabelMap make_labels(const FlowField& pred, const FlowField& gt, const OcclusionMap& occlusion_gt, double theta);

inline constexpr double kBceEpsilon = 1e-7;

// Mean over all pixels of V * (BCE(occlusion) + mean_theta BCE(match_theta)).
// `match_labels` holds the five per-theta label maps in theta order.
double training_loss(const OcclusionMap& occlusion_pred, const OcclusionMap& occlusion_gt,
                     const ThresholdClassifierBank& match_pred, std::span<const LabelMap> match_labels,
                     const ValidityMask& valid);

// Channel-interleaved dense feature map.
class FeatureMap {
 public:
  FeatureMap() = default;
  FeatureMap(int width, int height, int channels);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  Resolution resolution() const { return {width_, height_}; }

  std::span<float> at(int x, int y);
  std::span<const float> at(int x, int y) const;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<float> data_;
};

struct WarpedFeatures {
  FeatureMap features;
  ValidityMask in_bounds;  // 0 where p + chain[p] left the map; those features are zero
};

// Backward warp into template geometry; `chain` must already be at feature resolution.
WarpedFeatures warp_features(const FeatureMap& features, const FlowField& chain);

inline constexpr int kCostVolumeRadius = 3;

// Per-pixel normalized correlation over a (2r+1)^2 displacement window.
class CostVolume {
 public:
  CostVolume(int width, int height, int radius);

  int width() const { return width_; }
  int height() const { return height_; }
  int radius() const { return radius_; }
  int window() const { return 2 * radius_ + 1; }

  float score(int x, int y, int dx, int dy) const { return scores_[offset(x, y, dx, dy)]; }
  float& score(int x, int y, int dx, int dy) { return scores_[offset(x, y, dx, dy)]; }

 private:
  std::size_t offset(int x, int y, int dx, int dy) const;

  int width_, height_, radius_;
  std::vector<float> scores_;
};

// score(p, d) = <f_t(p)/|f_t(p)|, f_w(p+d)/|f_w(p+d)|>; zero vectors and
// out-of-map neighbours score 0.
CostVolume local_cost_volume(const FeatureMap& template_features, const FeatureMap& warped_features,
                             int radius = kCostVolumeRadius);

// s(p, 0) - max_{d != 0} s(p, d). Positive when the zero displacement is the
// strict correlation peak.
ScalarMap peak_sharpness(const CostVolume& volume);

struct ClassicalQualityParams {
  int feature_stride = 4;
  // Neighbourhood stacked into each feature vector (0 = single pixel).
  int patch_radius = 1;
  double kappa = 4.0;
  // c_theta, theta = 1..5; decreasing so larger thresholds are laxer.
  std::array<double, kNumThresholds> offsets{0.0, -0.2, -0.4, -0.6, -0.8};
  double tau_photo = 0.25;
  double fb_base = 1.5;
  double fb_slope = 0.05;
};

// Zero-mean intensity and two gradient channels at 1/stride resolution,
// stacked over a (2 patch_radius + 1)^2 neighbourhood.
FeatureMap classical_features(const Image& image, const ClassicalQualityParams& params = {});

// Hand-crafted estimator. `flow_back` maps I_t to I_1 and enables the
// forward-backward occlusion test.
QualityOutput classical_estimate(const FlowField& chain, const Image& template_image, const Image& current_image,
                                 const FlowField* flow_back = nullptr, const ClassicalQualityParams& params = {});

// Classifier bank behind classical_estimate, exposed for inspection.
ThresholdClassifierBank classical_bank(const FlowField& chain, const Image& template_image,
                                       const Image& current_image, const ClassicalQualityParams& params = {});

class ClassicalEstimator final : public QualityEstimator {
 public:
  explicit ClassicalEstimator(ClassicalQualityParams params = {},
                              std::shared_ptr<const FlowProvider> backward_flow = nullptr);

  QualityOutput estimate(const FlowField& chain, FrameView template_frame, FrameView current_frame) const override;
  std::string name() const override { return "classical"; }

 private:
  ClassicalQualityParams params_;
  std::shared_ptr<const FlowProvider> backward_;
};

// Ground-truth quality for synthetic sequences. E_theta = sigmoid(s (EPE - theta))
// on visible pixels (s = sharpness; s = 0 gives the hard labels EPE > theta) and
// 1 on occluded ones. O is the ground-truth occlusion of the template pixel.
class GroundTruthOracle final : public QualityEstimator {
 public:
  explicit GroundTruthOracle(const synth::SyntheticSequence& seq, double sharpness = 8.0);

  QualityOutput estimate(const FlowField& chain, FrameView template_frame, FrameView current_frame) const override;
  std::string name() const override { return "oracle"; }

  ThresholdClassifierBank bank(const FlowField& chain, int template_index, int current_index) const;

 private:
  const synth::SyntheticSequence* seq_;
  double sharpness_;
};

}  // namespace mftiq::quality
