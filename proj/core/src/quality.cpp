#include "mftiq/quality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mftiq/flow.hpp"
#include "mftiq/image_ops.hpp"
#include "mftiq/providers.hpp"
#include "mftiq/synth.hpp"

namespace mftiq::quality {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double bce(double prediction, double label) {
  const double p = std::clamp(prediction, kBceEpsilon, 1.0 - kBceEpsilon);
  return -(label * std::log(p) + (1.0 - label) * std::log(1.0 - p));
}

}  // namespace

ThresholdClassifierBank::ThresholdClassifierBank(std::vector<ScalarMap> maps) : maps_(std::move(maps)) {
  if (maps_.size() != kNumThresholds) {
    throw ArgumentError("classifier bank needs " + std::to_string(kNumThresholds) + " maps, got " +
                        std::to_string(maps_.size()));
  }
  for (const ScalarMap& m : maps_) {
    require_same_shape(m, maps_.front(), "classifier bank");
    for (float v : m.pixels()) {
      if (!(v >= 0.0f && v <= 1.0f)) throw ArgumentError("classifier bank: value outside [0, 1]");
    }
  }
}

CostMap aggregate_cost(const ThresholdClassifierBank& bank) {
  CostMap out(bank.resolution(), 0.0f);
  for (std::size_t i = 0; i < out.size(); ++i) {
    double e = 0.0;
    for (int theta = 1; theta <= kNumThresholds; ++theta) {
      e += std::ldexp(1.0, theta - 1) * bank.map(theta)[i];
    }
    out[i] = static_cast<float>(e);
  }
  return out;
}

LabelMap make_labels(const FlowField& pred, const FlowField& gt, const OcclusionMap& occlusion_gt, double theta) {
  require_same_shape(pred, gt, "make_labels");
  require_same_shape(pred, occlusion_gt, "make_labels");
  if (!(theta > 0.0)) throw ArgumentError("make_labels: theta must be positive");
  const ScalarMap epe = endpoint_error(pred, gt);
  LabelMap out(pred.resolution(), 0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = (epe[i] > theta || occlusion_gt[i] > kOcclusionThreshold) ? 1 : 0;
  }
  return out;
}

double training_loss(const OcclusionMap& occlusion_pred, const OcclusionMap& occlusion_gt,
                     const ThresholdClassifierBank& match_pred, std::span<const LabelMap> match_labels,
                     const ValidityMask& valid) {
  require_same_shape(occlusion_pred, occlusion_gt, "training_loss");
  require_same_shape(occlusion_pred, valid, "training_loss");
  if (occlusion_pred.resolution() != match_pred.resolution()) {
    throw DimensionError("training_loss: classifier bank resolution mismatch");
  }
  if (match_labels.size() != kNumThresholds) {
    throw DimensionError("training_loss: expected 5 label maps, got " + std::to_string(match_labels.size()));
  }
  for (const LabelMap& l : match_labels) require_same_shape(occlusion_pred, l, "training_loss");
  if (occlusion_pred.empty()) throw DimensionError("training_loss: empty maps");

  double total = 0.0;
  for (std::size_t i = 0; i < occlusion_pred.size(); ++i) {
    if (!valid[i]) continue;
    double match = 0.0;
    for (int theta = 1; theta <= kNumThresholds; ++theta) {
      match += bce(match_pred.map(theta)[i], match_labels[static_cast<std::size_t>(theta - 1)][i]);
    }
    total += bce(occlusion_pred[i], occlusion_gt[i] > kOcclusionThreshold ? 1.0 : 0.0) + match / kNumThresholds;
  }
  return total / static_cast<double>(occlusion_pred.size());
}

FeatureMap::FeatureMap(int width, int height, int channels)
    : width_(width), height_(height), channels_(channels),
      data_(static_cast<std::size_t>(width) * height * channels, 0.0f) {
  if (width < 0 || height < 0 || channels < 1) throw ArgumentError("FeatureMap: bad shape");
}

std::span<float> FeatureMap::at(int x, int y) {
  return {data_.data() + (static_cast<std::size_t>(y) * width_ + x) * channels_, static_cast<std::size_t>(channels_)};
}

std::span<const float> FeatureMap::at(int x, int y) const {
  return {data_.data() + (static_cast<std::size_t>(y) * width_ + x) * channels_, static_cast<std::size_t>(channels_)};
}

WarpedFeatures warp_features(const FeatureMap& features, const FlowField& chain) {
  if (features.resolution() != chain.resolution()) {
    throw DimensionError("warp_features: chain " + to_string(chain.resolution()) + " vs features " +
                         to_string(features.resolution()));
  }
  const int w = features.width(), h = features.height(), c = features.channels();
  WarpedFeatures out{FeatureMap(w, h, c), ValidityMask(chain.resolution(), 1)};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double qx = x + static_cast<double>(chain(x, y).x);
      const double qy = y + static_cast<double>(chain(x, y).y);
      if (!in_bounds(features.resolution(), {qx, qy})) {
        out.in_bounds(x, y) = 0;
        continue;
      }
      const int x0 = static_cast<int>(std::floor(qx)), y0 = static_cast<int>(std::floor(qy));
      const int x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, h - 1);
      const double fx = qx - x0, fy = qy - y0;
      auto dst = out.features.at(x, y);
      const auto a = features.at(x0, y0), b = features.at(x1, y0), cc = features.at(x0, y1), d = features.at(x1, y1);
      for (int k = 0; k < c; ++k) {
        const double top = (1.0 - fx) * a[k] + fx * b[k];
        const double bottom = (1.0 - fx) * cc[k] + fx * d[k];
        dst[k] = static_cast<float>((1.0 - fy) * top + fy * bottom);
      }
    }
  }
  return out;
}

CostVolume::CostVolume(int width, int height, int radius)
    : width_(width), height_(height), radius_(radius),
      scores_(static_cast<std::size_t>(width) * height * (2 * radius + 1) * (2 * radius + 1), 0.0f) {
  if (radius < 0) throw ArgumentError("CostVolume: negative radius");
}

std::size_t CostVolume::offset(int x, int y, int dx, int dy) const {
  const int win = window();
  return ((static_cast<std::size_t>(y) * width_ + x) * win + (dy + radius_)) * win + (dx + radius_);
}

namespace {

FeatureMap normalized(const FeatureMap& f) {
  FeatureMap out = f;
  for (int y = 0; y < f.height(); ++y) {
    for (int x = 0; x < f.width(); ++x) {
      auto v = out.at(x, y);
      double norm = 0.0;
      for (float c : v) norm += static_cast<double>(c) * c;
      norm = std::sqrt(norm);
      for (float& c : v) c = norm > 0.0 ? static_cast<float>(c / norm) : 0.0f;
    }
  }
  return out;
}

}  // namespace

CostVolume local_cost_volume(const FeatureMap& template_features, const FeatureMap& warped_features, int radius) {
  if (template_features.resolution() != warped_features.resolution() ||
      template_features.channels() != warped_features.channels()) {
    throw DimensionError("local_cost_volume: feature map shapes differ");
  }
  const FeatureMap a = normalized(template_features);
  const FeatureMap b = normalized(warped_features);
  const int w = a.width(), h = a.height();
  CostVolume volume(w, h, radius);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto fa = a.at(x, y);
      for (int dy = -radius; dy <= radius; ++dy) {
        for (int dx = -radius; dx <= radius; ++dx) {
          const int qx = x + dx, qy = y + dy;
          if (qx < 0 || qy < 0 || qx >= w || qy >= h) continue;
          const auto fb = b.at(qx, qy);
          double dot = 0.0;
          for (std::size_t k = 0; k < fa.size(); ++k) dot += static_cast<double>(fa[k]) * fb[k];
          volume.score(x, y, dx, dy) = static_cast<float>(dot);
        }
      }
    }
  }
  return volume;
}

ScalarMap peak_sharpness(const CostVolume& volume) {
  ScalarMap out(volume.width(), volume.height());
  const int r = volume.radius();
  for (int y = 0; y < volume.height(); ++y) {
    for (int x = 0; x < volume.width(); ++x) {
      float best_other = -std::numeric_limits<float>::infinity();
      for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
          if (dx == 0 && dy == 0) continue;
          best_other = std::max(best_other, volume.score(x, y, dx, dy));
        }
      }
      out(x, y) = r == 0 ? volume.score(x, y, 0, 0) : volume.score(x, y, 0, 0) - best_other;
    }
  }
  return out;
}

FeatureMap classical_features(const Image& image, const ClassicalQualityParams& params) {
  if (image.empty()) throw DimensionError("classical_features: empty image");
  const Image small = downsample_box(image, params.feature_stride);
  const Image centred = subtract_local_mean(small, 2);
  const Gradients g = central_gradients(small);
  const Image* channels[] = {&centred, &g.gx, &g.gy};
  const int r = params.patch_radius;
  const int side = 2 * r + 1;
  FeatureMap out(small.width(), small.height(), 3 * side * side);
  for (int y = 0; y < small.height(); ++y) {
    for (int x = 0; x < small.width(); ++x) {
      auto v = out.at(x, y);
      std::size_t k = 0;
      for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
          const int sx = std::clamp(x + dx, 0, small.width() - 1);
          const int sy = std::clamp(y + dy, 0, small.height() - 1);
          for (const Image* ch : channels) v[k++] = (*ch)(sx, sy);
        }
      }
    }
  }
  return out;
}

ThresholdClassifierBank classical_bank(const FlowField& chain, const Image& template_image,
                                       const Image& current_image, const ClassicalQualityParams& params) {
  require_same_shape(chain, template_image, "classical_estimate");
  require_same_shape(chain, current_image, "classical_estimate");
  const FeatureMap f1 = classical_features(template_image, params);
  const FeatureMap ft = classical_features(current_image, params);
  const double sx = static_cast<double>(f1.width()) / chain.width();
  const double sy = static_cast<double>(f1.height()) / chain.height();
  const FlowField small_chain = scale_flow(chain, sx, sy);
  const WarpedFeatures warped = warp_features(ft, small_chain);
  const ScalarMap sharp = peak_sharpness(local_cost_volume(f1, warped.features));

  std::vector<ScalarMap> maps;
  for (int theta = 1; theta <= kNumThresholds; ++theta) {
    const double c = params.offsets[static_cast<std::size_t>(theta - 1)];
    ScalarMap m(chain.resolution());
    for (int y = 0; y < chain.height(); ++y) {
      for (int x = 0; x < chain.width(); ++x) {
        // Full-resolution pixel centre in feature coordinates.
        const Point2 q{(x + 0.5) * sx - 0.5, (y + 0.5) * sy - 0.5};
        const double s = bilinear_sample(sharp, q).value;
        m(x, y) = static_cast<float>(sigmoid(params.kappa * (c - s)));
      }
    }
    maps.push_back(std::move(m));
  }
  return ThresholdClassifierBank(std::move(maps));
}

QualityOutput classical_estimate(const FlowField& chain, const Image& template_image, const Image& current_image,
                                 const FlowField* flow_back, const ClassicalQualityParams& params) {
  if (flow_back) require_same_shape(chain, *flow_back, "classical_estimate");
  QualityOutput out{aggregate_cost(classical_bank(chain, template_image, current_image, params)),
                    OcclusionMap(chain.resolution(), 0.0f)};
  const Resolution res = chain.resolution();
  for (int y = 0; y < res.height; ++y) {
    for (int x = 0; x < res.width; ++x) {
      const Vec2f d = chain(x, y);
      const Point2 q{x + static_cast<double>(d.x), y + static_cast<double>(d.y)};
      bool occluded = !in_bounds(res, q);
      if (!occluded) {
        const double residual = std::abs(bilinear_sample(current_image, q).value - template_image(x, y));
        occluded = residual > params.tau_photo;
      }
      if (!occluded && flow_back) {
        const Vec2f back = bilinear_sample(*flow_back, q).value;
        const double fb = std::hypot(static_cast<double>(d.x) + back.x, static_cast<double>(d.y) + back.y);
        occluded = fb > params.fb_base + params.fb_slope * std::hypot(d.x, d.y);
      }
      out.occlusion(x, y) = occluded ? 1.0f : 0.0f;
    }
  }
  return out;
}

ClassicalEstimator::ClassicalEstimator(ClassicalQualityParams params, std::shared_ptr<const FlowProvider> backward_flow)
    : params_(params), backward_(std::move(backward_flow)) {}

QualityOutput ClassicalEstimator::estimate(const FlowField& chain, FrameView template_frame,
                                           FrameView current_frame) const {
  if (!template_frame.image || !current_frame.image) throw ArgumentError("estimate: missing frame image");
  if (backward_) {
    const FlowField back = backward_->get_flow(current_frame.index, template_frame.index);
    return classical_estimate(chain, *template_frame.image, *current_frame.image, &back, params_);
  }
  return classical_estimate(chain, *template_frame.image, *current_frame.image, nullptr, params_);
}

GroundTruthOracle::GroundTruthOracle(const synth::SyntheticSequence& seq, double sharpness)
    : seq_(&seq), sharpness_(sharpness) {
  if (sharpness < 0.0) throw ArgumentError("oracle sharpness must be >= 0");
}

ThresholdClassifierBank GroundTruthOracle::bank(const FlowField& chain, int template_index, int current_index) const {
  if (chain.resolution() != seq_->resolution()) {
    throw DimensionError("oracle: chain " + to_string(chain.resolution()) + " vs sequence " +
                         to_string(seq_->resolution()));
  }
  const FlowField gt = synth::gt_flow(*seq_, template_index, current_index).flow;
  const OcclusionMap occ = synth::gt_occlusion(*seq_, template_index, current_index);
  const ScalarMap epe = endpoint_error(chain, gt);
  std::vector<ScalarMap> maps;
  for (int theta = 1; theta <= kNumThresholds; ++theta) {
    ScalarMap m(chain.resolution());
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (occ[i] > kOcclusionThreshold) {
        m[i] = 1.0f;
      } else if (sharpness_ == 0.0) {
        m[i] = epe[i] > theta ? 1.0f : 0.0f;
      } else {
        m[i] = static_cast<float>(sigmoid(sharpness_ * (epe[i] - theta)));
      }
    }
    maps.push_back(std::move(m));
  }
  return ThresholdClassifierBank(std::move(maps));
}

QualityOutput GroundTruthOracle::estimate(const FlowField& chain, FrameView template_frame,
                                          FrameView current_frame) const {
  return {aggregate_cost(bank(chain, template_frame.index, current_frame.index)),
          synth::gt_occlusion(*seq_, template_frame.index, current_frame.index)};
}

}  // namespace mftiq::quality
