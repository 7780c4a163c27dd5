#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "mftiq/flow.hpp"
#include "mftiq/providers.hpp"
#include "mftiq/quality.hpp"
#include "mftiq/synth.hpp"
#include "scenes.hpp"

using namespace mftiq;
using namespace mftiq::quality;

namespace {

ThresholdClassifierBank constant_bank(std::array<float, 5> values, Resolution r = {3, 2}) {
  std::vector<ScalarMap> maps;
  for (float v : values) maps.emplace_back(r, v);
  return ThresholdClassifierBank(std::move(maps));
}

FeatureMap random_features(std::mt19937& rng, int w, int h, int c) {
  std::normal_distribution<float> n(0, 1);
  FeatureMap f(w, h, c);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (float& v : f.at(x, y)) v = n(rng);
  return f;
}

double mean_over(const ScalarMap& m, const auto& keep) {
  double s = 0;
  std::size_t n = 0;
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      if (!keep(x, y)) continue;
      s += m(x, y);
      ++n;
    }
  }
  return n ? s / double(n) : 0.0;
}

}  // namespace

TEST(AggregateCost, Examples) {
  EXPECT_EQ(aggregate_cost(constant_bank({0, 0, 0, 0, 0}))(0, 0), 0.0f);
  EXPECT_EQ(aggregate_cost(constant_bank({1, 1, 1, 1, 1}))(0, 0), 31.0f);
  EXPECT_EQ(aggregate_cost(constant_bank({1, 0.5f, 0.5f, 0.5f, 0.5f}))(2, 1), 16.0f);
}

TEST(AggregateCost, MonotoneInEachClassifier) {
  std::mt19937 rng(1);
  std::uniform_real_distribution<float> u(0, 1);
  for (int trial = 0; trial < 200; ++trial) {
    std::array<float, 5> v{u(rng), u(rng), u(rng), u(rng), u(rng)};
    const float base = aggregate_cost(constant_bank(v))(0, 0);
    const int k = trial % 5;
    v[k] = std::min(1.0f, v[k] + u(rng));
    EXPECT_GE(aggregate_cost(constant_bank(v))(0, 0), base);
  }
}

TEST(ClassifierBank, RejectsBadInput) {
  std::vector<ScalarMap> four(4, ScalarMap(2, 2));
  EXPECT_THROW(ThresholdClassifierBank{four}, ArgumentError);
  std::vector<ScalarMap> bad(5, ScalarMap(2, 2));
  bad[2](0, 0) = 1.5f;
  EXPECT_THROW(ThresholdClassifierBank{bad}, ArgumentError);
}

TEST(Labels, Examples) {
  const FlowField gt(4, 4, {1, 1});
  const OcclusionMap none(4, 4);
  for (int theta = 1; theta <= 5; ++theta)
    EXPECT_EQ(make_labels(gt, gt, none, theta), LabelMap(4, 4, 0));
  const FlowField off(4, 4, {1 + 3, 1});
  EXPECT_EQ(make_labels(off, gt, none, 2), LabelMap(4, 4, 1));
  EXPECT_EQ(make_labels(off, gt, none, 4), LabelMap(4, 4, 0));
  EXPECT_THROW(make_labels(off, gt, none, 0), ArgumentError);
}

TEST(Labels, RandomMatchesPredicateAndNests) {
  std::mt19937 rng(2);
  std::uniform_real_distribution<float> u(-6, 6), p(0, 1);
  FlowField a(10, 10), b(10, 10);
  OcclusionMap o(10, 10);
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = {u(rng), u(rng)};
    b[i] = {u(rng), u(rng)};
    o[i] = p(rng);
  }
  for (int theta = 1; theta <= 5; ++theta) {
    const LabelMap l = make_labels(a, b, o, theta);
    const LabelMap next = make_labels(a, b, o, theta + 1);
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double epe = std::hypot(double(a[i].x) - b[i].x, double(a[i].y) - b[i].y);
      EXPECT_EQ(l[i], (epe > theta || o[i] > 0.5f) ? 1 : 0);
      EXPECT_LE(next[i], l[i]);
    }
  }
}

TEST(TrainingLoss, Examples) {
  const Resolution r{4, 3};
  const OcclusionMap half(r, 0.5f);
  const auto bank_half = constant_bank({0.5f, 0.5f, 0.5f, 0.5f, 0.5f}, r);
  std::vector<LabelMap> labels(5, LabelMap(r, 1));
  const ValidityMask all(r, 1), none(r, 0);
  EXPECT_NEAR(training_loss(half, OcclusionMap(r, 1.0f), bank_half, labels, all), 2.0 * std::log(2.0), 1e-6);
  EXPECT_EQ(training_loss(half, OcclusionMap(r, 1.0f), bank_half, labels, none), 0.0);

  // Confident predictions equal to the labels.
  const auto bank_ones = constant_bank({1, 1, 1, 1, 1}, r);
  EXPECT_LE(training_loss(OcclusionMap(r, 0.0f), OcclusionMap(r, 0.0f), bank_ones, labels, all), 1e-5);
  EXPECT_THROW(training_loss(half, half, bank_half, std::span<const LabelMap>(labels).first(4), all),
               DimensionError);
}

TEST(TrainingLoss, NonNegativeOnRandomInput) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<float> u(0, 1);
  const Resolution r{5, 5};
  for (int trial = 0; trial < 20; ++trial) {
    OcclusionMap op(r), og(r);
    std::vector<ScalarMap> maps(5, ScalarMap(r));
    std::vector<LabelMap> labels(5, LabelMap(r));
    ValidityMask v(r);
    for (std::size_t i = 0; i < op.size(); ++i) {
      op[i] = u(rng);
      og[i] = u(rng) > 0.5f;
      v[i] = u(rng) > 0.3f;
      for (int k = 0; k < 5; ++k) {
        maps[k][i] = u(rng);
        labels[k][i] = u(rng) > 0.5f;
      }
    }
    EXPECT_GE(training_loss(op, og, ThresholdClassifierBank(maps), labels, v), 0.0);
  }
}

TEST(WarpFeatures, ZeroAndIntegerShift) {
  std::mt19937 rng(4);
  const FeatureMap f = random_features(rng, 6, 5, 3);
  const auto same = warp_features(f, FlowField(6, 5));
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 6; ++x)
      for (int c = 0; c < 3; ++c) EXPECT_EQ(same.features.at(x, y)[c], f.at(x, y)[c]);

  const auto shifted = warp_features(f, FlowField(6, 5, {1, 0}));
  for (int y = 0; y < 5; ++y) {
    for (int x = 0; x < 5; ++x) {
      EXPECT_EQ(shifted.in_bounds(x, y), 1);
      for (int c = 0; c < 3; ++c) EXPECT_EQ(shifted.features.at(x, y)[c], f.at(x + 1, y)[c]);
    }
    EXPECT_EQ(shifted.in_bounds(5, y), 0);
    for (int c = 0; c < 3; ++c) EXPECT_EQ(shifted.features.at(5, y)[c], 0.0f);
  }
  EXPECT_THROW(warp_features(f, FlowField(5, 5)), DimensionError);
}

TEST(WarpFeatures, RandomFlowMatchesScalarSampling) {
  std::mt19937 rng(5);
  const FeatureMap f = random_features(rng, 7, 6, 2);
  std::uniform_real_distribution<float> u(-1.5f, 1.5f);
  FlowField flow(7, 6);
  for (auto& v : flow.pixels()) v = {u(rng), u(rng)};
  const auto w = warp_features(f, flow);
  for (int c = 0; c < 2; ++c) {
    ScalarMap channel(7, 6);
    for (int y = 0; y < 6; ++y)
      for (int x = 0; x < 7; ++x) channel(x, y) = f.at(x, y)[c];
    for (int y = 0; y < 6; ++y) {
      for (int x = 0; x < 7; ++x) {
        const Point2 q{x + double(flow(x, y).x), y + double(flow(x, y).y)};
        if (!in_bounds({7, 6}, q)) continue;
        EXPECT_NEAR(w.features.at(x, y)[c], bilinear_sample(channel, q).value, 1e-5);
      }
    }
  }
}

TEST(CostVolume, SelfCorrelationPeaksAtZero) {
  std::mt19937 rng(6);
  const FeatureMap f = random_features(rng, 12, 10, 8);
  const CostVolume v = local_cost_volume(f, f);
  ASSERT_EQ(v.window(), 7);
  for (int y = 3; y < 7; ++y) {
    for (int x = 3; x < 9; ++x) {
      EXPECT_NEAR(v.score(x, y, 0, 0), 1.0f, 1e-5);
      for (int dy = -3; dy <= 3; ++dy)
        for (int dx = -3; dx <= 3; ++dx)
          if (dx || dy) EXPECT_LT(v.score(x, y, dx, dy), v.score(x, y, 0, 0));
    }
  }
  const ScalarMap sharp = peak_sharpness(v);
  for (int y = 3; y < 7; ++y)
    for (int x = 3; x < 9; ++x) EXPECT_GT(sharp(x, y), 0.0f);
}

TEST(CostVolume, ShiftedPeak) {
  std::mt19937 rng(7);
  const FeatureMap f = random_features(rng, 12, 10, 8);
  FeatureMap g(12, 10, 8);
  for (int y = 0; y < 10; ++y)
    for (int x = 1; x < 12; ++x)
      for (int c = 0; c < 8; ++c) g.at(x, y)[c] = f.at(x - 1, y)[c];
  const CostVolume v = local_cost_volume(f, g);
  for (int y = 3; y < 7; ++y) {
    for (int x = 3; x < 8; ++x) {
      int bx = 0, by = 0;
      float best = -2;
      for (int dy = -3; dy <= 3; ++dy) {
        for (int dx = -3; dx <= 3; ++dx) {
          if (v.score(x, y, dx, dy) > best) {
            best = v.score(x, y, dx, dy);
            bx = dx;
            by = dy;
          }
        }
      }
      EXPECT_EQ(bx, 1);
      EXPECT_EQ(by, 0);
    }
  }
}

TEST(CostVolume, RandomMatchesTripleLoop) {
  std::mt19937 rng(8);
  const FeatureMap a = random_features(rng, 9, 8, 5), b = random_features(rng, 9, 8, 5);
  const CostVolume v = local_cost_volume(a, b);
  auto norm = [](std::span<const float> s) {
    double n = 0;
    for (float x : s) n += double(x) * x;
    return std::sqrt(n);
  };
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 9; ++x) {
      for (int dy = -3; dy <= 3; ++dy) {
        for (int dx = -3; dx <= 3; ++dx) {
          double expect = 0;
          if (x + dx >= 0 && x + dx < 9 && y + dy >= 0 && y + dy < 8) {
            const auto p = a.at(x, y), q = b.at(x + dx, y + dy);
            double dot = 0;
            for (int c = 0; c < 5; ++c) dot += double(p[c]) * q[c];
            expect = dot / (norm(p) * norm(q));
          }
          EXPECT_NEAR(v.score(x, y, dx, dy), expect, 1e-5);
        }
      }
    }
  }
  EXPECT_THROW(local_cost_volume(a, random_features(rng, 9, 7, 5)), DimensionError);
}

TEST(CostVolume, ZeroVectorsScoreZero) {
  FeatureMap a(4, 4, 2), b(4, 4, 2);
  const CostVolume v = local_cost_volume(a, b);
  EXPECT_EQ(v.score(1, 1, 0, 0), 0.0f);
}

TEST(ClassicalFeatures, ShapeAtQuarterResolution) {
  const auto seq = synth::generate_sequence(mftiq::testing::panning_scene({0, 0}, 2, {64, 48}), 1);
  const FeatureMap f = classical_features(seq.frame(1));
  EXPECT_EQ(f.resolution(), (Resolution{16, 12}));
  EXPECT_EQ(f.channels(), 27);
}

class Oracle : public ::testing::Test {
 protected:
  Oracle() : seq(synth::generate_sequence(mftiq::testing::translating_layer_scene({1.5, 0.5}, {0.5, -0.25}, 8), 4)) {}
  synth::SyntheticSequence seq;
};

TEST_F(Oracle, PerfectChainHasNearZeroCost) {
  GroundTruthOracle q(seq);
  const FlowField gt = synth::gt_flow(seq, 1, 6).flow;
  const OcclusionMap occ = synth::gt_occlusion(seq, 1, 6);
  const auto out = q.estimate(gt, {1, &seq.frame(1)}, {6, &seq.frame(6)});
  EXPECT_EQ(out.occlusion, occ);
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (occ[i] > 0.5f) {
      EXPECT_EQ(out.cost[i], 31.0f);
    } else {
      EXPECT_LT(out.cost[i], 0.01f);
    }
  }
}

TEST_F(Oracle, TenPixelOffsetSaturates) {
  GroundTruthOracle hard(seq, 0.0);
  FlowField off = synth::gt_flow(seq, 1, 6).flow;
  for (auto& v : off.pixels()) v.x += 10.0f;
  const auto bank = hard.bank(off, 1, 6);
  for (int theta = 1; theta <= 5; ++theta)
    for (float v : bank.map(theta).pixels()) EXPECT_EQ(v, 1.0f);
  const QualityOutput hard_out = hard.estimate(off, {1, &seq.frame(1)}, {6, &seq.frame(6)});
  for (float e : hard_out.cost.pixels()) EXPECT_EQ(e, 31.0f);
}

TEST_F(Oracle, NestedAndInRange) {
  GroundTruthOracle q(seq);
  FlowField noisy = synth::gt_flow(seq, 1, 8).flow;
  std::mt19937 rng(9);
  std::uniform_real_distribution<float> u(-4, 4);
  for (auto& v : noisy.pixels()) v = {v.x + u(rng), v.y + u(rng)};
  const auto bank = q.bank(noisy, 1, 8);
  for (int theta = 1; theta < 5; ++theta)
    for (std::size_t i = 0; i < noisy.size(); ++i) EXPECT_GE(bank.map(theta)[i], bank.map(theta + 1)[i]);
  const auto out = q.estimate(noisy, {1, &seq.frame(1)}, {8, &seq.frame(8)});
  for (float e : out.cost.pixels()) EXPECT_TRUE(e >= 0.0f && e <= 31.0f);
  for (float o : out.occlusion.pixels()) EXPECT_TRUE(o == 0.0f || o == 1.0f);
}

class Classical : public ::testing::Test {
 protected:
  Classical() : seq(synth::generate_sequence(mftiq::testing::translating_layer_scene({1.0, 0.5}, {0.5, 0.25}, 4), 6)) {}
  synth::SyntheticSequence seq;
};

TEST_F(Classical, GroundTruthChainMostlyVisible) {
  const FlowField gt = synth::gt_flow(seq, 1, 4).flow;
  const FlowField back = synth::gt_flow(seq, 4, 1).flow;
  const OcclusionMap occ = synth::gt_occlusion(seq, 1, 4);
  const auto out = classical_estimate(gt, seq.frame(1), seq.frame(4), &back);
  std::size_t visible = 0, clear = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (occ[i] > 0.5f) continue;
    ++visible;
    clear += out.occlusion[i] < 0.5f;
  }
  EXPECT_GE(double(clear), 0.95 * double(visible));
}

TEST_F(Classical, OutOfBoundsIsOccluded) {
  FlowField chain(seq.resolution());
  chain(10, 10) = {-40, 0};
  const auto out = classical_estimate(chain, seq.frame(1), seq.frame(1));
  EXPECT_EQ(out.occlusion(10, 10), 1.0f);
  EXPECT_EQ(out.occlusion(50, 50), 0.0f);
}

TEST_F(Classical, CorruptionRaisesCost) {
  const FlowField gt = synth::gt_flow(seq, 1, 4).flow;
  FlowField bad = gt;
  const int half = gt.width() / 2;
  for (int y = 0; y < gt.height(); ++y)
    for (int x = half; x < gt.width(); ++x) bad(x, y).x += 8.0f;
  const OcclusionMap occ = synth::gt_occlusion(seq, 1, 4);
  const auto clean = classical_estimate(gt, seq.frame(1), seq.frame(4));
  const auto dirty = classical_estimate(bad, seq.frame(1), seq.frame(4));
  auto visible = [&](int x, int y) { return occ(x, y) < 0.5f; };
  // paired: same pixels, true versus corrupted flow
  EXPECT_LT(mean_over(clean.cost, visible), mean_over(dirty.cost, visible));
  // within one image: corrupted half against the clean half
  const double left = mean_over(dirty.cost, [&](int x, int y) { return x < half - 8 && visible(x, y); });
  const double right = mean_over(dirty.cost, [&](int x, int y) { return x >= half && x < gt.width() - 10 && visible(x, y); });
  EXPECT_GT(right, left);
}

TEST_F(Classical, IndependentOfChainRoute) {
  // Integer background motion makes both routes produce the same chain bits.
  const auto s = synth::generate_sequence(mftiq::testing::panning_scene({1, 2}, 6, {48, 48}), 3);
  SyntheticProvider p(s);
  const auto via3 = chain_flows(p.get_flow(1, 3), p.get_flow(3, 6)).flow;
  const auto via2 = chain_flows(chain_flows(p.get_flow(1, 2), p.get_flow(2, 4)).flow, p.get_flow(4, 6)).flow;
  ASSERT_EQ(via3, via2);
  ClassicalEstimator est;
  const auto a = est.estimate(via3, {1, &s.frame(1)}, {6, &s.frame(6)});
  const auto b = est.estimate(via2, {1, &s.frame(1)}, {6, &s.frame(6)});
  EXPECT_EQ(a.cost, b.cost);
  EXPECT_EQ(a.occlusion, b.occlusion);
}

TEST_F(Classical, EstimatorRanges) {
  FlowField chain = synth::gt_flow(seq, 1, 3).flow;
  std::mt19937 rng(10);
  std::uniform_real_distribution<float> u(-3, 3);
  for (auto& v : chain.pixels()) v = {v.x + u(rng), v.y + u(rng)};
  auto provider = std::make_shared<SyntheticProvider>(seq);
  ClassicalEstimator est({}, provider);
  const auto out = est.estimate(chain, {1, &seq.frame(1)}, {3, &seq.frame(3)});
  EXPECT_EQ(out.cost.resolution(), seq.resolution());
  for (float e : out.cost.pixels()) EXPECT_TRUE(e >= 0.0f && e <= 31.0f);
  for (float o : out.occlusion.pixels()) EXPECT_TRUE(o >= 0.0f && o <= 1.0f);
  EXPECT_THROW(est.estimate(FlowField(5, 5), {1, &seq.frame(1)}, {3, &seq.frame(3)}), DimensionError);
}
