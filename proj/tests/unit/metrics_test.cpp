#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "mftiq/metrics.hpp"

using namespace mftiq;
using namespace mftiq::metrics;

namespace {

constexpr Resolution kEval{256, 256};

ScoredPoint at_error(Point2 gt, double dx, bool pred_visible = true, bool gt_visible = true) {
  return {{{gt.x + dx, gt.y}, pred_visible}, {gt, gt_visible}};
}

// 4 tracks x 10 frames, everything visible on both sides. Per-point errors:
//   track 0: 0 everywhere
//   track 1: 1.5 on frames 1-5, 0 on 6-10
//   track 2: 3 everywhere
//   track 3: 10 on frames 1-4, 20 on 5-6, 0 on 7-10
std::vector<ScoredPoint> planted() {
  std::vector<ScoredPoint> pts;
  for (int track = 0; track < 4; ++track) {
    for (int f = 1; f <= 10; ++f) {
      double e = 0;
      if (track == 1 && f <= 5) e = 1.5;
      if (track == 2) e = 3;
      if (track == 3) e = f <= 4 ? 10 : (f <= 6 ? 20 : 0);
      pts.push_back(at_error({20.0 + 40 * track, 10.0 + 20 * f}, e));
    }
  }
  return pts;
}

GroundTruthTracks visible_tracks(int tracks, int frames) {
  GroundTruthTracks gt(tracks);
  for (int k = 0; k < tracks; ++k)
    for (int f = 1; f <= frames; ++f) gt[k].push_back({{double(k), double(f)}, true});
  return gt;
}

}  // namespace

TEST(Rescale, Examples) {
  EXPECT_EQ(rescale_to_256({0, 0}, {100, 50}), (Point2{0, 0}));
  EXPECT_EQ(rescale_to_256({100, 50}, {100, 50}), (Point2{256, 256}));
  EXPECT_EQ(rescale_to_256({64, 32}, {512, 256}), (Point2{32, 32}));
  EXPECT_THROW(rescale_to_256({1, 1}, {0, 10}), ArgumentError);
}

TEST(PositionAccuracy, ExactAndConstantError) {
  std::vector<ScoredPoint> exact{at_error({5, 5}, 0), at_error({50, 60}, 0)};
  const auto a = position_accuracy(exact, kEval);
  for (double v : a.per_threshold) EXPECT_EQ(v, 100.0);
  EXPECT_EQ(a.average, 100.0);

  std::vector<ScoredPoint> three;
  for (int i = 0; i < 10; ++i) three.push_back(at_error({10.0 + i, 20}, 3.0));
  const auto b = position_accuracy(three, kEval);
  EXPECT_EQ(b.per_threshold, (std::array<double, 5>{0, 0, 100, 100, 100}));
  EXPECT_EQ(b.average, 60.0);
}

TEST(PositionAccuracy, PlantedFixture) {
  const auto a = position_accuracy(planted(), kEval);
  EXPECT_EQ(a.per_threshold, (std::array<double, 5>{47.5, 60, 85, 85, 95}));
  EXPECT_DOUBLE_EQ(a.average, 74.5);
}

TEST(PositionAccuracy, ThresholdIsStrict) {
  std::vector<ScoredPoint> pts{at_error({10, 10}, 1.0), at_error({10, 10}, 2.0)};
  const auto a = position_accuracy(pts, kEval);
  EXPECT_EQ(a.per_threshold[0], 0.0);
  EXPECT_EQ(a.per_threshold[1], 50.0);
}

TEST(PositionAccuracy, RescalesBeforeThresholding) {
  // 3px at 512 wide is 1.5px at 256.
  std::vector<ScoredPoint> pts{at_error({100, 100}, 3.0)};
  EXPECT_EQ(position_accuracy(pts, {512, 512}).per_threshold[1], 100.0);
  EXPECT_EQ(position_accuracy(pts, {512, 512}).per_threshold[0], 0.0);
}

TEST(PositionAccuracy, OnlyGtVisibleCountsAndEmptyThrows) {
  std::vector<ScoredPoint> pts{at_error({10, 10}, 0), at_error({10, 10}, 50, true, false)};
  EXPECT_EQ(position_accuracy(pts, kEval).average, 100.0);
  std::vector<ScoredPoint> hidden{at_error({10, 10}, 0, true, false)};
  EXPECT_THROW(position_accuracy(hidden, kEval), UndefinedMetricError);
}

TEST(OcclusionAccuracy, Examples) {
  std::vector<ScoredPoint> perfect{at_error({1, 1}, 0), at_error({1, 1}, 9, false, false)};
  EXPECT_EQ(occlusion_accuracy(perfect), 100.0);
  std::vector<ScoredPoint> inverted{at_error({1, 1}, 0, false, true), at_error({1, 1}, 0, true, false)};
  EXPECT_EQ(occlusion_accuracy(inverted), 0.0);
  std::vector<ScoredPoint> planted_flags;
  for (int i = 0; i < 8; ++i) planted_flags.push_back(at_error({1, 1}, 0, i % 4 != 0, true));
  EXPECT_EQ(occlusion_accuracy(planted_flags), 75.0);
  EXPECT_THROW(occlusion_accuracy({}), UndefinedMetricError);
}

TEST(AverageJaccard, Examples) {
  std::vector<ScoredPoint> perfect{at_error({5, 5}, 0), at_error({8, 9}, 0)};
  EXPECT_EQ(average_jaccard(perfect, kEval).average, 100.0);
  std::vector<ScoredPoint> far;
  for (int i = 0; i < 5; ++i) far.push_back(at_error({10.0 * i, 10}, 17.0));
  EXPECT_EQ(average_jaccard(far, kEval).average, 0.0);
}

TEST(AverageJaccard, PlantedFixture) {
  const auto j = average_jaccard(planted(), kEval);
  const std::array<double, 5> want{19.0 / 61, 24.0 / 56, 34.0 / 46, 34.0 / 46, 38.0 / 42};
  double mean = 0;
  for (int k = 0; k < 5; ++k) {
    EXPECT_NEAR(j.per_threshold[k], 100 * want[k], 1e-9);
    mean += 100 * want[k] / 5;
  }
  EXPECT_NEAR(j.average, mean, 1e-9);
}

TEST(AverageJaccard, FalsePositivesAndVacuousThreshold) {
  // GT occluded, predicted visible: one FP; GT visible and exact: one TP.
  std::vector<ScoredPoint> pts{at_error({5, 5}, 0), at_error({5, 5}, 0, true, false)};
  EXPECT_EQ(average_jaccard(pts, kEval).average, 50.0);
  // Nothing visible anywhere and nothing predicted: every threshold vacuous.
  std::vector<ScoredPoint> empty{at_error({5, 5}, 0, false, false)};
  EXPECT_EQ(average_jaccard(empty, kEval).average, 100.0);
}

TEST(MetricProperties, RangeMonotonePermutationAndJaccardBound) {
  std::mt19937 rng(21);
  std::uniform_real_distribution<double> err(0, 24), pos(0, 200);
  std::bernoulli_distribution vis(0.8);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<ScoredPoint> pts;
    for (int i = 0; i < 60; ++i) pts.push_back(at_error({pos(rng), pos(rng)}, err(rng), vis(rng), i < 5 || vis(rng)));
    const Report r = evaluate(pts, kEval);
    for (int k = 0; k < 5; ++k) {
      EXPECT_GE(r.position.per_threshold[k], 0.0);
      EXPECT_LE(r.position.per_threshold[k], 100.0);
      EXPECT_GE(r.jaccard.per_threshold[k], 0.0);
      EXPECT_LE(r.jaccard.per_threshold[k], 100.0);
      if (k) EXPECT_GE(r.position.per_threshold[k], r.position.per_threshold[k - 1]);
    }
    auto shuffled = pts;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const Report s = evaluate(shuffled, kEval);
    EXPECT_DOUBLE_EQ(s.position.average, r.position.average);
    EXPECT_DOUBLE_EQ(s.jaccard.average, r.jaccard.average);
    EXPECT_DOUBLE_EQ(s.occlusion_accuracy, r.occlusion_accuracy);

    std::vector<ScoredPoint> both_visible;
    for (auto p : pts) {
      p.pred.visible = p.gt.visible = true;
      both_visible.push_back(p);
    }
    const Report b = evaluate(both_visible, kEval);
    for (int k = 0; k < 5; ++k) EXPECT_LE(b.jaccard.per_threshold[k], b.position.per_threshold[k] + 1e-9);
  }
}

TEST(MakeQueries, StridedFrames) {
  const auto gt = visible_tracks(2, 20);
  const auto q = make_queries(gt, QueryMode::Strided, 5);
  std::vector<int> frames;
  for (const auto& e : q)
    if (frames.empty() || frames.back() != e.frame) frames.push_back(e.frame);
  EXPECT_EQ(frames, (std::vector<int>{1, 6, 11, 16}));
  ASSERT_EQ(q.size(), 2u + 3u * 4u);
  EXPECT_EQ(q[0], (EvalQuery{0, 1, {0, 1}, Direction::Forward}));
  EXPECT_EQ(q[1], (EvalQuery{1, 1, {1, 1}, Direction::Forward}));
  EXPECT_EQ(q[2], (EvalQuery{0, 6, {0, 6}, Direction::Forward}));
  EXPECT_EQ(q[3], (EvalQuery{0, 6, {0, 6}, Direction::Backward}));
  EXPECT_EQ(q[4], (EvalQuery{1, 6, {1, 6}, Direction::Forward}));

  // Frame 21 of a 21-frame video is the last: no forward query there.
  const auto last = make_queries(visible_tracks(1, 21), QueryMode::Strided, 5);
  EXPECT_EQ(last.back(), (EvalQuery{0, 21, {0, 21}, Direction::Backward}));
  EXPECT_THROW(make_queries(gt, QueryMode::Strided, 0), ArgumentError);
}

TEST(MakeQueries, FirstMode) {
  GroundTruthTracks gt = visible_tracks(3, 12);
  for (int f = 0; f < 6; ++f) gt[1][f].visible = false;
  for (auto& p : gt[2]) p.visible = false;
  const auto q = make_queries(gt, QueryMode::First);
  ASSERT_EQ(q.size(), 2u);
  EXPECT_EQ(q[0], (EvalQuery{0, 1, {0, 1}, Direction::Forward}));
  EXPECT_EQ(q[1], (EvalQuery{1, 7, {1, 7}, Direction::Forward}));
  EXPECT_EQ(parse_query_mode("strided"), QueryMode::Strided);
  EXPECT_THROW(parse_query_mode("every"), ArgumentError);
}

TEST(PairQueries, ExcludesQueryFrameAndNeedsPredictions) {
  const auto gt = visible_tracks(1, 5);
  const std::vector<EvalQuery> q{{0, 3, {0, 3}, Direction::Forward}, {0, 3, {0, 3}, Direction::Backward}};
  QueryPredictions pred;
  for (int f = 4; f <= 5; ++f) pred[0][f] = gt[0][f - 1];
  for (int f = 1; f <= 2; ++f) pred[1][f] = gt[0][f - 1];
  const auto pairs = pair_queries(q, gt, pred);
  EXPECT_EQ(pairs.size(), 4u);
  for (const auto& p : pairs) EXPECT_EQ(p.pred, p.gt);
  pred[1].erase(2);
  EXPECT_THROW(pair_queries(q, gt, pred), FormatError);
}

TEST(Pot, Examples) {
  const Quad gt{Point2{0, 0}, Point2{10, 0}, Point2{10, 10}, Point2{0, 10}};
  auto shift = [&](double dx) {
    Quad q = gt;
    for (auto& p : q) p.x += dx;
    return q;
  };
  std::vector<Quad> g(5, gt);
  EXPECT_EQ(pot_success(g, g), 100.0);
  std::vector<Quad> six(5, shift(6));
  EXPECT_EQ(pot_success(six, g), 0.0);
  std::vector<Quad> mixed{shift(0), shift(4.9), shift(5), shift(5.1), shift(12)};
  EXPECT_EQ(pot_success(mixed, g), 60.0);

  Quad one_off = gt;
  one_off[2].y += 6;
  EXPECT_EQ(alignment_error(one_off, gt), 1.5);
  EXPECT_EQ(alignment_error(one_off, gt, AlignmentAggregate::Max), 6.0);
  std::vector<Quad> p1{one_off}, g1{gt};
  EXPECT_EQ(pot_success(p1, g1, 5, AlignmentAggregate::Mean), 100.0);
  EXPECT_EQ(pot_success(p1, g1, 5, AlignmentAggregate::Max), 0.0);
  // 6px at 512 wide is 3px in 256 space.
  EXPECT_EQ(pot_success(six, g, 5, AlignmentAggregate::Mean, Resolution{512, 512}), 100.0);
  EXPECT_THROW(pot_success(std::vector<Quad>(2, gt), g), DimensionError);
}
