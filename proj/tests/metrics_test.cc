/* Copyright 2026 The Occ4D Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#include "occ4d/metrics.h"

#include <cmath>

#include <gtest/gtest.h>

#include "occ4d/error.h"
#include "oracles.h"

namespace occ4d {
namespace {

using testing::Rng;

const ClassTable kTable = ClassTable::Default();
constexpr ClassId kFree = 0, kVehicle = 1, kPedestrian = 2, kRoad = 7;

template <typename Fn>
void ExpectCode(ErrorCode code, Fn&& fn) {
  try {
    fn();
    ADD_FAILURE() << "no exception";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

PanopticGrid Blank(const GridSpec& s, std::int64_t frame = 0) {
  PanopticGrid g = PanopticGrid::Filled(s, kFree);
  g.frame_index = frame;
  return g;
}

MetricReport Evaluate(const std::vector<PanopticGrid>& gts,
                      const std::vector<PanopticGrid>& preds,
                      EvalOptions o = {}) {
  MetricAccumulator acc(kTable, o);
  for (std::size_t f = 0; f < gts.size(); ++f) acc.IngestFrame(gts[f], preds[f]);
  return acc.Finalize();
}

std::vector<PanopticGrid> Offset(std::vector<PanopticGrid> seq, std::int64_t by) {
  for (auto& g : seq) g.frame_index += by;
  return seq;
}

MetricAccumulator RandomAccumulator(Rng& rng, std::int64_t frame_offset) {
  const GridSpec s = testing::SmallSpec(6, 6, 3);
  testing::RandomSequenceOptions o;
  o.frames = testing::UniformInt(rng, 1, 4);
  auto [g, p] = testing::RandomSequencePair(rng, s, kTable, o);
  g = Offset(std::move(g), frame_offset);
  p = Offset(std::move(p), frame_offset);
  // Disjoint gt ids keep track classes consistent across accumulators.
  for (auto& grid : g) {
    for (auto& id : grid.instances) id = id ? id + frame_offset : 0;
  }
  MetricAccumulator acc(kTable);
  for (std::size_t f = 0; f < g.size(); ++f) acc.IngestFrame(g[f], p[f]);
  return acc;
}

// One vehicle track of `len` voxels per frame over `frames` frames.
std::vector<PanopticGrid> TrackSequence(const GridSpec& s, int frames, int len,
                                        TrackId id, std::size_t first_voxel = 0) {
  std::vector<PanopticGrid> out;
  for (int f = 0; f < frames; ++f) {
    PanopticGrid g = Blank(s, f);
    for (int k = 0; k < len; ++k) {
      g.classes[first_voxel + k] = kVehicle;
      g.instances[first_voxel + k] = id;
    }
    out.push_back(std::move(g));
  }
  return out;
}

TEST(IngestTest, IdentityGivesDiagonalCounts) {
  Rng rng(1);
  const auto [g, p] =
      testing::RandomSequencePair(rng, testing::SmallSpec(8, 8, 4), kTable, {});
  MetricAccumulator acc(kTable);
  acc.IngestFrame(g[0], g[0]);
  EXPECT_EQ(acc.seg_inter(), acc.seg_gt());
  EXPECT_EQ(acc.seg_inter(), acc.seg_pred());
  for (const auto& [key, n] : acc.tube_inter()) {
    EXPECT_EQ(key.first, key.second);
    EXPECT_EQ(n, acc.gt_tube_size().at(key.second));
  }
}

TEST(IngestTest, AllFreePrediction) {
  Rng rng(2);
  const auto [g, p] =
      testing::RandomSequencePair(rng, testing::SmallSpec(8, 8, 4), kTable, {});
  MetricAccumulator acc(kTable);
  acc.IngestFrame(g[0], Blank(g[0].spec));
  for (std::size_t c = 1; c < kTable.size(); ++c) EXPECT_EQ(acc.seg_inter()[c], 0u);
  EXPECT_TRUE(acc.tube_inter().empty());
  EXPECT_TRUE(acc.pred_tube_size().empty());
}

TEST(IngestTest, RandomFramesMatchVoxelLoop) {
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    const auto [gs, ps] =
        testing::RandomSequencePair(rng, testing::SmallSpec(8, 8, 4), kTable, {});
    const PanopticGrid& g = gs[0];
    const PanopticGrid& p = ps[0];
    std::vector<std::uint64_t> inter(kTable.size()), sg(kTable.size()), sp(kTable.size());
    std::map<std::pair<TrackId, TrackId>, std::uint64_t> tube;
    std::map<TrackId, std::uint64_t> gsize, psize;
    for (std::size_t v = 0; v < g.classes.size(); ++v) {
      if (!g.visibility[v]) continue;
      ++sg[g.classes[v]];
      ++sp[p.classes[v]];
      if (g.classes[v] == p.classes[v]) ++inter[g.classes[v]];
      const bool gt_thing = kTable.IsThing(g.classes[v]) && g.instances[v];
      const bool pr_thing = kTable.IsThing(p.classes[v]) && p.instances[v];
      if (gt_thing) ++gsize[g.instances[v]];
      if (pr_thing) ++psize[p.instances[v]];
      if (gt_thing && pr_thing) ++tube[{p.instances[v], g.instances[v]}];
    }
    MetricAccumulator acc(kTable);
    acc.IngestFrame(g, p);
    EXPECT_EQ(acc.seg_inter(), inter);
    EXPECT_EQ(acc.seg_gt(), sg);
    EXPECT_EQ(acc.seg_pred(), sp);
    EXPECT_EQ(acc.tube_inter(), tube);
    EXPECT_EQ(acc.gt_tube_size(), gsize);
    EXPECT_EQ(acc.pred_tube_size(), psize);
    for (const auto& [key, n] : acc.tube_inter()) {
      EXPECT_LE(n, acc.pred_tube_size().at(key.first));
      EXPECT_LE(n, acc.gt_tube_size().at(key.second));
    }
  }
}

TEST(IngestTest, Errors) {
  const GridSpec s = testing::SmallSpec(2, 2, 2);
  MetricAccumulator acc(kTable);
  ExpectCode(ErrorCode::kSpecMismatch,
             [&] { acc.IngestFrame(Blank(s), Blank(testing::SmallSpec(2, 2, 3))); });
  ExpectCode(ErrorCode::kFrameMismatch, [&] { acc.IngestFrame(Blank(s, 0), Blank(s, 1)); });
  acc.IngestFrame(Blank(s, 0), Blank(s, 0));
  ExpectCode(ErrorCode::kFrameMismatch, [&] { acc.IngestFrame(Blank(s, 0), Blank(s, 0)); });
  EXPECT_EQ(acc.frames_seen(), 1u);
}

TEST(IngestTest, GtTrackChangingClassIsRejected) {
  const GridSpec s = testing::SmallSpec(2, 1, 1);
  PanopticGrid a = Blank(s, 0), b = Blank(s, 1);
  a.classes[0] = kVehicle;
  a.instances[0] = 3;
  b.classes[0] = kPedestrian;
  b.instances[0] = 3;
  MetricAccumulator acc(kTable);
  acc.IngestFrame(a, a);
  ExpectCode(ErrorCode::kTrackClassConflict, [&] { acc.IngestFrame(b, b); });
}

TEST(FinalizeTest, EmptyAccumulator) {
  ExpectCode(ErrorCode::kEmptyAccumulator, [] { MetricAccumulator(kTable).Finalize(); });
}

TEST(FinalizeTest, PerfectPredictionIsOne) {
  Rng rng(4);
  for (int i = 0; i < 20; ++i) {
    testing::RandomSequenceOptions o;
    o.max_tracks = 4;
    const auto [g, p] =
        testing::RandomSequencePair(rng, testing::SmallSpec(6, 6, 3), kTable, o);
    const MetricReport r = Evaluate(g, g);
    EXPECT_EQ(r.occ_sq, 1.0);
    if (r.per_gt_track_aq.empty()) continue;
    EXPECT_EQ(r.occ_aq, 1.0);
    EXPECT_EQ(r.occ_stq, 1.0);
    EXPECT_EQ(r.pq, 1.0);
    EXPECT_EQ(r.pq_star, 1.0);
  }
}

TEST(FinalizeTest, MidpointIdSwitchHalvesAq) {
  const GridSpec s = testing::SmallSpec(4, 4, 1);
  const auto gt = TrackSequence(s, 6, 5, 1);
  auto pred = TrackSequence(s, 6, 5, 20);
  for (int f = 3; f < 6; ++f) {
    for (auto& id : pred[f].instances) id = id ? 21 : 0;
  }
  const MetricReport r = Evaluate(gt, pred);
  EXPECT_NEAR(r.occ_aq, 0.5, 1e-12);
  EXPECT_NEAR(r.per_gt_track_aq.at(1), 0.5, 1e-12);
  EXPECT_EQ(r.occ_sq, 1.0);
}

TEST(FinalizeTest, DroppedTrackHalvesAq) {
  const GridSpec s = testing::SmallSpec(4, 4, 1);
  auto gt = TrackSequence(s, 4, 3, 1, 0);
  auto pred = TrackSequence(s, 4, 3, 7, 0);
  for (int f = 0; f < 4; ++f) {
    for (std::size_t v = 8; v < 11; ++v) {
      gt[f].classes[v] = kVehicle;
      gt[f].instances[v] = 2;
    }
  }
  const MetricReport r = Evaluate(gt, pred);
  EXPECT_NEAR(r.occ_aq, 0.5, 1e-12);
  EXPECT_EQ(r.per_gt_track_aq.at(2), 0.0);
}

TEST(FinalizeTest, ClassOnlyAffectsSq) {
  const GridSpec s = testing::SmallSpec(4, 4, 1);
  const auto gt = TrackSequence(s, 3, 4, 1);
  auto pred = TrackSequence(s, 3, 4, 9);
  for (auto& g : pred) {
    for (auto& c : g.classes) c = c == kVehicle ? kPedestrian : c;
  }
  const MetricReport r = Evaluate(gt, pred);
  EXPECT_EQ(r.occ_aq, 1.0);
  EXPECT_LT(r.occ_sq, 1.0);
}

TEST(FinalizeTest, AbsentClassesExcludedAndFreeReportedSeparately) {
  const GridSpec s = testing::SmallSpec(4, 1, 1);
  PanopticGrid g = Blank(s), p = Blank(s);
  g.classes = {kRoad, kRoad, kFree, kFree};
  p.classes = {kRoad, kFree, kFree, kFree};
  const MetricReport r = Evaluate({g}, {p});
  EXPECT_EQ(r.per_class_iou.size(), 2u);
  EXPECT_DOUBLE_EQ(r.occ_sq, 0.5);
  EXPECT_TRUE(r.has_free_iou);
  EXPECT_DOUBLE_EQ(r.free_iou, 2.0 / 3.0);
  EXPECT_EQ(r.occ_aq, 0.0);
  EXPECT_EQ(r.occ_stq, 0.0);
}

TEST(FinalizeTest, StqSquaredIsSqTimesAq) {
  Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    const auto [g, p] =
        testing::RandomSequencePair(rng, testing::SmallSpec(6, 6, 3), kTable, {});
    const MetricReport r = Evaluate(g, p);
    EXPECT_NEAR(r.occ_stq * r.occ_stq, r.occ_sq * r.occ_aq, 1e-12);
    for (double x : {r.occ_sq, r.occ_aq, r.occ_stq, r.pq, r.pq_star}) {
      EXPECT_GE(x, 0.0);
      EXPECT_LE(x, 1.0);
    }
  }
}

TEST(FinalizeTest, ForcedMarginals) {
  FrameCounts c;
  c.seg_inter.assign(kTable.size(), 0);
  c.seg_pred.assign(kTable.size(), 0);
  c.seg_gt.assign(kTable.size(), 0);
  c.seg_inter[kRoad] = 294;
  c.seg_pred[kRoad] = 647;
  c.seg_gt[kRoad] = 647;
  for (TrackId g = 1; g <= 200; ++g) {
    c.gt_tube_size[g] = 1;
    c.gt_track_class[g] = kVehicle;
    if (g <= 27) {
      c.pred_tube_size[g] = 1;
      c.tube_inter[{g, g}] = 1;
    }
  }
  MetricAccumulator acc(kTable, {.visible_only = true, .compute_pq = false});
  acc.Add(c);
  const MetricReport r = acc.Finalize();
  EXPECT_DOUBLE_EQ(r.occ_sq, 0.294);
  EXPECT_DOUBLE_EQ(r.occ_aq, 0.135);
  EXPECT_NEAR(r.occ_stq, std::sqrt(0.294 * 0.135), 1e-15);
  EXPECT_NEAR(100.0 * r.occ_stq, 20.0, 0.15);
}

TEST(FinalizeTest, AddRejectsInconsistentCounts) {
  MetricAccumulator acc(kTable);
  FrameCounts c;
  c.seg_inter.assign(3, 0);
  ExpectCode(ErrorCode::kClassTableMismatch, [&] { acc.Add(c); });
}

TEST(StreamingTest, MatchesSetDefinitions) {
  Rng rng(6);
  for (int i = 0; i < 200; ++i) {
    const auto [g, p] =
        testing::RandomSequencePair(rng, testing::SmallSpec(8, 8, 4), kTable, {});
    const MetricReport r = Evaluate(g, p);
    const testing::NaiveStq n = testing::NaiveOccStq(g, p, kTable, true);
    ASSERT_NEAR(r.occ_sq, n.sq, 1e-12) << "sequence " << i;
    ASSERT_NEAR(r.occ_aq, n.aq, 1e-12) << "sequence " << i;
    ASSERT_NEAR(r.occ_stq, n.stq, 1e-12) << "sequence " << i;
    ASSERT_EQ(r.per_gt_track_aq.size(), n.track_aq.size());
    for (const auto& [id, aq] : n.track_aq) EXPECT_NEAR(r.per_gt_track_aq.at(id), aq, 1e-12);
    for (const auto& [cls, iou] : n.class_iou) EXPECT_NEAR(r.per_class_iou.at(cls), iou, 1e-12);
  }
}

TEST(StreamingTest, VisibilityOffUsesEveryVoxel) {
  Rng rng(7);
  for (int i = 0; i < 20; ++i) {
    const auto [g, p] =
        testing::RandomSequencePair(rng, testing::SmallSpec(6, 6, 3), kTable, {});
    const MetricReport r = Evaluate(g, p, {.visible_only = false});
    const testing::NaiveStq n = testing::NaiveOccStq(g, p, kTable, false);
    EXPECT_NEAR(r.occ_stq, n.stq, 1e-12);
    EXPECT_EQ(r.voxels_evaluated, g.size() * g[0].spec.num_voxels());
  }
}

TEST(InvarianceTest, InvisibleVoxelsNeverCount) {
  Rng rng(8);
  for (int i = 0; i < 30; ++i) {
    auto [g, p] = testing::RandomSequencePair(rng, testing::SmallSpec(6, 6, 3), kTable, {});
    MetricAccumulator a(kTable);
    for (std::size_t f = 0; f < g.size(); ++f) a.IngestFrame(g[f], p[f]);
    for (std::size_t f = 0; f < g.size(); ++f) {
      for (std::size_t v = 0; v < g[f].classes.size(); ++v) {
        if (g[f].visibility[v]) continue;
        g[f].classes[v] = kVehicle;
        g[f].instances[v] = 99;
        p[f].classes[v] = kPedestrian;
        p[f].instances[v] = 98;
      }
    }
    MetricAccumulator b(kTable);
    for (std::size_t f = 0; f < g.size(); ++f) b.IngestFrame(g[f], p[f]);
    EXPECT_EQ(a, b);
  }
}

TEST(InvarianceTest, AqUnchangedByRelabelingOrThingClassSwap) {
  Rng rng(9);
  for (int i = 0; i < 30; ++i) {
    auto [g, p] = testing::RandomSequencePair(rng, testing::SmallSpec(6, 6, 3), kTable, {});
    const MetricReport base = Evaluate(g, p);
    auto relabeled = p;
    auto reclassed = p;
    for (std::size_t f = 0; f < p.size(); ++f) {
      for (std::size_t v = 0; v < p[f].classes.size(); ++v) {
        if (p[f].instances[v]) relabeled[f].instances[v] = 1000 - p[f].instances[v];
        if (kTable.IsThing(p[f].classes[v]) && p[f].instances[v]) {
          reclassed[f].classes[v] = p[f].classes[v] % 3 + 1;
        }
      }
    }
    EXPECT_NEAR(Evaluate(g, relabeled).occ_aq, base.occ_aq, 1e-12);
    EXPECT_NEAR(Evaluate(g, reclassed).occ_aq, base.occ_aq, 1e-12);
  }
}

TEST(MergeTest, IdentityElement) {
  Rng rng(10);
  const MetricAccumulator x = RandomAccumulator(rng, 0);
  EXPECT_EQ(MetricAccumulator::Merged(x, MetricAccumulator(kTable)), x);
  EXPECT_EQ(MetricAccumulator::Merged(MetricAccumulator(kTable), x), x);
}

TEST(MergeTest, CommutativeAndAssociative) {
  Rng rng(11);
  for (int i = 0; i < 100; ++i) {
    const auto a = RandomAccumulator(rng, 0);
    const auto b = RandomAccumulator(rng, 10);
    const auto c = RandomAccumulator(rng, 20);
    EXPECT_EQ(MetricAccumulator::Merged(a, b), MetricAccumulator::Merged(b, a));
    EXPECT_EQ(MetricAccumulator::Merged(MetricAccumulator::Merged(a, b), c),
              MetricAccumulator::Merged(a, MetricAccumulator::Merged(b, c)));
  }
}

TEST(MergeTest, PartitionEqualsSerial) {
  Rng rng(12);
  testing::RandomSequenceOptions o;
  o.frames = 6;
  for (int i = 0; i < 20; ++i) {
    const auto [g, p] = testing::RandomSequencePair(rng, testing::SmallSpec(6, 6, 3), kTable, o);
    MetricAccumulator all(kTable), first(kTable), second(kTable);
    for (int f = 0; f < 6; ++f) {
      all.IngestFrame(g[f], p[f]);
      (f < 3 ? first : second).IngestFrame(g[f], p[f]);
    }
    const MetricAccumulator merged = MetricAccumulator::Merged(first, second);
    EXPECT_EQ(merged, all);
    const MetricReport a = all.Finalize(), b = merged.Finalize();
    EXPECT_EQ(a.occ_stq, b.occ_stq);
    EXPECT_EQ(a.pq, b.pq);
    EXPECT_EQ(a.pq_star, b.pq_star);
  }
}

TEST(MergeTest, Errors) {
  const ClassTable other({{0, "free", ClassRole::kFree}, {1, "car", ClassRole::kThing}});
  ExpectCode(ErrorCode::kClassTableMismatch,
             [&] { MetricAccumulator::Merged(MetricAccumulator(kTable), MetricAccumulator(other)); });
  const GridSpec s = testing::SmallSpec(2, 1, 1);
  PanopticGrid a = Blank(s, 0), b = Blank(s, 1);
  a.classes[0] = kVehicle;
  a.instances[0] = 4;
  b.classes[0] = kPedestrian;
  b.instances[0] = 4;
  MetricAccumulator x(kTable), y(kTable);
  x.IngestFrame(a, a);
  y.IngestFrame(b, b);
  ExpectCode(ErrorCode::kTrackClassConflict, [&] { MetricAccumulator::Merged(x, y); });
}

TEST(PqTest, LowOverlapCountsOnlyForPqStar) {
  const GridSpec s = testing::SmallSpec(5, 1, 1);
  PanopticGrid g = Blank(s), p = Blank(s);
  for (int v : {0, 1, 2, 3}) {
    g.classes[v] = kVehicle;
    g.instances[v] = 1;
  }
  for (int v : {2, 3, 4}) {
    p.classes[v] = kVehicle;
    p.instances[v] = 5;
  }
  const auto pq = PqFrame(g, p, kTable, PqMode::kThreshold);
  const auto star = PqFrame(g, p, kTable, PqMode::kMaxWeight);
  EXPECT_EQ(pq.per_class[kVehicle].pq(), 0.0);
  EXPECT_DOUBLE_EQ(star.per_class[kVehicle].pq(), 0.4);
  EXPECT_DOUBLE_EQ(star.mean, 0.4);
}

TEST(PqTest, ThingVoxelsWithoutIdFormOneSegment) {
  const GridSpec s = testing::SmallSpec(4, 1, 1);
  PanopticGrid g = Blank(s), p = Blank(s);
  g.classes = {kVehicle, kVehicle, kVehicle, kVehicle};
  g.instances = {0, 0, 3, 3};
  p = g;
  const auto r = PqFrame(g, p, kTable, PqMode::kThreshold);
  EXPECT_EQ(r.per_class[kVehicle].tp, 2u);
  EXPECT_EQ(r.mean, 1.0);
}

TEST(PqTest, MatchesNaiveSegments) {
  Rng rng(13);
  for (int i = 0; i < 100; ++i) {
    const auto [gs, ps] =
        testing::RandomSequencePair(rng, testing::SmallSpec(6, 6, 3), kTable, {});
    for (bool mw : {false, true}) {
      const auto r = PqFrame(gs[0], ps[0], kTable, mw ? PqMode::kMaxWeight : PqMode::kThreshold);
      const auto n = testing::NaivePq(gs[0], ps[0], kTable, mw, true);
      for (std::size_t c = 0; c < kTable.size(); ++c) {
        if (c == kFree) continue;
        EXPECT_EQ(r.per_class[c].tp, n[c].tp);
        EXPECT_EQ(r.per_class[c].fp, n[c].fp);
        EXPECT_EQ(r.per_class[c].fn, n[c].fn);
        EXPECT_NEAR(r.per_class[c].iou_sum, n[c].iou_sum, 1e-12);
      }
    }
  }
}

TEST(PqTest, PqStarDominatesPq) {
  Rng rng(14);
  for (int i = 0; i < 200; ++i) {
    const auto [gs, ps] =
        testing::RandomSequencePair(rng, testing::SmallSpec(8, 8, 4), kTable, {});
    const auto a = PqFrame(gs[0], ps[0], kTable, PqMode::kThreshold);
    const auto b = PqFrame(gs[0], ps[0], kTable, PqMode::kMaxWeight);
    for (std::size_t c = 1; c < kTable.size(); ++c) {
      EXPECT_GE(b.per_class[c].pq(), a.per_class[c].pq() - 1e-15);
    }
  }
}

TEST(PqTest, AccumulatedPqSumsFrameStats) {
  Rng rng(15);
  const auto [g, p] = testing::RandomSequencePair(rng, testing::SmallSpec(6, 6, 3), kTable, {});
  std::vector<PqClassStats> sum(kTable.size());
  for (std::size_t f = 0; f < g.size(); ++f) {
    const auto fr = PqFrame(g[f], p[f], kTable, PqMode::kMaxWeight);
    for (std::size_t c = 0; c < sum.size(); ++c) sum[c] += fr.per_class[c];
  }
  const MetricReport r = Evaluate(g, p);
  for (const auto& [cls, v] : r.pq_star_per_class) EXPECT_DOUBLE_EQ(v, sum[cls].pq());
  EXPECT_EQ(r.per_frame_pq.size(), g.size());
}

TEST(CountFrameTest, ParallelMatchesSerial) {
  Rng rng(16);
  for (int i = 0; i < 20; ++i) {
    const auto [g, p] =
        testing::RandomSequencePair(rng, testing::SmallSpec(16, 16, 4), kTable, {});
    for (bool vis : {false, true}) {
      const EvalOptions o{.visible_only = vis, .compute_pq = true};
      const FrameCounts a = CountFrame(g[0], p[0], kTable, o);
      const FrameCounts b = serial::CountFrame(g[0], p[0], kTable, o);
      EXPECT_EQ(a.seg_inter, b.seg_inter);
      EXPECT_EQ(a.tube_inter, b.tube_inter);
      EXPECT_EQ(a.gt_tube_size, b.gt_tube_size);
      EXPECT_EQ(a.pred_tube_size, b.pred_tube_size);
      EXPECT_EQ(a.pq, b.pq);
      EXPECT_EQ(a.pq_star, b.pq_star);
    }
  }
}

}  // namespace
}  // namespace occ4d
