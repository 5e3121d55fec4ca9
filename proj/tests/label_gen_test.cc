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
#include "occ4d/label_gen.h"

#include <numbers>

#include <gtest/gtest.h>

#include "occ4d/error.h"
#include "oracles.h"

namespace occ4d {
namespace {

using testing::Rng;
using testing::UniformInt;
using testing::UniformReal;

const ClassTable kTable = ClassTable::Default();
constexpr ClassId kVehicle = 1, kPedestrian = 2, kRoad = 7, kGeneral = 8;

TrackedBox Box(Point3 center, Point3 size, double yaw, ClassId cls, TrackId id,
               std::int64_t frame = 0) {
  TrackedBox b;
  b.center = center;
  b.size = size;
  b.yaw = yaw;
  b.class_id = cls;
  b.track_id = id;
  b.frame_index = frame;
  return b;
}

SemanticGrid Sem(const GridSpec& spec, ClassId fill = 0) {
  return SemanticGrid{spec, std::vector<ClassId>(spec.num_voxels(), fill), {}, 0,
                      Pose::Identity()};
}

TEST(PointInBoxTest, CornerIsInside) {
  EXPECT_TRUE(PointInBox(Box({0, 0, 0}, {2, 2, 2}, 0, 1, 1), {1, 1, 1}));
}

TEST(PointInBoxTest, RotatedDiagonal) {
  EXPECT_TRUE(PointInBox(Box({0, 0, 0}, {2, 2, 2}, std::numbers::pi / 4, 1, 1),
                         {1.2, 0, 0}));
  EXPECT_FALSE(PointInBox(Box({0, 0, 0}, {2, 2, 2}, 0, 1, 1), {1.2, 0, 0}));
}

TEST(PointInBoxTest, JustOutside) {
  EXPECT_FALSE(PointInBox(Box({0, 0, 0}, {2, 2, 2}, 0, 1, 1), {1.0001, 0, 0}));
}

TEST(GenerateFrameLabelsTest, VoxelAtBoxCenter) {
  const GridSpec s = testing::SmallSpec(5, 5, 5);
  SemanticGrid sem = Sem(s);
  sem.classes[s.Linear({2, 2, 2})] = kPedestrian;
  const Point3 c = s.VoxelCenter({2, 2, 2});
  const auto r = GenerateFrameLabels(sem, {Box(c, {0.5, 0.5, 1.7}, 0, kPedestrian, 9)},
                                     kTable);
  EXPECT_EQ(r.grid.class_at({2, 2, 2}), kPedestrian);
  EXPECT_EQ(r.grid.instance_at({2, 2, 2}), 9u);
  EXPECT_EQ(r.nearest_assigned, 0u);
  EXPECT_FALSE(r.used_fallback());
}

TEST(GenerateFrameLabelsTest, EquidistantTieGoesToSmallerId) {
  const GridSpec s = testing::SmallSpec(5, 1, 1, 1.0);
  SemanticGrid sem = Sem(s);
  sem.classes[2] = kVehicle;  // center (2.5, 0.5, 0.5)
  const auto r = GenerateFrameLabels(
      sem,
      {Box({0.5, 0.5, 0.5}, {0.5, 0.5, 0.5}, 0, kVehicle, 4),
       Box({4.5, 0.5, 0.5}, {0.5, 0.5, 0.5}, 0, kVehicle, 2)},
      kTable);
  EXPECT_EQ(r.grid.instances[2], 2u);
  EXPECT_EQ(r.nearest_assigned, 1u);
  // Within the tolerance still counts as a tie.
  const auto r2 = GenerateFrameLabels(
      sem,
      {Box({0.5 - 5e-10, 0.5, 0.5}, {0.5, 0.5, 0.5}, 0, kVehicle, 4),
       Box({4.5, 0.5, 0.5}, {0.5, 0.5, 0.5}, 0, kVehicle, 2)},
      kTable);
  EXPECT_EQ(r2.grid.instances[2], 2u);
}

TEST(GenerateFrameLabelsTest, ContainingBoxBeatsCloserOutsideBox) {
  const GridSpec s = testing::SmallSpec(10, 1, 1, 1.0);
  SemanticGrid sem = Sem(s);
  sem.classes[3] = kVehicle;  // center x = 3.5
  // Box 5 is centered nearer but does not contain the voxel.
  const auto r = GenerateFrameLabels(
      sem,
      {Box({0.5, 0.5, 0.5}, {7.0, 1, 1}, 0, kVehicle, 7),
       Box({4.0, 0.5, 0.5}, {0.2, 0.2, 0.2}, 0, kVehicle, 5)},
      kTable);
  EXPECT_EQ(r.grid.instances[3], 7u);
}

TEST(GenerateFrameLabelsTest, OtherClassBoxesAreIgnored) {
  const GridSpec s = testing::SmallSpec(3, 1, 1, 1.0);
  SemanticGrid sem = Sem(s);
  sem.classes[1] = kPedestrian;
  const auto r = GenerateFrameLabels(
      sem,
      {Box({1.5, 0.5, 0.5}, {3, 3, 3}, 0, kVehicle, 1),
       Box({10, 0.5, 0.5}, {1, 1, 1}, 0, kPedestrian, 3)},
      kTable);
  EXPECT_EQ(r.grid.instances[1], 3u);
  EXPECT_EQ(r.nearest_assigned, 1u);
}

TEST(GenerateFrameLabelsTest, NoBoxFallsBackToGeneralObject) {
  const GridSpec s = testing::SmallSpec(4, 1, 1);
  SemanticGrid sem = Sem(s, kRoad);
  sem.classes[0] = kVehicle;
  sem.classes[1] = kVehicle;
  const auto r = GenerateFrameLabels(sem, {}, kTable);
  EXPECT_EQ(r.grid.classes[0], kGeneral);
  EXPECT_EQ(r.grid.instances[0], 0u);
  EXPECT_EQ(r.demoted.at(kVehicle), 2u);
  EXPECT_TRUE(r.used_fallback());
  ValidateGrid(r.grid, kTable);
}

TEST(GenerateFrameLabelsTest, NoFallbackClassKeepsClassWithoutId) {
  const ClassTable t({{0, "free", ClassRole::kFree},
                      {1, "car", ClassRole::kThing},
                      {2, "road", ClassRole::kStuff}});
  const GridSpec s = testing::SmallSpec(2, 1, 1);
  SemanticGrid sem = Sem(s, 2);
  sem.classes[1] = 1;
  const auto r = GenerateFrameLabels(sem, {}, t);
  EXPECT_EQ(r.grid.classes[1], 1);
  EXPECT_EQ(r.grid.instances[1], 0u);
  EXPECT_EQ(r.unassigned.at(1), 1u);
  EXPECT_TRUE(r.demoted.empty());
}

TEST(GenerateFrameLabelsTest, Errors) {
  const GridSpec s = testing::SmallSpec(2, 1, 1);
  SemanticGrid sem = Sem(s);
  try {
    GenerateFrameLabels(sem, {Box({0, 0, 0}, {1, 1, 1}, 0, kVehicle, 1, 3)}, kTable);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kFrameMismatch);
  }
  sem.classes[0] = 99;
  try {
    GenerateFrameLabels(sem, {}, kTable);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingClassTableEntry);
  }
}

TEST(GenerateFrameLabelsTest, VisibilityAndPoseCarriedThrough) {
  const GridSpec s = testing::SmallSpec(3, 3, 1);
  SemanticGrid sem = Sem(s, kRoad);
  sem.visibility.assign(9, 0);
  sem.visibility[4] = 1;
  sem.frame_index = 6;
  sem.ego_pose(0, 3) = 10.0;
  const auto r = GenerateFrameLabels(sem, {}, kTable);
  EXPECT_EQ(r.grid.visibility, sem.visibility);
  EXPECT_EQ(r.grid.frame_index, 6);
  EXPECT_EQ(r.grid.ego_pose, sem.ego_pose);
}

TEST(GenerateFrameLabelsTest, RandomScenesMatchNaiveScan) {
  Rng rng(17);
  for (int i = 0; i < 100; ++i) {
    const testing::RandomLabelScene sc = testing::MakeLabelScene(rng);
    const auto r = GenerateFrameLabels(sc.sem, sc.boxes, kTable);
    const PanopticGrid oracle =
        testing::NaiveLabels(sc.sem, sc.boxes, kTable, ClassId{kGeneral});
    ASSERT_EQ(r.grid.classes, oracle.classes) << "scene " << i;
    ASSERT_EQ(r.grid.instances, oracle.instances) << "scene " << i;
    ValidateGrid(r.grid, kTable);
  }
}

TEST(GenerateFrameLabelsTest, ExhaustiveAndIdempotent) {
  Rng rng(18);
  for (int i = 0; i < 30; ++i) {
    const testing::RandomLabelScene sc = testing::MakeLabelScene(rng);
    const auto a = GenerateFrameLabels(sc.sem, sc.boxes, kTable);
    const auto b = GenerateFrameLabels(sc.sem, sc.boxes, kTable);
    EXPECT_EQ(a.grid, b.grid);
    for (std::size_t v = 0; v < sc.sem.classes.size(); ++v) {
      const ClassId c = sc.sem.classes[v];
      if (!kTable.IsThing(c)) continue;
      const bool has_box = std::any_of(sc.boxes.begin(), sc.boxes.end(),
                                       [&](const TrackedBox& b) { return b.class_id == c; });
      EXPECT_EQ(a.grid.instances[v] != 0, has_box);
    }
  }
}

TEST(GenerateFrameLabelsTest, ParallelMatchesSerial) {
  Rng rng(19);
  for (int i = 0; i < 20; ++i) {
    const testing::RandomLabelScene sc = testing::MakeLabelScene(rng);
    const auto a = GenerateFrameLabels(sc.sem, sc.boxes, kTable);
    const auto b = serial::GenerateFrameLabels(sc.sem, sc.boxes, kTable);
    EXPECT_EQ(a.grid, b.grid);
    EXPECT_EQ(a.nearest_assigned, b.nearest_assigned);
    EXPECT_EQ(a.demoted, b.demoted);
  }
}

}  // namespace
}  // namespace occ4d
