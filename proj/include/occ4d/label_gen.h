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
#ifndef OCC4D_LABEL_GEN_H_
#define OCC4D_LABEL_GEN_H_

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "occ4d/voxel_core.h"

namespace occ4d {

// Semantic-only occupancy frame: the input to panoptic label generation.
struct SemanticGrid {
  GridSpec spec;
  std::vector<ClassId> classes;
  std::vector<std::uint8_t> visibility;  // empty = all visible
  std::int64_t frame_index = 0;
  Pose ego_pose = Pose::Identity();
};

// Throws Error(kMissingClassTableEntry) for class ids outside the table.
void ValidateSemanticGrid(const SemanticGrid& grid, const ClassTable& table);

// Boundary-inclusive containment of a world point in an oriented box.
bool PointInBox(const TrackedBox& box, const Point3& point);

// Two center distances closer than this are a tie; the smaller track id wins.
inline constexpr double kBoxDistanceTieTolerance = 1e-9;

struct LabelGenResult {
  PanopticGrid grid;
  // Thing voxels inside no same-class box that took the nearest box's id.
  std::uint64_t nearest_assigned = 0;
  // Thing voxels whose class had no box in the frame, moved to the fallback
  // stuff class (keyed by original class).
  std::map<ClassId, std::uint64_t> demoted;
  // Same situation with no fallback class in the table: class kept, id 0.
  std::map<ClassId, std::uint64_t> unassigned;

  bool used_fallback() const { return !demoted.empty() || !unassigned.empty(); }
};

// The stuff class named "general_object" (or "general object"), if any.
std::optional<ClassId> FallbackStuffClass(const ClassTable& table);

// Assigns each thing voxel the track id of a same-class box:
//   1. stuff and free voxels copy their class with id 0;
//   2. inside >= 1 box: the containing box with the nearest center wins;
//   3. inside none: the nearest same-class box center wins;
//   4. no same-class box in the frame: fallback class (see LabelGenResult).
// Distance ties go to the smallest track id. Visibility is copied through.
LabelGenResult GenerateFrameLabels(const SemanticGrid& sem,
                                   const std::vector<TrackedBox>& boxes,
                                   const ClassTable& table);

namespace serial {
LabelGenResult GenerateFrameLabels(const SemanticGrid& sem,
                                   const std::vector<TrackedBox>& boxes,
                                   const ClassTable& table);
}  // namespace serial

}  // namespace occ4d

#endif  // OCC4D_LABEL_GEN_H_
