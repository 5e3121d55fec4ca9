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

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "occ4d/error.h"

namespace occ4d {

void ValidateSemanticGrid(const SemanticGrid& grid, const ClassTable& table) {
  const std::size_t n = grid.spec.num_voxels();
  if (grid.classes.size() != n) {
    throw Error(ErrorCode::kInvariantViolation,
                "class array does not match grid size");
  }
  if (!grid.visibility.empty() && grid.visibility.size() != n) {
    throw Error(ErrorCode::kInvariantViolation,
                "visibility mask does not match grid size");
  }
  for (std::size_t v = 0; v < n; ++v) {
    if (!table.Has(grid.classes[v])) {
      throw Error(ErrorCode::kMissingClassTableEntry,
                  "voxel " + std::to_string(v) + " has class " +
                      std::to_string(grid.classes[v]) +
                      " which is not in the class table");
    }
  }
  ValidateRigid(grid.ego_pose);
}

bool PointInBox(const TrackedBox& box, const Point3& point) {
  const double dx = point.x() - box.center.x();
  const double dy = point.y() - box.center.y();
  const double dz = point.z() - box.center.z();
  const double c = std::cos(box.yaw);
  const double s = std::sin(box.yaw);
  const double lx = c * dx + s * dy;
  const double ly = -s * dx + c * dy;
  return std::abs(lx) <= 0.5 * box.size.x() &&
         std::abs(ly) <= 0.5 * box.size.y() &&
         std::abs(dz) <= 0.5 * box.size.z();
}

std::optional<ClassId> FallbackStuffClass(const ClassTable& table) {
  for (const char* name : {"general_object", "general object"}) {
    if (auto id = table.FindByName(name);
        id && table.role(*id) == ClassRole::kStuff) {
      return id;
    }
  }
  return std::nullopt;
}

namespace {

// Per-voxel outcome before it is written into the grid.
enum class Outcome : std::uint8_t { kCopied, kInside, kNearest, kNoBox };

struct Prepared {
  std::vector<std::vector<const TrackedBox*>> boxes_by_class;
  std::optional<ClassId> fallback;
};

Prepared Prepare(const SemanticGrid& sem, const std::vector<TrackedBox>& boxes,
                 const ClassTable& table) {
  ValidateSemanticGrid(sem, table);
  Prepared p;
  p.boxes_by_class.resize(table.size());
  for (const TrackedBox& b : boxes) {
    if (b.frame_index != sem.frame_index) {
      throw Error(ErrorCode::kFrameMismatch,
                  "box track " + std::to_string(b.track_id) + " has frame " +
                      std::to_string(b.frame_index) + ", semantic grid has " +
                      std::to_string(sem.frame_index));
    }
    ValidateBox(b, table);
    p.boxes_by_class[b.class_id].push_back(&b);
  }
  p.fallback = FallbackStuffClass(table);
  return p;
}

// Nearest box center among `pool` (optionally only boxes containing the
// point). Every box within the tie tolerance of the minimum distance is a
// candidate; the smallest track id among them wins.
const TrackedBox* Nearest(const std::vector<const TrackedBox*>& pool,
                          const Point3& center, bool require_inside) {
  double best = std::numeric_limits<double>::infinity();
  for (const TrackedBox* b : pool) {
    if (require_inside && !PointInBox(*b, center)) continue;
    best = std::min(best, (b->center - center).norm());
  }
  if (!std::isfinite(best)) return nullptr;
  const TrackedBox* pick = nullptr;
  for (const TrackedBox* b : pool) {
    if (require_inside && !PointInBox(*b, center)) continue;
    if ((b->center - center).norm() > best + kBoxDistanceTieTolerance) continue;
    if (pick == nullptr || b->track_id < pick->track_id) pick = b;
  }
  return pick;
}

inline Outcome LabelVoxel(const SemanticGrid& sem, const ClassTable& table,
                          const Prepared& prep, std::size_t v,
                          PanopticGrid& out) {
  const ClassId cls = sem.classes[v];
  out.classes[v] = cls;
  out.instances[v] = kNoInstance;
  if (!table.IsThing(cls)) return Outcome::kCopied;
  const auto& pool = prep.boxes_by_class[cls];
  if (pool.empty()) {
    if (prep.fallback) out.classes[v] = *prep.fallback;
    return Outcome::kNoBox;
  }
  const Point3 center = out.VoxelCenterWorld(sem.spec.Unravel(v));
  if (const TrackedBox* b = Nearest(pool, center, /*require_inside=*/true)) {
    out.instances[v] = b->track_id;
    return Outcome::kInside;
  }
  out.instances[v] = Nearest(pool, center, /*require_inside=*/false)->track_id;
  return Outcome::kNearest;
}

PanopticGrid EmptyOutput(const SemanticGrid& sem) {
  PanopticGrid out{sem.spec,
                   std::vector<ClassId>(sem.spec.num_voxels()),
                   std::vector<InstanceId>(sem.spec.num_voxels()),
                   sem.visibility,
                   sem.frame_index,
                   sem.ego_pose};
  return out;
}

void Tally(const SemanticGrid& sem, const Prepared& prep,
           const std::vector<Outcome>& outcomes, LabelGenResult& result) {
  for (std::size_t v = 0; v < outcomes.size(); ++v) {
    if (outcomes[v] == Outcome::kNearest) {
      ++result.nearest_assigned;
    } else if (outcomes[v] == Outcome::kNoBox) {
      if (prep.fallback) {
        ++result.demoted[sem.classes[v]];
      } else {
        ++result.unassigned[sem.classes[v]];
      }
    }
  }
}

}  // namespace

LabelGenResult GenerateFrameLabels(const SemanticGrid& sem,
                                   const std::vector<TrackedBox>& boxes,
                                   const ClassTable& table) {
  const Prepared prep = Prepare(sem, boxes, table);
  LabelGenResult result{EmptyOutput(sem), 0, {}, {}};
  const std::int64_t n = static_cast<std::int64_t>(sem.spec.num_voxels());
  std::vector<Outcome> outcomes(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(dynamic, 4096)
  for (std::int64_t v = 0; v < n; ++v) {
    outcomes[v] = LabelVoxel(sem, table, prep, static_cast<std::size_t>(v),
                             result.grid);
  }
  Tally(sem, prep, outcomes, result);
  return result;
}

namespace serial {

LabelGenResult GenerateFrameLabels(const SemanticGrid& sem,
                                   const std::vector<TrackedBox>& boxes,
                                   const ClassTable& table) {
  const Prepared prep = Prepare(sem, boxes, table);
  LabelGenResult result{EmptyOutput(sem), 0, {}, {}};
  std::vector<Outcome> outcomes(sem.spec.num_voxels());
  for (std::size_t v = 0; v < outcomes.size(); ++v) {
    outcomes[v] = LabelVoxel(sem, table, prep, v, result.grid);
  }
  Tally(sem, prep, outcomes, result);
  return result;
}

}  // namespace serial

}  // namespace occ4d
