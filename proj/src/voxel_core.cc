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
#include "occ4d/voxel_core.h"

#include <cmath>
#include <sstream>
#include <utility>

#include <Eigen/Dense>

#include "occ4d/error.h"

namespace occ4d {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kSingularPose: return "SingularPose";
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kTruncatedPayload: return "TruncatedPayload";
    case ErrorCode::kInvariantViolation: return "InvariantViolation";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kFrameMismatch: return "FrameMismatch";
    case ErrorCode::kSpecMismatch: return "SpecMismatch";
    case ErrorCode::kMissingClassTableEntry: return "MissingClassTableEntry";
    case ErrorCode::kNonFiniteWeight: return "NonFiniteWeight";
    case ErrorCode::kWeightOutOfRange: return "WeightOutOfRange";
    case ErrorCode::kEmptyAccumulator: return "EmptyAccumulator";
    case ErrorCode::kClassTableMismatch: return "ClassTableMismatch";
    case ErrorCode::kTrackClassConflict: return "TrackClassConflict";
    case ErrorCode::kUnknownTrackId: return "UnknownTrackId";
    case ErrorCode::kActorOutOfBounds: return "ActorOutOfBounds";
    case ErrorCode::kMissingFrame: return "MissingFrame";
    case ErrorCode::kMissingScores: return "MissingScores";
  }
  return "Unknown";
}

GridSpec::GridSpec(std::array<std::uint32_t, 3> dims, Point3 voxel_size,
                   Point3 origin)
    : dims_(dims), voxel_size_(voxel_size), origin_(origin) {
  for (int a = 0; a < 3; ++a) {
    if (dims_[a] < 1) {
      throw Error(ErrorCode::kInvalidArgument, "grid dims must be >= 1");
    }
    if (!(voxel_size_[a] > 0.0) || !std::isfinite(voxel_size_[a])) {
      throw Error(ErrorCode::kInvalidArgument,
                  "voxel_size components must be finite and > 0");
    }
    if (!std::isfinite(origin_[a] + dims_[a] * voxel_size_[a])) {
      throw Error(ErrorCode::kInvalidArgument, "grid extent is not finite");
    }
  }
}

GridSpec GridSpec::Occ3dWaymo() {
  return GridSpec({200, 200, 16}, Point3(0.4, 0.4, 0.4),
                  Point3(-40.0, -40.0, -1.0));
}

std::optional<VoxelIndex> WorldToVoxel(const GridSpec& spec,
                                       const Point3& point) {
  std::array<std::int64_t, 3> idx{};
  for (int a = 0; a < 3; ++a) {
    const double f =
        std::floor((point[a] - spec.origin()[a]) / spec.voxel_size()[a]);
    if (!(f >= 0.0) || f >= static_cast<double>(spec.dims()[a])) {
      return std::nullopt;
    }
    idx[a] = static_cast<std::int64_t>(f);
  }
  return VoxelIndex{idx[0], idx[1], idx[2]};
}

std::string_view ClassRoleName(ClassRole role) {
  switch (role) {
    case ClassRole::kThing: return "thing";
    case ClassRole::kStuff: return "stuff";
    case ClassRole::kFree: return "free";
  }
  return "stuff";
}

ClassRole ParseClassRole(std::string_view name) {
  if (name == "thing") return ClassRole::kThing;
  if (name == "stuff") return ClassRole::kStuff;
  if (name == "free") return ClassRole::kFree;
  throw Error(ErrorCode::kParseError,
              "unknown class role '" + std::string(name) + "'");
}

ClassTable::ClassTable(std::vector<ClassEntry> entries)
    : entries_(std::move(entries)) {
  if (entries_.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "class table is empty");
  }
  int free_count = 0;
  int thing_count = 0;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].id != i) {
      throw Error(ErrorCode::kInvalidArgument,
                  "class ids must be unique and contiguous from 0 (entry " +
                      std::to_string(i) + " has id " +
                      std::to_string(entries_[i].id) + ")");
    }
    if (entries_[i].role == ClassRole::kFree) {
      ++free_count;
      free_class_ = entries_[i].id;
    }
    if (entries_[i].role == ClassRole::kThing) ++thing_count;
  }
  if (free_count != 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "class table needs exactly one free class, found " +
                    std::to_string(free_count));
  }
  if (thing_count < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "class table needs at least one thing class");
  }
}

ClassTable ClassTable::Default() {
  return ClassTable({{0, "free", ClassRole::kFree},
                     {1, "vehicle", ClassRole::kThing},
                     {2, "pedestrian", ClassRole::kThing},
                     {3, "cyclist", ClassRole::kThing},
                     {4, "sign", ClassRole::kStuff},
                     {5, "building", ClassRole::kStuff},
                     {6, "vegetation", ClassRole::kStuff},
                     {7, "road", ClassRole::kStuff},
                     {8, "general_object", ClassRole::kStuff}});
}

const ClassEntry& ClassTable::at(ClassId id) const {
  if (id >= entries_.size()) {
    throw Error(ErrorCode::kMissingClassTableEntry,
                "class id " + std::to_string(id) + " not in class table");
  }
  return entries_[id];
}

std::optional<ClassId> ClassTable::FindByName(std::string_view name) const {
  for (const auto& e : entries_) {
    if (e.name == name) return e.id;
  }
  return std::nullopt;
}

PanopticGrid PanopticGrid::Filled(const GridSpec& spec, ClassId cls) {
  PanopticGrid g{spec, std::vector<ClassId>(spec.num_voxels(), cls),
                 std::vector<InstanceId>(spec.num_voxels(), kNoInstance),
                 {}, 0, Pose::Identity()};
  return g;
}

Point3 PanopticGrid::VoxelCenterWorld(const VoxelIndex& v) const {
  return TransformPoint(ego_pose, spec.VoxelCenter(v));
}

bool operator==(const PanopticGrid& a, const PanopticGrid& b) {
  return a.spec == b.spec && a.classes == b.classes &&
         a.instances == b.instances && a.visibility == b.visibility &&
         a.frame_index == b.frame_index && a.ego_pose == b.ego_pose;
}

namespace {

std::string DescribeVoxel(const GridSpec& spec, std::size_t v) {
  const VoxelIndex idx = spec.Unravel(v);
  std::ostringstream os;
  os << "voxel " << v << " (" << idx.ix << "," << idx.iy << "," << idx.iz
     << ")";
  return os.str();
}

}  // namespace

void ValidateGrid(const PanopticGrid& grid, const ClassTable& table) {
  const std::size_t n = grid.spec.num_voxels();
  if (grid.classes.size() != n || grid.instances.size() != n) {
    throw Error(ErrorCode::kInvariantViolation,
                "label arrays do not match grid size");
  }
  if (!grid.visibility.empty() && grid.visibility.size() != n) {
    throw Error(ErrorCode::kInvariantViolation,
                "visibility mask does not match grid size");
  }
  if (grid.frame_index < 0) {
    throw Error(ErrorCode::kInvariantViolation, "negative frame_index");
  }
  ValidateRigid(grid.ego_pose);
  for (std::size_t v = 0; v < n; ++v) {
    const ClassId c = grid.classes[v];
    if (!table.Has(c)) {
      throw Error(ErrorCode::kInvariantViolation,
                  DescribeVoxel(grid.spec, v) + ": class " +
                      std::to_string(c) + " not in class table");
    }
    if (grid.instances[v] == kNoInstance) continue;
    const ClassRole role = table.role(c);
    if (role == ClassRole::kFree) {
      throw Error(ErrorCode::kInvariantViolation,
                  DescribeVoxel(grid.spec, v) + ": free voxel carries id " +
                      std::to_string(grid.instances[v]));
    }
    if (role != ClassRole::kThing) {
      throw Error(ErrorCode::kInvariantViolation,
                  DescribeVoxel(grid.spec, v) + ": stuff voxel carries id " +
                      std::to_string(grid.instances[v]));
    }
  }
}

void ValidateRigid(const Pose& pose) {
  if (!pose.allFinite()) {
    throw Error(ErrorCode::kSingularPose, "pose has non-finite entries");
  }
  const Eigen::Matrix3d r = pose.topLeftCorner<3, 3>();
  const double err =
      (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (!(err < 1e-6)) {
    throw Error(ErrorCode::kSingularPose,
                "rotation block is not orthonormal (max |RtR - I| = " +
                    std::to_string(err) + ")");
  }
  if (pose(3, 0) != 0.0 || pose(3, 1) != 0.0 || pose(3, 2) != 0.0 ||
      pose(3, 3) != 1.0) {
    throw Error(ErrorCode::kSingularPose, "last row must be (0, 0, 0, 1)");
  }
}

Pose InvertRigid(const Pose& pose) {
  Pose inv = Pose::Identity();
  const Eigen::Matrix3d rt = pose.topLeftCorner<3, 3>().transpose();
  inv.topLeftCorner<3, 3>() = rt;
  inv.topRightCorner<3, 1>() = -rt * pose.topRightCorner<3, 1>();
  return inv;
}

Point3 TransformPoint(const Pose& pose, const Point3& p) {
  return pose.topLeftCorner<3, 3>() * p + pose.topRightCorner<3, 1>();
}

void ValidateBox(const TrackedBox& box, const ClassTable& table) {
  const char* axes[] = {"size.length", "size.width", "size.height"};
  for (int a = 0; a < 3; ++a) {
    if (!(box.size[a] > 0.0) || !std::isfinite(box.size[a])) {
      throw Error(ErrorCode::kInvalidArgument,
                  std::string(axes[a]) + " must be > 0 (got " +
                      std::to_string(box.size[a]) + ")");
    }
  }
  if (!box.center.allFinite() || !std::isfinite(box.yaw)) {
    throw Error(ErrorCode::kInvalidArgument, "center/yaw must be finite");
  }
  if (box.track_id < 1) {
    throw Error(ErrorCode::kInvalidArgument, "track_id must be >= 1");
  }
  if (!table.Has(box.class_id)) {
    throw Error(ErrorCode::kMissingClassTableEntry,
                "class_id " + std::to_string(box.class_id) +
                    " not in class table");
  }
  if (!table.IsThing(box.class_id)) {
    throw Error(ErrorCode::kInvalidArgument,
                "class_id " + std::to_string(box.class_id) +
                    " is not a thing class");
  }
}

std::optional<Point3> InstanceCentroid(const PanopticGrid& grid,
                                       InstanceId id) {
  // Integer index sums are exact, so the result does not depend on the
  // enumeration order.
  std::int64_t sx = 0, sy = 0, sz = 0, count = 0;
  const std::size_t n = grid.spec.num_voxels();
#pragma omp parallel for reduction(+ : sx, sy, sz, count) schedule(static)
  for (std::size_t v = 0; v < n; ++v) {
    if (grid.instances[v] != id) continue;
    const VoxelIndex idx = grid.spec.Unravel(v);
    sx += idx.ix;
    sy += idx.iy;
    sz += idx.iz;
    ++count;
  }
  if (count == 0) return std::nullopt;
  const double c = static_cast<double>(count);
  const GridSpec& s = grid.spec;
  const Point3 local(s.origin().x() + (sx / c + 0.5) * s.voxel_size().x(),
                     s.origin().y() + (sy / c + 0.5) * s.voxel_size().y(),
                     s.origin().z() + (sz / c + 0.5) * s.voxel_size().z());
  return TransformPoint(grid.ego_pose, local);
}

std::map<InstanceId, Point3> InstanceCentroids(const PanopticGrid& grid) {
  struct Sum {
    std::int64_t x = 0, y = 0, z = 0, n = 0;
  };
  std::map<InstanceId, Sum> sums;
  for (std::size_t v = 0; v < grid.spec.num_voxels(); ++v) {
    const InstanceId id = grid.instances[v];
    if (id == kNoInstance) continue;
    const VoxelIndex idx = grid.spec.Unravel(v);
    Sum& s = sums[id];
    s.x += idx.ix;
    s.y += idx.iy;
    s.z += idx.iz;
    ++s.n;
  }
  std::map<InstanceId, Point3> out;
  const GridSpec& s = grid.spec;
  for (const auto& [id, sum] : sums) {
    const double c = static_cast<double>(sum.n);
    const Point3 local(
        s.origin().x() + (sum.x / c + 0.5) * s.voxel_size().x(),
        s.origin().y() + (sum.y / c + 0.5) * s.voxel_size().y(),
        s.origin().z() + (sum.z / c + 0.5) * s.voxel_size().z());
    out.emplace(id, TransformPoint(grid.ego_pose, local));
  }
  return out;
}

namespace {

PanopticGrid PrepareWarpOutput(const PanopticGrid& src, const Pose& dst_pose,
                               const GridSpec& dst_spec, ClassId free_class,
                               Pose* dst_to_src) {
  ValidateRigid(src.ego_pose);
  ValidateRigid(dst_pose);
  PanopticGrid out = PanopticGrid::Filled(dst_spec, free_class);
  out.frame_index = src.frame_index;
  out.ego_pose = dst_pose;
  if (src.ego_pose == dst_pose) {
    *dst_to_src = Pose::Identity();
  } else {
    *dst_to_src = InvertRigid(src.ego_pose) * dst_pose;
  }
  return out;
}

inline void WarpOne(const PanopticGrid& src, const Pose& dst_to_src,
                    PanopticGrid& out, std::size_t v) {
  const Point3 p =
      TransformPoint(dst_to_src, out.spec.VoxelCenter(out.spec.Unravel(v)));
  const auto idx = WorldToVoxel(src.spec, p);
  if (!idx) return;
  const std::size_t s = src.spec.Linear(*idx);
  out.classes[v] = src.classes[s];
  out.instances[v] = src.instances[s];
}

}  // namespace

PanopticGrid WarpInstances(const PanopticGrid& src, const Pose& dst_pose,
                           const GridSpec& dst_spec, ClassId free_class) {
  Pose dst_to_src;
  PanopticGrid out =
      PrepareWarpOutput(src, dst_pose, dst_spec, free_class, &dst_to_src);
  const std::int64_t n = static_cast<std::int64_t>(dst_spec.num_voxels());
#pragma omp parallel for schedule(static)
  for (std::int64_t v = 0; v < n; ++v) {
    WarpOne(src, dst_to_src, out, static_cast<std::size_t>(v));
  }
  return out;
}

namespace serial {

PanopticGrid WarpInstances(const PanopticGrid& src, const Pose& dst_pose,
                           const GridSpec& dst_spec, ClassId free_class) {
  Pose dst_to_src;
  PanopticGrid out =
      PrepareWarpOutput(src, dst_pose, dst_spec, free_class, &dst_to_src);
  for (std::size_t v = 0; v < dst_spec.num_voxels(); ++v) {
    WarpOne(src, dst_to_src, out, v);
  }
  return out;
}

}  // namespace serial

}  // namespace occ4d
