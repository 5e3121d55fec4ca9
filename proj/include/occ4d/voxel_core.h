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
#ifndef OCC4D_VOXEL_CORE_H_
#define OCC4D_VOXEL_CORE_H_

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace occ4d {

using ClassId = std::uint16_t;
using InstanceId = std::uint32_t;
using TrackId = std::uint32_t;

// Instance id 0 means "no instance" (stuff, free, or unassigned thing).
inline constexpr InstanceId kNoInstance = 0;

using Point3 = Eigen::Vector3d;
// Rigid transform, grid frame -> world frame.
using Pose = Eigen::Matrix4d;

struct VoxelIndex {
  std::int64_t ix = 0;
  std::int64_t iy = 0;
  std::int64_t iz = 0;
  friend auto operator<=>(const VoxelIndex&, const VoxelIndex&) = default;
};

// Regular axis-aligned voxel lattice. Voxels are stored x-major: x varies
// fastest, then y, then z.
class GridSpec {
 public:
  GridSpec(std::array<std::uint32_t, 3> dims, Point3 voxel_size, Point3 origin);

  // 200 x 200 x 16 voxels of 0.4 m covering [-40, 40] x [-40, 40] x [-1, 5.4].
  static GridSpec Occ3dWaymo();

  std::uint32_t nx() const { return dims_[0]; }
  std::uint32_t ny() const { return dims_[1]; }
  std::uint32_t nz() const { return dims_[2]; }
  const std::array<std::uint32_t, 3>& dims() const { return dims_; }
  const Point3& voxel_size() const { return voxel_size_; }
  const Point3& origin() const { return origin_; }
  std::size_t num_voxels() const {
    return std::size_t{dims_[0]} * dims_[1] * dims_[2];
  }

  std::size_t Linear(const VoxelIndex& v) const {
    return static_cast<std::size_t>(v.ix) +
           dims_[0] * (static_cast<std::size_t>(v.iy) +
                       dims_[1] * static_cast<std::size_t>(v.iz));
  }
  VoxelIndex Unravel(std::size_t linear) const {
    const std::size_t plane = std::size_t{dims_[0]} * dims_[1];
    return {static_cast<std::int64_t>(linear % dims_[0]),
            static_cast<std::int64_t>((linear % plane) / dims_[0]),
            static_cast<std::int64_t>(linear / plane)};
  }
  bool Contains(const VoxelIndex& v) const {
    return v.ix >= 0 && v.iy >= 0 && v.iz >= 0 && v.ix < dims_[0] &&
           v.iy < dims_[1] && v.iz < dims_[2];
  }
  // Center of voxel `v` in the frame `origin` is expressed in.
  Point3 VoxelCenter(const VoxelIndex& v) const {
    return {origin_.x() + (static_cast<double>(v.ix) + 0.5) * voxel_size_.x(),
            origin_.y() + (static_cast<double>(v.iy) + 0.5) * voxel_size_.y(),
            origin_.z() + (static_cast<double>(v.iz) + 0.5) * voxel_size_.z()};
  }

  friend bool operator==(const GridSpec& a, const GridSpec& b) {
    return a.dims_ == b.dims_ && a.voxel_size_ == b.voxel_size_ &&
           a.origin_ == b.origin_;
  }

 private:
  std::array<std::uint32_t, 3> dims_;
  Point3 voxel_size_;
  Point3 origin_;
};

// Returns floor((point - origin) / voxel_size) per axis, or nullopt when any
// component falls outside [0, dims). The upper boundary is exclusive.
std::optional<VoxelIndex> WorldToVoxel(const GridSpec& spec,
                                       const Point3& point);

enum class ClassRole { kThing, kStuff, kFree };

std::string_view ClassRoleName(ClassRole role);
ClassRole ParseClassRole(std::string_view name);

struct ClassEntry {
  ClassId id = 0;
  std::string name;
  ClassRole role = ClassRole::kStuff;
  friend bool operator==(const ClassEntry&, const ClassEntry&) = default;
};

// Class ids are contiguous from 0; exactly one class is free and at least one
// is a thing.
class ClassTable {
 public:
  explicit ClassTable(std::vector<ClassEntry> entries);

  // free, vehicle, pedestrian, cyclist, sign, building, vegetation, road,
  // general_object.
  static ClassTable Default();

  std::size_t size() const { return entries_.size(); }
  const std::vector<ClassEntry>& entries() const { return entries_; }
  const ClassEntry& at(ClassId id) const;
  bool Has(ClassId id) const { return id < entries_.size(); }
  ClassRole role(ClassId id) const { return at(id).role; }
  bool IsThing(ClassId id) const { return role(id) == ClassRole::kThing; }
  ClassId free_class() const { return free_class_; }
  std::optional<ClassId> FindByName(std::string_view name) const;

  friend bool operator==(const ClassTable& a, const ClassTable& b) {
    return a.entries_ == b.entries_;
  }

 private:
  std::vector<ClassEntry> entries_;
  ClassId free_class_ = 0;
};

// One frame of dense panoptic labels.
struct PanopticGrid {
  GridSpec spec;
  std::vector<ClassId> classes;
  std::vector<InstanceId> instances;
  // Empty when the frame carries no visibility mask; otherwise one 0/1 entry
  // per voxel.
  std::vector<std::uint8_t> visibility;
  std::int64_t frame_index = 0;
  Pose ego_pose = Pose::Identity();

  // All-free grid with identity pose and no visibility mask.
  static PanopticGrid Filled(const GridSpec& spec, ClassId cls);

  bool has_visibility() const { return !visibility.empty(); }
  bool visible(std::size_t v) const {
    return visibility.empty() || visibility[v] != 0;
  }
  ClassId class_at(const VoxelIndex& v) const {
    return classes[spec.Linear(v)];
  }
  InstanceId instance_at(const VoxelIndex& v) const {
    return instances[spec.Linear(v)];
  }
  void Set(const VoxelIndex& v, ClassId cls, InstanceId id = kNoInstance) {
    const std::size_t i = spec.Linear(v);
    classes[i] = cls;
    instances[i] = id;
  }
  Point3 VoxelCenterWorld(const VoxelIndex& v) const;

  friend bool operator==(const PanopticGrid& a, const PanopticGrid& b);
};

// Throws Error(kInvariantViolation) naming the first offending voxel, or
// Error(kSingularPose) when the pose is not rigid.
void ValidateGrid(const PanopticGrid& grid, const ClassTable& table);

// Throws Error(kSingularPose) unless the rotation block is orthonormal to
// 1e-6 and the last row is (0, 0, 0, 1).
void ValidateRigid(const Pose& pose);
Pose InvertRigid(const Pose& pose);
Point3 TransformPoint(const Pose& pose, const Point3& p);

// Oriented 3D box with persistent track id, world frame.
struct TrackedBox {
  Point3 center = Point3::Zero();
  Point3 size = Point3::Ones();  // length (x), width (y), height (z)
  double yaw = 0.0;
  ClassId class_id = 0;
  TrackId track_id = 1;
  std::int64_t frame_index = 0;
};

// Throws Error(kInvalidArgument) naming the field.
void ValidateBox(const TrackedBox& box, const ClassTable& table);

// Mean world-frame voxel center over all voxels labeled `id`.
std::optional<Point3> InstanceCentroid(const PanopticGrid& grid,
                                       InstanceId id);

// Centroids for every nonzero instance id in one pass.
std::map<InstanceId, Point3> InstanceCentroids(const PanopticGrid& grid);

// Resamples `src` onto the lattice `dst_spec` placed at `dst_pose` with
// nearest-voxel lookup. Destination voxels that land outside `src` become
// `free_class` with no instance. Visibility is reset (all visible).
PanopticGrid WarpInstances(const PanopticGrid& src, const Pose& dst_pose,
                           const GridSpec& dst_spec, ClassId free_class);

namespace serial {
PanopticGrid WarpInstances(const PanopticGrid& src, const Pose& dst_pose,
                           const GridSpec& dst_spec, ClassId free_class);
}  // namespace serial

}  // namespace occ4d

#endif  // OCC4D_VOXEL_CORE_H_
