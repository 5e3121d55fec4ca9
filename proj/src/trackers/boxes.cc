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
#include "occ4d/trackers/boxes.h"

#include <algorithm>
#include <limits>
#include <map>

namespace occ4d {

double AxisAlignedBox::volume() const {
  const Point3 s = size();
  return std::max(0.0, s.x()) * std::max(0.0, s.y()) * std::max(0.0, s.z());
}

AxisAlignedBox AxisAlignedBox::FromCenterSize(const Point3& center,
                                              const Point3& size) {
  const Point3 half = 0.5 * size.cwiseMax(0.0);
  return {center - half, center + half};
}

double BoxIoU(const AxisAlignedBox& a, const AxisAlignedBox& b) {
  const Point3 lo = a.min.cwiseMax(b.min);
  const Point3 hi = a.max.cwiseMin(b.max);
  const Point3 d = (hi - lo).cwiseMax(0.0);
  const double inter = d.x() * d.y() * d.z();
  const double uni = a.volume() + b.volume() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

std::vector<InstanceBox> InstancesToBoxes(const PanopticGrid& grid) {
  struct Extent {
    Point3 lo = Point3::Constant(std::numeric_limits<double>::infinity());
    Point3 hi = Point3::Constant(-std::numeric_limits<double>::infinity());
    Point3 sum = Point3::Zero();
    std::uint64_t count = 0;
    std::map<ClassId, std::uint64_t> classes;
  };
  std::map<InstanceId, Extent> extents;
  for (std::size_t v = 0; v < grid.spec.num_voxels(); ++v) {
    const InstanceId id = grid.instances[v];
    if (id == kNoInstance) continue;
    const Point3 c = grid.VoxelCenterWorld(grid.spec.Unravel(v));
    Extent& e = extents[id];
    e.lo = e.lo.cwiseMin(c);
    e.hi = e.hi.cwiseMax(c);
    e.sum += c;
    ++e.count;
    ++e.classes[grid.classes[v]];
  }
  const Point3 half = 0.5 * grid.spec.voxel_size();
  std::vector<InstanceBox> out;
  out.reserve(extents.size());
  for (const auto& [id, e] : extents) {
    InstanceBox b;
    b.id = id;
    b.box = {e.lo - half, e.hi + half};
    b.centroid = e.sum / static_cast<double>(e.count);
    b.voxel_count = e.count;
    std::uint64_t best = 0;
    for (const auto& [cls, n] : e.classes) {
      if (n > best) {
        best = n;
        b.class_id = cls;
      }
    }
    out.push_back(b);
  }
  return out;
}

}  // namespace occ4d
