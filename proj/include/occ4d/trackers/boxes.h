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
#ifndef OCC4D_TRACKERS_BOXES_H_
#define OCC4D_TRACKERS_BOXES_H_

#include <cstdint>
#include <vector>

#include "occ4d/voxel_core.h"

namespace occ4d {

struct AxisAlignedBox {
  Point3 min = Point3::Zero();
  Point3 max = Point3::Zero();

  Point3 center() const { return 0.5 * (min + max); }
  Point3 size() const { return max - min; }
  double volume() const;
  static AxisAlignedBox FromCenterSize(const Point3& center, const Point3& size);
};

double BoxIoU(const AxisAlignedBox& a, const AxisAlignedBox& b);

struct InstanceBox {
  InstanceId id = kNoInstance;
  AxisAlignedBox box;
  Point3 centroid = Point3::Zero();
  std::uint64_t voxel_count = 0;
  ClassId class_id = 0;  // majority class; ties to the smaller id
};

// One world-frame axis-aligned box per nonzero instance id: the extent of its
// voxel centers grown by half a voxel on every side. Sorted by id.
std::vector<InstanceBox> InstancesToBoxes(const PanopticGrid& grid);

}  // namespace occ4d

#endif  // OCC4D_TRACKERS_BOXES_H_
