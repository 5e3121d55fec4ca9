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
#ifndef OCC4D_TRACKERS_OVERLAP_TRACKER_H_
#define OCC4D_TRACKERS_OVERLAP_TRACKER_H_

#include <map>
#include <optional>
#include <vector>

#include "occ4d/voxel_core.h"

namespace occ4d {

struct OverlapConfig {
  double min_iou = 0.1;
};

struct OverlapStep {
  PanopticGrid relabeled;
  std::map<InstanceId, TrackId> id_map;  // input instance id -> track id
  std::vector<TrackId> births;
  std::vector<TrackId> deaths;  // tracks of the previous frame not carried on
};

// Two-stage associator with one frame of history: the previous relabeled
// frame is warped into the current ego frame, thing instances are matched by
// voxel IoU (maximum-weight matching, IoU > min_iou), and unmatched current
// instances get fresh ids.
class OverlapTracker {
 public:
  explicit OverlapTracker(ClassTable table, OverlapConfig config = {});

  OverlapStep Step(const PanopticGrid& curr);

  std::size_t births() const { return births_; }
  std::size_t deaths() const { return deaths_; }
  TrackId next_id() const { return next_id_; }

 private:
  ClassTable table_;
  OverlapConfig config_;
  std::optional<PanopticGrid> prev_;
  TrackId next_id_ = 1;
  std::size_t births_ = 0;
  std::size_t deaths_ = 0;
};

}  // namespace occ4d

#endif  // OCC4D_TRACKERS_OVERLAP_TRACKER_H_
