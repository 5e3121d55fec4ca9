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
#include "occ4d/trackers/overlap_tracker.h"

#include <algorithm>
#include <unordered_map>

#include "occ4d/assignment.h"

namespace occ4d {

OverlapTracker::OverlapTracker(ClassTable table, OverlapConfig config)
    : table_(std::move(table)), config_(config) {}

OverlapStep OverlapTracker::Step(const PanopticGrid& curr) {
  const std::size_t n = curr.spec.num_voxels();
  auto is_instance = [&](ClassId c, InstanceId id) {
    return id != kNoInstance && table_.IsThing(c);
  };

  std::map<InstanceId, std::uint64_t> curr_area;
  for (std::size_t v = 0; v < n; ++v) {
    if (is_instance(curr.classes[v], curr.instances[v])) {
      ++curr_area[curr.instances[v]];
    }
  }

  OverlapStep step{curr, {}, {}, {}};
  std::vector<TrackId> prev_ids;
  if (prev_) {
    const PanopticGrid warped =
        WarpInstances(*prev_, curr.ego_pose, curr.spec, table_.free_class());
    std::map<TrackId, std::uint64_t> prev_area;
    std::unordered_map<std::uint64_t, std::uint64_t> inter;
    for (std::size_t v = 0; v < n; ++v) {
      const bool p = is_instance(warped.classes[v], warped.instances[v]);
      const bool c = is_instance(curr.classes[v], curr.instances[v]);
      if (p) ++prev_area[warped.instances[v]];
      if (p && c) {
        ++inter[(std::uint64_t{warped.instances[v]} << 32) | curr.instances[v]];
      }
    }
    // Tracks that warped out of view still die here.
    for (std::size_t v = 0; v < prev_->spec.num_voxels(); ++v) {
      if (is_instance(prev_->classes[v], prev_->instances[v])) {
        prev_area.emplace(prev_->instances[v], 0);
      }
    }
    std::vector<InstanceId> curr_ids;
    for (const auto& [id, a] : curr_area) curr_ids.push_back(id);
    for (const auto& [id, a] : prev_area) prev_ids.push_back(id);

    WeightMatrix iou(prev_ids.size(), curr_ids.size());
    for (std::size_t i = 0; i < prev_ids.size(); ++i) {
      for (std::size_t j = 0; j < curr_ids.size(); ++j) {
        const auto it = inter.find((std::uint64_t{prev_ids[i]} << 32) | curr_ids[j]);
        if (it == inter.end()) continue;
        const double x = static_cast<double>(it->second);
        iou(i, j) = x / (static_cast<double>(prev_area[prev_ids[i]]) +
                         static_cast<double>(curr_area[curr_ids[j]]) - x);
      }
    }
    std::vector<char> carried(prev_ids.size(), 0);
    for (const auto& [i, j] : MaxWeightMatching(iou, config_.min_iou)) {
      step.id_map[curr_ids[j]] = prev_ids[i];
      carried[i] = 1;
    }
    for (std::size_t i = 0; i < prev_ids.size(); ++i) {
      if (!carried[i]) step.deaths.push_back(prev_ids[i]);
    }
  }
  for (const auto& [id, a] : curr_area) {
    if (step.id_map.count(id)) continue;
    step.id_map[id] = next_id_;
    step.births.push_back(next_id_);
    ++next_id_;
  }
  for (std::size_t v = 0; v < n; ++v) {
    if (is_instance(curr.classes[v], curr.instances[v])) {
      step.relabeled.instances[v] = step.id_map.at(curr.instances[v]);
    }
  }
  births_ += step.births.size();
  deaths_ += step.deaths.size();
  prev_ = step.relabeled;
  return step;
}

}  // namespace occ4d
