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
#ifndef OCC4D_TRACKERS_LIFECYCLE_H_
#define OCC4D_TRACKERS_LIFECYCLE_H_

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "occ4d/voxel_core.h"

namespace occ4d {

// Entrance is strict (score > entrance), exit is strict (score < exit).
struct LifecycleParams {
  double entrance_threshold = 0.3;
  double exit_threshold = 0.25;
  int patience = 3;  // consecutive low-score frames before termination
};

enum class ProposalOrigin { kEmerging, kTracked };

struct Proposal {
  std::int64_t frame_index = 0;
  // Instance id of the proposal's mask in the frame's grid. For tracked
  // proposals handled by LifecycleManager this is the track id.
  InstanceId instance_id = kNoInstance;
  ClassId class_id = 0;
  double score = 0.0;
  ProposalOrigin origin = ProposalOrigin::kEmerging;
};

enum class Decision { kSpawn, kKeep, kTerminate, kDiscard };

std::string_view DecisionName(Decision d);

struct ProposalDecision {
  Decision decision = Decision::kDiscard;
  TrackId track_id = 0;  // 0 for discarded proposals
};

struct ActiveTrack {
  ClassId class_id = 0;
  int low_score_count = 0;
  std::int64_t last_frame = 0;
};

struct LifecycleStep {
  std::vector<ProposalDecision> decisions;  // parallel to the input proposals
  // Active tracks with no proposal this frame count as low-score; those that
  // reached the patience limit are listed here.
  std::vector<TrackId> expired;
};

// Track birth and death driven by per-frame classification scores.
class LifecycleManager {
 public:
  LifecycleManager(ClassTable table, LifecycleParams params = {});

  // Throws kFrameMismatch for mixed frames, kUnknownTrackId for tracked
  // proposals without an active track, kInvalidArgument for scores outside
  // [0, 1] or a track referenced twice.
  LifecycleStep Step(std::span<const Proposal> proposals);

  const std::map<TrackId, ActiveTrack>& active() const { return active_; }
  TrackId next_id() const { return next_id_; }
  const LifecycleParams& params() const { return params_; }

 private:
  ClassTable table_;
  LifecycleParams params_;
  std::map<TrackId, ActiveTrack> active_;
  TrackId next_id_ = 1;
};

}  // namespace occ4d

#endif  // OCC4D_TRACKERS_LIFECYCLE_H_
