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
#include "occ4d/trackers/lifecycle.h"

#include <set>
#include <string>

#include "occ4d/error.h"

namespace occ4d {

std::string_view DecisionName(Decision d) {
  switch (d) {
    case Decision::kSpawn: return "spawn";
    case Decision::kKeep: return "keep";
    case Decision::kTerminate: return "terminate";
    case Decision::kDiscard: return "discard";
  }
  return "discard";
}

LifecycleManager::LifecycleManager(ClassTable table, LifecycleParams params)
    : table_(std::move(table)), params_(params) {
  if (params_.patience < 1) {
    throw Error(ErrorCode::kInvalidArgument, "patience must be >= 1");
  }
}

LifecycleStep LifecycleManager::Step(std::span<const Proposal> proposals) {
  std::set<TrackId> referenced;
  for (const Proposal& p : proposals) {
    if (p.frame_index != proposals.front().frame_index) {
      throw Error(ErrorCode::kFrameMismatch,
                  "proposals from frames " +
                      std::to_string(proposals.front().frame_index) + " and " +
                      std::to_string(p.frame_index) + " in one step");
    }
    if (!(p.score >= 0.0 && p.score <= 1.0)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "proposal score " + std::to_string(p.score) +
                      " outside [0, 1]");
    }
    if (!table_.Has(p.class_id)) {
      throw Error(ErrorCode::kMissingClassTableEntry,
                  "proposal class " + std::to_string(p.class_id));
    }
    if (p.origin != ProposalOrigin::kTracked) continue;
    if (!active_.count(p.instance_id)) {
      throw Error(ErrorCode::kUnknownTrackId,
                  "tracked proposal references track " +
                      std::to_string(p.instance_id) + " which is not active");
    }
    if (!referenced.insert(p.instance_id).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "track " + std::to_string(p.instance_id) +
                      " referenced twice in one frame");
    }
  }
  const std::int64_t frame = proposals.empty() ? 0 : proposals.front().frame_index;

  LifecycleStep step;
  step.decisions.resize(proposals.size());
  // Existing tracks are resolved before newborns so a track spawned this
  // frame is not also aged this frame.
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    const Proposal& p = proposals[i];
    if (p.origin != ProposalOrigin::kTracked) continue;
    ActiveTrack& t = active_.at(p.instance_id);
    t.last_frame = p.frame_index;
    if (p.score < params_.exit_threshold) {
      ++t.low_score_count;
    } else {
      t.low_score_count = 0;
    }
    if (t.low_score_count >= params_.patience) {
      step.decisions[i] = {Decision::kTerminate, p.instance_id};
      active_.erase(p.instance_id);
    } else {
      step.decisions[i] = {Decision::kKeep, p.instance_id};
    }
  }
  for (auto it = active_.begin(); it != active_.end();) {
    if (referenced.count(it->first)) {
      ++it;
      continue;
    }
    if (++it->second.low_score_count >= params_.patience) {
      step.expired.push_back(it->first);
      it = active_.erase(it);
    } else {
      ++it;
    }
  }
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    const Proposal& p = proposals[i];
    if (p.origin != ProposalOrigin::kEmerging) continue;
    if (table_.IsThing(p.class_id) && p.score > params_.entrance_threshold) {
      const TrackId id = next_id_++;
      active_[id] = {p.class_id, 0, frame};
      step.decisions[i] = {Decision::kSpawn, id};
    } else {
      step.decisions[i] = {Decision::kDiscard, 0};
    }
  }
  return step;
}

}  // namespace occ4d
