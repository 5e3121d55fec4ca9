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
#ifndef OCC4D_TRACKERS_TRACKER_IO_H_
#define OCC4D_TRACKERS_TRACKER_IO_H_

#include <filesystem>
#include <map>
#include <vector>

#include "occ4d/trackers/kalman_tracker.h"
#include "occ4d/trackers/lifecycle.h"
#include "occ4d/trackers/overlap_tracker.h"

namespace occ4d {

struct TrackerConfig {
  OverlapConfig overlap;
  KalmanConfig ab3dmot;
  LifecycleParams lifecycle;
};

// YAML with optional `overlap`, `ab3dmot` and `lifecycle` sections; missing
// keys keep their defaults. Throws kParseError with file:line context.
TrackerConfig LoadTrackerConfig(const std::filesystem::path& path);

// Proposals grouped by frame index.
using ProposalStream = std::map<std::int64_t, std::vector<Proposal>>;

ProposalStream LoadProposals(const std::filesystem::path& path);
void WriteProposals(const ProposalStream& stream,
                    const std::filesystem::path& path);

}  // namespace occ4d

#endif  // OCC4D_TRACKERS_TRACKER_IO_H_
