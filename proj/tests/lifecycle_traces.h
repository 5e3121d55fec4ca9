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
#ifndef OCC4D_TESTS_LIFECYCLE_TRACES_H_
#define OCC4D_TESTS_LIFECYCLE_TRACES_H_

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "occ4d/trackers/lifecycle.h"

namespace occ4d::testing {

constexpr double kAbsent = std::numeric_limits<double>::quiet_NaN();

// One object scored frame by frame. While it has no track its score feeds an
// emerging proposal; once spawned, a tracked one. NaN means no proposal.
// Expected events per frame: S spawn, K keep, T terminate, D discard,
// E expired without a proposal, '-' nothing.
struct LifecycleTrace {
  std::string name;
  ClassId class_id = 1;
  std::vector<double> scores;
  std::string expected;
  LifecycleParams params = {};
};

inline std::vector<LifecycleTrace> ScriptedTraces() {
  const double A = kAbsent;
  return {
      {"spawn just above entrance", 1, {0.31}, "S"},
      {"entrance is strict", 1, {0.30}, "D"},
      {"stuff discarded at high score", 7, {0.9}, "D"},
      {"three low scores terminate", 1, {0.5, 0.2, 0.2, 0.2}, "SKKT"},
      {"counter resets", 1, {0.5, 0.2, 0.26, 0.2}, "SKKK"},
      {"exit is strict", 1, {0.5, 0.25, 0.25, 0.25, 0.25}, "SKKKK"},
      {"just below exit", 1, {0.5, 0.2499, 0.2499, 0.2499}, "SKKT"},
      {"late spawn", 2, {0.1, 0.2, 0.3, 0.31, 0.9}, "DDDSK"},
      {"stuff never spawns", 5, {0.9, 0.95, 1.0}, "DDD"},
      {"absent frames expire", 1, {0.5, A, A, A}, "S--E"},
      {"absence interrupted", 1, {0.5, A, 0.9, A, A, 0.3}, "S-K--K"},
      {"reset then terminate", 3, {0.5, 0.2, 0.2, 0.9, 0.2, 0.2, 0.2}, "SKKKKKT"},
      {"respawn with new id", 1, {0.5, 0.2, 0.2, 0.2, 0.5}, "SKKTS"},
      {"extreme scores", 1, {1.0, 0.0, 0.0, 0.0}, "SKKT"},
      {"zero scores", 1, {0.0, 0.0}, "DD"},
      {"patience one", 1, {0.5, 0.2}, "ST", {0.3, 0.25, 1}},
      {"custom thresholds", 1, {0.5, 0.51, 0.39, 0.4, 0.39, 0.39}, "DSKKKT",
       {0.5, 0.4, 2}},
      {"mixed absent and low", 1, {0.5, 0.2, A, 0.2}, "SK-T"},
      {"low then absent", 2, {0.5, 0.2, 0.2, A}, "SKKE"},
      {"pedestrian boundary", 2, {0.300001, 0.25, 0.2499, 0.2499, 0.2499},
       "SKKKT"},
  };
}

struct TraceResult {
  std::string events;
  std::vector<TrackId> spawned_ids;
};

inline TraceResult RunTrace(const LifecycleTrace& t) {
  LifecycleManager m(ClassTable::Default(), t.params);
  TraceResult out;
  TrackId track = 0;
  for (std::size_t f = 0; f < t.scores.size(); ++f) {
    std::vector<Proposal> props;
    if (!std::isnan(t.scores[f])) {
      Proposal p;
      p.frame_index = static_cast<std::int64_t>(f);
      p.class_id = t.class_id;
      p.score = t.scores[f];
      p.origin = track ? ProposalOrigin::kTracked : ProposalOrigin::kEmerging;
      p.instance_id = track ? track : 1;
      props.push_back(p);
    }
    const LifecycleStep step = m.Step(props);
    char ev = '-';
    if (!step.decisions.empty()) {
      const ProposalDecision& d = step.decisions[0];
      switch (d.decision) {
        case Decision::kSpawn:
          ev = 'S';
          track = d.track_id;
          out.spawned_ids.push_back(d.track_id);
          break;
        case Decision::kKeep: ev = 'K'; break;
        case Decision::kTerminate:
          ev = 'T';
          track = 0;
          break;
        case Decision::kDiscard: ev = 'D'; break;
      }
    }
    for (TrackId id : step.expired) {
      if (id == track) {
        ev = 'E';
        track = 0;
      }
    }
    out.events.push_back(ev);
  }
  return out;
}

}  // namespace occ4d::testing

#endif  // OCC4D_TESTS_LIFECYCLE_TRACES_H_
