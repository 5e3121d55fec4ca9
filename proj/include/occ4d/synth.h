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
#ifndef OCC4D_SYNTH_H_
#define OCC4D_SYNTH_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "occ4d/dataset_io.h"
#include "occ4d/label_gen.h"
#include "occ4d/trackers/tracker_io.h"
#include "occ4d/voxel_core.h"

namespace occ4d {

enum class EgoMotion { kStatic, kStraight, kArc };

struct EgoTrajectory {
  EgoMotion motion = EgoMotion::kStatic;
  Point3 start = Point3::Zero();
  double heading = 0.0;   // rad
  double speed = 0.0;     // m/s
  double yaw_rate = 0.0;  // rad/s, arc only
};

struct Waypoint {
  std::int64_t frame = 0;
  Point3 center = Point3::Zero();  // world frame
  double yaw = 0.0;
};

// Boxes move linearly between waypoints; waypoints must cover every frame.
struct Actor {
  ClassId class_id = 0;
  Point3 size = Point3::Ones();
  std::vector<Waypoint> waypoints;
};

struct StuffBlock {
  ClassId class_id = 0;
  Point3 min = Point3::Zero();  // world frame, axis aligned
  Point3 max = Point3::Zero();
};

// Grid-frame rectangle standing in for the camera-visible region.
struct VisibilityWindow {
  double x_min = 0.0, x_max = 0.0, y_min = 0.0, y_max = 0.0;
};

struct Scenario {
  std::string sequence_id = "synth";
  GridSpec spec = GridSpec::Occ3dWaymo();
  ClassTable classes = ClassTable::Default();
  int frames = 1;
  double frame_period = 0.5;  // seconds (2 Hz)
  EgoTrajectory ego;
  std::vector<Actor> actors;  // actor i has track id i + 1
  std::optional<ClassId> ground_class;
  double ground_height = 0.0;  // world z below which voxels are ground
  std::vector<StuffBlock> blocks;
  std::optional<VisibilityWindow> visibility;
  // Actor centers must stay this far inside the grid's x/y extent.
  double margin = 0.0;
  // Randomly placed stuff voxels (drawn from `seed`) in free space.
  std::optional<ClassId> clutter_class;
  int clutter_count = 0;
  std::uint64_t seed = 0;
};

struct RenderedSequence {
  SequenceManifest manifest;  // gt manifest; grid paths are frame file names
  std::vector<SemanticGrid> semantic;
  std::vector<std::vector<TrackedBox>> boxes;  // per frame, world frame
  std::vector<PanopticGrid> gt;
};

Pose EgoPoseAt(const EgoTrajectory& ego, double t);

// Throws Error(kActorOutOfBounds) naming the frame and actor.
RenderedSequence RenderSequence(const Scenario& scenario);

struct IdSwitch {
  TrackId track = 0;
  std::int64_t frame = 0;  // the new id takes over from this frame on
};

struct TrackDrop {
  TrackId track = 0;
  std::int64_t first_frame = 0;
  std::int64_t last_frame = 0;  // inclusive
};

struct ScoreModel {
  double mean = 0.8;
  double sigma = 0.1;
};

// Applied in this order: class flips, erosion, dilation, id switches, drops,
// fresh per-frame ids. Switch and drop events name ground-truth track ids.
struct NoiseSpec {
  std::map<ClassId, double> class_flip_prob;
  int erode_radius = 0;
  int dilate_radius = 0;
  std::vector<TrackDrop> drops;
  std::vector<IdSwitch> id_switches;
  bool fresh_ids_per_frame = false;
  ScoreModel scores;
  std::uint64_t seed = 0;
};

struct CorruptedSequence {
  std::vector<PanopticGrid> frames;
  ProposalStream proposals;
};

// Throws Error(kInvalidArgument) for bad probabilities or radii and
// Error(kUnknownTrackId) for events on tracks absent from `gt`.
CorruptedSequence Corrupt(const std::vector<PanopticGrid>& gt,
                          const ClassTable& table, const NoiseSpec& noise);

// Scenarios whose actors never cross or touch; each has 1-4 actors of mixed
// classes under static, straight and arc ego motion.
std::vector<Scenario> NonCrossingSuite(const GridSpec& spec, int frames,
                                       std::uint64_t seed);

Scenario LoadScenario(const std::filesystem::path& path);
NoiseSpec LoadNoiseSpec(const std::filesystem::path& path,
                        const ClassTable& table);

// Writes <dir>/gt (panoptic grids + manifest) and <dir>/semantic (semantic
// grids + manifest + boxes.yaml).
void WriteRenderedSequence(const RenderedSequence& seq,
                           const std::filesystem::path& dir);

// Writes grids, proposals.yaml and a manifest referencing both; frame
// metadata is copied from `like`.
void WritePredictedSequence(const SequenceManifest& like,
                            const std::vector<PanopticGrid>& frames,
                            const ProposalStream* proposals,
                            const std::filesystem::path& dir);

}  // namespace occ4d

#endif  // OCC4D_SYNTH_H_
