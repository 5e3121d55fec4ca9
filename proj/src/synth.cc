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
#include "occ4d/synth.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>

#include <yaml-cpp/yaml.h>

#include "occ4d/error.h"
#include "yaml_util.h"

namespace occ4d {

namespace fs = std::filesystem;
using yaml_util::Fail;
using yaml_util::Field;
using yaml_util::LoadYaml;
using yaml_util::Vec;

namespace {

// Platform-independent draws from mt19937_64 (the std distributions are
// implementation-defined).
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream)
      : engine_(seed * 0x9E3779B97F4A7C15ull + stream * 0xD1B54A32D192ED03ull +
                1) {}
  double Uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }
  std::uint64_t Below(std::uint64_t n) { return engine_() % n; }
  double Normal(double mean, double sigma) {
    const double u1 = 1.0 - Uniform();  // (0, 1]
    const double u2 = Uniform();
    return mean + sigma * std::sqrt(-2.0 * std::log(u1)) *
                      std::cos(2.0 * M_PI * u2);
  }

 private:
  std::mt19937_64 engine_;
};

Pose YawPose(const Point3& t, double yaw) {
  Pose p = Pose::Identity();
  const double c = std::cos(yaw), s = std::sin(yaw);
  p(0, 0) = c;
  p(0, 1) = -s;
  p(1, 0) = s;
  p(1, 1) = c;
  p.topRightCorner<3, 1>() = t;
  return p;
}

TrackedBox ActorBoxAt(const Actor& a, std::size_t index, std::int64_t frame) {
  const auto& w = a.waypoints;
  TrackedBox b;
  b.size = a.size;
  b.class_id = a.class_id;
  b.track_id = static_cast<TrackId>(index + 1);
  b.frame_index = frame;
  std::size_t k = 0;
  while (k + 1 < w.size() && w[k + 1].frame <= frame) ++k;
  if (k + 1 == w.size() || w[k].frame == frame) {
    b.center = w[k].center;
    b.yaw = w[k].yaw;
    return b;
  }
  const double s = static_cast<double>(frame - w[k].frame) /
                   static_cast<double>(w[k + 1].frame - w[k].frame);
  b.center = (1.0 - s) * w[k].center + s * w[k + 1].center;
  b.yaw = (1.0 - s) * w[k].yaw + s * w[k + 1].yaw;
  return b;
}

void ValidateScenario(const Scenario& sc) {
  if (sc.frames < 1) throw Error(ErrorCode::kInvalidArgument, "frames must be >= 1");
  if (!(sc.frame_period > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "frame_period must be > 0");
  }
  for (std::size_t i = 0; i < sc.actors.size(); ++i) {
    const Actor& a = sc.actors[i];
    const std::string who = "actor " + std::to_string(i);
    if (!sc.classes.Has(a.class_id) || !sc.classes.IsThing(a.class_id)) {
      throw Error(ErrorCode::kInvalidArgument, who + ": class must be a thing");
    }
    if (!(a.size.minCoeff() > 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, who + ": size must be > 0");
    }
    if (a.waypoints.empty() || a.waypoints.front().frame > 0 ||
        a.waypoints.back().frame < sc.frames - 1) {
      throw Error(ErrorCode::kInvalidArgument,
                  who + ": waypoints must cover frames 0.." +
                      std::to_string(sc.frames - 1));
    }
    for (std::size_t k = 1; k < a.waypoints.size(); ++k) {
      if (a.waypoints[k].frame <= a.waypoints[k - 1].frame) {
        throw Error(ErrorCode::kInvalidArgument,
                    who + ": waypoint frames must increase");
      }
    }
  }
  auto check_stuff = [&](ClassId c, const std::string& what) {
    if (!sc.classes.Has(c) || sc.classes.role(c) != ClassRole::kStuff) {
      throw Error(ErrorCode::kInvalidArgument, what + " class must be stuff");
    }
  };
  if (sc.ground_class) check_stuff(*sc.ground_class, "ground");
  for (const StuffBlock& b : sc.blocks) check_stuff(b.class_id, "block");
  if (sc.clutter_class) check_stuff(*sc.clutter_class, "clutter");
}

std::string FrameFileName(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame_%06zu.occ", i);
  return buf;
}

}  // namespace

Pose EgoPoseAt(const EgoTrajectory& ego, double t) {
  switch (ego.motion) {
    case EgoMotion::kStatic:
      return YawPose(ego.start, ego.heading);
    case EgoMotion::kStraight: {
      const Point3 dir(std::cos(ego.heading), std::sin(ego.heading), 0.0);
      return YawPose(ego.start + ego.speed * t * dir, ego.heading);
    }
    case EgoMotion::kArc: {
      if (ego.yaw_rate == 0.0) {
        return EgoPoseAt({EgoMotion::kStraight, ego.start, ego.heading,
                          ego.speed, 0.0},
                         t);
      }
      const double th = ego.heading + ego.yaw_rate * t;
      const double r = ego.speed / ego.yaw_rate;
      const Point3 p = ego.start + Point3(r * (std::sin(th) - std::sin(ego.heading)),
                                          -r * (std::cos(th) - std::cos(ego.heading)),
                                          0.0);
      return YawPose(p, th);
    }
  }
  return Pose::Identity();
}

RenderedSequence RenderSequence(const Scenario& sc) {
  ValidateScenario(sc);
  RenderedSequence out{SequenceManifest{sc.sequence_id, sc.classes, {}, {}, {}, {}},
                       {}, {}, {}};
  const GridSpec& spec = sc.spec;
  const std::size_t n = spec.num_voxels();
  for (int f = 0; f < sc.frames; ++f) {
    const double t = f * sc.frame_period;
    const Pose pose = EgoPoseAt(sc.ego, t);
    const Pose inv = InvertRigid(pose);

    std::vector<TrackedBox> boxes;
    for (std::size_t i = 0; i < sc.actors.size(); ++i) {
      TrackedBox b = ActorBoxAt(sc.actors[i], i, f);
      const Point3 local = TransformPoint(inv, b.center);
      for (int a = 0; a < 2; ++a) {
        const double lo = spec.origin()[a] + sc.margin;
        const double hi =
            spec.origin()[a] + spec.dims()[a] * spec.voxel_size()[a] - sc.margin;
        if (!(local[a] >= lo && local[a] <= hi)) {
          throw Error(ErrorCode::kActorOutOfBounds,
                      "actor " + std::to_string(i) + " leaves the grid at frame " +
                          std::to_string(f));
        }
      }
      boxes.push_back(b);
    }

    SemanticGrid sem{spec, std::vector<ClassId>(n, sc.classes.free_class()), {},
                     f, pose};
#pragma omp parallel for schedule(static)
    for (std::int64_t v = 0; v < static_cast<std::int64_t>(n); ++v) {
      const Point3 p = TransformPoint(pose, spec.VoxelCenter(spec.Unravel(v)));
      ClassId cls = sc.classes.free_class();
      bool done = false;
      for (const TrackedBox& b : boxes) {
        if (PointInBox(b, p)) {
          cls = b.class_id;
          done = true;
          break;
        }
      }
      if (!done) {
        for (const StuffBlock& blk : sc.blocks) {
          if ((p.array() >= blk.min.array()).all() &&
              (p.array() <= blk.max.array()).all()) {
            cls = blk.class_id;
            done = true;
            break;
          }
        }
      }
      if (!done && sc.ground_class && p.z() < sc.ground_height) {
        cls = *sc.ground_class;
      }
      sem.classes[v] = cls;
    }
    if (sc.clutter_class && sc.clutter_count > 0) {
      Rng rng(sc.seed, static_cast<std::uint64_t>(f));
      for (int k = 0; k < sc.clutter_count; ++k) {
        const std::size_t v = rng.Below(n);
        if (sem.classes[v] == sc.classes.free_class()) sem.classes[v] = *sc.clutter_class;
      }
    }
    if (sc.visibility) {
      const VisibilityWindow& w = *sc.visibility;
      sem.visibility.assign(n, 0);
      for (std::size_t v = 0; v < n; ++v) {
        const Point3 c = spec.VoxelCenter(spec.Unravel(v));
        sem.visibility[v] =
            c.x() >= w.x_min && c.x() <= w.x_max && c.y() >= w.y_min && c.y() <= w.y_max;
      }
    }

    out.gt.push_back(GenerateFrameLabels(sem, boxes, sc.classes).grid);
    out.semantic.push_back(std::move(sem));
    out.boxes.push_back(std::move(boxes));
    out.manifest.frames.push_back({f, FrameFileName(f), pose, t});
  }
  return out;
}

CorruptedSequence Corrupt(const std::vector<PanopticGrid>& gt,
                          const ClassTable& table, const NoiseSpec& noise) {
  for (const auto& [cls, p] : noise.class_flip_prob) {
    if (!table.Has(cls)) {
      throw Error(ErrorCode::kMissingClassTableEntry,
                  "flip probability for unknown class " + std::to_string(cls));
    }
    if (!(p >= 0.0 && p <= 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "flip probability outside [0, 1]");
    }
  }
  if (noise.erode_radius < 0 || noise.dilate_radius < 0) {
    throw Error(ErrorCode::kInvalidArgument, "morphology radii must be >= 0");
  }
  if (!(noise.scores.sigma >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "score sigma must be >= 0");
  }
  std::set<TrackId> tracks;
  InstanceId max_id = 0;
  for (const PanopticGrid& g : gt) {
    for (InstanceId id : g.instances) {
      if (id != kNoInstance) tracks.insert(id);
      max_id = std::max(max_id, id);
    }
  }
  for (const TrackDrop& d : noise.drops) {
    if (!tracks.count(d.track)) {
      throw Error(ErrorCode::kUnknownTrackId,
                  "drop event for unknown track " + std::to_string(d.track));
    }
  }
  for (const IdSwitch& s : noise.id_switches) {
    if (!tracks.count(s.track)) {
      throw Error(ErrorCode::kUnknownTrackId,
                  "id switch for unknown track " + std::to_string(s.track));
    }
  }

  std::vector<ClassId> non_free;
  for (const ClassEntry& e : table.entries()) {
    if (e.role != ClassRole::kFree) non_free.push_back(e.id);
  }
  const ClassId free_cls = table.free_class();

  CorruptedSequence out;
  InstanceId next_fresh = max_id + 1;
  // Switch events get their replacement ids up front, in event order.
  std::vector<InstanceId> switch_ids;
  for (std::size_t k = 0; k < noise.id_switches.size(); ++k) {
    switch_ids.push_back(next_fresh++);
  }
  std::set<InstanceId> seen_ids;

  for (const PanopticGrid& src : gt) {
    PanopticGrid g = src;
    const GridSpec& spec = g.spec;
    const std::size_t n = spec.num_voxels();
    const auto frame = static_cast<std::uint64_t>(g.frame_index);

    if (!noise.class_flip_prob.empty()) {
      Rng rng(noise.seed, frame * 2);
      for (std::size_t v = 0; v < n; ++v) {
        const auto it = noise.class_flip_prob.find(g.classes[v]);
        if (it == noise.class_flip_prob.end() || it->second == 0.0) continue;
        if (rng.Uniform() >= it->second) continue;
        const ClassId old = g.classes[v];
        ClassId next = old;
        while (next == old) next = non_free[rng.Below(non_free.size())];
        g.classes[v] = next;
        if (!(table.IsThing(old) && table.IsThing(next))) g.instances[v] = kNoInstance;
      }
    }

    auto neighbors = [&](std::size_t v, auto&& fn) {
      const VoxelIndex i = spec.Unravel(v);
      const VoxelIndex nb[6] = {{i.ix - 1, i.iy, i.iz}, {i.ix + 1, i.iy, i.iz},
                                {i.ix, i.iy - 1, i.iz}, {i.ix, i.iy + 1, i.iz},
                                {i.ix, i.iy, i.iz - 1}, {i.ix, i.iy, i.iz + 1}};
      for (const VoxelIndex& j : nb) {
        if (spec.Contains(j)) fn(spec.Linear(j));
      }
    };
    for (int r = 0; r < noise.erode_radius; ++r) {
      const std::vector<InstanceId> ids = g.instances;
      for (std::size_t v = 0; v < n; ++v) {
        if (ids[v] == kNoInstance) continue;
        bool boundary = false;
        neighbors(v, [&](std::size_t u) { boundary |= ids[u] != ids[v]; });
        if (boundary) {
          g.classes[v] = free_cls;
          g.instances[v] = kNoInstance;
        }
      }
    }
    for (int r = 0; r < noise.dilate_radius; ++r) {
      const std::vector<InstanceId> ids = g.instances;
      const std::vector<ClassId> cls = g.classes;
      for (std::size_t v = 0; v < n; ++v) {
        if (cls[v] != free_cls) continue;
        InstanceId best = kNoInstance;
        ClassId best_cls = free_cls;
        neighbors(v, [&](std::size_t u) {
          if (ids[u] != kNoInstance && (best == kNoInstance || ids[u] < best)) {
            best = ids[u];
            best_cls = cls[u];
          }
        });
        if (best != kNoInstance) {
          g.classes[v] = best_cls;
          g.instances[v] = best;
        }
      }
    }

    const std::vector<InstanceId> gt_ids = g.instances;
    // Latest switch at or before this frame decides each track's id.
    std::map<InstanceId, InstanceId> remap;
    std::map<InstanceId, std::int64_t> remap_frame;
    for (std::size_t k = 0; k < noise.id_switches.size(); ++k) {
      const IdSwitch& s = noise.id_switches[k];
      if (s.frame > g.frame_index) continue;
      auto it = remap_frame.find(s.track);
      if (it == remap_frame.end() || s.frame >= it->second) {
        remap[s.track] = switch_ids[k];
        remap_frame[s.track] = s.frame;
      }
    }
    if (!remap.empty()) {
      for (std::size_t v = 0; v < n; ++v) {
        const auto it = remap.find(g.instances[v]);
        if (it != remap.end()) g.instances[v] = it->second;
      }
    }
    for (const TrackDrop& d : noise.drops) {
      if (g.frame_index < d.first_frame || g.frame_index > d.last_frame) continue;
      for (std::size_t v = 0; v < n; ++v) {
        if (gt_ids[v] == d.track) {
          g.classes[v] = free_cls;
          g.instances[v] = kNoInstance;
        }
      }
    }
    if (noise.fresh_ids_per_frame) {
      std::map<InstanceId, InstanceId> fresh;
      for (InstanceId id : std::set<InstanceId>(g.instances.begin(), g.instances.end())) {
        if (id != kNoInstance) fresh[id] = next_fresh++;
      }
      for (InstanceId& id : g.instances) {
        if (id != kNoInstance) id = fresh[id];
      }
    }

    // One proposal per thing instance plus one emerging proposal per stuff
    // class present.
    std::map<InstanceId, std::map<ClassId, std::uint64_t>> inst_classes;
    std::set<ClassId> stuff_present;
    for (std::size_t v = 0; v < n; ++v) {
      if (g.instances[v] != kNoInstance) {
        ++inst_classes[g.instances[v]][g.classes[v]];
      } else if (table.role(g.classes[v]) == ClassRole::kStuff) {
        stuff_present.insert(g.classes[v]);
      }
    }
    Rng score_rng(noise.seed, frame * 2 + 1);
    auto draw = [&] {
      return std::clamp(score_rng.Normal(noise.scores.mean, noise.scores.sigma),
                        0.0, 1.0);
    };
    auto& props = out.proposals[g.frame_index];
    for (const auto& [id, counts] : inst_classes) {
      ClassId cls = counts.begin()->first;
      std::uint64_t best = 0;
      for (const auto& [c, k] : counts) {
        if (k > best) {
          best = k;
          cls = c;
        }
      }
      const bool first = seen_ids.insert(id).second;
      props.push_back({g.frame_index, id, cls, draw(),
                       first ? ProposalOrigin::kEmerging : ProposalOrigin::kTracked});
    }
    for (ClassId c : stuff_present) {
      props.push_back({g.frame_index, kNoInstance, c, draw(), ProposalOrigin::kEmerging});
    }
    out.frames.push_back(std::move(g));
  }
  return out;
}

std::vector<Scenario> NonCrossingSuite(const GridSpec& spec, int frames,
                                       std::uint64_t seed) {
  const ClassTable table = ClassTable::Default();
  const ClassId vehicle = *table.FindByName("vehicle");
  const ClassId pedestrian = *table.FindByName("pedestrian");
  const ClassId cyclist = *table.FindByName("cyclist");
  const ClassId road = *table.FindByName("road");
  const ClassId building = *table.FindByName("building");

  const double ext_x = spec.nx() * spec.voxel_size().x();
  const double ext_y = spec.ny() * spec.voxel_size().y();
  const Point3 mid = spec.origin() + 0.5 * Point3(ext_x, ext_y, 0.0);
  const double extent = std::min(ext_x, ext_y);
  const double period = 0.5;
  const double duration = std::max(1, frames - 1) * period;
  Rng rng(seed, 0);

  struct Kind {
    EgoMotion motion;
    std::vector<ClassId> actors;
    bool stuff;
  };
  const std::vector<Kind> kinds = {
      {EgoMotion::kStatic, {vehicle}, false},
      {EgoMotion::kStatic, {vehicle, vehicle, cyclist}, false},
      {EgoMotion::kStraight, {vehicle, pedestrian}, true},
      {EgoMotion::kArc, {vehicle, cyclist}, false},
      {EgoMotion::kStatic, {pedestrian, cyclist, pedestrian}, true},
      {EgoMotion::kStraight, {vehicle, vehicle, cyclist, pedestrian}, true},
  };

  auto size_of = [&](ClassId c) {
    if (c == vehicle) return Point3(4.0, 2.0, 1.6);
    if (c == cyclist) return Point3(1.8, 0.8, 1.6);
    return Point3(0.8, 0.8, 1.6);
  };
  // Largest world-frame speed (m/s) that moves the actor under 40% of its own
  // length per frame and 20% of the grid over the sequence. Association
  // compensates ego motion, so world displacement is what it has to bridge.
  auto speed_cap = [&](ClassId c) {
    return std::min(0.4 * size_of(c).x() / period, 0.2 * extent / duration);
  };

  std::vector<Scenario> out;
  for (std::size_t k = 0; k < kinds.size(); ++k) {
    const Kind& kind = kinds[k];
    Scenario sc;
    sc.sequence_id = "noncrossing_" + std::to_string(k);
    sc.spec = spec;
    sc.classes = table;
    sc.frames = frames;
    sc.frame_period = period;
    sc.seed = seed + k;
    sc.ego.motion = kind.motion;
    sc.ego.start = Point3(mid.x(), mid.y(), 0.0);
    sc.ego.heading = 0.0;
    if (kind.motion == EgoMotion::kStraight) {
      // Whole voxels per frame, so warping between frames is exact.
      const double step = spec.voxel_size().x();
      const double voxels = std::max(1.0, std::round(0.1 * extent / duration * period / step));
      sc.ego.speed = voxels * step / period;
    } else if (kind.motion == EgoMotion::kArc) {
      sc.ego.speed = 0.05 * extent / duration;
      sc.ego.yaw_rate = 0.3 / duration;
    }
    if (kind.stuff) {
      sc.ground_class = road;
      sc.ground_height = 0.0;
      // A building strip along the far +y edge, clear of every lane.
      sc.blocks.push_back({building,
                           Point3(mid.x() - 0.5 * extent, mid.y() + 0.42 * extent, 0.0),
                           Point3(mid.x() + 0.5 * extent + sc.ego.speed * duration,
                                  mid.y() + 0.5 * extent, 3.0)});
    }
    const std::size_t na = kind.actors.size();
    // Lanes 4 m apart centered on the ego, so boxes of width <= 2 m never
    // touch.
    for (std::size_t i = 0; i < na; ++i) {
      Actor a;
      a.class_id = kind.actors[i];
      a.size = size_of(a.class_id);
      const double lane_y = (static_cast<double>(i) - 0.5 * (na - 1)) * 4.0;
      const double x0 = rng.Uniform(-0.1, 0.0) * extent;
      const bool moving = kind.motion != EgoMotion::kArc;
      const double speed =
          moving ? rng.Uniform(-1.0, 1.0) * speed_cap(a.class_id) : 0.0;
      const double z = 0.5 * a.size.z();
      a.waypoints.push_back({0, sc.ego.start + Point3(x0, lane_y, z), 0.0});
      if (frames > 1) {
        a.waypoints.push_back(
            {frames - 1,
             sc.ego.start + Point3(x0 + speed * duration, lane_y, z), 0.0});
      }
      sc.actors.push_back(std::move(a));
    }
    out.push_back(std::move(sc));
  }
  return out;
}

namespace {

ClassId ClassRef(const fs::path& file, const YAML::Node& map,
                 const std::string& key, const std::string& ctx,
                 const ClassTable& table) {
  const YAML::Node n = map[key];
  if (!n) Fail(file, map, ctx + key, "missing field");
  const std::string s = n.as<std::string>();
  if (auto id = table.FindByName(s)) return *id;
  try {
    const int id = n.as<int>();
    if (id >= 0 && table.Has(static_cast<ClassId>(id))) return static_cast<ClassId>(id);
  } catch (const YAML::Exception&) {
  }
  Fail(file, n, ctx + key, "unknown class '" + s + "'");
}

}  // namespace

Scenario LoadScenario(const fs::path& path) {
  const YAML::Node root = LoadYaml(path);
  if (!root.IsMap()) Fail(path, root, "<root>", "expected a mapping");
  Scenario sc;
  if (root["sequence_id"]) sc.sequence_id = Field<std::string>(path, root, "sequence_id", "");
  if (const YAML::Node g = root["grid"]) {
    const Eigen::Vector3d dims = Vec<3>(path, g, "dims", "grid.");
    for (int a = 0; a < 3; ++a) {
      if (dims[a] < 1 || dims[a] != std::floor(dims[a])) {
        Fail(path, g["dims"], "grid.dims", "must be positive integers");
      }
    }
    try {
      sc.spec = GridSpec({static_cast<std::uint32_t>(dims[0]),
                          static_cast<std::uint32_t>(dims[1]),
                          static_cast<std::uint32_t>(dims[2])},
                         Vec<3>(path, g, "voxel_size", "grid."),
                         Vec<3>(path, g, "origin", "grid."));
    } catch (const Error& e) {
      Fail(path, g, "grid", e.what());
    }
  }
  if (const YAML::Node c = root["classes"]) {
    std::vector<ClassEntry> entries;
    for (std::size_t i = 0; i < c.size(); ++i) {
      const std::string ctx = "classes[" + std::to_string(i) + "].";
      entries.push_back({Field<ClassId>(path, c[i], "id", ctx),
                         Field<std::string>(path, c[i], "name", ctx),
                         ParseClassRole(Field<std::string>(path, c[i], "role", ctx))});
    }
    try {
      sc.classes = ClassTable(std::move(entries));
    } catch (const Error& e) {
      Fail(path, c, "classes", e.what());
    }
  }
  sc.frames = Field<int>(path, root, "frames", "");
  if (root["frame_period"]) sc.frame_period = Field<double>(path, root, "frame_period", "");
  if (root["seed"]) sc.seed = Field<std::uint64_t>(path, root, "seed", "");
  if (root["margin"]) sc.margin = Field<double>(path, root, "margin", "");
  if (const YAML::Node e = root["ego"]) {
    const std::string m = Field<std::string>(path, e, "motion", "ego.");
    if (m == "static") {
      sc.ego.motion = EgoMotion::kStatic;
    } else if (m == "straight") {
      sc.ego.motion = EgoMotion::kStraight;
    } else if (m == "arc") {
      sc.ego.motion = EgoMotion::kArc;
    } else {
      Fail(path, e["motion"], "ego.motion", "expected static, straight or arc");
    }
    if (e["start"]) sc.ego.start = Vec<3>(path, e, "start", "ego.");
    if (e["heading"]) sc.ego.heading = Field<double>(path, e, "heading", "ego.");
    if (e["speed"]) sc.ego.speed = Field<double>(path, e, "speed", "ego.");
    if (e["yaw_rate"]) sc.ego.yaw_rate = Field<double>(path, e, "yaw_rate", "ego.");
  }
  if (const YAML::Node gr = root["ground"]) {
    sc.ground_class = ClassRef(path, gr, "class", "ground.", sc.classes);
    if (gr["height"]) sc.ground_height = Field<double>(path, gr, "height", "ground.");
  }
  if (const YAML::Node bl = root["blocks"]) {
    for (std::size_t i = 0; i < bl.size(); ++i) {
      const std::string ctx = "blocks[" + std::to_string(i) + "].";
      sc.blocks.push_back({ClassRef(path, bl[i], "class", ctx, sc.classes),
                           Vec<3>(path, bl[i], "min", ctx),
                           Vec<3>(path, bl[i], "max", ctx)});
    }
  }
  if (const YAML::Node ac = root["actors"]) {
    for (std::size_t i = 0; i < ac.size(); ++i) {
      const std::string ctx = "actors[" + std::to_string(i) + "].";
      Actor a;
      a.class_id = ClassRef(path, ac[i], "class", ctx, sc.classes);
      a.size = Vec<3>(path, ac[i], "size", ctx);
      const YAML::Node wp = ac[i]["waypoints"];
      if (!wp || !wp.IsSequence()) Fail(path, ac[i], ctx + "waypoints", "expected a list");
      for (std::size_t k = 0; k < wp.size(); ++k) {
        const std::string wctx = ctx + "waypoints[" + std::to_string(k) + "].";
        Waypoint w;
        w.frame = Field<std::int64_t>(path, wp[k], "frame", wctx);
        w.center = Vec<3>(path, wp[k], "center", wctx);
        if (wp[k]["yaw"]) w.yaw = Field<double>(path, wp[k], "yaw", wctx);
        a.waypoints.push_back(w);
      }
      sc.actors.push_back(std::move(a));
    }
  }
  if (const YAML::Node v = root["visibility"]) {
    sc.visibility = VisibilityWindow{Field<double>(path, v, "x_min", "visibility."),
                                     Field<double>(path, v, "x_max", "visibility."),
                                     Field<double>(path, v, "y_min", "visibility."),
                                     Field<double>(path, v, "y_max", "visibility.")};
  }
  if (const YAML::Node c = root["clutter"]) {
    sc.clutter_class = ClassRef(path, c, "class", "clutter.", sc.classes);
    sc.clutter_count = Field<int>(path, c, "count", "clutter.");
  }
  try {
    ValidateScenario(sc);
  } catch (const Error& e) {
    Fail(path, root, "<scenario>", e.what());
  }
  return sc;
}

NoiseSpec LoadNoiseSpec(const fs::path& path, const ClassTable& table) {
  const YAML::Node root = LoadYaml(path);
  NoiseSpec n;
  if (root.IsNull()) return n;
  if (!root.IsMap()) Fail(path, root, "<root>", "expected a mapping");
  if (root["seed"]) n.seed = Field<std::uint64_t>(path, root, "seed", "");
  if (const YAML::Node f = root["class_flip_prob"]) {
    for (const auto& kv : f) {
      YAML::Node holder;
      holder["c"] = kv.first;
      const ClassId c = ClassRef(path, holder, "c", "class_flip_prob.", table);
      const double p = kv.second.as<double>();
      if (!(p >= 0.0 && p <= 1.0)) {
        Fail(path, kv.second, "class_flip_prob." + kv.first.as<std::string>(),
             "must be in [0, 1]");
      }
      n.class_flip_prob[c] = p;
    }
  }
  if (root["erode_radius"]) n.erode_radius = Field<int>(path, root, "erode_radius", "");
  if (root["dilate_radius"]) n.dilate_radius = Field<int>(path, root, "dilate_radius", "");
  if (n.erode_radius < 0 || n.dilate_radius < 0) {
    Fail(path, root, "erode_radius/dilate_radius", "must be >= 0");
  }
  if (const YAML::Node s = root["id_switches"]) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      const std::string ctx = "id_switches[" + std::to_string(i) + "].";
      n.id_switches.push_back({Field<TrackId>(path, s[i], "track", ctx),
                               Field<std::int64_t>(path, s[i], "frame", ctx)});
    }
  }
  if (const YAML::Node d = root["drops"]) {
    for (std::size_t i = 0; i < d.size(); ++i) {
      const std::string ctx = "drops[" + std::to_string(i) + "].";
      n.drops.push_back({Field<TrackId>(path, d[i], "track", ctx),
                         Field<std::int64_t>(path, d[i], "first", ctx),
                         Field<std::int64_t>(path, d[i], "last", ctx)});
    }
  }
  if (root["fresh_ids_per_frame"]) {
    n.fresh_ids_per_frame = Field<bool>(path, root, "fresh_ids_per_frame", "");
  }
  if (const YAML::Node s = root["scores"]) {
    if (s["mean"]) n.scores.mean = Field<double>(path, s, "mean", "scores.");
    if (s["sigma"]) n.scores.sigma = Field<double>(path, s, "sigma", "scores.");
  }
  return n;
}

void WriteRenderedSequence(const RenderedSequence& seq, const fs::path& dir) {
  const fs::path gt_dir = dir / "gt";
  const fs::path sem_dir = dir / "semantic";
  fs::create_directories(gt_dir);
  fs::create_directories(sem_dir);
  SequenceManifest gt = seq.manifest;
  SequenceManifest sem = seq.manifest;
  sem.boxes_path = "boxes.yaml";
  std::vector<TrackedBox> all_boxes;
  for (std::size_t i = 0; i < seq.gt.size(); ++i) {
    WriteGrid(seq.gt[i], gt_dir / gt.frames[i].grid_path);
    WriteSemanticGrid(seq.semantic[i], sem_dir / sem.frames[i].grid_path);
    all_boxes.insert(all_boxes.end(), seq.boxes[i].begin(), seq.boxes[i].end());
  }
  WriteManifest(gt, gt_dir / "manifest.yaml");
  WriteManifest(sem, sem_dir / "manifest.yaml");
  WriteBoxes(all_boxes, sem_dir / "boxes.yaml");
}

void WritePredictedSequence(const SequenceManifest& like,
                            const std::vector<PanopticGrid>& frames,
                            const ProposalStream* proposals, const fs::path& dir) {
  fs::create_directories(dir);
  SequenceManifest m = like;
  m.boxes_path.reset();
  m.proposals_path.reset();
  m.frames.clear();
  for (std::size_t i = 0; i < frames.size(); ++i) {
    FrameEntry fe;
    fe.frame_index = frames[i].frame_index;
    fe.grid_path = FrameFileName(i);
    fe.ego_pose = frames[i].ego_pose;
    fe.timestamp = i < like.frames.size() ? like.frames[i].timestamp : 0.0;
    WriteGrid(frames[i], dir / fe.grid_path);
    m.frames.push_back(fe);
  }
  if (proposals) {
    m.proposals_path = "proposals.yaml";
    WriteProposals(*proposals, dir / "proposals.yaml");
  }
  WriteManifest(m, dir / "manifest.yaml");
}

}  // namespace occ4d
