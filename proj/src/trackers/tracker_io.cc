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
#include "occ4d/trackers/tracker_io.h"

#include <yaml-cpp/yaml.h>

#include "../yaml_util.h"
#include "occ4d/dataset_io.h"
#include "occ4d/error.h"

namespace occ4d {

namespace fs = std::filesystem;
using yaml_util::Fail;
using yaml_util::Field;
using yaml_util::LoadYaml;

namespace {

template <typename T>
void Optional(const fs::path& file, const YAML::Node& section,
              const std::string& key, const std::string& ctx, T* out) {
  if (section[key]) *out = Field<T>(file, section, key, ctx);
}

void RequirePositive(const fs::path& file, const YAML::Node& node,
                     const std::string& field, double v) {
  if (!(v > 0.0)) Fail(file, node, field, "must be > 0");
}

}  // namespace

TrackerConfig LoadTrackerConfig(const fs::path& path) {
  const YAML::Node root = LoadYaml(path);
  TrackerConfig c;
  if (root.IsNull()) return c;
  if (!root.IsMap()) Fail(path, root, "<root>", "expected a mapping");
  for (const auto& kv : root) {
    const std::string key = kv.first.as<std::string>();
    if (key != "overlap" && key != "ab3dmot" && key != "lifecycle") {
      Fail(path, kv.first, key, "unknown section");
    }
  }
  if (const YAML::Node s = root["overlap"]) {
    Optional(path, s, "min_iou", "overlap.", &c.overlap.min_iou);
    if (!(c.overlap.min_iou >= 0.0 && c.overlap.min_iou < 1.0)) {
      Fail(path, s, "overlap.min_iou", "must be in [0, 1)");
    }
  }
  if (const YAML::Node s = root["ab3dmot"]) {
    KalmanConfig& k = c.ab3dmot;
    Optional(path, s, "min_iou", "ab3dmot.", &k.min_iou);
    Optional(path, s, "min_hits", "ab3dmot.", &k.min_hits);
    Optional(path, s, "max_age", "ab3dmot.", &k.max_age);
    Optional(path, s, "dt", "ab3dmot.", &k.dt);
    Optional(path, s, "sigma_position", "ab3dmot.", &k.sigma_position);
    Optional(path, s, "sigma_size", "ab3dmot.", &k.sigma_size);
    Optional(path, s, "sigma_velocity", "ab3dmot.", &k.sigma_velocity);
    Optional(path, s, "initial_velocity_sigma", "ab3dmot.",
             &k.initial_velocity_sigma);
    if (k.min_hits < 1) Fail(path, s, "ab3dmot.min_hits", "must be >= 1");
    if (k.max_age < 1) Fail(path, s, "ab3dmot.max_age", "must be >= 1");
    RequirePositive(path, s, "ab3dmot.dt", k.dt);
    RequirePositive(path, s, "ab3dmot.sigma_position", k.sigma_position);
    RequirePositive(path, s, "ab3dmot.sigma_size", k.sigma_size);
    RequirePositive(path, s, "ab3dmot.sigma_velocity", k.sigma_velocity);
    RequirePositive(path, s, "ab3dmot.initial_velocity_sigma",
                    k.initial_velocity_sigma);
  }
  if (const YAML::Node s = root["lifecycle"]) {
    LifecycleParams& l = c.lifecycle;
    Optional(path, s, "entrance_threshold", "lifecycle.", &l.entrance_threshold);
    Optional(path, s, "exit_threshold", "lifecycle.", &l.exit_threshold);
    Optional(path, s, "patience", "lifecycle.", &l.patience);
    if (l.patience < 1) Fail(path, s, "lifecycle.patience", "must be >= 1");
  }
  return c;
}

ProposalStream LoadProposals(const fs::path& path) {
  const YAML::Node root = LoadYaml(path);
  ProposalStream out;
  if (root.IsNull()) return out;
  if (!root.IsMap()) Fail(path, root, "<root>", "expected a mapping");
  const YAML::Node list = root["proposals"];
  if (!list || list.IsNull()) return out;
  if (!list.IsSequence()) Fail(path, list, "proposals", "expected a list");
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string ctx = "proposals[" + std::to_string(i) + "].";
    const YAML::Node n = list[i];
    Proposal p;
    p.frame_index = Field<std::int64_t>(path, n, "frame_index", ctx);
    p.instance_id = Field<InstanceId>(path, n, "instance_id", ctx);
    p.class_id = Field<ClassId>(path, n, "class_id", ctx);
    p.score = Field<double>(path, n, "score", ctx);
    if (!(p.score >= 0.0 && p.score <= 1.0)) {
      Fail(path, n, ctx + "score", "must be in [0, 1]");
    }
    const std::string origin = Field<std::string>(path, n, "origin", ctx);
    if (origin == "emerging") {
      p.origin = ProposalOrigin::kEmerging;
    } else if (origin == "tracked") {
      p.origin = ProposalOrigin::kTracked;
    } else {
      Fail(path, n["origin"], ctx + "origin", "expected emerging or tracked");
    }
    out[p.frame_index].push_back(p);
  }
  return out;
}

void WriteProposals(const ProposalStream& stream, const fs::path& path) {
  YAML::Emitter e;
  e.SetDoublePrecision(17);
  e << YAML::BeginMap << YAML::Key << "proposals" << YAML::Value
    << YAML::BeginSeq;
  for (const auto& [frame, list] : stream) {
    for (const Proposal& p : list) {
      e << YAML::Flow << YAML::BeginMap;
      e << YAML::Key << "frame_index" << YAML::Value << p.frame_index;
      e << YAML::Key << "instance_id" << YAML::Value << p.instance_id;
      e << YAML::Key << "class_id" << YAML::Value << p.class_id;
      e << YAML::Key << "score" << YAML::Value << p.score;
      e << YAML::Key << "origin" << YAML::Value
        << (p.origin == ProposalOrigin::kEmerging ? "emerging" : "tracked");
      e << YAML::EndMap;
    }
  }
  e << YAML::EndSeq << YAML::EndMap;
  WriteTextFile(path, std::string(e.c_str()) + "\n");
}

}  // namespace occ4d
