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
#include "occ4d/dataset_io.h"

#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

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

void PutU16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

constexpr std::size_t kPrefixBytes = sizeof(kGridMagic) + kGridHeaderBytes;

void PutU32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int s = 0; s < 32; s += 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

void PutF32(std::vector<std::uint8_t>& out, double v) {
  const float f = static_cast<float>(v);
  std::uint32_t bits;
  std::memcpy(&bits, &f, sizeof(bits));
  PutU32(out, bits);
}

std::uint16_t GetU16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t GetU32(const std::uint8_t* p) {
  return std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) |
         (std::uint32_t{p[2]} << 16) | (std::uint32_t{p[3]} << 24);
}

double GetF32(const std::uint8_t* p) {
  const std::uint32_t bits = GetU32(p);
  float f;
  std::memcpy(&f, &bits, sizeof(f));
  return static_cast<double>(f);
}

std::vector<std::uint8_t> Encode(const GridSpec& spec,
                                 const std::vector<ClassId>& classes,
                                 const std::vector<InstanceId>* instances,
                                 const std::vector<std::uint8_t>& visibility) {
  const std::size_t n = spec.num_voxels();
  std::vector<std::uint8_t> out(std::begin(kGridMagic), std::end(kGridMagic));
  out.reserve(kPrefixBytes + n * 6 + (n + 7) / 8);
  for (int a = 0; a < 3; ++a) PutU32(out, spec.dims()[a]);
  for (int a = 0; a < 3; ++a) PutF32(out, spec.voxel_size()[a]);
  for (int a = 0; a < 3; ++a) PutF32(out, spec.origin()[a]);
  std::uint32_t flags = 0;
  if (!visibility.empty()) flags |= kGridFlagVisibility;
  if (instances == nullptr) flags |= kGridFlagSemanticOnly;
  PutU32(out, flags);
  for (ClassId c : classes) PutU16(out, c);
  if (instances != nullptr) {
    for (InstanceId id : *instances) PutU32(out, id);
  }
  if (!visibility.empty()) {
    std::vector<std::uint8_t> bits((n + 7) / 8, 0);
    for (std::size_t v = 0; v < n; ++v) {
      if (visibility[v]) bits[v / 8] |= static_cast<std::uint8_t>(1u << (v % 8));
    }
    out.insert(out.end(), bits.begin(), bits.end());
  }
  return out;
}

// Decodes without checking label semantics.
DecodedGrid DecodeRaw(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < sizeof(kGridMagic) ||
      std::memcmp(bytes.data(), kGridMagic, sizeof(kGridMagic)) != 0) {
    throw Error(ErrorCode::kBadMagic, "expected magic \"OCC4DPG1\"");
  }
  if (bytes.size() < kPrefixBytes) {
    throw Error(ErrorCode::kTruncatedPayload,
                "header needs " + std::to_string(kPrefixBytes) +
                    " bytes, file has " + std::to_string(bytes.size()));
  }
  const std::uint8_t* p = bytes.data() + 8;
  std::array<std::uint32_t, 3> dims{GetU32(p), GetU32(p + 4), GetU32(p + 8)};
  const Point3 voxel(GetF32(p + 12), GetF32(p + 16), GetF32(p + 20));
  const Point3 origin(GetF32(p + 24), GetF32(p + 28), GetF32(p + 32));
  const std::uint32_t flags = GetU32(p + 36);
  if ((flags & ~(kGridFlagVisibility | kGridFlagSemanticOnly)) != 0) {
    throw Error(ErrorCode::kParseError,
                "unknown flag bits " + std::to_string(flags));
  }
  GridSpec spec(dims, voxel, origin);
  const std::size_t n = spec.num_voxels();
  const bool semantic_only = (flags & kGridFlagSemanticOnly) != 0;
  const bool has_vis = (flags & kGridFlagVisibility) != 0;
  // Bound n by the payload before multiplying to avoid overflow.
  const std::size_t payload = bytes.size() - kPrefixBytes;
  if (n > payload / 2) {
    throw Error(ErrorCode::kTruncatedPayload,
                "payload too short for " + std::to_string(n) + " voxels");
  }
  const std::size_t expected = n * (semantic_only ? 2 : 6) +
                               (has_vis ? (n + 7) / 8 : 0);
  if (payload < expected) {
    throw Error(ErrorCode::kTruncatedPayload,
                "payload has " + std::to_string(payload) + " bytes, header implies " +
                    std::to_string(expected));
  }
  if (payload > expected) {
    throw Error(ErrorCode::kParseError,
                std::to_string(payload - expected) + " trailing bytes after payload");
  }
  DecodedGrid out{PanopticGrid::Filled(spec, 0), semantic_only};
  const std::uint8_t* q = bytes.data() + kPrefixBytes;
  for (std::size_t v = 0; v < n; ++v, q += 2) out.grid.classes[v] = GetU16(q);
  if (!semantic_only) {
    for (std::size_t v = 0; v < n; ++v, q += 4) out.grid.instances[v] = GetU32(q);
  }
  if (has_vis) {
    out.grid.visibility.resize(n);
    for (std::size_t v = 0; v < n; ++v) {
      out.grid.visibility[v] = (q[v / 8] >> (v % 8)) & 1u;
    }
  }
  return out;
}

void EmitDoubles(YAML::Emitter& e, const double* data, int count) {
  e << YAML::Flow << YAML::BeginSeq;
  for (int i = 0; i < count; ++i) e << data[i];
  e << YAML::EndSeq;
}

}  // namespace

std::vector<std::uint8_t> EncodeGrid(const PanopticGrid& grid,
                                     bool semantic_only) {
  return Encode(grid.spec, grid.classes,
                semantic_only ? nullptr : &grid.instances, grid.visibility);
}

DecodedGrid DecodeGrid(std::span<const std::uint8_t> bytes,
                       const ClassTable& table) {
  DecodedGrid d = DecodeRaw(bytes);
  ValidateGrid(d.grid, table);
  return d;
}

std::vector<std::uint8_t> ReadFileBytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, path.string() + ": cannot open");
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void WriteFileBytes(const fs::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, path.string() + ": cannot open for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIoError, path.string() + ": write failed");
}

void WriteTextFile(const fs::path& path, const std::string& text) {
  WriteFileBytes(path, std::span<const std::uint8_t>(
                           reinterpret_cast<const std::uint8_t*>(text.data()),
                           text.size()));
}

PanopticGrid ReadGrid(const fs::path& path, const ClassTable& table) {
  const auto bytes = ReadFileBytes(path);
  try {
    DecodedGrid d = DecodeGrid(bytes, table);
    if (d.semantic_only) {
      throw Error(ErrorCode::kParseError,
                  "semantic-only grid where a panoptic grid was expected");
    }
    return std::move(d.grid);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void WriteGrid(const PanopticGrid& grid, const fs::path& path) {
  WriteFileBytes(path, EncodeGrid(grid));
}

SemanticGrid ReadSemanticGrid(const fs::path& path, const ClassTable& table) {
  const auto bytes = ReadFileBytes(path);
  try {
    DecodedGrid d = DecodeRaw(bytes);
    SemanticGrid sem{d.grid.spec, std::move(d.grid.classes),
                     std::move(d.grid.visibility), 0, Pose::Identity()};
    ValidateSemanticGrid(sem, table);
    return sem;
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void WriteSemanticGrid(const SemanticGrid& grid, const fs::path& path) {
  WriteFileBytes(path, Encode(grid.spec, grid.classes, nullptr, grid.visibility));
}

SequenceManifest LoadManifest(const fs::path& path) {
  const YAML::Node root = LoadYaml(path);
  if (!root.IsMap()) Fail(path, root, "<root>", "expected a mapping");

  const YAML::Node classes = root["classes"];
  if (!classes || !classes.IsSequence()) {
    Fail(path, root, "classes", "missing or not a list");
  }
  std::vector<ClassEntry> entries;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    const std::string ctx = "classes[" + std::to_string(i) + "].";
    const YAML::Node c = classes[i];
    ClassEntry e;
    e.id = Field<ClassId>(path, c, "id", ctx);
    e.name = Field<std::string>(path, c, "name", ctx);
    try {
      e.role = ParseClassRole(Field<std::string>(path, c, "role", ctx));
    } catch (const Error&) {
      Fail(path, c["role"], ctx + "role", "expected thing, stuff or free");
    }
    entries.push_back(std::move(e));
  }
  std::optional<ClassTable> table;
  try {
    table.emplace(std::move(entries));
  } catch (const Error& e) {
    Fail(path, classes, "classes", e.what());
  }

  SequenceManifest m{Field<std::string>(path, root, "sequence_id", ""),
                     *table, {}, std::nullopt, std::nullopt,
                     path.parent_path()};
  if (root["boxes"]) m.boxes_path = Field<std::string>(path, root, "boxes", "");
  if (root["proposals"]) {
    m.proposals_path = Field<std::string>(path, root, "proposals", "");
  }

  const YAML::Node frames = root["frames"];
  if (!frames || !frames.IsSequence() || frames.size() == 0) {
    Fail(path, root, "frames", "need at least one frame");
  }
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const std::string ctx = "frames[" + std::to_string(i) + "].";
    const YAML::Node f = frames[i];
    FrameEntry fe;
    fe.frame_index = Field<std::int64_t>(path, f, "frame_index", ctx);
    if (fe.frame_index < 0) Fail(path, f, ctx + "frame_index", "negative");
    if (!m.frames.empty() && fe.frame_index <= m.frames.back().frame_index) {
      Fail(path, f, ctx + "frame_index", "frame_index not increasing");
    }
    fe.grid_path = Field<std::string>(path, f, "grid", ctx);
    fe.timestamp = f["timestamp"] ? Field<double>(path, f, "timestamp", ctx) : 0.0;
    if (!std::isfinite(fe.timestamp)) Fail(path, f, ctx + "timestamp", "not finite");
    if (f["pose"]) {
      const Eigen::Matrix<double, 16, 1> flat = Vec<16>(path, f, "pose", ctx);
      for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) fe.ego_pose(r, c) = flat[r * 4 + c];
      }
      try {
        ValidateRigid(fe.ego_pose);
      } catch (const Error& e) {
        Fail(path, f["pose"], ctx + "pose", e.what());
      }
    }
    m.frames.push_back(std::move(fe));
  }
  return m;
}

void WriteManifest(const SequenceManifest& m, const fs::path& path) {
  YAML::Emitter e;
  e.SetDoublePrecision(17);
  e << YAML::BeginMap;
  e << YAML::Key << "sequence_id" << YAML::Value << m.sequence_id;
  e << YAML::Key << "classes" << YAML::Value << YAML::BeginSeq;
  for (const ClassEntry& c : m.class_table.entries()) {
    e << YAML::Flow << YAML::BeginMap << YAML::Key << "id" << YAML::Value << c.id
      << YAML::Key << "name" << YAML::Value << c.name << YAML::Key << "role"
      << YAML::Value << std::string(ClassRoleName(c.role)) << YAML::EndMap;
  }
  e << YAML::EndSeq;
  if (m.boxes_path) e << YAML::Key << "boxes" << YAML::Value << *m.boxes_path;
  if (m.proposals_path) {
    e << YAML::Key << "proposals" << YAML::Value << *m.proposals_path;
  }
  e << YAML::Key << "frames" << YAML::Value << YAML::BeginSeq;
  for (const FrameEntry& f : m.frames) {
    e << YAML::Flow << YAML::BeginMap;
    e << YAML::Key << "frame_index" << YAML::Value << f.frame_index;
    e << YAML::Key << "grid" << YAML::Value << f.grid_path;
    e << YAML::Key << "timestamp" << YAML::Value << f.timestamp;
    e << YAML::Key << "pose" << YAML::Value;
    double flat[16];
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) flat[r * 4 + c] = f.ego_pose(r, c);
    }
    EmitDoubles(e, flat, 16);
    e << YAML::EndMap;
  }
  e << YAML::EndSeq << YAML::EndMap;
  WriteTextFile(path, std::string(e.c_str()) + "\n");
}

PanopticGrid LoadFrame(const SequenceManifest& m, std::size_t i) {
  const fs::path p = m.ResolveGrid(i);
  if (!fs::exists(p)) {
    throw Error(ErrorCode::kMissingFrame,
                "frame " + std::to_string(m.frames[i].frame_index) + ": " +
                    p.string() + " does not exist");
  }
  PanopticGrid g = ReadGrid(p, m.class_table);
  g.frame_index = m.frames[i].frame_index;
  g.ego_pose = m.frames[i].ego_pose;
  return g;
}

SemanticGrid LoadSemanticFrame(const SequenceManifest& m, std::size_t i) {
  const fs::path p = m.ResolveGrid(i);
  if (!fs::exists(p)) {
    throw Error(ErrorCode::kMissingFrame,
                "frame " + std::to_string(m.frames[i].frame_index) + ": " +
                    p.string() + " does not exist");
  }
  SemanticGrid g = ReadSemanticGrid(p, m.class_table);
  g.frame_index = m.frames[i].frame_index;
  g.ego_pose = m.frames[i].ego_pose;
  return g;
}

std::vector<TrackedBox> LoadBoxes(const fs::path& path,
                                  const ClassTable& table) {
  const YAML::Node root = LoadYaml(path);
  std::vector<TrackedBox> out;
  if (root.IsNull()) return out;
  if (!root.IsMap()) Fail(path, root, "<root>", "expected a mapping");
  const YAML::Node list = root["boxes"];
  if (!list || list.IsNull()) return out;
  if (!list.IsSequence()) Fail(path, list, "boxes", "expected a list");
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string ctx = "boxes[" + std::to_string(i) + "].";
    const YAML::Node b = list[i];
    TrackedBox box;
    box.frame_index = Field<std::int64_t>(path, b, "frame_index", ctx);
    const auto track = Field<std::int64_t>(path, b, "track_id", ctx);
    if (track < 1 || track > std::numeric_limits<TrackId>::max()) {
      Fail(path, b, ctx + "track_id", "must be a positive 32-bit integer");
    }
    box.track_id = static_cast<TrackId>(track);
    box.class_id = Field<ClassId>(path, b, "class_id", ctx);
    box.center = Vec<3>(path, b, "center", ctx);
    box.size = Vec<3>(path, b, "size", ctx);
    box.yaw = b["yaw"] ? Field<double>(path, b, "yaw", ctx) : 0.0;
    try {
      ValidateBox(box, table);
    } catch (const Error& e) {
      Fail(path, b, ctx.substr(0, ctx.size() - 1), e.what());
    }
    out.push_back(box);
  }
  return out;
}

void WriteBoxes(const std::vector<TrackedBox>& boxes, const fs::path& path) {
  YAML::Emitter e;
  e.SetDoublePrecision(17);
  e << YAML::BeginMap << YAML::Key << "boxes" << YAML::Value << YAML::BeginSeq;
  for (const TrackedBox& b : boxes) {
    e << YAML::Flow << YAML::BeginMap;
    e << YAML::Key << "frame_index" << YAML::Value << b.frame_index;
    e << YAML::Key << "track_id" << YAML::Value << b.track_id;
    e << YAML::Key << "class_id" << YAML::Value << b.class_id;
    e << YAML::Key << "center" << YAML::Value;
    EmitDoubles(e, b.center.data(), 3);
    e << YAML::Key << "size" << YAML::Value;
    EmitDoubles(e, b.size.data(), 3);
    e << YAML::Key << "yaw" << YAML::Value << b.yaw;
    e << YAML::EndMap;
  }
  e << YAML::EndSeq << YAML::EndMap;
  WriteTextFile(path, std::string(e.c_str()) + "\n");
}

}  // namespace occ4d
