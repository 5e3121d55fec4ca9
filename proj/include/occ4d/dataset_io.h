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
#ifndef OCC4D_DATASET_IO_H_
#define OCC4D_DATASET_IO_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "occ4d/label_gen.h"
#include "occ4d/voxel_core.h"

namespace occ4d {

// Binary grid layout (all little-endian, x-major):
//   magic     8 bytes  "OCC4DPG1"
//   nx ny nz  3 x u32
//   voxel     3 x f32
//   origin    3 x f32
//   flags     u32      bit 0: visibility bitset present
//                      bit 1: semantic only (no instance array)
//   classes   u16[nx*ny*nz]
//   instances u32[nx*ny*nz]             (absent when bit 1 is set)
//   visible   ceil(nx*ny*nz / 8) bytes   (bit v%8 of byte v/8, LSB first)
inline constexpr char kGridMagic[8] = {'O', 'C', 'C', '4', 'D', 'P', 'G', '1'};
inline constexpr std::size_t kGridHeaderBytes = 40;  // after the magic
inline constexpr std::uint32_t kGridFlagVisibility = 1u << 0;
inline constexpr std::uint32_t kGridFlagSemanticOnly = 1u << 1;

// Spec values are stored as f32; grids whose spec is not exactly
// representable in f32 do not round-trip bit-exactly.
std::vector<std::uint8_t> EncodeGrid(const PanopticGrid& grid,
                                     bool semantic_only = false);

struct DecodedGrid {
  PanopticGrid grid;
  bool semantic_only = false;
};

// Decodes and validates against `table`. Frame index and pose are not part of
// the file; they come back as 0 and identity.
DecodedGrid DecodeGrid(std::span<const std::uint8_t> bytes,
                       const ClassTable& table);

PanopticGrid ReadGrid(const std::filesystem::path& path,
                      const ClassTable& table);
void WriteGrid(const PanopticGrid& grid, const std::filesystem::path& path);

SemanticGrid ReadSemanticGrid(const std::filesystem::path& path,
                              const ClassTable& table);
void WriteSemanticGrid(const SemanticGrid& grid,
                       const std::filesystem::path& path);

struct FrameEntry {
  std::int64_t frame_index = 0;
  std::string grid_path;  // as written, relative to the manifest directory
  Pose ego_pose = Pose::Identity();
  double timestamp = 0.0;
};

struct SequenceManifest {
  std::string sequence_id;
  ClassTable class_table;
  std::vector<FrameEntry> frames;
  std::optional<std::string> boxes_path;
  std::optional<std::string> proposals_path;
  std::filesystem::path base_dir;

  std::filesystem::path ResolveGrid(std::size_t i) const {
    return base_dir / frames.at(i).grid_path;
  }
  std::optional<std::filesystem::path> ResolveBoxes() const {
    if (!boxes_path) return std::nullopt;
    return base_dir / *boxes_path;
  }
  std::optional<std::filesystem::path> ResolveProposals() const {
    if (!proposals_path) return std::nullopt;
    return base_dir / *proposals_path;
  }
};

// Validates frame ordering and poses; errors carry file:line and field path.
SequenceManifest LoadManifest(const std::filesystem::path& path);
void WriteManifest(const SequenceManifest& manifest,
                   const std::filesystem::path& path);

// Reads frame `i` of the manifest and attaches its frame index and pose.
// Throws Error(kMissingFrame) when the grid file does not exist.
PanopticGrid LoadFrame(const SequenceManifest& manifest, std::size_t i);
SemanticGrid LoadSemanticFrame(const SequenceManifest& manifest,
                               std::size_t i);

std::vector<TrackedBox> LoadBoxes(const std::filesystem::path& path,
                                  const ClassTable& table);
void WriteBoxes(const std::vector<TrackedBox>& boxes,
                const std::filesystem::path& path);

std::vector<std::uint8_t> ReadFileBytes(const std::filesystem::path& path);
void WriteFileBytes(const std::filesystem::path& path,
                    std::span<const std::uint8_t> bytes);
void WriteTextFile(const std::filesystem::path& path,
                   const std::string& text);

}  // namespace occ4d

#endif  // OCC4D_DATASET_IO_H_
