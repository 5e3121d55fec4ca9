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
// Batch commands behind the occ4d executable. Each Run* function throws
// occ4d::Error on bad input; RunGuarded maps errors to process exit codes.
#ifndef OCC4D_COMMANDS_H_
#define OCC4D_COMMANDS_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>

#include "occ4d/error.h"
#include "occ4d/metrics.h"
#include "occ4d/report.h"

namespace occ4d {

enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitValidation = 2,
  kExitMissingData = 3,
  kExitMissingScores = 4,
};

int ExitCodeFor(ErrorCode code);

// Runs `body`, printing "error: <cause>" on one line to `err` on failure.
int RunGuarded(const std::function<void()>& body, std::ostream& err);

// Thread count for OpenMP regions: `requested` if set, else OCC4D_THREADS,
// else the OpenMP default. Throws kInvalidArgument for values < 1.
int ResolveThreads(std::optional<int> requested);

// A directory argument resolves to <dir>/manifest.yaml.
std::filesystem::path ResolveManifestPath(const std::filesystem::path& p);

struct GenLabelsRequest {
  std::filesystem::path semantic;  // manifest or its directory
  std::optional<std::filesystem::path> boxes;  // default: the manifest's boxes
  std::filesystem::path out_dir;
};

struct GenLabelsSummary {
  std::size_t frames = 0;
  std::map<ClassId, std::uint64_t> class_voxels;
  std::size_t fallback_frames = 0;
};

// Writes one panoptic grid per frame plus manifest.yaml into out_dir. Files
// written before a failure are removed again.
GenLabelsSummary RunGenLabels(const GenLabelsRequest& req, std::ostream& out,
                              std::ostream& warn);

struct EvalRequest {
  std::filesystem::path gt;
  std::filesystem::path pred;
  MetricSet metrics;
  bool visible_only = true;
  std::optional<std::filesystem::path> out;  // report JSON; CSV alongside
  int threads = 1;
};

struct EvalResult {
  MetricReport report;
  std::string json;
  std::string csv;
};

// Frames are split into one contiguous chunk per thread; chunk accumulators
// are merged in frame order, so the report does not depend on `threads`.
EvalResult RunEval(const EvalRequest& req, std::ostream& out);

// <out>.json -> <out>.frames.csv
std::filesystem::path PerFrameCsvPath(const std::filesystem::path& report);

enum class TrackMethod { kOverlap, kAb3dmot, kLifecycle };
TrackMethod ParseTrackMethod(std::string_view name);

struct TrackRequest {
  std::filesystem::path pred;
  TrackMethod method = TrackMethod::kOverlap;
  std::optional<std::filesystem::path> config;
  std::filesystem::path out_dir;
};

struct TrackSummary {
  std::size_t tracks = 0;
  std::size_t births = 0;
  std::size_t deaths = 0;
};

// Writes relabeled grids and manifest.yaml. The lifecycle method also writes
// decisions.csv and needs the manifest's proposal stream (kMissingScores).
TrackSummary RunTrack(const TrackRequest& req, std::ostream& out);

struct SynthRenderRequest {
  std::filesystem::path scenario;
  std::optional<std::uint64_t> seed;
  std::filesystem::path out_dir;
};
void RunSynthRender(const SynthRenderRequest& req, std::ostream& out);

struct SynthCorruptRequest {
  std::filesystem::path gt;
  std::optional<std::filesystem::path> noise;  // none: identity
  std::optional<std::uint64_t> seed;
  std::filesystem::path out_dir;
};
void RunSynthCorrupt(const SynthCorruptRequest& req, std::ostream& out);

}  // namespace occ4d

#endif  // OCC4D_COMMANDS_H_
