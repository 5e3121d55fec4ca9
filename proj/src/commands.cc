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
#include "occ4d/commands.h"

#include <omp.h>

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <set>
#include <sstream>

#include "occ4d/dataset_io.h"
#include "occ4d/label_gen.h"
#include "occ4d/synth.h"
#include "occ4d/trackers/boxes.h"
#include "occ4d/trackers/kalman_tracker.h"
#include "occ4d/trackers/lifecycle.h"
#include "occ4d/trackers/overlap_tracker.h"
#include "occ4d/trackers/tracker_io.h"

namespace occ4d {

namespace fs = std::filesystem;

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMissingFrame:
    case ErrorCode::kIoError:
    case ErrorCode::kEmptyAccumulator:
      return kExitMissingData;
    case ErrorCode::kMissingScores:
      return kExitMissingScores;
    default:
      return kExitValidation;
  }
}

int RunGuarded(const std::function<void()>& body, std::ostream& err) {
  try {
    body();
    return kExitOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return ExitCodeFor(e.code());
  } catch (const std::exception& e) {
    err << "error: internal: " << e.what() << "\n";
    return kExitInternal;
  }
}

int ResolveThreads(std::optional<int> requested) {
  int n = 0;
  if (requested) {
    n = *requested;
  } else if (const char* env = std::getenv("OCC4D_THREADS"); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0') {
      throw Error(ErrorCode::kInvalidArgument,
                  std::string("OCC4D_THREADS is not an integer: ") + env);
    }
    n = static_cast<int>(v);
  } else {
    n = omp_get_max_threads();
  }
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "thread count must be >= 1");
  return n;
}

fs::path ResolveManifestPath(const fs::path& p) {
  return fs::is_directory(p) ? p / "manifest.yaml" : p;
}

namespace {

std::string ClassName(const ClassTable& t, ClassId id) { return t.at(id).name; }

// Removes what a failed command created, leaving pre-existing files alone.
class OutputGuard {
 public:
  explicit OutputGuard(const fs::path& dir) : dir_(dir) {
    created_dir_ = !fs::exists(dir_);
    fs::create_directories(dir_);
  }
  void Track(const fs::path& p) { files_.push_back(p); }
  void Commit() { committed_ = true; }
  ~OutputGuard() {
    if (committed_) return;
    std::error_code ec;
    for (const fs::path& p : files_) fs::remove(p, ec);
    if (created_dir_) fs::remove_all(dir_, ec);
  }

 private:
  fs::path dir_;
  bool created_dir_ = false;
  bool committed_ = false;
  std::vector<fs::path> files_;
};

std::string OutputGridName(const FrameEntry& f) {
  return fs::path(f.grid_path).filename().string();
}

void CheckOutputDistinct(const fs::path& out, const std::vector<fs::path>& inputs) {
  for (const fs::path& in : inputs) {
    if (fs::exists(in) && fs::exists(out) && fs::equivalent(in, out)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "output " + out.string() + " would overwrite an input");
    }
  }
}

}  // namespace

GenLabelsSummary RunGenLabels(const GenLabelsRequest& req, std::ostream& out,
                              std::ostream& warn) {
  const fs::path manifest_path = ResolveManifestPath(req.semantic);
  const SequenceManifest m = LoadManifest(manifest_path);
  std::optional<fs::path> boxes_path = req.boxes;
  if (!boxes_path) boxes_path = m.ResolveBoxes();
  if (!boxes_path) {
    throw Error(ErrorCode::kInvalidArgument,
                "no boxes file given and the manifest names none");
  }
  const std::vector<TrackedBox> boxes = LoadBoxes(*boxes_path, m.class_table);
  std::set<std::int64_t> frame_set;
  for (const FrameEntry& f : m.frames) frame_set.insert(f.frame_index);
  std::map<std::int64_t, std::vector<TrackedBox>> by_frame;
  for (const TrackedBox& b : boxes) {
    if (!frame_set.count(b.frame_index)) {
      throw Error(ErrorCode::kFrameMismatch,
                  boxes_path->string() + ": box for track " +
                      std::to_string(b.track_id) + " has frame_index " +
                      std::to_string(b.frame_index) + ", which is not in the manifest");
    }
    by_frame[b.frame_index].push_back(b);
  }
  CheckOutputDistinct(req.out_dir, {manifest_path.parent_path()});

  OutputGuard guard(req.out_dir);
  GenLabelsSummary summary;
  SequenceManifest result = m;
  result.boxes_path.reset();
  result.proposals_path.reset();
  for (std::size_t i = 0; i < m.frames.size(); ++i) {
    const SemanticGrid sem = LoadSemanticFrame(m, i);
    const LabelGenResult r =
        GenerateFrameLabels(sem, by_frame[sem.frame_index], m.class_table);
    for (const auto& [cls, n] : r.demoted) {
      warn << "warning: frame " << sem.frame_index << ": " << n << " "
           << ClassName(m.class_table, cls) << " voxels had no box; moved to "
           << ClassName(m.class_table, *FallbackStuffClass(m.class_table)) << "\n";
    }
    for (const auto& [cls, n] : r.unassigned) {
      warn << "warning: frame " << sem.frame_index << ": " << n << " "
           << ClassName(m.class_table, cls)
           << " voxels had no box and no fallback class; left with id 0\n";
    }
    if (r.used_fallback()) ++summary.fallback_frames;
    for (ClassId c : r.grid.classes) ++summary.class_voxels[c];
    result.frames[i].grid_path = OutputGridName(m.frames[i]);
    const fs::path dst = req.out_dir / result.frames[i].grid_path;
    guard.Track(dst);
    WriteGrid(r.grid, dst);
  }
  guard.Track(req.out_dir / "manifest.yaml");
  WriteManifest(result, req.out_dir / "manifest.yaml");
  guard.Commit();
  summary.frames = m.frames.size();

  out << "gen-labels: " << summary.frames << " frames;";
  for (const auto& [cls, n] : summary.class_voxels) {
    out << " " << ClassName(m.class_table, cls) << "=" << n;
  }
  out << "\n";
  return summary;
}

fs::path PerFrameCsvPath(const fs::path& report) {
  fs::path p = report;
  p.replace_extension(".frames.csv");
  return p;
}

EvalResult RunEval(const EvalRequest& req, std::ostream& out) {
  if (!req.metrics.any()) {
    throw Error(ErrorCode::kInvalidArgument, "metric set is empty");
  }
  const fs::path gt_path = ResolveManifestPath(req.gt);
  const fs::path pred_path = ResolveManifestPath(req.pred);
  if (req.out) CheckOutputDistinct(*req.out, {gt_path, pred_path});
  const SequenceManifest gt = LoadManifest(gt_path);
  const SequenceManifest pred = LoadManifest(pred_path);
  if (!(gt.class_table == pred.class_table)) {
    throw Error(ErrorCode::kClassTableMismatch,
                "gt and pred manifests declare different class tables");
  }
  std::map<std::int64_t, std::size_t> pred_pos;
  for (std::size_t i = 0; i < pred.frames.size(); ++i) {
    pred_pos[pred.frames[i].frame_index] = i;
  }
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < gt.frames.size(); ++i) {
    const auto it = pred_pos.find(gt.frames[i].frame_index);
    if (it == pred_pos.end()) {
      throw Error(ErrorCode::kMissingFrame,
                  "prediction has no frame " + std::to_string(gt.frames[i].frame_index));
    }
    pairs.emplace_back(i, it->second);
  }
  if (pred.frames.size() != gt.frames.size()) {
    throw Error(ErrorCode::kFrameMismatch,
                "prediction has frames that are not in the ground truth");
  }

  EvalOptions options;
  options.visible_only = req.visible_only;
  options.compute_pq = req.metrics.pq || req.metrics.pqstar;
  const int threads = std::max(1, std::min<int>(req.threads, pairs.size()));
  omp_set_num_threads(req.threads);
  std::vector<MetricAccumulator> chunk_acc(threads,
                                           MetricAccumulator(gt.class_table, options));
  std::vector<std::exception_ptr> chunk_err(threads);
#pragma omp parallel for num_threads(threads) schedule(static, 1)
  for (int c = 0; c < threads; ++c) {
    const std::size_t lo = pairs.size() * c / threads;
    const std::size_t hi = pairs.size() * (c + 1) / threads;
    try {
      for (std::size_t k = lo; k < hi; ++k) {
        chunk_acc[c].IngestFrame(LoadFrame(gt, pairs[k].first),
                                 LoadFrame(pred, pairs[k].second));
      }
    } catch (...) {
      chunk_err[c] = std::current_exception();
    }
  }
  for (const std::exception_ptr& e : chunk_err) {
    if (e) std::rethrow_exception(e);
  }
  MetricAccumulator total(gt.class_table, options);
  for (const MetricAccumulator& a : chunk_acc) total.Merge(a);

  EvalResult result;
  result.report = total.Finalize();
  result.json = ReportToJson(result.report, gt.class_table, req.metrics);
  result.csv = PerFrameCsv(result.report);
  if (req.out) {
    if (req.out->has_parent_path()) fs::create_directories(req.out->parent_path());
    WriteTextFile(*req.out, result.json);
    if (options.compute_pq) WriteTextFile(PerFrameCsvPath(*req.out), result.csv);
  }
  out << SummaryText(result.report, req.metrics) << "\n";
  return result;
}

TrackMethod ParseTrackMethod(std::string_view name) {
  if (name == "overlap") return TrackMethod::kOverlap;
  if (name == "ab3dmot") return TrackMethod::kAb3dmot;
  if (name == "lifecycle") return TrackMethod::kLifecycle;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown method '" + std::string(name) +
                  "' (expected overlap, ab3dmot or lifecycle)");
}

namespace {

void Relabel(PanopticGrid& g, const std::map<InstanceId, TrackId>& ids) {
  for (InstanceId& id : g.instances) {
    if (id == kNoInstance) continue;
    const auto it = ids.find(id);
    id = it == ids.end() ? kNoInstance : it->second;
  }
}

std::string FormatScore(double s) {
  std::ostringstream os;
  os.precision(17);
  os << s;
  return os.str();
}

}  // namespace

TrackSummary RunTrack(const TrackRequest& req, std::ostream& out) {
  const fs::path pred_path = ResolveManifestPath(req.pred);
  const SequenceManifest m = LoadManifest(pred_path);
  const TrackerConfig config =
      req.config ? LoadTrackerConfig(*req.config) : TrackerConfig{};
  ProposalStream proposals;
  if (req.method == TrackMethod::kLifecycle) {
    const auto p = m.ResolveProposals();
    if (!p || !fs::exists(*p)) {
      throw Error(ErrorCode::kMissingScores,
                  "method lifecycle needs a proposal score stream; " +
                      pred_path.string() + " names none");
    }
    proposals = LoadProposals(*p);
  }
  CheckOutputDistinct(req.out_dir, {pred_path.parent_path()});

  OutputGuard guard(req.out_dir);
  SequenceManifest result = m;
  result.boxes_path.reset();
  result.proposals_path.reset();
  TrackSummary summary;

  OverlapTracker overlap(m.class_table, config.overlap);
  KalmanTracker kalman(config.ab3dmot);
  LifecycleManager lifecycle(m.class_table, config.lifecycle);
  std::map<InstanceId, TrackId> query_track;  // lifecycle: query -> track
  std::set<TrackId> lifecycle_tracks;
  std::string decisions = "frame_index,instance_id,class_id,score,origin,decision,track_id\n";

  for (std::size_t i = 0; i < m.frames.size(); ++i) {
    PanopticGrid g = LoadFrame(m, i);
    switch (req.method) {
      case TrackMethod::kOverlap:
        g = overlap.Step(g).relabeled;
        break;
      case TrackMethod::kAb3dmot: {
        const std::vector<InstanceBox> dets = InstancesToBoxes(g);
        double dt = config.ab3dmot.dt;
        if (i > 0) {
          const double d = m.frames[i].timestamp - m.frames[i - 1].timestamp;
          if (d > 0.0) dt = d;
        }
        std::map<InstanceId, TrackId> ids;
        for (const KalmanAssignment& a : kalman.Step(dets, dt)) {
          ids[dets[a.detection].id] = a.track_id;
        }
        Relabel(g, ids);
        break;
      }
      case TrackMethod::kLifecycle: {
        const std::int64_t f = g.frame_index;
        const auto it = proposals.find(f);
        const std::vector<Proposal> empty;
        const std::vector<Proposal>& raw = it == proposals.end() ? empty : it->second;
        std::set<InstanceId> scored;
        for (const Proposal& p : raw) {
          if (p.frame_index != f) {
            throw Error(ErrorCode::kFrameMismatch, "proposal frame mismatch");
          }
          scored.insert(p.instance_id);
        }
        for (InstanceId id : std::set<InstanceId>(g.instances.begin(), g.instances.end())) {
          if (id != kNoInstance && !scored.count(id)) {
            throw Error(ErrorCode::kMissingScores,
                        "frame " + std::to_string(f) + ": instance " +
                            std::to_string(id) + " has no proposal score");
          }
        }
        // Tracked proposals refer to queries; a query without a live track
        // re-enters as an emerging proposal.
        std::vector<Proposal> step = raw;
        for (Proposal& p : step) {
          if (p.origin != ProposalOrigin::kTracked) continue;
          const auto q = query_track.find(p.instance_id);
          if (q == query_track.end()) {
            p.origin = ProposalOrigin::kEmerging;
          } else {
            p.instance_id = q->second;
          }
        }
        const LifecycleStep s = lifecycle.Step(step);
        std::map<InstanceId, TrackId> ids;
        for (std::size_t k = 0; k < raw.size(); ++k) {
          const ProposalDecision& d = s.decisions[k];
          const InstanceId q = raw[k].instance_id;
          switch (d.decision) {
            case Decision::kSpawn:
              ++summary.births;
              lifecycle_tracks.insert(d.track_id);
              if (q != kNoInstance) {
                query_track[q] = d.track_id;
                ids[q] = d.track_id;
              }
              break;
            case Decision::kKeep:
              ids[q] = d.track_id;
              break;
            case Decision::kTerminate:
              ++summary.deaths;
              query_track.erase(q);
              break;
            case Decision::kDiscard:
              break;
          }
          decisions += std::to_string(f) + "," + std::to_string(q) + "," +
                       std::to_string(raw[k].class_id) + "," +
                       FormatScore(raw[k].score) + "," +
                       (raw[k].origin == ProposalOrigin::kTracked ? "tracked" : "emerging") +
                       "," + std::string(DecisionName(d.decision)) + "," +
                       std::to_string(d.track_id) + "\n";
        }
        for (TrackId t : s.expired) {
          ++summary.deaths;
          for (auto q = query_track.begin(); q != query_track.end();) {
            q = q->second == t ? query_track.erase(q) : std::next(q);
          }
          decisions += std::to_string(f) + ",,,,,expired," + std::to_string(t) + "\n";
        }
        Relabel(g, ids);
        break;
      }
    }
    result.frames[i].grid_path = OutputGridName(m.frames[i]);
    const fs::path dst = req.out_dir / result.frames[i].grid_path;
    guard.Track(dst);
    WriteGrid(g, dst);
  }

  switch (req.method) {
    case TrackMethod::kOverlap:
      summary.tracks = overlap.next_id() - 1;
      summary.births = overlap.births();
      summary.deaths = overlap.deaths();
      break;
    case TrackMethod::kAb3dmot:
      summary.tracks = kalman.confirmed_count();
      summary.births = kalman.births();
      summary.deaths = kalman.deaths();
      break;
    case TrackMethod::kLifecycle:
      summary.tracks = lifecycle_tracks.size();
      guard.Track(req.out_dir / "decisions.csv");
      WriteTextFile(req.out_dir / "decisions.csv", decisions);
      break;
  }
  guard.Track(req.out_dir / "manifest.yaml");
  WriteManifest(result, req.out_dir / "manifest.yaml");
  guard.Commit();
  out << "tracks " << summary.tracks << "  births " << summary.births
      << "  deaths " << summary.deaths << "\n";
  return summary;
}

void RunSynthRender(const SynthRenderRequest& req, std::ostream& out) {
  Scenario sc = LoadScenario(req.scenario);
  if (req.seed) sc.seed = *req.seed;
  const RenderedSequence seq = RenderSequence(sc);
  WriteRenderedSequence(seq, req.out_dir);
  out << "synth render: " << seq.gt.size() << " frames, " << sc.actors.size()
      << " actors -> " << req.out_dir.string() << "\n";
}

void RunSynthCorrupt(const SynthCorruptRequest& req, std::ostream& out) {
  const fs::path gt_path = ResolveManifestPath(req.gt);
  const SequenceManifest m = LoadManifest(gt_path);
  NoiseSpec noise = req.noise ? LoadNoiseSpec(*req.noise, m.class_table) : NoiseSpec{};
  if (req.seed) noise.seed = *req.seed;
  CheckOutputDistinct(req.out_dir, {gt_path.parent_path()});
  std::vector<PanopticGrid> gt;
  for (std::size_t i = 0; i < m.frames.size(); ++i) gt.push_back(LoadFrame(m, i));
  const CorruptedSequence c = Corrupt(gt, m.class_table, noise);
  WritePredictedSequence(m, c.frames, &c.proposals, req.out_dir);
  out << "synth corrupt: " << c.frames.size() << " frames -> "
      << req.out_dir.string() << "\n";
}

}  // namespace occ4d
