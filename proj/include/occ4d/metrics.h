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
#ifndef OCC4D_METRICS_H_
#define OCC4D_METRICS_H_

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "occ4d/voxel_core.h"

namespace occ4d {

// Panoptic quality bookkeeping for one class.
struct PqClassStats {
  double iou_sum = 0.0;
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;

  bool present() const { return tp + fp + fn > 0; }
  // sum IoU(TP) / (|TP| + |FP|/2 + |FN|/2); 0 when not present.
  double pq() const;
  PqClassStats& operator+=(const PqClassStats& o);
  friend bool operator==(const PqClassStats&, const PqClassStats&) = default;
};

enum class PqMode {
  kThreshold,  // standard PQ: pairs with IoU > 0.5
  kMaxWeight,  // PQ*: maximum-weight bipartite matching
};

struct PqFrameResult {
  std::vector<PqClassStats> per_class;  // indexed by class id
  double mean = 0.0;                    // over present, non-free classes
};

// Segments are (class, id) groups for thing classes and one segment per
// stuff class. The free class is not a segment. With `visible_only`, voxels
// outside the gt visibility mask are skipped.
PqFrameResult PqFrame(const PanopticGrid& gt, const PanopticGrid& pred,
                      const ClassTable& table, PqMode mode,
                      bool visible_only = true);

// Raw counts contributed by one frame. Keys of the track maps are track ids.
struct FrameCounts {
  std::int64_t frame_index = 0;
  std::uint64_t voxels_evaluated = 0;
  std::vector<std::uint64_t> seg_inter;
  std::vector<std::uint64_t> seg_pred;
  std::vector<std::uint64_t> seg_gt;
  std::map<std::pair<TrackId, TrackId>, std::uint64_t> tube_inter;  // (pred, gt)
  std::map<TrackId, std::uint64_t> pred_tube_size;
  std::map<TrackId, std::uint64_t> gt_tube_size;
  std::map<TrackId, ClassId> gt_track_class;
  // Filled only when PQ is requested.
  std::vector<PqClassStats> pq;
  std::vector<PqClassStats> pq_star;
};

struct EvalOptions {
  bool visible_only = true;
  bool compute_pq = true;
  friend bool operator==(const EvalOptions&, const EvalOptions&) = default;
};

// Counting kernel shared by the accumulator; the OpenMP version splits the
// voxel range and merges per-thread tallies.
FrameCounts CountFrame(const PanopticGrid& gt, const PanopticGrid& pred,
                       const ClassTable& table, const EvalOptions& options);

namespace serial {
FrameCounts CountFrame(const PanopticGrid& gt, const PanopticGrid& pred,
                       const ClassTable& table, const EvalOptions& options);
}  // namespace serial

struct MetricReport {
  std::map<ClassId, double> per_class_iou;  // every class with nonzero union
  double free_iou = 0.0;
  bool has_free_iou = false;
  double occ_sq = 0.0;
  double occ_aq = 0.0;
  double occ_stq = 0.0;
  std::map<TrackId, double> per_gt_track_aq;
  std::map<ClassId, double> per_class_aq;  // mean AQ(g) grouped by gt class
  double pq = 0.0;
  double pq_star = 0.0;
  std::map<ClassId, double> pq_per_class;
  std::map<ClassId, double> pq_star_per_class;
  std::uint64_t frames = 0;
  std::uint64_t voxels_evaluated = 0;
  // Per-frame PQ / PQ* means, in frame order.
  std::vector<std::pair<std::int64_t, std::pair<double, double>>> per_frame_pq;
};

// Mergeable streaming state. All counts are integers, so ingestion order and
// merge grouping never change the finalized numbers.
class MetricAccumulator {
 public:
  explicit MetricAccumulator(ClassTable table, EvalOptions options = {});

  // Throws kSpecMismatch / kFrameMismatch for misaligned frames, and
  // kFrameMismatch when a frame index is ingested twice.
  void IngestFrame(const PanopticGrid& gt, const PanopticGrid& pred);
  // Adds precomputed counts (from CountFrame or built by hand).
  void Add(const FrameCounts& counts);

  // Pointwise sum. Throws kClassTableMismatch or kTrackClassConflict.
  void Merge(const MetricAccumulator& other);
  static MetricAccumulator Merged(const MetricAccumulator& a,
                                  const MetricAccumulator& b);

  // Throws kEmptyAccumulator before the first frame.
  MetricReport Finalize() const;

  const ClassTable& class_table() const { return table_; }
  const EvalOptions& options() const { return options_; }
  std::uint64_t frames_seen() const { return per_frame_.size(); }
  const std::vector<std::uint64_t>& seg_inter() const { return seg_inter_; }
  const std::vector<std::uint64_t>& seg_pred() const { return seg_pred_; }
  const std::vector<std::uint64_t>& seg_gt() const { return seg_gt_; }
  const std::map<std::pair<TrackId, TrackId>, std::uint64_t>& tube_inter()
      const {
    return tube_inter_;
  }
  const std::map<TrackId, std::uint64_t>& pred_tube_size() const {
    return pred_tube_size_;
  }
  const std::map<TrackId, std::uint64_t>& gt_tube_size() const {
    return gt_tube_size_;
  }
  const std::map<TrackId, ClassId>& gt_track_class() const {
    return gt_track_class_;
  }

  friend bool operator==(const MetricAccumulator& a,
                         const MetricAccumulator& b);

 private:
  struct FramePq {
    std::uint64_t voxels = 0;
    std::vector<PqClassStats> pq;
    std::vector<PqClassStats> pq_star;
    friend bool operator==(const FramePq&, const FramePq&) = default;
  };

  void AddTrackClass(TrackId id, ClassId cls);

  ClassTable table_;
  EvalOptions options_;
  std::vector<std::uint64_t> seg_inter_;
  std::vector<std::uint64_t> seg_pred_;
  std::vector<std::uint64_t> seg_gt_;
  std::map<std::pair<TrackId, TrackId>, std::uint64_t> tube_inter_;
  std::map<TrackId, std::uint64_t> pred_tube_size_;
  std::map<TrackId, std::uint64_t> gt_tube_size_;
  std::map<TrackId, ClassId> gt_track_class_;
  std::map<std::int64_t, FramePq> per_frame_;
};

// sqrt(sq * aq).
double OccStq(double occ_sq, double occ_aq);

}  // namespace occ4d

#endif  // OCC4D_METRICS_H_
