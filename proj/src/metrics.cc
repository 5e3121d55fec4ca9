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
#include "occ4d/metrics.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>

#include <omp.h>

#include "occ4d/assignment.h"
#include "occ4d/error.h"

namespace occ4d {

double PqClassStats::pq() const {
  const double denom = static_cast<double>(tp) + 0.5 * static_cast<double>(fp) +
                       0.5 * static_cast<double>(fn);
  return denom > 0.0 ? iou_sum / denom : 0.0;
}

PqClassStats& PqClassStats::operator+=(const PqClassStats& o) {
  iou_sum += o.iou_sum;
  tp += o.tp;
  fp += o.fp;
  fn += o.fn;
  return *this;
}

double OccStq(double occ_sq, double occ_aq) { return std::sqrt(occ_sq * occ_aq); }

namespace {

// (class << 32) | instance id; stuff segments use id 0.
using SegmentKey = std::uint64_t;

struct SegmentPair {
  SegmentKey gt;
  SegmentKey pred;
  bool operator==(const SegmentPair&) const = default;
};

struct SegmentPairHash {
  std::size_t operator()(const SegmentPair& p) const {
    return std::hash<std::uint64_t>()(p.gt * 0x9E3779B97F4A7C15ull ^ p.pred);
  }
};

// Tallies for one contiguous voxel range.
struct Tally {
  std::uint64_t voxels = 0;
  std::vector<std::uint64_t> inter, pred, gt;
  std::unordered_map<std::uint64_t, std::uint64_t> tube;  // (pred << 32) | gt
  std::unordered_map<TrackId, std::uint64_t> pred_size, gt_size;
  std::unordered_map<TrackId, ClassId> gt_class;
  std::unordered_map<SegmentKey, std::uint64_t> gt_area, pred_area;
  std::unordered_map<SegmentPair, std::uint64_t, SegmentPairHash> seg_inter;
  bool class_out_of_range = false;
  bool track_class_conflict = false;
  TrackId conflict_track = 0;

  explicit Tally(std::size_t classes)
      : inter(classes, 0), pred(classes, 0), gt(classes, 0) {}
};

struct FrameContext {
  const PanopticGrid& gt;
  const PanopticGrid& pred;
  std::vector<ClassRole> roles;
  EvalOptions options;
};

void CheckAligned(const PanopticGrid& gt, const PanopticGrid& pred) {
  if (!(gt.spec == pred.spec)) {
    throw Error(ErrorCode::kSpecMismatch,
                "gt and prediction grids have different specs (frame " +
                    std::to_string(gt.frame_index) + ")");
  }
  if (gt.frame_index != pred.frame_index) {
    throw Error(ErrorCode::kFrameMismatch,
                "gt frame " + std::to_string(gt.frame_index) +
                    " paired with prediction frame " +
                    std::to_string(pred.frame_index));
  }
  const std::size_t n = gt.spec.num_voxels();
  if (gt.classes.size() != n || pred.classes.size() != n ||
      gt.instances.size() != n || pred.instances.size() != n) {
    throw Error(ErrorCode::kSpecMismatch, "label arrays do not match the spec");
  }
}

FrameContext MakeContext(const PanopticGrid& gt, const PanopticGrid& pred,
                         const ClassTable& table, const EvalOptions& options) {
  CheckAligned(gt, pred);
  FrameContext ctx{gt, pred, {}, options};
  for (const ClassEntry& e : table.entries()) ctx.roles.push_back(e.role);
  return ctx;
}

void CountRange(const FrameContext& ctx, std::size_t begin, std::size_t end,
                Tally& t) {
  const std::size_t num_classes = ctx.roles.size();
  for (std::size_t v = begin; v < end; ++v) {
    if (ctx.options.visible_only && !ctx.gt.visible(v)) continue;
    const ClassId gc = ctx.gt.classes[v];
    const ClassId pc = ctx.pred.classes[v];
    if (gc >= num_classes || pc >= num_classes) {
      t.class_out_of_range = true;
      continue;
    }
    ++t.voxels;
    ++t.gt[gc];
    ++t.pred[pc];
    if (gc == pc) ++t.inter[gc];

    const InstanceId gid = ctx.gt.instances[v];
    const InstanceId pid = ctx.pred.instances[v];
    const bool g_thing = ctx.roles[gc] == ClassRole::kThing && gid != kNoInstance;
    const bool p_thing = ctx.roles[pc] == ClassRole::kThing && pid != kNoInstance;
    if (g_thing) {
      ++t.gt_size[gid];
      auto [it, inserted] = t.gt_class.emplace(gid, gc);
      if (!inserted && it->second != gc) {
        t.track_class_conflict = true;
        t.conflict_track = gid;
      }
    }
    if (p_thing) ++t.pred_size[pid];
    if (g_thing && p_thing) {
      ++t.tube[(std::uint64_t{pid} << 32) | gid];
    }

    if (!ctx.options.compute_pq) continue;
    const bool g_seg = ctx.roles[gc] != ClassRole::kFree;
    const bool p_seg = ctx.roles[pc] != ClassRole::kFree;
    const SegmentKey gk = (std::uint64_t{gc} << 32) |
                          (ctx.roles[gc] == ClassRole::kThing ? gid : 0);
    const SegmentKey pk = (std::uint64_t{pc} << 32) |
                          (ctx.roles[pc] == ClassRole::kThing ? pid : 0);
    if (g_seg) ++t.gt_area[gk];
    if (p_seg) ++t.pred_area[pk];
    if (g_seg && p_seg && gc == pc) ++t.seg_inter[{gk, pk}];
  }
}

void MergeTally(Tally& into, const Tally& from) {
  into.voxels += from.voxels;
  for (std::size_t c = 0; c < into.inter.size(); ++c) {
    into.inter[c] += from.inter[c];
    into.pred[c] += from.pred[c];
    into.gt[c] += from.gt[c];
  }
  for (const auto& [k, n] : from.tube) into.tube[k] += n;
  for (const auto& [k, n] : from.pred_size) into.pred_size[k] += n;
  for (const auto& [k, n] : from.gt_size) into.gt_size[k] += n;
  for (const auto& [k, c] : from.gt_class) {
    auto [it, inserted] = into.gt_class.emplace(k, c);
    if (!inserted && it->second != c) {
      into.track_class_conflict = true;
      into.conflict_track = k;
    }
  }
  for (const auto& [k, n] : from.gt_area) into.gt_area[k] += n;
  for (const auto& [k, n] : from.pred_area) into.pred_area[k] += n;
  for (const auto& [k, n] : from.seg_inter) into.seg_inter[k] += n;
  into.class_out_of_range |= from.class_out_of_range;
  if (from.track_class_conflict) {
    into.track_class_conflict = true;
    into.conflict_track = from.conflict_track;
  }
}

void MatchClasses(const Tally& t, std::size_t num_classes,
                  std::vector<PqClassStats>* pq,
                  std::vector<PqClassStats>* pq_star) {
  std::vector<std::vector<SegmentKey>> gt_segs(num_classes), pred_segs(num_classes);
  for (const auto& [k, n] : t.gt_area) gt_segs[k >> 32].push_back(k);
  for (const auto& [k, n] : t.pred_area) pred_segs[k >> 32].push_back(k);
  if (pq) pq->assign(num_classes, {});
  if (pq_star) pq_star->assign(num_classes, {});

  for (std::size_t c = 0; c < num_classes; ++c) {
    auto& gs = gt_segs[c];
    auto& ps = pred_segs[c];
    if (gs.empty() && ps.empty()) continue;
    std::sort(gs.begin(), gs.end());
    std::sort(ps.begin(), ps.end());
    WeightMatrix iou(gs.size(), ps.size());
    for (std::size_t i = 0; i < gs.size(); ++i) {
      const double ga = static_cast<double>(t.gt_area.at(gs[i]));
      for (std::size_t j = 0; j < ps.size(); ++j) {
        const auto it = t.seg_inter.find({gs[i], ps[j]});
        if (it == t.seg_inter.end()) continue;
        const double inter = static_cast<double>(it->second);
        const double pa = static_cast<double>(t.pred_area.at(ps[j]));
        iou(i, j) = inter / (ga + pa - inter);
      }
    }
    auto fill = [&](const Matching& m, PqClassStats& s) {
      s.tp = m.size();
      s.fp = ps.size() - m.size();
      s.fn = gs.size() - m.size();
      for (const auto& [i, j] : m) s.iou_sum += iou(i, j);
    };
    if (pq) fill(ThresholdMatching(iou), (*pq)[c]);
    if (pq_star) fill(MaxWeightMatching(iou, 0.0), (*pq_star)[c]);
  }
}

double MeanPresent(const std::vector<PqClassStats>& stats,
                   const std::vector<ClassRole>& roles) {
  double sum = 0.0;
  int n = 0;
  for (std::size_t c = 0; c < stats.size(); ++c) {
    if (roles[c] == ClassRole::kFree || !stats[c].present()) continue;
    sum += stats[c].pq();
    ++n;
  }
  return n > 0 ? sum / n : 0.0;
}

FrameCounts Finish(const FrameContext& ctx, const Tally& t) {
  if (t.class_out_of_range) {
    throw Error(ErrorCode::kMissingClassTableEntry,
                "frame " + std::to_string(ctx.gt.frame_index) +
                    " has class ids outside the class table");
  }
  if (t.track_class_conflict) {
    throw Error(ErrorCode::kTrackClassConflict,
                "gt track " + std::to_string(t.conflict_track) +
                    " carries two thing classes in frame " +
                    std::to_string(ctx.gt.frame_index));
  }
  FrameCounts out;
  out.frame_index = ctx.gt.frame_index;
  out.voxels_evaluated = t.voxels;
  out.seg_inter = t.inter;
  out.seg_pred = t.pred;
  out.seg_gt = t.gt;
  for (const auto& [k, n] : t.tube) {
    out.tube_inter.emplace(std::make_pair(static_cast<TrackId>(k >> 32),
                                          static_cast<TrackId>(k & 0xffffffffu)),
                           n);
  }
  out.pred_tube_size.insert(t.pred_size.begin(), t.pred_size.end());
  out.gt_tube_size.insert(t.gt_size.begin(), t.gt_size.end());
  out.gt_track_class.insert(t.gt_class.begin(), t.gt_class.end());
  if (ctx.options.compute_pq) {
    MatchClasses(t, ctx.roles.size(), &out.pq, &out.pq_star);
  }
  return out;
}

}  // namespace

FrameCounts CountFrame(const PanopticGrid& gt, const PanopticGrid& pred,
                       const ClassTable& table, const EvalOptions& options) {
  const FrameContext ctx = MakeContext(gt, pred, table, options);
  const std::size_t n = gt.spec.num_voxels();
  const int threads = omp_get_max_threads();
  std::vector<Tally> tallies(threads, Tally(table.size()));
#pragma omp parallel num_threads(threads)
  {
    const int tid = omp_get_thread_num();
    const int nt = omp_get_num_threads();
    const std::size_t begin = n * tid / nt;
    const std::size_t end = n * (tid + 1) / nt;
    CountRange(ctx, begin, end, tallies[tid]);
  }
  for (int i = 1; i < threads; ++i) MergeTally(tallies[0], tallies[i]);
  return Finish(ctx, tallies[0]);
}

namespace serial {

FrameCounts CountFrame(const PanopticGrid& gt, const PanopticGrid& pred,
                       const ClassTable& table, const EvalOptions& options) {
  const FrameContext ctx = MakeContext(gt, pred, table, options);
  Tally t(table.size());
  CountRange(ctx, 0, gt.spec.num_voxels(), t);
  return Finish(ctx, t);
}

}  // namespace serial

PqFrameResult PqFrame(const PanopticGrid& gt, const PanopticGrid& pred,
                      const ClassTable& table, PqMode mode, bool visible_only) {
  EvalOptions options{visible_only, true};
  const FrameContext ctx = MakeContext(gt, pred, table, options);
  Tally t(table.size());
  CountRange(ctx, 0, gt.spec.num_voxels(), t);
  if (t.class_out_of_range) {
    throw Error(ErrorCode::kMissingClassTableEntry,
                "class ids outside the class table");
  }
  PqFrameResult r;
  if (mode == PqMode::kThreshold) {
    MatchClasses(t, table.size(), &r.per_class, nullptr);
  } else {
    MatchClasses(t, table.size(), nullptr, &r.per_class);
  }
  r.mean = MeanPresent(r.per_class, ctx.roles);
  return r;
}

MetricAccumulator::MetricAccumulator(ClassTable table, EvalOptions options)
    : table_(std::move(table)),
      options_(options),
      seg_inter_(table_.size(), 0),
      seg_pred_(table_.size(), 0),
      seg_gt_(table_.size(), 0) {}

void MetricAccumulator::IngestFrame(const PanopticGrid& gt,
                                    const PanopticGrid& pred) {
  Add(CountFrame(gt, pred, table_, options_));
}

void MetricAccumulator::AddTrackClass(TrackId id, ClassId cls) {
  auto [it, inserted] = gt_track_class_.emplace(id, cls);
  if (!inserted && it->second != cls) {
    throw Error(ErrorCode::kTrackClassConflict,
                "gt track " + std::to_string(id) + " seen as class " +
                    std::to_string(it->second) + " and " + std::to_string(cls));
  }
}

void MetricAccumulator::Add(const FrameCounts& c) {
  const std::size_t nc = table_.size();
  if (c.seg_inter.size() != nc || c.seg_pred.size() != nc ||
      c.seg_gt.size() != nc) {
    throw Error(ErrorCode::kClassTableMismatch,
                "frame counts sized for a different class table");
  }
  if ((!c.pq.empty() && c.pq.size() != nc) ||
      (!c.pq_star.empty() && c.pq_star.size() != nc)) {
    throw Error(ErrorCode::kClassTableMismatch,
                "frame PQ stats sized for a different class table");
  }
  if (per_frame_.count(c.frame_index)) {
    throw Error(ErrorCode::kFrameMismatch,
                "frame " + std::to_string(c.frame_index) + " ingested twice");
  }
  for (const auto& [key, n] : c.tube_inter) {
    if (!c.pred_tube_size.count(key.first) || !c.gt_tube_size.count(key.second)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "tube intersection without tube sizes in frame " +
                      std::to_string(c.frame_index));
    }
  }
  for (const auto& [g, n] : c.gt_tube_size) {
    if (!c.gt_track_class.count(g)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "gt track " + std::to_string(g) + " has no class in frame " +
                      std::to_string(c.frame_index));
    }
  }
  for (const auto& [id, cls] : c.gt_track_class) AddTrackClass(id, cls);
  for (std::size_t k = 0; k < nc; ++k) {
    seg_inter_[k] += c.seg_inter[k];
    seg_pred_[k] += c.seg_pred[k];
    seg_gt_[k] += c.seg_gt[k];
  }
  for (const auto& [k, n] : c.tube_inter) tube_inter_[k] += n;
  for (const auto& [k, n] : c.pred_tube_size) pred_tube_size_[k] += n;
  for (const auto& [k, n] : c.gt_tube_size) gt_tube_size_[k] += n;
  FramePq fp{c.voxels_evaluated, c.pq, c.pq_star};
  // Counts built without PQ contribute no segments.
  if (fp.pq.empty()) fp.pq.assign(nc, {});
  if (fp.pq_star.empty()) fp.pq_star.assign(nc, {});
  per_frame_[c.frame_index] = std::move(fp);
}

void MetricAccumulator::Merge(const MetricAccumulator& other) {
  if (!(table_ == other.table_)) {
    throw Error(ErrorCode::kClassTableMismatch,
                "cannot merge accumulators with different class tables");
  }
  if (!(options_ == other.options_)) {
    throw Error(ErrorCode::kInvalidArgument,
                "cannot merge accumulators with different options");
  }
  for (const auto& [f, unused] : other.per_frame_) {
    if (per_frame_.count(f)) {
      throw Error(ErrorCode::kFrameMismatch,
                  "frame " + std::to_string(f) + " present in both accumulators");
    }
  }
  for (const auto& [id, cls] : other.gt_track_class_) {
    const auto it = gt_track_class_.find(id);
    if (it != gt_track_class_.end() && it->second != cls) {
      throw Error(ErrorCode::kTrackClassConflict,
                  "gt track " + std::to_string(id) + " has class " +
                      std::to_string(it->second) + " and " + std::to_string(cls));
    }
  }
  gt_track_class_.insert(other.gt_track_class_.begin(),
                         other.gt_track_class_.end());
  for (std::size_t k = 0; k < seg_inter_.size(); ++k) {
    seg_inter_[k] += other.seg_inter_[k];
    seg_pred_[k] += other.seg_pred_[k];
    seg_gt_[k] += other.seg_gt_[k];
  }
  for (const auto& [k, n] : other.tube_inter_) tube_inter_[k] += n;
  for (const auto& [k, n] : other.pred_tube_size_) pred_tube_size_[k] += n;
  for (const auto& [k, n] : other.gt_tube_size_) gt_tube_size_[k] += n;
  per_frame_.insert(other.per_frame_.begin(), other.per_frame_.end());
}

MetricAccumulator MetricAccumulator::Merged(const MetricAccumulator& a,
                                            const MetricAccumulator& b) {
  MetricAccumulator out = a;
  out.Merge(b);
  return out;
}

bool operator==(const MetricAccumulator& a, const MetricAccumulator& b) {
  return a.table_ == b.table_ && a.options_ == b.options_ &&
         a.seg_inter_ == b.seg_inter_ && a.seg_pred_ == b.seg_pred_ &&
         a.seg_gt_ == b.seg_gt_ && a.tube_inter_ == b.tube_inter_ &&
         a.pred_tube_size_ == b.pred_tube_size_ &&
         a.gt_tube_size_ == b.gt_tube_size_ &&
         a.gt_track_class_ == b.gt_track_class_ && a.per_frame_ == b.per_frame_;
}

MetricReport MetricAccumulator::Finalize() const {
  if (per_frame_.empty()) {
    throw Error(ErrorCode::kEmptyAccumulator, "no frames ingested");
  }
  MetricReport r;
  r.frames = per_frame_.size();
  for (const auto& [f, fp] : per_frame_) r.voxels_evaluated += fp.voxels;

  double sq_sum = 0.0;
  int sq_n = 0;
  for (std::size_t c = 0; c < table_.size(); ++c) {
    const std::uint64_t uni = seg_pred_[c] + seg_gt_[c] - seg_inter_[c];
    if (uni == 0) continue;
    const double iou =
        static_cast<double>(seg_inter_[c]) / static_cast<double>(uni);
    const ClassId cls = static_cast<ClassId>(c);
    r.per_class_iou[cls] = iou;
    if (table_.role(cls) == ClassRole::kFree) {
      r.free_iou = iou;
      r.has_free_iou = true;
      continue;
    }
    sq_sum += iou;
    ++sq_n;
  }
  r.occ_sq = sq_n > 0 ? sq_sum / sq_n : 0.0;

  // TPA * IoU per gt track, summed over predicted tubes in pred-id order.
  std::map<TrackId, double> weighted;
  for (const auto& [key, tpa] : tube_inter_) {
    const auto [p, g] = key;
    const double t = static_cast<double>(tpa);
    const double uni = static_cast<double>(pred_tube_size_.at(p)) +
                       static_cast<double>(gt_tube_size_.at(g)) - t;
    weighted[g] += t * (t / uni);
  }
  double aq_sum = 0.0;
  std::map<ClassId, std::pair<double, int>> by_class;
  for (const auto& [g, size] : gt_tube_size_) {
    const auto it = weighted.find(g);
    const double aq =
        it == weighted.end() ? 0.0 : it->second / static_cast<double>(size);
    r.per_gt_track_aq[g] = aq;
    aq_sum += aq;
    auto& slot = by_class[gt_track_class_.at(g)];
    slot.first += aq;
    ++slot.second;
  }
  r.occ_aq = gt_tube_size_.empty()
                 ? 0.0
                 : aq_sum / static_cast<double>(gt_tube_size_.size());
  for (const auto& [cls, acc] : by_class) {
    r.per_class_aq[cls] = acc.first / acc.second;
  }
  r.occ_stq = OccStq(r.occ_sq, r.occ_aq);

  if (options_.compute_pq) {
    std::vector<ClassRole> roles;
    for (const ClassEntry& e : table_.entries()) roles.push_back(e.role);
    std::vector<PqClassStats> pq(table_.size()), pq_star(table_.size());
    for (const auto& [f, fp] : per_frame_) {
      for (std::size_t c = 0; c < table_.size(); ++c) {
        pq[c] += fp.pq[c];
        pq_star[c] += fp.pq_star[c];
      }
      r.per_frame_pq.push_back(
          {f, {MeanPresent(fp.pq, roles), MeanPresent(fp.pq_star, roles)}});
    }
    for (std::size_t c = 0; c < table_.size(); ++c) {
      if (roles[c] == ClassRole::kFree) continue;
      if (pq[c].present()) r.pq_per_class[static_cast<ClassId>(c)] = pq[c].pq();
      if (pq_star[c].present()) {
        r.pq_star_per_class[static_cast<ClassId>(c)] = pq_star[c].pq();
      }
    }
    r.pq = MeanPresent(pq, roles);
    r.pq_star = MeanPresent(pq_star, roles);
  }
  return r;
}

}  // namespace occ4d
