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
#include "occ4d/report.h"

#include <cstdio>
#include <sstream>

#include "json.hpp"
#include "occ4d/error.h"

namespace occ4d {

using Json = nlohmann::ordered_json;

MetricSet MetricSet::Parse(std::string_view list) {
  MetricSet m{false, false, false};
  std::size_t pos = 0;
  while (pos <= list.size()) {
    const std::size_t comma = std::min(list.find(',', pos), list.size());
    const std::string_view item = list.substr(pos, comma - pos);
    if (item == "occstq") {
      m.occstq = true;
    } else if (item == "pq") {
      m.pq = true;
    } else if (item == "pqstar") {
      m.pqstar = true;
    } else {
      throw Error(ErrorCode::kInvalidArgument,
                  "unknown metric '" + std::string(item) +
                      "' (expected occstq, pq, pqstar)");
    }
    pos = comma + 1;
  }
  if (!m.any()) throw Error(ErrorCode::kInvalidArgument, "empty metric set");
  return m;
}

namespace {

template <typename Map>
Json ByClassName(const Map& values, const ClassTable& table) {
  Json out = Json::object();
  for (const auto& [cls, value] : values) out[table.at(cls).name] = value;
  return out;
}

}  // namespace

std::string ReportToJson(const MetricReport& r, const ClassTable& table,
                         const MetricSet& metrics) {
  Json j;
  j["frames"] = r.frames;
  j["voxels_evaluated"] = r.voxels_evaluated;
  if (metrics.occstq) {
    j["occ_stq"] = r.occ_stq;
    j["occ_sq"] = r.occ_sq;
    j["occ_aq"] = r.occ_aq;
    j["per_class_iou"] = ByClassName(r.per_class_iou, table);
    if (r.has_free_iou) j["free_iou"] = r.free_iou;
    j["per_class_aq"] = ByClassName(r.per_class_aq, table);
    Json tracks = Json::object();
    for (const auto& [g, aq] : r.per_gt_track_aq) tracks[std::to_string(g)] = aq;
    j["per_gt_track_aq"] = std::move(tracks);
  }
  if (metrics.pq) {
    j["pq"] = r.pq;
    j["pq_per_class"] = ByClassName(r.pq_per_class, table);
  }
  if (metrics.pqstar) {
    j["pq_star"] = r.pq_star;
    j["pq_star_per_class"] = ByClassName(r.pq_star_per_class, table);
  }
  return j.dump(2) + "\n";
}

std::string PerFrameCsv(const MetricReport& r) {
  std::ostringstream os;
  os.precision(17);
  os << "frame_index,pq,pq_star\n";
  for (const auto& [f, v] : r.per_frame_pq) {
    os << f << "," << v.first << "," << v.second << "\n";
  }
  return os.str();
}

std::string SummaryText(const MetricReport& r, const MetricSet& metrics) {
  std::ostringstream os;
  char buf[64];
  auto pct = [&](const char* name, double v) {
    std::snprintf(buf, sizeof(buf), "%s %.1f", name, 100.0 * v);
    if (os.tellp() > 0) os << "  ";
    os << buf;
  };
  if (metrics.occstq) {
    pct("OccSTQ", r.occ_stq);
    pct("OccSQ", r.occ_sq);
    pct("OccAQ", r.occ_aq);
  }
  if (metrics.pq) pct("PQ", r.pq);
  if (metrics.pqstar) pct("PQ*", r.pq_star);
  return os.str();
}

}  // namespace occ4d
