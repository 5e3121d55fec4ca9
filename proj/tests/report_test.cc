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

#include <gtest/gtest.h>

#include "json.hpp"
#include "occ4d/error.h"

namespace occ4d {
namespace {

MetricReport SampleReport() {
  MetricReport r;
  r.frames = 2;
  r.voxels_evaluated = 100;
  r.occ_sq = 0.294;
  r.occ_aq = 0.135;
  r.occ_stq = OccStq(0.294, 0.135);
  r.per_class_iou = {{0, 0.9}, {1, 0.25}, {7, 0.338}};
  r.free_iou = 0.9;
  r.has_free_iou = true;
  r.per_gt_track_aq = {{3, 0.1}, {12, 0.17}};
  r.per_class_aq = {{1, 0.135}};
  r.pq = 0.2;
  r.pq_star = 0.3;
  r.pq_per_class = {{1, 0.2}};
  r.pq_star_per_class = {{1, 0.3}};
  r.per_frame_pq = {{0, {0.1, 0.2}}, {1, {0.3, 0.4}}};
  return r;
}

TEST(MetricSetTest, Parse) {
  const MetricSet all = MetricSet::Parse("occstq,pq,pqstar");
  EXPECT_TRUE(all.occstq && all.pq && all.pqstar);
  const MetricSet one = MetricSet::Parse("pqstar");
  EXPECT_FALSE(one.occstq);
  EXPECT_FALSE(one.pq);
  EXPECT_TRUE(one.pqstar);
  for (const char* bad : {"", "stq", "pq,", "occstq,,pq"}) {
    try {
      MetricSet::Parse(bad);
      ADD_FAILURE() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
    }
  }
}

TEST(ReportJsonTest, KeysAndValues) {
  const auto j = nlohmann::json::parse(
      ReportToJson(SampleReport(), ClassTable::Default(), MetricSet{}));
  EXPECT_EQ(j["frames"], 2);
  EXPECT_DOUBLE_EQ(j["occ_sq"].get<double>(), 0.294);
  EXPECT_DOUBLE_EQ(j["occ_stq"].get<double>(), OccStq(0.294, 0.135));
  EXPECT_DOUBLE_EQ(j["per_class_iou"]["road"].get<double>(), 0.338);
  EXPECT_DOUBLE_EQ(j["per_gt_track_aq"]["12"].get<double>(), 0.17);
  EXPECT_DOUBLE_EQ(j["pq_star_per_class"]["vehicle"].get<double>(), 0.3);
  EXPECT_DOUBLE_EQ(j["free_iou"].get<double>(), 0.9);
}

TEST(ReportJsonTest, SubsetOmitsOtherMetrics) {
  const auto j = nlohmann::json::parse(ReportToJson(
      SampleReport(), ClassTable::Default(), MetricSet::Parse("pq")));
  EXPECT_TRUE(j.contains("pq"));
  EXPECT_FALSE(j.contains("occ_stq"));
  EXPECT_FALSE(j.contains("pq_star"));
}

TEST(ReportJsonTest, Deterministic) {
  const MetricReport r = SampleReport();
  EXPECT_EQ(ReportToJson(r, ClassTable::Default(), {}),
            ReportToJson(r, ClassTable::Default(), {}));
}

TEST(ReportCsvTest, RowsInFrameOrder) {
  EXPECT_EQ(PerFrameCsv(SampleReport()),
            "frame_index,pq,pq_star\n0,0.10000000000000001,0.20000000000000001\n"
            "1,0.29999999999999999,0.40000000000000002\n");
}

TEST(SummaryTextTest, PercentWithOneDecimal) {
  EXPECT_EQ(SummaryText(SampleReport(), {}),
            "OccSTQ 19.9  OccSQ 29.4  OccAQ 13.5  PQ 20.0  PQ* 30.0");
  EXPECT_EQ(SummaryText(SampleReport(), MetricSet::Parse("occstq")),
            "OccSTQ 19.9  OccSQ 29.4  OccAQ 13.5");
}

}  // namespace
}  // namespace occ4d
