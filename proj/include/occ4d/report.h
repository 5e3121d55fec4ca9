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
#ifndef OCC4D_REPORT_H_
#define OCC4D_REPORT_H_

#include <string>
#include <string_view>

#include "occ4d/metrics.h"

namespace occ4d {

struct MetricSet {
  bool occstq = true;
  bool pq = true;
  bool pqstar = true;

  bool any() const { return occstq || pq || pqstar; }
  // Comma-separated subset of {occstq, pq, pqstar}. Throws kInvalidArgument.
  static MetricSet Parse(std::string_view list);
};

// Machine-readable report: JSON with a fixed key order and full precision.
std::string ReportToJson(const MetricReport& report, const ClassTable& table,
                         const MetricSet& metrics);

// frame_index,pq,pq_star rows for external plotting.
std::string PerFrameCsv(const MetricReport& report);

// Terminal summary in percent with one decimal.
std::string SummaryText(const MetricReport& report, const MetricSet& metrics);

}  // namespace occ4d

#endif  // OCC4D_REPORT_H_
