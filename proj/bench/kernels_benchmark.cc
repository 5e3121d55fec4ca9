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
// Serial reference kernels against their OpenMP counterparts on one
// full-resolution (200 x 200 x 16) synthetic frame.
#include <benchmark/benchmark.h>

#include "occ4d/label_gen.h"
#include "occ4d/metrics.h"
#include "occ4d/synth.h"
#include "occ4d/voxel_core.h"

namespace {

using namespace occ4d;

Scenario BenchScenario(const ClassTable& table) {
  Scenario sc = NonCrossingSuite(GridSpec::Occ3dWaymo(), 4, 3).back();
  sc.clutter_class = *table.FindByName("vegetation");
  sc.clutter_count = 20000;
  return sc;
}

PanopticGrid NoisyFrame(const RenderedSequence& seq, const ClassTable& table) {
  NoiseSpec n;
  n.seed = 1;
  n.class_flip_prob = {{7, 0.1}, {1, 0.1}};
  n.dilate_radius = 1;
  return Corrupt(seq.gt, table, n).frames[1];
}

struct Fixture {
  ClassTable table = ClassTable::Default();
  RenderedSequence seq = RenderSequence(BenchScenario(table));
  PanopticGrid pred = NoisyFrame(seq, table);
};

const Fixture& Data() {
  static const Fixture f;
  return f;
}

void BM_CountFrame(benchmark::State& state) {
  const Fixture& d = Data();
  const EvalOptions o;
  for (auto _ : state) {
    benchmark::DoNotOptimize(CountFrame(d.seq.gt[1], d.pred, d.table, o));
  }
}

void BM_CountFrameSerial(benchmark::State& state) {
  const Fixture& d = Data();
  const EvalOptions o;
  for (auto _ : state) {
    benchmark::DoNotOptimize(serial::CountFrame(d.seq.gt[1], d.pred, d.table, o));
  }
}

void BM_GenerateFrameLabels(benchmark::State& state) {
  const Fixture& d = Data();
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        GenerateFrameLabels(d.seq.semantic[1], d.seq.boxes[1], d.table));
  }
}

void BM_GenerateFrameLabelsSerial(benchmark::State& state) {
  const Fixture& d = Data();
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        serial::GenerateFrameLabels(d.seq.semantic[1], d.seq.boxes[1], d.table));
  }
}

void BM_WarpInstances(benchmark::State& state) {
  const Fixture& d = Data();
  const PanopticGrid& dst = d.seq.gt[2];
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        WarpInstances(d.seq.gt[1], dst.ego_pose, dst.spec, d.table.free_class()));
  }
}

void BM_WarpInstancesSerial(benchmark::State& state) {
  const Fixture& d = Data();
  const PanopticGrid& dst = d.seq.gt[2];
  for (auto _ : state) {
    benchmark::DoNotOptimize(serial::WarpInstances(d.seq.gt[1], dst.ego_pose, dst.spec,
                                                   d.table.free_class()));
  }
}

BENCHMARK(BM_CountFrame)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CountFrameSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GenerateFrameLabels)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GenerateFrameLabelsSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_WarpInstances)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_WarpInstancesSerial)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
