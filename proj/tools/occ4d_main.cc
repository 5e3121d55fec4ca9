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
// occ4d: label generation, evaluation, tracking and synthetic data.
#include <omp.h>

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "occ4d/commands.h"

namespace {

using occ4d::RunGuarded;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"4D panoptic occupancy toolkit"};
  app.require_subcommand(1);
  std::optional<int> threads;
  app.add_option("--threads", threads,
                 "worker threads (default: $OCC4D_THREADS, else all cores)")
      ->check(CLI::PositiveNumber);

  occ4d::GenLabelsRequest gen;
  std::string gen_boxes;
  auto* gen_cmd = app.add_subcommand(
      "gen-labels", "assign instance ids to semantic frames from tracked boxes");
  gen_cmd->add_option("--semantic", gen.semantic, "semantic manifest or directory")
      ->required();
  gen_cmd->add_option("--boxes", gen_boxes, "boxes file (default: from manifest)");
  gen_cmd->add_option("--out", gen.out_dir, "output directory")->required();

  occ4d::EvalRequest eval;
  std::string metrics = "occstq,pq,pqstar";
  std::string eval_out;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate predictions against ground truth");
  eval_cmd->add_option("--gt", eval.gt, "ground-truth manifest or directory")->required();
  eval_cmd->add_option("--pred", eval.pred, "prediction manifest or directory")->required();
  eval_cmd->add_option("--metrics", metrics, "subset of occstq,pq,pqstar")
      ->capture_default_str();
  eval_cmd->add_flag("--visible-only,!--no-visible-only", eval.visible_only,
                     "score only voxels in the gt visibility mask (default on)");
  eval_cmd->add_option("--out", eval_out,
                       "report JSON path; per-frame CSV goes next to it");

  occ4d::TrackRequest track;
  std::string method = "overlap";
  std::string track_config;
  auto* track_cmd = app.add_subcommand("track", "associate instances over time");
  track_cmd->add_option("--pred", track.pred, "prediction manifest or directory")
      ->required();
  track_cmd->add_option("--method", method, "overlap | ab3dmot | lifecycle")
      ->capture_default_str();
  track_cmd->add_option("--config", track_config, "tracker config (YAML)");
  track_cmd->add_option("--out", track.out_dir, "output directory")->required();

  auto* synth_cmd = app.add_subcommand("synth", "synthetic scenes and corruption");
  synth_cmd->require_subcommand(1);
  occ4d::SynthRenderRequest render;
  std::optional<std::uint64_t> render_seed;
  auto* render_cmd = synth_cmd->add_subcommand("render", "render a scenario file");
  render_cmd->add_option("--scenario", render.scenario, "scenario (YAML)")->required();
  render_cmd->add_option("--seed", render_seed, "override the scenario seed");
  render_cmd->add_option("--out", render.out_dir, "output directory")->required();
  occ4d::SynthCorruptRequest corrupt;
  std::string noise;
  std::optional<std::uint64_t> corrupt_seed;
  auto* corrupt_cmd =
      synth_cmd->add_subcommand("corrupt", "derive a noisy prediction from ground truth");
  corrupt_cmd->add_option("--gt", corrupt.gt, "ground-truth manifest or directory")
      ->required();
  corrupt_cmd->add_option("--noise", noise, "noise spec (YAML); omitted: no noise");
  corrupt_cmd->add_option("--seed", corrupt_seed, "override the noise seed");
  corrupt_cmd->add_option("--out", corrupt.out_dir, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : occ4d::kExitValidation;
  }

  return RunGuarded(
      [&] {
        const int n = occ4d::ResolveThreads(threads);
        omp_set_num_threads(n);
        if (*gen_cmd) {
          if (!gen_boxes.empty()) gen.boxes = gen_boxes;
          occ4d::RunGenLabels(gen, std::cout, std::cerr);
        } else if (*eval_cmd) {
          eval.metrics = occ4d::MetricSet::Parse(metrics);
          eval.threads = n;
          if (!eval_out.empty()) eval.out = eval_out;
          occ4d::RunEval(eval, std::cout);
        } else if (*track_cmd) {
          track.method = occ4d::ParseTrackMethod(method);
          if (!track_config.empty()) track.config = track_config;
          occ4d::RunTrack(track, std::cout);
        } else if (*render_cmd) {
          render.seed = render_seed;
          occ4d::RunSynthRender(render, std::cout);
        } else if (*corrupt_cmd) {
          if (!noise.empty()) corrupt.noise = noise;
          corrupt.seed = corrupt_seed;
          occ4d::RunSynthCorrupt(corrupt, std::cout);
        }
      },
      std::cerr);
}
