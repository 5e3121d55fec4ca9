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
#ifndef OCC4D_TRACKERS_KALMAN_TRACKER_H_
#define OCC4D_TRACKERS_KALMAN_TRACKER_H_

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "occ4d/trackers/boxes.h"
#include "occ4d/voxel_core.h"

namespace occ4d {

// Defaults: voxel quantization (0.4 m) dominates the noise, so position and
// size share a 0.5 m sigma.
struct KalmanConfig {
  double min_iou = 0.01;
  int min_hits = 2;
  int max_age = 3;
  double dt = 0.5;  // seconds between frames when timestamps are unusable
  double sigma_position = 0.5;
  double sigma_size = 0.5;
  double sigma_velocity = 1.0;
  double initial_velocity_sigma = 10.0;
};

using KalmanState = Eigen::Matrix<double, 9, 1>;  // cx cy cz l w h vx vy vz
using KalmanCovariance = Eigen::Matrix<double, 9, 9>;

struct KalmanTrack {
  TrackId track_id = 0;
  ClassId class_id = 0;
  KalmanState x = KalmanState::Zero();
  KalmanCovariance P = KalmanCovariance::Identity();
  int hits = 0;
  int misses = 0;  // consecutive frames without a matched detection
  bool confirmed = false;

  AxisAlignedBox box() const;
  Point3 velocity() const { return x.tail<3>(); }
};

struct KalmanAssignment {
  std::size_t detection = 0;
  TrackId track_id = 0;
  bool confirmed = false;
};

// Constant-velocity 3D box tracker over voxel-derived axis-aligned boxes.
class KalmanTracker {
 public:
  explicit KalmanTracker(KalmanConfig config = {});

  // Predicts every track by `dt` seconds, associates by 3D IoU, updates, and
  // ages. One assignment per detection, in detection order.
  std::vector<KalmanAssignment> Step(const std::vector<InstanceBox>& detections,
                                     double dt);
  std::vector<KalmanAssignment> Step(const std::vector<InstanceBox>& detections) {
    return Step(detections, config_.dt);
  }

  const std::vector<KalmanTrack>& tracks() const { return tracks_; }
  // Distinct ids that ever reached min_hits.
  std::size_t confirmed_count() const { return confirmed_count_; }
  std::size_t births() const { return births_; }
  std::size_t deaths() const { return deaths_; }
  const KalmanConfig& config() const { return config_; }

 private:
  void Predict(KalmanTrack& t, double dt) const;
  void Update(KalmanTrack& t, const AxisAlignedBox& z) const;

  KalmanConfig config_;
  std::vector<KalmanTrack> tracks_;
  TrackId next_id_ = 1;
  std::size_t confirmed_count_ = 0;
  std::size_t births_ = 0;
  std::size_t deaths_ = 0;
};

}  // namespace occ4d

#endif  // OCC4D_TRACKERS_KALMAN_TRACKER_H_
