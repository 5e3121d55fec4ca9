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
#include "occ4d/trackers/kalman_tracker.h"

#include <algorithm>

#include <Eigen/Dense>

#include "occ4d/assignment.h"

namespace occ4d {

namespace {

using MeasMatrix = Eigen::Matrix<double, 6, 9>;
using Meas = Eigen::Matrix<double, 6, 1>;

MeasMatrix MeasurementModel() {
  MeasMatrix h = MeasMatrix::Zero();
  h.leftCols<6>().setIdentity();
  return h;
}

Meas ToMeasurement(const AxisAlignedBox& b) {
  Meas z;
  z << b.center(), b.size();
  return z;
}

}  // namespace

AxisAlignedBox KalmanTrack::box() const {
  return AxisAlignedBox::FromCenterSize(x.head<3>(), x.segment<3>(3));
}

KalmanTracker::KalmanTracker(KalmanConfig config) : config_(config) {}

void KalmanTracker::Predict(KalmanTrack& t, double dt) const {
  KalmanCovariance f = KalmanCovariance::Identity();
  f(0, 6) = f(1, 7) = f(2, 8) = dt;
  KalmanCovariance q = KalmanCovariance::Zero();
  q.diagonal() << Eigen::Vector3d::Constant(config_.sigma_position *
                                            config_.sigma_position),
      Eigen::Vector3d::Constant(config_.sigma_size * config_.sigma_size),
      Eigen::Vector3d::Constant(config_.sigma_velocity * config_.sigma_velocity);
  t.x = f * t.x;
  t.P = f * t.P * f.transpose() + q;
  t.P = 0.5 * (t.P + t.P.transpose());
}

void KalmanTracker::Update(KalmanTrack& t, const AxisAlignedBox& box) const {
  const MeasMatrix h = MeasurementModel();
  Eigen::Matrix<double, 6, 6> r = Eigen::Matrix<double, 6, 6>::Zero();
  r.diagonal() << Eigen::Vector3d::Constant(config_.sigma_position *
                                            config_.sigma_position),
      Eigen::Vector3d::Constant(config_.sigma_size * config_.sigma_size);
  const Eigen::Matrix<double, 6, 6> s = h * t.P * h.transpose() + r;
  const Eigen::Matrix<double, 9, 6> k =
      t.P * h.transpose() * s.ldlt().solve(Eigen::Matrix<double, 6, 6>::Identity());
  t.x += k * (ToMeasurement(box) - h * t.x);
  // Joseph form keeps P symmetric positive semi-definite.
  const KalmanCovariance ikh = KalmanCovariance::Identity() - k * h;
  t.P = ikh * t.P * ikh.transpose() + k * r * k.transpose();
  t.P = 0.5 * (t.P + t.P.transpose());
}

std::vector<KalmanAssignment> KalmanTracker::Step(
    const std::vector<InstanceBox>& detections, double dt) {
  for (KalmanTrack& t : tracks_) Predict(t, dt);

  WeightMatrix iou(tracks_.size(), detections.size());
  for (std::size_t i = 0; i < tracks_.size(); ++i) {
    const AxisAlignedBox pred = tracks_[i].box();
    for (std::size_t j = 0; j < detections.size(); ++j) {
      if (tracks_[i].class_id != detections[j].class_id) continue;
      iou(i, j) = BoxIoU(pred, detections[j].box);
    }
  }
  const Matching matches = MaxWeightMatching(iou, config_.min_iou);

  std::vector<KalmanAssignment> out(detections.size());
  std::vector<char> det_matched(detections.size(), 0);
  std::vector<char> track_matched(tracks_.size(), 0);
  for (const auto& [i, j] : matches) {
    KalmanTrack& t = tracks_[i];
    Update(t, detections[j].box);
    ++t.hits;
    t.misses = 0;
    if (!t.confirmed && t.hits >= config_.min_hits) {
      t.confirmed = true;
      ++confirmed_count_;
    }
    out[j] = {j, t.track_id, t.confirmed};
    det_matched[j] = 1;
    track_matched[i] = 1;
  }

  std::vector<KalmanTrack> kept;
  kept.reserve(tracks_.size() + detections.size());
  for (std::size_t i = 0; i < tracks_.size(); ++i) {
    KalmanTrack& t = tracks_[i];
    if (!track_matched[i] && ++t.misses >= config_.max_age) {
      ++deaths_;
      continue;
    }
    kept.push_back(std::move(t));
  }

  for (std::size_t j = 0; j < detections.size(); ++j) {
    if (det_matched[j]) continue;
    KalmanTrack t;
    t.track_id = next_id_++;
    t.class_id = detections[j].class_id;
    t.x.setZero();
    t.x.head<6>() = ToMeasurement(detections[j].box);
    t.P.setZero();
    t.P.diagonal() << Eigen::Vector3d::Constant(config_.sigma_position *
                                                config_.sigma_position),
        Eigen::Vector3d::Constant(config_.sigma_size * config_.sigma_size),
        Eigen::Vector3d::Constant(config_.initial_velocity_sigma *
                                  config_.initial_velocity_sigma);
    t.hits = 1;
    if (t.hits >= config_.min_hits) {
      t.confirmed = true;
      ++confirmed_count_;
    }
    out[j] = {j, t.track_id, t.confirmed};
    ++births_;
    kept.push_back(std::move(t));
  }
  tracks_ = std::move(kept);
  return out;
}

}  // namespace occ4d
