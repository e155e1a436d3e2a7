#pragma once

#include <Eigen/Core>

#include "s2p/common.hpp"

namespace s2p::data {

inline constexpr int kNumJoints = 50;

// 2-D detections for one utterance: per frame, 50 joints of (x, y) pixel
// coordinates plus a confidence, with confidence 0 marking a missed
// detection.
struct KeypointSequence {
  Eigen::MatrixXd xy;          // m x 100, joint j at columns (2j, 2j+1)
  Eigen::MatrixXd confidence;  // m x 50, entries in [0, 1]

  Eigen::Index frames() const { return xy.rows(); }
};

// JSON-Lines stream, one frame per line:
//   {"t": <frame index>, "xy": [[x, y, confidence] x 50]}
KeypointSequence read_keypoints(const fs::path& path);
void write_keypoints(const fs::path& path, const KeypointSequence& seq);

}  // namespace s2p::data
