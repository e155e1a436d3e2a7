#include "s2p/data/keypoints.hpp"

#include <array>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

namespace s2p::data {

using nlohmann::json;

KeypointSequence read_keypoints(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open keypoint file: " + path.string());
  std::vector<std::array<double, 3 * kNumJoints>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ValidationError(path.string() + ":" + std::to_string(lineno) +
                            ": malformed keypoint line: " + e.what());
    }
    if (!j.contains("xy") || !j["xy"].is_array() || j["xy"].size() != kNumJoints)
      throw ValidationError(path.string() + ":" + std::to_string(lineno) +
                            ": expected \"xy\" with exactly 50 joints");
    std::array<double, 3 * kNumJoints> row{};
    for (int k = 0; k < kNumJoints; ++k) {
      const auto& triple = j["xy"][static_cast<std::size_t>(k)];
      if (!triple.is_array() || triple.size() != 3)
        throw ValidationError(path.string() + ":" + std::to_string(lineno) +
                              ": joint entries must be [x, y, confidence]");
      for (int c = 0; c < 3; ++c) row[static_cast<std::size_t>(3 * k + c)] = triple[static_cast<std::size_t>(c)].get<double>();
      const double conf = row[static_cast<std::size_t>(3 * k + 2)];
      if (conf < 0.0 || conf > 1.0)
        throw ValidationError(path.string() + ":" + std::to_string(lineno) +
                              ": confidence must be in [0,1]");
    }
    rows.push_back(row);
  }
  KeypointSequence seq;
  seq.xy.resize(static_cast<Eigen::Index>(rows.size()), 2 * kNumJoints);
  seq.confidence.resize(static_cast<Eigen::Index>(rows.size()), kNumJoints);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (int k = 0; k < kNumJoints; ++k) {
      seq.xy(static_cast<Eigen::Index>(r), 2 * k) = rows[r][static_cast<std::size_t>(3 * k)];
      seq.xy(static_cast<Eigen::Index>(r), 2 * k + 1) = rows[r][static_cast<std::size_t>(3 * k + 1)];
      seq.confidence(static_cast<Eigen::Index>(r), k) = rows[r][static_cast<std::size_t>(3 * k + 2)];
    }
  }
  return seq;
}

void write_keypoints(const fs::path& path, const KeypointSequence& seq) {
  if (seq.xy.rows() != seq.confidence.rows() || seq.xy.cols() != 2 * kNumJoints ||
      seq.confidence.cols() != kNumJoints)
    throw ValidationError("write_keypoints: inconsistent keypoint sequence shapes");
  std::ostringstream out;
  for (Eigen::Index t = 0; t < seq.xy.rows(); ++t) {
    json frame;
    frame["t"] = t;
    json xy = json::array();
    for (int k = 0; k < kNumJoints; ++k)
      xy.push_back({seq.xy(t, 2 * k), seq.xy(t, 2 * k + 1), seq.confidence(t, k)});
    frame["xy"] = xy;
    out << frame.dump() << "\n";
  }
  write_text_file(path, out.str());
}

}  // namespace s2p::data
