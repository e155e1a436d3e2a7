#pragma once

#include <Eigen/Core>
#include <cstdint>

#include "s2p/common.hpp"

namespace s2p {

// Feature cache format (mel and pose caches, generated pose files):
// rows(u32 LE), cols(u32 LE), then row-major little-endian float32 payload.
void write_cache_matrix(const fs::path& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_cache_matrix(const fs::path& path);

// Checkpoint parameter format: rows(u32), cols(u32), dtype(u32, 4 = float32,
// 8 = float64), then row-major little-endian payload. Written atomically
// (temp file + rename) so a crashed save never leaves a torn parameter.
void write_param_matrix(const fs::path& path, const Eigen::MatrixXd& m, bool f64 = true);
Eigen::MatrixXd read_param_matrix(const fs::path& path);

}  // namespace s2p
