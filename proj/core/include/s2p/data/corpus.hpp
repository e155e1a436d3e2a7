#pragma once

#include <string>
#include <vector>

#include "s2p/common.hpp"

namespace s2p::data {

// One aligned (audio, transcript, 2-D keypoints) triple. Paths are resolved
// against the manifest's directory at load time.
struct Utterance {
  std::string id;
  fs::path audio_path;
  fs::path keypoints_path;
  std::string transcript;
  double fps = 0.0;
  int sample_rate = 0;
};

enum class Split { train, dev, test };

struct Corpus {
  std::vector<Utterance> utterances;
  Split split = Split::train;

  std::size_t size() const { return utterances.size(); }
};

// Manifest: JSON-Lines, one utterance per line with keys
//   {"id": str, "audio": relpath, "keypoints": relpath,
//    "text": str, "fps": float, "sample_rate": int}
// Loading verifies that every referenced file exists and that ids are
// unique; ordering is preserved.
Corpus load_manifest(const fs::path& path, Split split = Split::train);
void write_manifest(const fs::path& path, const Corpus& corpus);

}  // namespace s2p::data
