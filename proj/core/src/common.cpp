#include "s2p/common.hpp"

#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

namespace s2p {

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  if (threads < 1) threads = 1;
  const std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
  if (w == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(w);
  std::exception_ptr first_error;
  std::mutex err_mutex;
  for (std::size_t k = 0; k < w; ++k) {
    pool.emplace_back([&, k]() {
      try {
        for (std::size_t i = k; i < n; i += w) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file for reading: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open file for writing: " + path.string());
  out << content;
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace s2p
