#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>

namespace s2p {

namespace fs = std::filesystem;

// Bad user input: malformed files, invalid configs, contract violations.
// The CLI maps this to exit code 1; everything else that escapes maps to 2.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Runs fn(i) for i in [0, n) on `threads` workers with a static round-robin
// assignment (worker w handles i == w mod threads, ascending). The assignment
// is deterministic so callers can rely on per-worker accumulation order.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

// FNV-1a, used to derive per-name RNG streams.
std::uint64_t fnv1a64(const std::string& s);

std::string read_text_file(const fs::path& path);
void write_text_file(const fs::path& path, const std::string& content);

}  // namespace s2p
