#include "s2p/binio.hpp"

#include <fstream>
#include <vector>

namespace s2p {

namespace {

void write_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::istream& in, const fs::path& path) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw IoError("unexpected end of header in " + path.string());
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

template <typename T>
void write_payload(std::ostream& out, const Eigen::MatrixXd& m) {
  std::vector<T> row(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      row[static_cast<std::size_t>(c)] = static_cast<T>(m(r, c));
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(T)));
  }
}

template <typename T>
void read_payload(std::istream& in, Eigen::MatrixXd& m, const fs::path& path) {
  std::vector<T> row(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(row.size() * sizeof(T)));
    if (!in) throw IoError("unexpected end of payload in " + path.string());
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      m(r, c) = static_cast<double>(row[static_cast<std::size_t>(c)]);
  }
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open file for writing: " + path.string());
  return out;
}

}  // namespace

void write_cache_matrix(const fs::path& path, const Eigen::MatrixXd& m) {
  auto out = open_out(path);
  write_u32(out, static_cast<std::uint32_t>(m.rows()));
  write_u32(out, static_cast<std::uint32_t>(m.cols()));
  write_payload<float>(out, m);
  if (!out) throw IoError("write failed: " + path.string());
}

Eigen::MatrixXd read_cache_matrix(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open cache file: " + path.string());
  const std::uint32_t rows = read_u32(in, path);
  const std::uint32_t cols = read_u32(in, path);
  Eigen::MatrixXd m(rows, cols);
  read_payload<float>(in, m, path);
  return m;
}

void write_param_matrix(const fs::path& path, const Eigen::MatrixXd& m, bool f64) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    auto out = open_out(tmp);
    write_u32(out, static_cast<std::uint32_t>(m.rows()));
    write_u32(out, static_cast<std::uint32_t>(m.cols()));
    write_u32(out, f64 ? 8u : 4u);
    if (f64)
      write_payload<double>(out, m);
    else
      write_payload<float>(out, m);
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

Eigen::MatrixXd read_param_matrix(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open parameter file: " + path.string());
  const std::uint32_t rows = read_u32(in, path);
  const std::uint32_t cols = read_u32(in, path);
  const std::uint32_t dtype = read_u32(in, path);
  if (dtype != 4 && dtype != 8)
    throw IoError("unknown dtype code " + std::to_string(dtype) + " in " + path.string());
  Eigen::MatrixXd m(rows, cols);
  if (dtype == 4)
    read_payload<float>(in, m, path);
  else
    read_payload<double>(in, m, path);
  return m;
}

}  // namespace s2p
