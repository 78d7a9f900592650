// SPDX-License-Identifier: Apache-2.0
#include "tdgemm/matrix_io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <vector>

#include "csv_util.hpp"
#include "tdgemm/error.hpp"

static_assert(std::endian::native == std::endian::little, "matrix files assume a little-endian host");

namespace tdgemm {

namespace {

constexpr char kMagic[4] = {'T', 'G', 'M', 'M'};
constexpr std::size_t kHeaderBytes = 13;

std::vector<char> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct Header {
  std::uint32_t rows;
  std::uint32_t cols;
  std::uint8_t code;
};

Header parse_header(const std::vector<char>& bytes, const std::filesystem::path& path) {
  if (bytes.size() < kHeaderBytes || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw FormatError(path.string() + " is not a TGMM matrix file");
  Header h;
  std::memcpy(&h.rows, bytes.data() + 4, 4);
  std::memcpy(&h.cols, bytes.data() + 8, 4);
  h.code = static_cast<std::uint8_t>(bytes[12]);
  if (h.code != 4 && h.code != 8) throw FormatError(path.string() + ": unknown precision code");
  return h;
}

bool is_csv(const std::filesystem::path& path) { return path.extension() == ".csv"; }

}  // namespace

template <Real T>
void write_matrix_binary(const std::filesystem::path& path, const Matrix<T>& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  const auto rows = static_cast<std::uint32_t>(m.rows());
  const auto cols = static_cast<std::uint32_t>(m.cols());
  const auto code = static_cast<std::uint8_t>(sizeof(T));
  out.write(kMagic, 4);
  out.write(reinterpret_cast<const char*>(&rows), 4);
  out.write(reinterpret_cast<const char*>(&cols), 4);
  out.write(reinterpret_cast<const char*>(&code), 1);
  out.write(reinterpret_cast<const char*>(m.values().data()), static_cast<std::streamsize>(m.size() * sizeof(T)));
  if (!out) throw FormatError("short write to " + path.string());
}

template <Real T>
Matrix<T> read_matrix_binary(const std::filesystem::path& path) {
  const auto bytes = read_all(path);
  const Header h = parse_header(bytes, path);
  if (h.code != sizeof(T)) throw FormatError(path.string() + ": stored precision differs from the requested one");
  const std::size_t n = static_cast<std::size_t>(h.rows) * h.cols;
  if (bytes.size() != kHeaderBytes + n * sizeof(T)) throw FormatError(path.string() + ": truncated or oversized data");
  std::vector<T> data(n);
  std::memcpy(data.data(), bytes.data() + kHeaderBytes, n * sizeof(T));
  return Matrix<T>(h.rows, h.cols, std::move(data));
}

Precision peek_matrix_precision(const std::filesystem::path& path) {
  if (is_csv(path)) return Precision::kDouble;
  const Header h = parse_header(read_all(path), path);
  return h.code == 4 ? Precision::kSingle : Precision::kDouble;
}

template <Real T>
void write_matrix_csv(const std::filesystem::path& path, const Matrix<T>& m) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (c) out << ',';
      out << csv::format_double(static_cast<double>(m(r, c)));
    }
    out << '\n';
  }
}

template <Real T>
Matrix<T> read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::vector<T> data;
  std::size_t rows = 0, cols = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto fields = csv::split(line);
    if (rows == 0) cols = fields.size();
    if (fields.size() != cols) throw FormatError(path.string() + ": ragged CSV matrix");
    for (const auto& f : fields) data.push_back(static_cast<T>(csv::parse_double(f)));
    ++rows;
  }
  return Matrix<T>(rows, cols, std::move(data));
}

template <Real T>
Matrix<T> read_matrix(const std::filesystem::path& path) {
  return is_csv(path) ? read_matrix_csv<T>(path) : read_matrix_binary<T>(path);
}

template <Real T>
void write_matrix(const std::filesystem::path& path, const Matrix<T>& m) {
  if (is_csv(path))
    write_matrix_csv(path, m);
  else
    write_matrix_binary(path, m);
}

std::string file_digest(const std::filesystem::path& path) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : read_all(path)) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

#define TDGEMM_IO_INSTANTIATE(T)                                                   \
  template void write_matrix_binary(const std::filesystem::path&, const Matrix<T>&); \
  template Matrix<T> read_matrix_binary<T>(const std::filesystem::path&);          \
  template void write_matrix_csv(const std::filesystem::path&, const Matrix<T>&);  \
  template Matrix<T> read_matrix_csv<T>(const std::filesystem::path&);             \
  template Matrix<T> read_matrix<T>(const std::filesystem::path&);                 \
  template void write_matrix(const std::filesystem::path&, const Matrix<T>&);

TDGEMM_IO_INSTANTIATE(float)
TDGEMM_IO_INSTANTIATE(double)

}  // namespace tdgemm
