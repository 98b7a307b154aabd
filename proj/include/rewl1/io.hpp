#ifndef REWL1_IO_HPP
#define REWL1_IO_HPP

#include <rewl1/analysis.hpp>
#include <rewl1/types.hpp>

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <system_error>

namespace rewl1 {

/// Shortest decimal string that parses back to the same double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

namespace detail {

template <class T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
  return v;
}

template <class T>
void put(std::ostream& os, T v) {
  v = to_little(v);
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw Error(ErrorCode::invalid_argument, "truncated binary matrix file");
  return to_little(v);
}

inline std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, mode);
  if (!os) throw Error(ErrorCode::invalid_argument, "cannot open '" + path.string() + "' for writing");
  return os;
}

inline std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::invalid_argument, "cannot open '" + path.string() + "'");
  return is;
}

}  // namespace detail

/// Flat float64 matrix file:
///   8 bytes  magic "RWL1F64\0"
///   uint32   format version (1)
///   uint32   number of dimensions (2)
///   uint64   rows, uint64 cols
///   rows * cols little-endian doubles, row-major.
/// All integers are little-endian. Vectors are stored as n x 1.
inline constexpr char kMatrixMagic[8] = {'R', 'W', 'L', '1', 'F', '6', '4', '\0'};

inline void write_matrix(const std::filesystem::path& path, const Matrix& a) {
  auto os = detail::open_out(path, std::ios::out | std::ios::binary);
  os.write(kMatrixMagic, sizeof(kMatrixMagic));
  detail::put<std::uint32_t>(os, 1);
  detail::put<std::uint32_t>(os, 2);
  detail::put<std::uint64_t>(os, static_cast<std::uint64_t>(a.rows()));
  detail::put<std::uint64_t>(os, static_cast<std::uint64_t>(a.cols()));
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) detail::put<double>(os, a(i, j));
  if (!os) throw Error(ErrorCode::invalid_argument, "write failed for '" + path.string() + "'");
}

inline Matrix read_matrix(const std::filesystem::path& path) {
  auto is = detail::open_in(path);
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMatrixMagic, sizeof(magic)) != 0)
    throw Error(ErrorCode::invalid_argument, "'" + path.string() + "' is not a float64 matrix file");
  const auto version = detail::get<std::uint32_t>(is);
  const auto ndim = detail::get<std::uint32_t>(is);
  if (version != 1 || ndim != 2)
    throw Error(ErrorCode::invalid_argument, "unsupported matrix file version or rank");
  const auto rows = detail::get<std::uint64_t>(is);
  const auto cols = detail::get<std::uint64_t>(is);
  if (rows > (1u << 26) || cols > (1u << 26) || rows * cols > (1ull << 30))
    throw Error(ErrorCode::invalid_argument, "matrix file dimensions are implausibly large");
  Matrix a(static_cast<Index>(rows), static_cast<Index>(cols));
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) a(i, j) = detail::get<double>(is);
  return a;
}

inline void write_vector(const std::filesystem::path& path, const Vector& v) { write_matrix(path, v); }

/// Reads an n x 1 or 1 x n matrix file as a vector.
inline Vector read_vector(const std::filesystem::path& path) {
  const Matrix a = read_matrix(path);
  if (a.cols() != 1 && a.rows() != 1)
    throw Error(ErrorCode::invalid_argument, "'" + path.string() + "' does not hold a vector");
  return Eigen::Map<const Vector>(a.data(), a.size());
}

/// 16-bit binary PGM (P5, maxval 65535, big-endian samples). Pixel values
/// are clipped to [0, 1] and scaled by 65535.
inline void write_pgm(const std::filesystem::path& path, const Matrix& img) {
  auto os = detail::open_out(path, std::ios::out | std::ios::binary);
  os << "P5\n" << img.cols() << ' ' << img.rows() << "\n65535\n";
  for (Index i = 0; i < img.rows(); ++i) {
    for (Index j = 0; j < img.cols(); ++j) {
      const double v = std::clamp(img(i, j), 0.0, 1.0);
      const auto q = static_cast<std::uint16_t>(std::lround(v * 65535.0));
      const unsigned char bytes[2] = {static_cast<unsigned char>(q >> 8), static_cast<unsigned char>(q & 0xFF)};
      os.write(reinterpret_cast<const char*>(bytes), 2);
    }
  }
  if (!os) throw Error(ErrorCode::invalid_argument, "write failed for '" + path.string() + "'");
}

inline Matrix read_pgm(const std::filesystem::path& path) {
  auto is = detail::open_in(path);
  std::string magic;
  long long w = 0, h = 0, maxval = 0;
  is >> magic >> w >> h >> maxval;
  if (!is || magic != "P5" || w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535)
    throw Error(ErrorCode::invalid_argument, "'" + path.string() + "' is not a binary PGM");
  is.get();  // single whitespace before the raster
  const bool wide = maxval > 255;
  Matrix img(h, w);
  for (Index i = 0; i < h; ++i) {
    for (Index j = 0; j < w; ++j) {
      unsigned char b[2] = {0, 0};
      is.read(reinterpret_cast<char*>(b), wide ? 2 : 1);
      if (!is) throw Error(ErrorCode::invalid_argument, "truncated PGM raster");
      const unsigned v = wide ? (static_cast<unsigned>(b[0]) << 8) | b[1] : b[0];
      img(i, j) = static_cast<double>(v) / static_cast<double>(maxval);
    }
  }
  return img;
}

/// Dictionary as a matrix file plus a tab-separated sidecar
/// `<path>.atoms.tsv` with columns index, t0, omega, sigma, phase.
inline void write_dictionary(const std::filesystem::path& path, const Dictionary& dict) {
  write_matrix(path, dict.psi);
  auto os = detail::open_out(path.string() + ".atoms.tsv");
  os << "index\tt0\tomega\tsigma\tphase\n";
  for (std::size_t j = 0; j < dict.atoms.size(); ++j) {
    const auto& a = dict.atoms[j];
    os << j << '\t' << format_double(a.t0) << '\t' << format_double(a.omega) << '\t' << format_double(a.sigma)
       << '\t' << (a.phase == 0 ? "cos" : "sin") << '\n';
  }
}

}  // namespace rewl1

#endif  // REWL1_IO_HPP
