// Shared error types, binary I/O helpers and small utilities.
#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace beamloc {

inline constexpr double kSpeedOfSound = 343.0;  // m/s, configurable everywhere it matters
inline constexpr double kRefPressure = 2e-5;    // Pa, SPL reference

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Caller passed a value outside an operation's contract.
class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& msg) : Error(msg) {}
};

// A file does not match its declared on-disk format.
class FormatError : public Error {
 public:
  explicit FormatError(const std::string& msg) : Error(msg) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& msg) : Error(msg) {}
};

// Source and microphone coincide (zero propagation distance).
class DegenerateGeometry : public Error {
 public:
  explicit DegenerateGeometry(const std::string& msg) : Error(msg) {}
};

// A beam map carries no positive peak to extract.
class NoSourceError : public Error {
 public:
  explicit NoSourceError(const std::string& msg) : Error(msg) {}
};

namespace io {

// All on-disk binary formats are little-endian by contract.
inline void write_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

inline std::uint32_t read_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw FormatError("unexpected end of file reading u32");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

inline void write_f64(std::ostream& os, double v) {
  std::uint64_t u;
  std::memcpy(&u, &v, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((u >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(b), 8);
}

inline double read_f64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  if (!is) throw FormatError("unexpected end of file reading f64");
  std::uint64_t u = 0;
  for (int i = 0; i < 8; ++i) u |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &u, 8);
  return v;
}

inline void write_f32_array(std::ostream& os, const float* data, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t u;
    std::memcpy(&u, &data[i], 4);
    unsigned char b[4] = {static_cast<unsigned char>(u & 0xff),
                          static_cast<unsigned char>((u >> 8) & 0xff),
                          static_cast<unsigned char>((u >> 16) & 0xff),
                          static_cast<unsigned char>((u >> 24) & 0xff)};
    os.write(reinterpret_cast<const char*>(b), 4);
  }
}

inline void read_f32_array(std::istream& is, float* data, std::size_t n) {
  std::vector<unsigned char> buf(4 * n);
  is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!is) throw FormatError("unexpected end of file reading f32 payload");
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t u = static_cast<std::uint32_t>(buf[4 * i]) |
                      (static_cast<std::uint32_t>(buf[4 * i + 1]) << 8) |
                      (static_cast<std::uint32_t>(buf[4 * i + 2]) << 16) |
                      (static_cast<std::uint32_t>(buf[4 * i + 3]) << 24);
    std::memcpy(&data[i], &u, 4);
  }
}

inline void expect_magic(std::istream& is, const char magic[4], const std::string& what) {
  char got[4];
  is.read(got, 4);
  if (!is || std::memcmp(got, magic, 4) != 0)
    throw FormatError("bad magic bytes in " + what);
}

inline std::ofstream open_out(const std::string& path, bool binary = true) {
  std::ofstream os(path, binary ? std::ios::binary : std::ios::out);
  if (!os) throw IoError("cannot open for writing: " + path);
  return os;
}

inline std::ifstream open_in(const std::string& path, bool binary = true) {
  std::ifstream is(path, binary ? std::ios::binary : std::ios::in);
  if (!is) throw IoError("cannot open for reading: " + path);
  return is;
}

// 8-bit binary PGM, values scaled so [lo, hi] maps to [0, 255].
inline void write_pgm(const std::string& path, std::size_t rows, std::size_t cols,
                      const double* values, double lo, double hi) {
  auto os = open_out(path);
  os << "P5\n" << cols << " " << rows << "\n255\n";
  const double range = hi > lo ? hi - lo : 1.0;
  for (std::size_t i = 0; i < rows * cols; ++i) {
    double t = (values[i] - lo) / range;
    if (t < 0.0) t = 0.0;
    if (t > 1.0) t = 1.0;
    unsigned char px = static_cast<unsigned char>(t * 255.0 + 0.5);
    os.write(reinterpret_cast<const char*>(&px), 1);
  }
  if (!os) throw IoError("failed writing " + path);
}

}  // namespace io

// FNV-1a, used to fingerprint configs and geometries in manifests/reports.
inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string hash_hex(std::uint64_t h) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

}  // namespace beamloc
