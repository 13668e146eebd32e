// Microphone array geometry and the planar scan grid.
#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "beamloc/common.hpp"

namespace beamloc {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;
};

inline double distance(const Vec3& a, const Vec3& b) {
  const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

struct MicArrayGeometry {
  std::vector<Vec3> positions;

  std::size_t count() const { return positions.size(); }

  void validate() const {
    if (positions.empty()) throw InvalidArgument("array needs at least one microphone");
    for (std::size_t i = 0; i < positions.size(); ++i)
      for (std::size_t j = i + 1; j < positions.size(); ++j)
        if (distance(positions[i], positions[j]) == 0.0)
          throw InvalidArgument("duplicate microphone positions");
  }
};

// Vogel (golden-angle) spiral in the z = 0 plane. Mic i sits at polar radius
// radius*sqrt((i+1)/count) and angle (i+1)*pi*(3-sqrt(5)).
inline MicArrayGeometry build_spiral_array(int count, double radius) {
  if (count < 1) throw InvalidArgument("mic count must be >= 1");
  if (radius <= 0.0) throw InvalidArgument("array radius must be positive");
  const double golden = M_PI * (3.0 - std::sqrt(5.0));
  MicArrayGeometry geom;
  geom.positions.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double r = radius * std::sqrt(static_cast<double>(i + 1) / count);
    const double theta = (i + 1) * golden;
    geom.positions.push_back({r * std::cos(theta), r * std::sin(theta), 0.0});
  }
  return geom;
}

// Geometry file: JSON list of [x, y, z] in meters.
inline MicArrayGeometry load_geometry(const std::string& path) {
  auto is = io::open_in(path, false);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("geometry file is not valid JSON: ") + e.what());
  }
  if (!j.is_array()) throw FormatError("geometry file must be a JSON array of [x,y,z]");
  MicArrayGeometry geom;
  for (const auto& item : j) {
    if (!item.is_array() || item.size() != 3)
      throw FormatError("geometry entries must be [x,y,z] triples");
    geom.positions.push_back({item[0].get<double>(), item[1].get<double>(), item[2].get<double>()});
  }
  geom.validate();
  return geom;
}

inline void save_geometry(const std::string& path, const MicArrayGeometry& geom) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& p : geom.positions) j.push_back({p.x, p.y, p.z});
  auto os = io::open_out(path, false);
  os << j.dump() << "\n";
}

inline std::uint64_t geometry_hash(const MicArrayGeometry& geom) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& p : geom.positions) j.push_back({p.x, p.y, p.z});
  return fnv1a64(j.dump());
}

// Scan plane parallel to the array at z = z_plane. Nodes are enumerated
// row-major: index g = iy * nx + ix, x varying fastest.
struct ScanGrid {
  double x_min = -1.5, x_max = 1.5;
  double y_min = -1.5, y_max = 1.5;
  int nx = 31, ny = 31;
  double z_plane = 2.5;

  void validate() const {
    if (!(x_min < x_max) || !(y_min < y_max))
      throw InvalidArgument("scan grid extent must have min < max");
    if (nx < 2 || ny < 2) throw InvalidArgument("scan grid needs nx, ny >= 2");
  }

  std::size_t size() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }

  double node_x(int ix) const { return x_min + (x_max - x_min) * ix / (nx - 1); }
  double node_y(int iy) const { return y_min + (y_max - y_min) * iy / (ny - 1); }

  double node_x_of(std::size_t g) const { return node_x(static_cast<int>(g % static_cast<std::size_t>(nx))); }
  double node_y_of(std::size_t g) const { return node_y(static_cast<int>(g / static_cast<std::size_t>(nx))); }

  std::size_t index(int ix, int iy) const {
    return static_cast<std::size_t>(iy) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(ix);
  }

  std::size_t nearest_node(double x, double y) const {
    auto clampi = [](int v, int hi) { return v < 0 ? 0 : (v > hi ? hi : v); };
    const int ix = clampi(static_cast<int>(std::lround((x - x_min) / (x_max - x_min) * (nx - 1))), nx - 1);
    const int iy = clampi(static_cast<int>(std::lround((y - y_min) / (y_max - y_min) * (ny - 1))), ny - 1);
    return index(ix, iy);
  }

  bool contains(double x, double y) const {
    return x >= x_min && x <= x_max && y >= y_min && y <= y_max;
  }
};

}  // namespace beamloc
