#pragma once

#include <filesystem>
#include <string_view>

#include "volut/point_cloud.hpp"

namespace volut {

enum class PlyFormat { kAscii, kBinary };

// Reads the vertex element of an ASCII or binary little-endian PLY file.
// x, y, z must be float or double; red, green, blue (uchar) are picked up
// only when all three exist. Other vertex properties and other elements are
// skipped. Failures are kFormat errors that name the byte offset.
PointCloud load_ply(const std::filesystem::path& path);
PointCloud parse_ply(std::string_view bytes);

void save_ply(const PointCloud& cloud, const std::filesystem::path& path,
              PlyFormat format);
std::string write_ply(const PointCloud& cloud, PlyFormat format);

}  // namespace volut
