#pragma once

#include <filesystem>
#include <string>

#include "berrypick/image.hpp"
#include "berrypick/types.hpp"

namespace berrypick::io {

namespace fs = std::filesystem;

// ASCII PLY with `x y z` and optional `red green blue` vertex properties.
// Coordinates are written with enough digits to round-trip exactly.
void write_ply(const fs::path &path, const PointCloud &cloud);
PointCloud read_ply(const fs::path &path);

// ASCII PLY mesh (vertex x y z, face vertex_indices). Triangles only.
TriangleMesh read_ply_mesh(const fs::path &path);
void write_ply_mesh(const fs::path &path, const TriangleMesh &mesh);

// 16-bit binary PGM (P5, maxval 65535, big-endian), values in millimeters.
void write_depth_pgm(const fs::path &path, const DepthImage &depth);
DepthImage read_depth_pgm(const fs::path &path);

// 8-bit binary PPM (P6).
void write_ppm(const fs::path &path, const RgbImage &rgb);
RgbImage read_ppm(const fs::path &path);

// 8-bit PGM where non-zero marks membership, plus `<stem>.json` holding
// {"instance_id": int, "ripeness": "ripe"|"unripe"}.
void write_mask(const fs::path &pgm_path, const InstanceMask &mask);
InstanceMask read_mask(const fs::path &pgm_path);

void write_text(const fs::path &path, const std::string &text);
std::string read_text(const fs::path &path);

} // namespace berrypick::io
