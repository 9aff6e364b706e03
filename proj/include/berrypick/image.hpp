#pragma once

#include <cstdint>
#include <vector>

#include "berrypick/types.hpp"

namespace berrypick {

// Row-major single-channel image.
template <typename T> struct Image {
  int width = 0;
  int height = 0;
  std::vector<T> values;

  Image() = default;
  Image(int w, int h, T fill = T{})
      : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {}

  std::size_t index(int u, int v) const {
    return static_cast<std::size_t>(v) * width + u;
  }
  T &at(int u, int v) { return values[index(u, v)]; }
  const T &at(int u, int v) const { return values[index(u, v)]; }
  bool contains(int u, int v) const {
    return u >= 0 && v >= 0 && u < width && v < height;
  }
  friend bool operator==(const Image &, const Image &) = default;
};

// Depth in millimeters, 0 means no return.
using DepthImage = Image<std::uint16_t>;

struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> values; // interleaved RGB, W*H*3

  RgbImage() = default;
  RgbImage(int w, int h)
      : width(w), height(h), values(static_cast<std::size_t>(w) * h * 3, 0) {}

  Rgb at(int u, int v) const {
    const auto i = (static_cast<std::size_t>(v) * width + u) * 3;
    return {values[i], values[i + 1], values[i + 2]};
  }
  void set(int u, int v, Rgb c) {
    const auto i = (static_cast<std::size_t>(v) * width + u) * 3;
    values[i] = c.r;
    values[i + 1] = c.g;
    values[i + 2] = c.b;
  }
  friend bool operator==(const RgbImage &, const RgbImage &) = default;
};

struct CameraIntrinsics {
  double fx = 615.0;
  double fy = 615.0;
  double cx = 320.0;
  double cy = 240.0;

  // Unit-depth ray through pixel (u, v).
  Vec3 ray(double u, double v) const {
    return {(u - cx) / fx, (v - cy) / fy, 1.0};
  }
  Eigen::Vector2d project(const Vec3 &p) const {
    return {fx * p.x() / p.z() + cx, fy * p.y() / p.z() + cy};
  }
};

// Throws ParameterError unless fx, fy > 0 and the principal point is inside
// a width x height image.
void validate(const CameraIntrinsics &k, int width, int height);

struct InstanceMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;
  int instance_id = 0;
  Ripeness ripeness = Ripeness::ripe;

  InstanceMask() = default;
  InstanceMask(int w, int h, int id, Ripeness r)
      : width(w), height(h), bits(static_cast<std::size_t>(w) * h, 0),
        instance_id(id), ripeness(r) {}

  bool test(int u, int v) const {
    return bits[static_cast<std::size_t>(v) * width + u] != 0;
  }
  void set(int u, int v, bool on = true) {
    bits[static_cast<std::size_t>(v) * width + u] = on ? 1 : 0;
  }
  std::size_t count() const;
};

} // namespace berrypick
