#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace angkit {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Vec3&, const Vec3&) = default;
};

inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a.x, s * a.y, s * a.z}; }
inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

/// Dimensions of a rank-4 feature tensor: channels, frames, joints, persons.
struct Shape4 {
  std::size_t channels = 1;
  std::size_t frames = 1;
  std::size_t joints = 1;
  std::size_t persons = 1;

  std::size_t size() const noexcept { return channels * frames * joints * persons; }
  std::size_t channel_stride() const noexcept { return frames * joints * persons; }

  friend bool operator==(const Shape4&, const Shape4&) = default;
};

/// Row-major C-outermost offset ((c*T + t)*V + v)*M + m. Throws ShapeError on
/// any out-of-range index.
std::size_t flatten_index(const Shape4& shape, std::size_t c, std::size_t t, std::size_t v,
                          std::size_t m);

/// One action instance: T frames x V joints x M persons of 3D coordinates (meters).
class Clip {
 public:
  Clip() = default;
  Clip(std::size_t frames, std::size_t joints, std::size_t persons);

  std::size_t frames() const noexcept { return frames_; }
  std::size_t joints() const noexcept { return joints_; }
  std::size_t persons() const noexcept { return persons_; }

  Vec3& at(std::size_t t, std::size_t v, std::size_t m) {
    return coords_[(t * joints_ + v) * persons_ + m];
  }
  const Vec3& at(std::size_t t, std::size_t v, std::size_t m) const {
    return coords_[(t * joints_ + v) * persons_ + m];
  }

  std::span<Vec3> coords() noexcept { return coords_; }
  std::span<const Vec3> coords() const noexcept { return coords_; }

  std::size_t valid_frames = 1;
  int label = -1;  // -1 when unlabeled

  friend bool operator==(const Clip&, const Clip&) = default;

 private:
  std::size_t frames_ = 0;
  std::size_t joints_ = 0;
  std::size_t persons_ = 0;
  std::vector<Vec3> coords_;
};

/// Dense C x T x V x M real array plus one name per channel.
class FeatureTensor {
 public:
  FeatureTensor() = default;
  FeatureTensor(Shape4 shape, std::vector<std::string> channel_names);
  FeatureTensor(Shape4 shape, std::vector<std::string> channel_names, std::vector<double> data);

  const Shape4& shape() const noexcept { return shape_; }
  const std::vector<std::string>& channel_names() const noexcept { return names_; }

  double& at(std::size_t c, std::size_t t, std::size_t v, std::size_t m) {
    return data_[((c * shape_.frames + t) * shape_.joints + v) * shape_.persons + m];
  }
  double at(std::size_t c, std::size_t t, std::size_t v, std::size_t m) const {
    return data_[((c * shape_.frames + t) * shape_.joints + v) * shape_.persons + m];
  }

  std::span<double> channel(std::size_t c);
  std::span<const double> channel(std::size_t c) const;

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  friend bool operator==(const FeatureTensor&, const FeatureTensor&) = default;

 private:
  Shape4 shape_;
  std::vector<std::string> names_;
  std::vector<double> data_;
};

/// Copies channels [offset, offset + count).
FeatureTensor slice_channels(const FeatureTensor& t, std::size_t offset, std::size_t count);

/// Clip coordinates as a 3-channel tensor (jnt_x, jnt_y, jnt_z) and back.
FeatureTensor clip_to_tensor(const Clip& clip);
Clip clip_from_tensor(const FeatureTensor& t, std::size_t valid_frames, int label);

}  // namespace angkit
