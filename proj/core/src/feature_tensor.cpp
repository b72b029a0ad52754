#include "angkit/feature_tensor.hpp"

#include <algorithm>

#include "angkit/errors.hpp"

namespace angkit {

std::size_t flatten_index(const Shape4& s, std::size_t c, std::size_t t, std::size_t v, std::size_t m) {
  if (c >= s.channels || t >= s.frames || v >= s.joints || m >= s.persons) {
    throw ShapeError("index (" + std::to_string(c) + "," + std::to_string(t) + "," + std::to_string(v) +
                     "," + std::to_string(m) + ") out of bounds for shape (" + std::to_string(s.channels) +
                     "," + std::to_string(s.frames) + "," + std::to_string(s.joints) + "," +
                     std::to_string(s.persons) + ")");
  }
  return ((c * s.frames + t) * s.joints + v) * s.persons + m;
}

Clip::Clip(std::size_t frames, std::size_t joints, std::size_t persons)
    : frames_(frames), joints_(joints), persons_(persons), coords_(frames * joints * persons) {
  valid_frames = std::max<std::size_t>(1, frames);
}

FeatureTensor::FeatureTensor(Shape4 shape, std::vector<std::string> channel_names)
    : FeatureTensor(shape, std::move(channel_names), std::vector<double>(shape.size(), 0.0)) {}

FeatureTensor::FeatureTensor(Shape4 shape, std::vector<std::string> channel_names, std::vector<double> data)
    : shape_(shape), names_(std::move(channel_names)), data_(std::move(data)) {
  if (names_.size() != shape_.channels)
    throw ShapeError("tensor has " + std::to_string(shape_.channels) + " channels but " +
                     std::to_string(names_.size()) + " channel names");
  if (data_.size() != shape_.size())
    throw ShapeError("tensor data length " + std::to_string(data_.size()) + " does not match shape size " +
                     std::to_string(shape_.size()));
}

std::span<double> FeatureTensor::channel(std::size_t c) {
  const auto n = shape_.channel_stride();
  return std::span<double>(data_).subspan(c * n, n);
}

std::span<const double> FeatureTensor::channel(std::size_t c) const {
  const auto n = shape_.channel_stride();
  return std::span<const double>(data_).subspan(c * n, n);
}

FeatureTensor slice_channels(const FeatureTensor& t, std::size_t offset, std::size_t count) {
  if (offset + count > t.shape().channels || count == 0)
    throw ShapeError("channel slice [" + std::to_string(offset) + ", " + std::to_string(offset + count) +
                     ") out of range for " + std::to_string(t.shape().channels) + " channels");
  Shape4 s = t.shape();
  s.channels = count;
  std::vector<std::string> names(t.channel_names().begin() + offset,
                                 t.channel_names().begin() + offset + count);
  const auto stride = s.channel_stride();
  const auto src = t.data().subspan(offset * stride, count * stride);
  return FeatureTensor(s, std::move(names), std::vector<double>(src.begin(), src.end()));
}

FeatureTensor clip_to_tensor(const Clip& clip) {
  FeatureTensor out({3, clip.frames(), clip.joints(), clip.persons()}, {"jnt_x", "jnt_y", "jnt_z"});
  for (std::size_t t = 0; t < clip.frames(); ++t)
    for (std::size_t v = 0; v < clip.joints(); ++v)
      for (std::size_t m = 0; m < clip.persons(); ++m) {
        const auto& p = clip.at(t, v, m);
        out.at(0, t, v, m) = p.x;
        out.at(1, t, v, m) = p.y;
        out.at(2, t, v, m) = p.z;
      }
  return out;
}

Clip clip_from_tensor(const FeatureTensor& t, std::size_t valid_frames, int label) {
  const auto& s = t.shape();
  if (s.channels != 3) throw ShapeError("coordinate tensor needs 3 channels, got " + std::to_string(s.channels));
  if (valid_frames < 1 || valid_frames > s.frames)
    throw ShapeError("valid_frames " + std::to_string(valid_frames) + " outside [1, " + std::to_string(s.frames) + "]");
  Clip clip(s.frames, s.joints, s.persons);
  for (std::size_t f = 0; f < s.frames; ++f)
    for (std::size_t v = 0; v < s.joints; ++v)
      for (std::size_t m = 0; m < s.persons; ++m)
        clip.at(f, v, m) = {t.at(0, f, v, m), t.at(1, f, v, m), t.at(2, f, v, m)};
  clip.valid_frames = valid_frames;
  clip.label = label;
  return clip;
}

}  // namespace angkit
