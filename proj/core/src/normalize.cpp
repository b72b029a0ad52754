#include <algorithm>

#include "angkit/errors.hpp"
#include "angkit/ntu_io.hpp"

namespace angkit {

namespace {

std::vector<const RawBody*> ranked_bodies(const RawFrame& frame, std::size_t max_persons) {
  std::vector<const RawBody*> bodies;
  for (const auto& b : frame.bodies) bodies.push_back(&b);
  std::stable_sort(bodies.begin(), bodies.end(),
                   [](const RawBody* a, const RawBody* b) { return a->tracking_id < b->tracking_id; });
  if (bodies.size() > max_persons) bodies.resize(max_persons);
  return bodies;
}

}  // namespace

Clip normalize_clip(const RawSequence& raw, const SkeletonTopology& topo, const NormalizeOptions& opts) {
  if (raw.frames.empty()) throw FormatError("cannot normalize a sequence with zero frames");
  if (opts.target_frames < 1) throw ConfigError("target_frames must be at least 1");
  if (opts.max_persons < 1) throw ConfigError("max_persons must be at least 1");

  const auto joints = static_cast<std::size_t>(topo.num_joints);
  const auto valid = std::min(raw.frames.size(), opts.target_frames);
  for (const auto& frame : raw.frames)
    for (const auto& body : frame.bodies)
      if (body.joints.size() != joints)
        throw FormatError("body has " + std::to_string(body.joints.size()) + " joints, schema expects " +
                          std::to_string(joints));

  // Origin: person 0's pelvis in the first frame that has anyone in it.
  Vec3 origin;
  for (std::size_t t = 0; t < valid; ++t) {
    const auto bodies = ranked_bodies(raw.frames[t], opts.max_persons);
    if (!bodies.empty()) {
      origin = bodies.front()->joints[static_cast<std::size_t>(topo.pelvis)];
      break;
    }
  }

  Clip clip(opts.target_frames, joints, opts.max_persons);
  clip.valid_frames = valid;
  for (std::size_t t = 0; t < valid; ++t) {
    const auto bodies = ranked_bodies(raw.frames[t], opts.max_persons);
    for (std::size_t m = 0; m < bodies.size(); ++m) {
      for (std::size_t v = 0; v < joints; ++v) clip.at(t, v, m) = bodies[m]->joints[v] - origin;
    }
  }
  for (std::size_t t = valid; t < opts.target_frames; ++t) {
    const auto src = t % valid;
    for (std::size_t v = 0; v < joints; ++v)
      for (std::size_t m = 0; m < opts.max_persons; ++m) clip.at(t, v, m) = clip.at(src, v, m);
  }
  return clip;
}

RawSequence clip_to_raw(const Clip& clip) {
  RawSequence raw;
  for (std::size_t t = 0; t < clip.valid_frames; ++t) {
    RawFrame frame;
    for (std::size_t m = 0; m < clip.persons(); ++m) {
      bool present = false;
      for (std::size_t v = 0; v < clip.joints() && !present; ++v) present = !(clip.at(t, v, m) == Vec3{});
      if (!present) continue;
      RawBody body;
      body.tracking_id = m;
      for (std::size_t v = 0; v < clip.joints(); ++v) body.joints.push_back(clip.at(t, v, m));
      frame.bodies.push_back(std::move(body));
    }
    raw.frames.push_back(std::move(frame));
  }
  return raw;
}

}  // namespace angkit
