#include "angkit/encoders.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "angkit/errors.hpp"
#include "angkit/ini_config.hpp"

namespace angkit {

double static_angle(const Vec3& u, const Vec3& w1, const Vec3& w2) {
  const Vec3 a = w1 - u;
  const Vec3 b = w2 - u;
  const double na = std::sqrt(dot(a, a));
  const double nb = std::sqrt(dot(b, b));
  if (na < kAngleNormEpsilon || nb < kAngleNormEpsilon) return 0.0;
  const double cosine = std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
  return 1.0 - cosine;
}

FeatureTensor joint_features(const Clip& clip) { return clip_to_tensor(clip); }

FeatureTensor bone_features(const Clip& clip, const SkeletonTopology& topo) {
  if (clip.joints() != static_cast<std::size_t>(topo.num_joints))
    throw ShapeError("clip has " + std::to_string(clip.joints()) + " joints, schema '" + topo.name + "' has " +
                     std::to_string(topo.num_joints));
  FeatureTensor out({3, clip.frames(), clip.joints(), clip.persons()}, {"bone_x", "bone_y", "bone_z"});
  for (std::size_t t = 0; t < clip.frames(); ++t)
    for (std::size_t v = 0; v < clip.joints(); ++v) {
      const auto& parent = topo.bone_parent[v];
      if (!parent) continue;
      for (std::size_t m = 0; m < clip.persons(); ++m) {
        const Vec3 b = clip.at(t, static_cast<std::size_t>(*parent), m) - clip.at(t, v, m);
        out.at(0, t, v, m) = b.x;
        out.at(1, t, v, m) = b.y;
        out.at(2, t, v, m) = b.z;
      }
    }
  return out;
}

std::optional<AngleTriple> resolve_angle(const SkeletonTopology& topo, const AngleDef& def, JointIndex target) {
  if (def.is_zero_joint(target)) return std::nullopt;
  AngleTriple tri;
  tri.vertex = def.vertex_rule == VertexRule::fixed_joint ? def.fixed_vertex : target;
  switch (def.endpoint_rule) {
    case EndpointRule::adjacent_pair_table: {
      const auto& lp = topo.local_pairs[target];
      if (!lp) return std::nullopt;
      tri.first = lp->first;
      tri.second = lp->second;
      break;
    }
    case EndpointRule::center_pair:
      if (def.kind == AngleKind::center_fixed) {
        // Vertex at the fixed center joint, measured from the neck to the target.
        tri.first = topo.neck;
        tri.second = target;
      } else {
        tri.first = topo.neck;
        tri.second = topo.pelvis;
      }
      break;
    case EndpointRule::fixed_pair:
      tri.first = def.fixed_endpoints.first;
      tri.second = def.fixed_endpoints.second;
      break;
  }
  return tri;
}

AngleChannelValues angle_channel(const Clip& clip, const SkeletonTopology& topo, const AngleDef& def) {
  const auto frames = clip.frames();
  const auto joints = clip.joints();
  const auto persons = clip.persons();
  AngleChannelValues out{std::vector<double>(frames * joints * persons, 0.0), def};
  for (std::size_t v = 0; v < joints; ++v) {
    const auto tri = resolve_angle(topo, def, static_cast<JointIndex>(v));
    if (!tri) continue;
    const auto vx = static_cast<std::size_t>(tri->vertex);
    const auto a = static_cast<std::size_t>(tri->first);
    const auto b = static_cast<std::size_t>(tri->second);
    for (std::size_t t = 0; t < frames; ++t)
      for (std::size_t m = 0; m < persons; ++m)
        out.values[(t * joints + v) * persons + m] = static_angle(clip.at(t, vx, m), clip.at(t, a, m), clip.at(t, b, m));
  }
  return out;
}

FeatureTensor angular_features(const Clip& clip, const SkeletonTopology& topo) {
  if (clip.joints() != static_cast<std::size_t>(topo.num_joints))
    throw ShapeError("clip has " + std::to_string(clip.joints()) + " joints, schema '" + topo.name + "' has " +
                     std::to_string(topo.num_joints));
  std::vector<std::string> names;
  for (const auto& def : topo.angle_table) names.push_back(def.name);
  FeatureTensor out({topo.angle_table.size(), clip.frames(), clip.joints(), clip.persons()}, std::move(names));
  for (std::size_t c = 0; c < topo.angle_table.size(); ++c) {
    const auto ch = angle_channel(clip, topo, topo.angle_table[c]);
    std::copy(ch.values.begin(), ch.values.end(), out.channel(c).begin());
  }
  return out;
}

FeatureTensor temporal_difference(const FeatureTensor& x) {
  const auto& s = x.shape();
  std::vector<std::string> names;
  for (const auto& n : x.channel_names()) names.push_back("vel_" + n);
  FeatureTensor out(s, std::move(names));
  const auto frame = s.joints * s.persons;
  for (std::size_t c = 0; c < s.channels; ++c) {
    const auto src = x.channel(c);
    auto dst = out.channel(c);
    for (std::size_t t = 1; t < s.frames; ++t)
      for (std::size_t i = 0; i < frame; ++i) dst[t * frame + i] = src[t * frame + i] - src[(t - 1) * frame + i];
  }
  return out;
}

FeatureTensor fuse_concat(std::span<const FeatureTensor> parts) {
  if (parts.empty()) throw ShapeError("fuse_concat needs at least one tensor");
  const auto& first = parts.front().shape();
  Shape4 s = first;
  s.channels = 0;
  std::vector<std::string> names;
  for (const auto& p : parts) {
    const auto& ps = p.shape();
    if (ps.frames != first.frames || ps.joints != first.joints || ps.persons != first.persons)
      throw ShapeError("fuse_concat: (T,V,M) mismatch (" + std::to_string(ps.frames) + "," +
                       std::to_string(ps.joints) + "," + std::to_string(ps.persons) + ") vs (" +
                       std::to_string(first.frames) + "," + std::to_string(first.joints) + "," +
                       std::to_string(first.persons) + ")");
    s.channels += ps.channels;
    names.insert(names.end(), p.channel_names().begin(), p.channel_names().end());
  }
  std::vector<double> data;
  data.reserve(s.size());
  for (const auto& p : parts) data.insert(data.end(), p.data().begin(), p.data().end());
  return FeatureTensor(s, std::move(names), std::move(data));
}

const char* to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::joint: return "joint";
    case FeatureKind::bone: return "bone";
    case FeatureKind::angular: return "angular";
  }
  return "?";
}

const char* to_string(Stream stream) { return stream == Stream::velocity ? "velocity" : "static"; }

std::vector<FeatureKind> parse_feature_list(const std::string& list) {
  std::vector<FeatureKind> out;
  for (const auto& raw : split_on(list, ',')) {
    const auto words = split_words(raw);
    if (words.size() != 1) throw ConfigError("malformed feature list '" + list + "'");
    const auto& w = words[0];
    if (w == "joint") {
      out.push_back(FeatureKind::joint);
    } else if (w == "bone") {
      out.push_back(FeatureKind::bone);
    } else if (w == "angular") {
      out.push_back(FeatureKind::angular);
    } else {
      throw ConfigError("unknown feature '" + w + "' (expected joint, bone or angular)");
    }
  }
  return out;
}

std::string format_feature_list(std::span<const FeatureKind> kinds) {
  std::string out;
  for (auto k : kinds) out += (out.empty() ? "" : ",") + std::string(to_string(k));
  return out;
}

Stream parse_stream(const std::string& s) {
  if (s == "static") return Stream::static_stream;
  if (s == "velocity") return Stream::velocity;
  throw ConfigError("unknown stream '" + s + "' (expected static or velocity)");
}

FeatureTensor encode(const Clip& clip, const SkeletonTopology& topo, std::span<const FeatureKind> kinds,
                     Stream stream) {
  if (kinds.empty()) throw ConfigError("no features selected");
  std::vector<FeatureTensor> parts;
  for (auto k : kinds) {
    switch (k) {
      case FeatureKind::joint: parts.push_back(joint_features(clip)); break;
      case FeatureKind::bone: parts.push_back(bone_features(clip, topo)); break;
      case FeatureKind::angular: parts.push_back(angular_features(clip, topo)); break;
    }
  }
  auto fused = parts.size() == 1 ? std::move(parts.front()) : fuse_concat(parts);
  return stream == Stream::velocity ? temporal_difference(fused) : fused;
}

std::size_t encoded_channels(const SkeletonTopology& topo, std::span<const FeatureKind> kinds) {
  std::size_t c = 0;
  for (auto k : kinds) c += k == FeatureKind::angular ? topo.angle_table.size() : 3;
  return c;
}

std::vector<FeatureTensor> encode_many(std::span<const Clip> clips, const SkeletonTopology& topo,
                                       std::span<const FeatureKind> kinds, Stream stream, unsigned threads) {
  std::vector<FeatureTensor> out(clips.size());
  const auto workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(clips.size())));
  if (workers <= 1) {
    for (std::size_t i = 0; i < clips.size(); ++i) out[i] = encode(clips[i], topo, kinds, stream);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (auto i = next++; i < clips.size(); i = next++) out[i] = encode(clips[i], topo, kinds, stream);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

unsigned encoder_threads() {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("ANGKIT_THREADS")) {
    try {
      const int n = parse_int(env, "ANGKIT_THREADS");
      if (n >= 1) return static_cast<unsigned>(n);
    } catch (const ConfigError&) {
    }
  }
  return hw;
}

}  // namespace angkit
