#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "angkit/feature_tensor.hpp"
#include "angkit/topology.hpp"

namespace angkit {

/// Norms below this make an angle degenerate; degenerate angles encode as 0.
inline constexpr double kAngleNormEpsilon = 1e-8;

/// 1 - cos of the angle at u between u->w1 and u->w2, in [0, 2].
/// Returns 0 when either vector is shorter than kAngleNormEpsilon.
double static_angle(const Vec3& u, const Vec3& w1, const Vec3& w2);

/// First-order features: raw coordinates, channels jnt_x/y/z.
FeatureTensor joint_features(const Clip& clip);

/// Second-order features: parent(v) - v per joint, root gets zeros. Channels bone_x/y/z.
FeatureTensor bone_features(const Clip& clip, const SkeletonTopology& topo);

/// Vertex and endpoints an angle definition uses for one target joint;
/// nullopt when the target is in the definition's zero set.
struct AngleTriple {
  JointIndex vertex = 0;
  JointIndex first = 0;
  JointIndex second = 0;
};
std::optional<AngleTriple> resolve_angle(const SkeletonTopology& topo, const AngleDef& def, JointIndex target);

/// One angular channel (T x V x M, values in [0, 2]) with the definition that produced it.
struct AngleChannelValues {
  std::vector<double> values;
  AngleDef def;
};
AngleChannelValues angle_channel(const Clip& clip, const SkeletonTopology& topo, const AngleDef& def);

/// Third-order features: one channel per angle-table entry (7 or 9).
FeatureTensor angular_features(const Clip& clip, const SkeletonTopology& topo);

/// out[:, 0] = 0, out[:, t] = x[:, t] - x[:, t-1]. Channel names gain a "vel_" prefix.
FeatureTensor temporal_difference(const FeatureTensor& x);

/// Stacks channels in argument order. Throws ShapeError when (T, V, M) differ.
FeatureTensor fuse_concat(std::span<const FeatureTensor> parts);

enum class FeatureKind { joint, bone, angular };
enum class Stream { static_stream, velocity };

const char* to_string(FeatureKind kind);
const char* to_string(Stream stream);
/// Comma separated list such as "joint,angular"; throws ConfigError on unknown names.
std::vector<FeatureKind> parse_feature_list(const std::string& list);
std::string format_feature_list(std::span<const FeatureKind> kinds);
Stream parse_stream(const std::string& s);

/// Concatenates the selected feature kinds (in the given order) for one clip,
/// then applies temporal_difference for the velocity stream.
FeatureTensor encode(const Clip& clip, const SkeletonTopology& topo, std::span<const FeatureKind> kinds,
                     Stream stream);

/// Channel count encode() will produce.
std::size_t encoded_channels(const SkeletonTopology& topo, std::span<const FeatureKind> kinds);

/// encode() over many clips on up to `threads` workers; output order matches input.
std::vector<FeatureTensor> encode_many(std::span<const Clip> clips, const SkeletonTopology& topo,
                                       std::span<const FeatureKind> kinds, Stream stream, unsigned threads);

/// Worker cap from ANGKIT_THREADS (defaults to the hardware concurrency).
unsigned encoder_threads();

}  // namespace angkit
