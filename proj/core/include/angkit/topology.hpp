#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace angkit {

using JointIndex = int;

struct JointPair {
  JointIndex first = 0;
  JointIndex second = 0;

  friend bool operator==(const JointPair&, const JointPair&) = default;
};

enum class AngleKind { local, center_unfixed, center_fixed, pair, finger };

/// Which joint sits at the vertex of the measured angle.
enum class VertexRule { target_joint, fixed_joint };

/// Where the two endpoint joints come from.
enum class EndpointRule { fixed_pair, adjacent_pair_table, center_pair };

/// One angular channel of the angle table.
///
/// The value at target joint u is 1 - cos of the angle at the vertex joint
/// between the two endpoint joints. Joints listed in zero_joints always get 0.
struct AngleDef {
  std::string name;
  AngleKind kind = AngleKind::local;
  VertexRule vertex_rule = VertexRule::target_joint;
  JointIndex fixed_vertex = -1;  // used when vertex_rule == fixed_joint
  EndpointRule endpoint_rule = EndpointRule::adjacent_pair_table;
  JointPair fixed_endpoints;     // used when endpoint_rule == fixed_pair
  std::vector<JointIndex> zero_joints;

  bool is_zero_joint(JointIndex j) const;

  friend bool operator==(const AngleDef&, const AngleDef&) = default;
};

const char* to_string(AngleKind kind);
std::optional<AngleKind> angle_kind_from_string(const std::string& s);

struct LimbPairs {
  JointPair hands;
  JointPair elbows;
  JointPair knees;
  JointPair feet;

  friend bool operator==(const LimbPairs&, const LimbPairs&) = default;
};

struct FingerPairs {
  JointPair left;   // (hand tip, thumb)
  JointPair right;

  friend bool operator==(const FingerPairs&, const FingerPairs&) = default;
};

/// Skeleton schema: joints, bones, center joints and the curated angle table.
///
/// validate() (run by the schema loaders and the network) enforces:
/// the edges form a spanning tree, bone_parent has exactly one root and always
/// points along a bone, every index is in range, and the angle table has 7
/// entries without finger pairs or 9 with them.
struct SkeletonTopology {
  std::string name;
  int num_joints = 0;
  std::vector<std::string> joint_names;
  std::vector<JointPair> edges;
  JointIndex neck = 0;
  JointIndex pelvis = 0;
  std::vector<std::optional<JointIndex>> bone_parent;
  /// Per joint, the two tree neighbours used for its local angle (absent for
  /// joints with a single neighbour).
  std::vector<std::optional<JointPair>> local_pairs;
  LimbPairs endpoint_pairs;
  std::optional<FingerPairs> finger_pairs;
  std::vector<AngleDef> angle_table;

  JointPair center_pair() const { return {neck, pelvis}; }
  JointIndex root() const;
  std::vector<std::vector<JointIndex>> neighbours() const;

  friend bool operator==(const SkeletonTopology&, const SkeletonTopology&) = default;
};

/// Checks every structural invariant; throws ConfigError describing the first violation.
void validate(const SkeletonTopology& topo);

/// Builds the standard angle table (local, two center-oriented, four limb
/// pairs, and two finger angles when finger pairs exist) from the other fields.
std::vector<AngleDef> standard_angle_table(const SkeletonTopology& topo);

/// The bundled 25-joint Kinect v2 schema (same joint order as NTU RGB+D files).
const SkeletonTopology& kinect25();

/// Relabels joints: new index of old joint j is perm[j]. Used to check that
/// nothing downstream depends on joint numbering.
SkeletonTopology permute_joints(const SkeletonTopology& topo, const std::vector<JointIndex>& perm);

/// Schema text I/O. Grammar is documented in docs/schema_format.md.
SkeletonTopology parse_schema(const std::string& text);
SkeletonTopology load_schema(const std::string& path);
std::string format_schema(const SkeletonTopology& topo);

/// Text of the bundled kinect25 schema file.
const std::string& kinect25_schema_text();

}  // namespace angkit
