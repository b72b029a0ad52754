#include "angkit/topology.hpp"

#include <algorithm>
#include <queue>

#include "angkit/errors.hpp"

namespace angkit {

bool AngleDef::is_zero_joint(JointIndex j) const {
  return std::find(zero_joints.begin(), zero_joints.end(), j) != zero_joints.end();
}

const char* to_string(AngleKind kind) {
  switch (kind) {
    case AngleKind::local: return "local";
    case AngleKind::center_unfixed: return "center_unfixed";
    case AngleKind::center_fixed: return "center_fixed";
    case AngleKind::pair: return "pair";
    case AngleKind::finger: return "finger";
  }
  return "?";
}

std::optional<AngleKind> angle_kind_from_string(const std::string& s) {
  for (auto k : {AngleKind::local, AngleKind::center_unfixed, AngleKind::center_fixed,
                 AngleKind::pair, AngleKind::finger}) {
    if (s == to_string(k)) return k;
  }
  return std::nullopt;
}

JointIndex SkeletonTopology::root() const {
  for (int j = 0; j < num_joints; ++j) {
    if (!bone_parent[j]) return j;
  }
  throw ConfigError("topology has no root joint");
}

std::vector<std::vector<JointIndex>> SkeletonTopology::neighbours() const {
  std::vector<std::vector<JointIndex>> adj(num_joints);
  for (const auto& e : edges) {
    adj[e.first].push_back(e.second);
    adj[e.second].push_back(e.first);
  }
  return adj;
}

namespace {

void fail(const SkeletonTopology& topo, const std::string& what) {
  throw ConfigError("schema '" + topo.name + "': " + what);
}

bool in_range(const SkeletonTopology& topo, JointIndex j) { return j >= 0 && j < topo.num_joints; }

void check_pair(const SkeletonTopology& topo, const JointPair& p, const std::string& what) {
  if (!in_range(topo, p.first) || !in_range(topo, p.second)) fail(topo, what + " index out of range");
  if (p.first == p.second) fail(topo, what + " uses the same joint twice");
}

bool is_neighbour(const std::vector<std::vector<JointIndex>>& adj, JointIndex a, JointIndex b) {
  return std::find(adj[a].begin(), adj[a].end(), b) != adj[a].end();
}

// Joints for which an angle definition has fewer than two usable endpoints.
std::vector<JointIndex> required_zero_joints(const SkeletonTopology& topo, const AngleDef& def) {
  std::vector<JointIndex> out;
  switch (def.kind) {
    case AngleKind::local:
      for (int j = 0; j < topo.num_joints; ++j) {
        if (!topo.local_pairs[j]) out.push_back(j);
      }
      break;
    case AngleKind::center_unfixed:
    case AngleKind::center_fixed:
      out = {topo.neck, topo.pelvis};
      break;
    case AngleKind::pair:
    case AngleKind::finger:
      out = {def.fixed_endpoints.first, def.fixed_endpoints.second};
      break;
  }
  return out;
}

}  // namespace

void validate(const SkeletonTopology& topo) {
  const int v = topo.num_joints;
  if (v < 1) fail(topo, "num_joints must be at least 1");
  if (!topo.joint_names.empty() && static_cast<int>(topo.joint_names.size()) != v)
    fail(topo, "joint_names length differs from num_joints");
  if (static_cast<int>(topo.edges.size()) != v - 1)
    fail(topo, "a tree over " + std::to_string(v) + " joints needs " + std::to_string(v - 1) +
                   " edges, got " + std::to_string(topo.edges.size()));
  for (const auto& e : topo.edges) check_pair(topo, e, "edge");

  const auto adj = topo.neighbours();
  std::vector<char> seen(v, 0);
  std::queue<JointIndex> frontier;
  frontier.push(0);
  seen[0] = 1;
  int reached = 1;
  while (!frontier.empty()) {
    const auto j = frontier.front();
    frontier.pop();
    for (auto n : adj[j]) {
      if (!seen[n]) {
        seen[n] = 1;
        ++reached;
        frontier.push(n);
      }
    }
  }
  if (reached != v) fail(topo, "edges do not connect every joint");

  if (static_cast<int>(topo.bone_parent.size()) != v) fail(topo, "bone_parent length differs from num_joints");
  int roots = 0;
  for (int j = 0; j < v; ++j) {
    const auto& p = topo.bone_parent[j];
    if (!p) {
      ++roots;
      continue;
    }
    if (!in_range(topo, *p)) fail(topo, "bone_parent index out of range");
    if (!is_neighbour(adj, j, *p))
      fail(topo, "bone_parent of joint " + std::to_string(j) + " is not one of its neighbours");
  }
  if (roots != 1) fail(topo, "bone_parent must have exactly one root, found " + std::to_string(roots));
  for (int j = 0; j < v; ++j) {
    int steps = 0;
    for (auto cur = topo.bone_parent[j]; cur; cur = topo.bone_parent[*cur]) {
      if (++steps > v) fail(topo, "bone_parent contains a cycle");
    }
  }

  if (!in_range(topo, topo.neck) || !in_range(topo, topo.pelvis) || topo.neck == topo.pelvis)
    fail(topo, "center_pair must name two distinct joints");

  if (static_cast<int>(topo.local_pairs.size()) != v) fail(topo, "local_pairs length differs from num_joints");
  for (int j = 0; j < v; ++j) {
    const auto& lp = topo.local_pairs[j];
    if (!lp) continue;
    check_pair(topo, *lp, "local pair");
    if (!is_neighbour(adj, j, lp->first) || !is_neighbour(adj, j, lp->second))
      fail(topo, "local pair of joint " + std::to_string(j) + " must use tree neighbours");
  }

  const auto& ep = topo.endpoint_pairs;
  for (const auto& p : {ep.hands, ep.elbows, ep.knees, ep.feet}) check_pair(topo, p, "endpoint pair");
  if (topo.finger_pairs) {
    check_pair(topo, topo.finger_pairs->left, "finger pair");
    check_pair(topo, topo.finger_pairs->right, "finger pair");
  }

  const std::size_t expected = topo.finger_pairs ? 9 : 7;
  if (topo.angle_table.size() != expected)
    fail(topo, "angle table needs " + std::to_string(expected) + " entries, got " +
                   std::to_string(topo.angle_table.size()));
  for (const auto& def : topo.angle_table) {
    if (def.vertex_rule == VertexRule::fixed_joint && !in_range(topo, def.fixed_vertex))
      fail(topo, "angle '" + def.name + "' has an out-of-range fixed vertex");
    if (def.endpoint_rule == EndpointRule::fixed_pair) check_pair(topo, def.fixed_endpoints, "angle '" + def.name + "' endpoints");
    for (auto z : def.zero_joints) {
      if (!in_range(topo, z)) fail(topo, "angle '" + def.name + "' zero joint out of range");
    }
    for (auto z : required_zero_joints(topo, def)) {
      if (!def.is_zero_joint(z))
        fail(topo, "angle '" + def.name + "' must list joint " + std::to_string(z) + " in zero_joints");
    }
  }
}

namespace {

AngleDef fixed_pair_angle(std::string name, AngleKind kind, JointPair endpoints) {
  AngleDef d;
  d.name = std::move(name);
  d.kind = kind;
  d.vertex_rule = VertexRule::target_joint;
  d.endpoint_rule = EndpointRule::fixed_pair;
  d.fixed_endpoints = endpoints;
  d.zero_joints = {endpoints.first, endpoints.second};
  return d;
}

}  // namespace

std::vector<AngleDef> standard_angle_table(const SkeletonTopology& topo) {
  std::vector<AngleDef> table;

  AngleDef local;
  local.name = "ang_local";
  local.kind = AngleKind::local;
  local.endpoint_rule = EndpointRule::adjacent_pair_table;
  for (int j = 0; j < topo.num_joints; ++j) {
    if (!topo.local_pairs[j]) local.zero_joints.push_back(j);
  }
  table.push_back(local);

  AngleDef unfixed;
  unfixed.name = "ang_ctr_unfixed";
  unfixed.kind = AngleKind::center_unfixed;
  unfixed.endpoint_rule = EndpointRule::center_pair;
  unfixed.zero_joints = {topo.neck, topo.pelvis};
  table.push_back(unfixed);

  AngleDef fixed = unfixed;
  fixed.name = "ang_ctr_fixed";
  fixed.kind = AngleKind::center_fixed;
  fixed.vertex_rule = VertexRule::fixed_joint;
  fixed.fixed_vertex = topo.pelvis;
  table.push_back(fixed);

  const auto& ep = topo.endpoint_pairs;
  table.push_back(fixed_pair_angle("ang_pair_hands", AngleKind::pair, ep.hands));
  table.push_back(fixed_pair_angle("ang_pair_elbows", AngleKind::pair, ep.elbows));
  table.push_back(fixed_pair_angle("ang_pair_knees", AngleKind::pair, ep.knees));
  table.push_back(fixed_pair_angle("ang_pair_feet", AngleKind::pair, ep.feet));

  if (topo.finger_pairs) {
    table.push_back(fixed_pair_angle("ang_finger_left", AngleKind::finger, topo.finger_pairs->left));
    table.push_back(fixed_pair_angle("ang_finger_right", AngleKind::finger, topo.finger_pairs->right));
  }
  return table;
}

namespace {

SkeletonTopology build_kinect25() {
  SkeletonTopology t;
  t.name = "kinect25";
  t.num_joints = 25;
  t.joint_names = {"spine_base",     "spine_mid",     "neck",          "head",
                   "shoulder_left",  "elbow_left",    "wrist_left",    "hand_left",
                   "shoulder_right", "elbow_right",   "wrist_right",   "hand_right",
                   "hip_left",       "knee_left",     "ankle_left",    "foot_left",
                   "hip_right",      "knee_right",    "ankle_right",   "foot_right",
                   "spine_shoulder", "handtip_left",  "thumb_left",    "handtip_right",
                   "thumb_right"};
  t.edges = {{0, 1},   {1, 20},  {2, 20},  {3, 2},   {4, 20},  {5, 4},   {6, 5},   {7, 6},
             {8, 20},  {9, 8},   {10, 9},  {11, 10}, {12, 0},  {13, 12}, {14, 13}, {15, 14},
             {16, 0},  {17, 16}, {18, 17}, {19, 18}, {21, 7},  {22, 7},  {23, 11}, {24, 11}};
  // The spine-shoulder junction joins the shoulders, head chain and belly, so
  // it plays the role of the neck among the center joints.
  t.neck = 20;
  t.pelvis = 0;
  const int parent[25] = {-1, 0,  20, 2,  20, 4,  5,  6,  20, 8,  9, 10, 0,
                          12, 13, 14, 0,  16, 17, 18, 1,  7,  7,  11, 11};
  t.bone_parent.resize(25);
  for (int j = 0; j < 25; ++j) {
    if (parent[j] >= 0) t.bone_parent[j] = parent[j];
  }
  // Local-angle endpoints. Joints with more than two neighbours keep the pair
  // that moves the most: hips at the pelvis, shoulders at the spine-shoulder
  // junction, wrist and hand tip at each hand.
  t.local_pairs.assign(25, std::nullopt);
  t.local_pairs[0] = JointPair{12, 16};
  t.local_pairs[1] = JointPair{0, 20};
  t.local_pairs[2] = JointPair{20, 3};
  t.local_pairs[4] = JointPair{20, 5};
  t.local_pairs[5] = JointPair{4, 6};
  t.local_pairs[6] = JointPair{5, 7};
  t.local_pairs[7] = JointPair{6, 21};
  t.local_pairs[8] = JointPair{20, 9};
  t.local_pairs[9] = JointPair{8, 10};
  t.local_pairs[10] = JointPair{9, 11};
  t.local_pairs[11] = JointPair{10, 23};
  t.local_pairs[12] = JointPair{0, 13};
  t.local_pairs[13] = JointPair{12, 14};
  t.local_pairs[14] = JointPair{13, 15};
  t.local_pairs[16] = JointPair{0, 17};
  t.local_pairs[17] = JointPair{16, 18};
  t.local_pairs[18] = JointPair{17, 19};
  t.local_pairs[20] = JointPair{4, 8};
  t.endpoint_pairs = {{7, 11}, {5, 9}, {13, 17}, {15, 19}};
  t.finger_pairs = FingerPairs{{21, 22}, {23, 24}};
  t.angle_table = standard_angle_table(t);
  validate(t);
  return t;
}

}  // namespace

const SkeletonTopology& kinect25() {
  static const SkeletonTopology topo = build_kinect25();
  return topo;
}

SkeletonTopology permute_joints(const SkeletonTopology& topo, const std::vector<JointIndex>& perm) {
  const int v = topo.num_joints;
  if (static_cast<int>(perm.size()) != v) throw ConfigError("permutation length differs from num_joints");
  std::vector<char> hit(v, 0);
  for (auto p : perm) {
    if (p < 0 || p >= v || hit[p]) throw ConfigError("not a permutation of joint indices");
    hit[p] = 1;
  }
  auto map = [&](JointIndex j) { return perm[j]; };
  auto map_pair = [&](JointPair p) { return JointPair{map(p.first), map(p.second)}; };

  SkeletonTopology out;
  out.name = topo.name;
  out.num_joints = v;
  if (!topo.joint_names.empty()) {
    out.joint_names.resize(v);
    for (int j = 0; j < v; ++j) out.joint_names[map(j)] = topo.joint_names[j];
  }
  for (const auto& e : topo.edges) out.edges.push_back(map_pair(e));
  out.neck = map(topo.neck);
  out.pelvis = map(topo.pelvis);
  out.bone_parent.assign(v, std::nullopt);
  out.local_pairs.assign(v, std::nullopt);
  for (int j = 0; j < v; ++j) {
    if (topo.bone_parent[j]) out.bone_parent[map(j)] = map(*topo.bone_parent[j]);
    if (topo.local_pairs[j]) out.local_pairs[map(j)] = map_pair(*topo.local_pairs[j]);
  }
  const auto& ep = topo.endpoint_pairs;
  out.endpoint_pairs = {map_pair(ep.hands), map_pair(ep.elbows), map_pair(ep.knees), map_pair(ep.feet)};
  if (topo.finger_pairs)
    out.finger_pairs = FingerPairs{map_pair(topo.finger_pairs->left), map_pair(topo.finger_pairs->right)};
  for (auto def : topo.angle_table) {
    if (def.vertex_rule == VertexRule::fixed_joint) def.fixed_vertex = map(def.fixed_vertex);
    if (def.endpoint_rule == EndpointRule::fixed_pair) def.fixed_endpoints = map_pair(def.fixed_endpoints);
    for (auto& z : def.zero_joints) z = map(z);
    out.angle_table.push_back(std::move(def));
  }
  validate(out);
  return out;
}

}  // namespace angkit
