#include <sstream>

#include "angkit/errors.hpp"
#include "angkit/ini_config.hpp"
#include "angkit/topology.hpp"

namespace angkit {

namespace {

const std::string kAnglePrefix = "angle ";

JointPair parse_pair(const std::string& tok, char sep, const std::string& what) {
  const auto parts = split_on(tok, sep);
  if (parts.size() != 2) throw ConfigError("invalid " + what + ": '" + tok + "'");
  return {parse_int(parts[0], what), parse_int(parts[1], what)};
}

std::string pair_str(const JointPair& p, char sep) {
  return std::to_string(p.first) + sep + std::to_string(p.second);
}

const std::string& require(const IniSection& s, const std::string& key) {
  const auto* v = s.find(key);
  if (!v) throw ConfigError("schema section [" + s.name + "] is missing '" + key + "'");
  return *v;
}

std::vector<JointIndex> parse_index_list(const std::string& s, const std::string& what) {
  std::vector<JointIndex> out;
  for (const auto& w : split_words(s)) out.push_back(parse_int(w, what));
  return out;
}

AngleDef parse_angle(const SkeletonTopology& topo, const IniSection& s) {
  AngleDef d;
  d.name = s.name.substr(kAnglePrefix.size());
  const auto kind = angle_kind_from_string(require(s, "kind"));
  if (!kind) throw ConfigError("angle '" + d.name + "' has unknown kind '" + require(s, "kind") + "'");
  d.kind = *kind;

  // Defaults implied by the kind; explicit keys override.
  d.vertex_rule = VertexRule::target_joint;
  if (d.kind == AngleKind::center_fixed) {
    d.vertex_rule = VertexRule::fixed_joint;
    d.fixed_vertex = topo.pelvis;
  }
  switch (d.kind) {
    case AngleKind::local: d.endpoint_rule = EndpointRule::adjacent_pair_table; break;
    case AngleKind::center_unfixed:
    case AngleKind::center_fixed: d.endpoint_rule = EndpointRule::center_pair; break;
    default: d.endpoint_rule = EndpointRule::fixed_pair; break;
  }

  if (const auto* v = s.find("vertex")) {
    if (*v == "target") {
      d.vertex_rule = VertexRule::target_joint;
      d.fixed_vertex = -1;
    } else {
      d.vertex_rule = VertexRule::fixed_joint;
      d.fixed_vertex = parse_int(*v, "vertex");
    }
  }
  if (const auto* e = s.find("endpoints")) {
    if (*e == "adjacent") {
      d.endpoint_rule = EndpointRule::adjacent_pair_table;
    } else if (*e == "center") {
      d.endpoint_rule = EndpointRule::center_pair;
    } else {
      d.endpoint_rule = EndpointRule::fixed_pair;
      d.fixed_endpoints = parse_pair(*e, ',', "endpoints");
    }
  } else if (d.endpoint_rule == EndpointRule::fixed_pair) {
    throw ConfigError("angle '" + d.name + "' of kind " + to_string(d.kind) + " needs 'endpoints'");
  }
  if (const auto* z = s.find("zero_joints")) d.zero_joints = parse_index_list(*z, "zero_joints");
  return d;
}

}  // namespace

SkeletonTopology parse_schema(const std::string& text) {
  const auto doc = IniDocument::parse(text);
  const auto* sk = doc.find("skeleton");
  if (!sk) throw ConfigError("schema is missing the [skeleton] section");

  SkeletonTopology t;
  t.name = sk->find("name") ? *sk->find("name") : std::string("unnamed");
  t.num_joints = parse_int(require(*sk, "num_joints"), "num_joints");
  if (t.num_joints < 1 || t.num_joints > 4096) throw ConfigError("num_joints out of range");
  if (const auto* n = sk->find("joint_names")) t.joint_names = split_words(*n);

  for (const auto& tok : split_words(require(*sk, "edges"))) t.edges.push_back(parse_pair(tok, '-', "edge"));

  const auto center = parse_index_list(require(*sk, "center_pair"), "center_pair");
  if (center.size() != 2) throw ConfigError("center_pair needs exactly two joints (neck pelvis)");
  t.neck = center[0];
  t.pelvis = center[1];

  for (const auto& tok : split_words(require(*sk, "bone_parent"))) {
    if (tok == "-") {
      t.bone_parent.emplace_back(std::nullopt);
    } else {
      t.bone_parent.emplace_back(parse_int(tok, "bone_parent"));
    }
  }
  for (const auto& tok : split_words(require(*sk, "local_pairs"))) {
    if (tok == "-") {
      t.local_pairs.emplace_back(std::nullopt);
    } else {
      t.local_pairs.emplace_back(parse_pair(tok, ',', "local pair"));
    }
  }

  const auto limbs = split_words(require(*sk, "endpoint_pairs"));
  if (limbs.size() != 4) throw ConfigError("endpoint_pairs needs four pairs: hands elbows knees feet");
  t.endpoint_pairs = {parse_pair(limbs[0], ',', "endpoint pair"), parse_pair(limbs[1], ',', "endpoint pair"),
                      parse_pair(limbs[2], ',', "endpoint pair"), parse_pair(limbs[3], ',', "endpoint pair")};
  if (const auto* f = sk->find("finger_pairs")) {
    const auto fingers = split_words(*f);
    if (fingers.size() != 2) throw ConfigError("finger_pairs needs two pairs: left right");
    t.finger_pairs = FingerPairs{parse_pair(fingers[0], ',', "finger pair"), parse_pair(fingers[1], ',', "finger pair")};
  }

  // Angle sections are optional; without them the standard table is derived.
  bool any_angles = false;
  for (const auto& s : doc.sections) {
    if (s.name.rfind(kAnglePrefix, 0) == 0) {
      any_angles = true;
      t.angle_table.push_back(parse_angle(t, s));
    }
  }
  if (!any_angles && t.local_pairs.size() == static_cast<std::size_t>(t.num_joints))
    t.angle_table = standard_angle_table(t);

  validate(t);
  return t;
}

SkeletonTopology load_schema(const std::string& path) { return parse_schema(read_text_file(path)); }

std::string format_schema(const SkeletonTopology& t) {
  IniDocument doc;
  auto& sk = doc.section("skeleton");
  sk.set("name", t.name);
  sk.set("num_joints", std::to_string(t.num_joints));
  if (!t.joint_names.empty()) {
    std::string names;
    for (const auto& n : t.joint_names) names += (names.empty() ? "" : " ") + n;
    sk.set("joint_names", names);
  }
  std::string edges;
  for (const auto& e : t.edges) edges += (edges.empty() ? "" : " ") + pair_str(e, '-');
  sk.set("edges", edges);
  sk.set("center_pair", std::to_string(t.neck) + " " + std::to_string(t.pelvis));
  std::string parents;
  for (const auto& p : t.bone_parent) parents += (parents.empty() ? "" : " ") + (p ? std::to_string(*p) : "-");
  sk.set("bone_parent", parents);
  std::string locals;
  for (const auto& p : t.local_pairs) locals += (locals.empty() ? "" : " ") + (p ? pair_str(*p, ',') : "-");
  sk.set("local_pairs", locals);
  const auto& ep = t.endpoint_pairs;
  sk.set("endpoint_pairs", pair_str(ep.hands, ',') + " " + pair_str(ep.elbows, ',') + " " +
                               pair_str(ep.knees, ',') + " " + pair_str(ep.feet, ','));
  if (t.finger_pairs)
    sk.set("finger_pairs", pair_str(t.finger_pairs->left, ',') + " " + pair_str(t.finger_pairs->right, ','));

  for (const auto& d : t.angle_table) {
    auto& s = doc.section(kAnglePrefix + d.name);
    s.set("kind", to_string(d.kind));
    s.set("vertex", d.vertex_rule == VertexRule::target_joint ? "target" : std::to_string(d.fixed_vertex));
    switch (d.endpoint_rule) {
      case EndpointRule::adjacent_pair_table: s.set("endpoints", "adjacent"); break;
      case EndpointRule::center_pair: s.set("endpoints", "center"); break;
      case EndpointRule::fixed_pair: s.set("endpoints", pair_str(d.fixed_endpoints, ',')); break;
    }
    std::string zeros;
    for (auto z : d.zero_joints) zeros += (zeros.empty() ? "" : " ") + std::to_string(z);
    s.set("zero_joints", zeros);
  }
  return "; angkit skeleton schema, see docs/schema_format.md\n" + doc.format();
}

const std::string& kinect25_schema_text() {
  static const std::string text = format_schema(kinect25());
  return text;
}

}  // namespace angkit
