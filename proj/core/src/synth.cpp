#include "angkit/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "angkit/errors.hpp"

namespace angkit {

namespace {

using Mat3 = std::array<std::array<double, 3>, 3>;

Mat3 mul(const Mat3& a, const Mat3& b) {
  Mat3 r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) r[i][j] += a[i][k] * b[k][j];
  return r;
}

Vec3 apply(const Mat3& m, const Vec3& v) {
  return {m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z, m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
          m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z};
}

Mat3 rotation(int axis, double a) {
  const double c = std::cos(a), s = std::sin(a);
  switch (axis) {
    case 0: return {{{1, 0, 0}, {0, c, -s}, {0, s, c}}};
    case 1: return {{{c, 0, s}, {0, 1, 0}, {-s, 0, c}}};
    default: return {{{c, -s, 0}, {s, c, 0}, {0, 0, 1}}};
  }
}

// Joints in an order where every parent precedes its children.
std::vector<JointIndex> parent_first_order(const SkeletonTopology& topo) {
  std::vector<JointIndex> order{topo.root()};
  const auto adj = topo.neighbours();
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (auto n : adj[static_cast<std::size_t>(order[i])]) {
      const auto& p = topo.bone_parent[static_cast<std::size_t>(n)];
      if (p && *p == order[i]) order.push_back(n);
    }
  }
  return order;
}

double track_value(double base, double amplitude, double cycles, double phase, double tau) {
  return base + amplitude * std::sin(2.0 * std::numbers::pi * cycles * tau + phase);
}

}  // namespace

const std::vector<Vec3>& kinect25_rest_offsets() {
  static const std::vector<Vec3> offsets = {
      {0.0, 1.0, 0.0},       // spine_base: position of the root
      {0.0, 0.25, 0.0},      // spine_mid
      {0.0, 0.08, 0.0},      // neck
      {0.0, 0.12, 0.0},      // head
      {-0.18, 0.0, 0.0},     // shoulder_left
      {0.0, -0.28, 0.0},     // elbow_left
      {0.0, -0.25, 0.0},     // wrist_left
      {0.0, -0.08, 0.0},     // hand_left
      {0.18, 0.0, 0.0},      // shoulder_right
      {0.0, -0.28, 0.0},     // elbow_right
      {0.0, -0.25, 0.0},     // wrist_right
      {0.0, -0.08, 0.0},     // hand_right
      {-0.1, 0.0, 0.0},      // hip_left
      {0.0, -0.42, 0.0},     // knee_left
      {0.0, -0.40, 0.0},     // ankle_left
      {0.0, -0.04, 0.1},     // foot_left
      {0.1, 0.0, 0.0},       // hip_right
      {0.0, -0.42, 0.0},     // knee_right
      {0.0, -0.40, 0.0},     // ankle_right
      {0.0, -0.04, 0.1},     // foot_right
      {0.0, 0.25, 0.0},      // spine_shoulder
      {0.0, -0.07, 0.0},     // handtip_left
      {0.03, -0.04, 0.02},   // thumb_left
      {0.0, -0.07, 0.0},     // handtip_right
      {-0.03, -0.04, 0.02},  // thumb_right
  };
  return offsets;
}

void validate(const SynthSpec& spec) {
  if (spec.classes.size() < 2) throw ConfigError("synthetic spec needs at least 2 classes");
  if (!(spec.scale_min > 0.0) || !(spec.scale_max >= spec.scale_min))
    throw ConfigError("synthetic scale range must satisfy 0 < scale_min <= scale_max");
  if (!(spec.noise_sigma >= 0.0)) throw ConfigError("noise_sigma must be >= 0");
  if (!(spec.yaw_range >= 0.0)) throw ConfigError("yaw_range must be >= 0");
  if (spec.frames < 1) throw ConfigError("synthetic clips need at least 1 frame");
  if (spec.persons < 1) throw ConfigError("synthetic clips need at least 1 person");
  const auto joints = static_cast<JointIndex>(kinect25().num_joints);
  auto check = [&](JointIndex j, int axis) {
    if (j < 0 || j >= joints) throw ConfigError("synthetic track joint " + std::to_string(j) + " out of range");
    if (axis < 0 || axis > 2) throw ConfigError("synthetic track axis must be 0, 1 or 2");
  };
  for (const auto& c : spec.classes)
    for (const auto& t : c.tracks) check(t.joint, t.axis);
  for (const auto& n : spec.nuisance) check(n.joint, n.axis);
}

SynthSpec elbow_confusable_spec() {
  SynthSpec spec;
  // Same shape of motion, different flexion range at both elbows.
  auto elbows = [](double base, double amplitude) {
    return std::vector<AngleTrack>{{5, 0, base, amplitude, 1.0, 0.0}, {9, 0, base, amplitude, 1.0, 0.0}};
  };
  spec.classes = {{"elbow_low", elbows(0.3, 0.25)}, {"elbow_high", elbows(1.1, 0.25)}};
  spec.nuisance = {
      {4, 0, 0.6, 0.4},  {4, 2, 0.3, 0.2},  {8, 0, 0.6, 0.4}, {8, 2, 0.3, 0.2}, {1, 0, 0.2, 0.1},
      {20, 1, 0.3, 0.2}, {12, 0, 0.3, 0.3}, {16, 0, 0.3, 0.3}, {13, 0, 0.3, 0.3}, {17, 0, 0.3, 0.3},
  };
  return spec;
}

SynthLatent draw_latent(const SynthSpec& spec, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  SynthLatent z;
  for (const auto& n : spec.nuisance) {
    z.nuisance_base.push_back((2.0 * unit(rng) - 1.0) * n.base_range);
    z.nuisance_amplitude.push_back(unit(rng) * n.amplitude_range);
    z.nuisance_phase.push_back(unit(rng) * 2.0 * std::numbers::pi);
  }
  z.class_phase = unit(rng) * 2.0 * std::numbers::pi;
  z.scale = spec.scale_min + unit(rng) * (spec.scale_max - spec.scale_min);
  z.yaw = (2.0 * unit(rng) - 1.0) * spec.yaw_range;
  z.noise_seed = rng();
  return z;
}

Clip synthesize_clip(const SynthSpec& spec, std::size_t label, const SynthLatent& z) {
  if (label >= spec.classes.size()) throw ConfigError("synthetic label out of range");
  if (z.nuisance_base.size() != spec.nuisance.size()) throw ConfigError("latent does not match the spec");
  const auto& topo = kinect25();
  const auto& offsets = kinect25_rest_offsets();
  const auto v = static_cast<std::size_t>(topo.num_joints);
  const auto order = parent_first_order(topo);
  const auto yaw = rotation(1, z.yaw);

  Clip clip(spec.frames, v, spec.persons);
  clip.valid_frames = spec.frames;
  clip.label = static_cast<int>(label);
  std::mt19937_64 noise_rng(z.noise_seed);
  std::normal_distribution<double> noise(0.0, spec.noise_sigma > 0.0 ? spec.noise_sigma : 1.0);

  std::vector<std::array<double, 3>> angles(v);
  std::vector<Mat3> global(v);
  std::vector<Vec3> pos(v);
  for (std::size_t t = 0; t < spec.frames; ++t) {
    const double tau = static_cast<double>(t) / static_cast<double>(spec.frames);
    for (auto& a : angles) a = {0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < spec.nuisance.size(); ++i) {
      const auto& n = spec.nuisance[i];
      angles[static_cast<std::size_t>(n.joint)][static_cast<std::size_t>(n.axis)] +=
          track_value(z.nuisance_base[i], z.nuisance_amplitude[i], 1.0, z.nuisance_phase[i], tau);
    }
    for (const auto& tr : spec.classes[label].tracks) {
      angles[static_cast<std::size_t>(tr.joint)][static_cast<std::size_t>(tr.axis)] +=
          track_value(tr.base, tr.amplitude, tr.cycles, tr.phase + z.class_phase, tau);
    }
    for (auto j : order) {
      const auto ju = static_cast<std::size_t>(j);
      const auto& a = angles[ju];
      const auto local = mul(rotation(2, a[2]), mul(rotation(1, a[1]), rotation(0, a[0])));
      const auto& parent = topo.bone_parent[ju];
      if (!parent) {
        global[ju] = mul(yaw, local);
        pos[ju] = z.scale * apply(yaw, offsets[ju]);
      } else {
        const auto pu = static_cast<std::size_t>(*parent);
        global[ju] = mul(global[pu], local);
        pos[ju] = pos[pu] + z.scale * apply(global[pu], offsets[ju]);
      }
    }
    for (std::size_t j = 0; j < v; ++j) {
      Vec3 p = pos[j];
      if (spec.noise_sigma > 0.0) p = p + Vec3{noise(noise_rng), noise(noise_rng), noise(noise_rng)};
      clip.at(t, j, 0) = p;
    }
  }
  return clip;
}

std::vector<Clip> generate_synthetic(const SynthSpec& spec, std::size_t n_per_class, std::uint64_t seed) {
  validate(spec);
  std::mt19937_64 rng(seed);
  std::vector<Clip> clips;
  clips.reserve(n_per_class * spec.classes.size());
  for (std::size_t i = 0; i < n_per_class; ++i) {
    for (std::size_t c = 0; c < spec.classes.size(); ++c) clips.push_back(synthesize_clip(spec, c, draw_latent(spec, rng())));
  }
  return clips;
}

}  // namespace angkit
