#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "angkit/feature_tensor.hpp"
#include "angkit/topology.hpp"

namespace angkit {

/// Sinusoidal trajectory of one rotation angle (radians) at one joint:
/// base + amplitude * sin(2*pi*cycles*tau + phase), tau in [0, 1) over the clip.
struct AngleTrack {
  JointIndex joint = 0;
  int axis = 0;  // 0 = x (flexion), 1 = y (twist), 2 = z (abduction)
  double base = 0.0;
  double amplitude = 0.0;
  double cycles = 1.0;
  double phase = 0.0;
};

struct SynthClass {
  std::string name;
  std::vector<AngleTrack> tracks;
};

/// Per-sample nuisance: random bases and amplitudes drawn for these joints and
/// axes, shared by every class.
struct NuisanceTrack {
  JointIndex joint = 0;
  int axis = 0;
  double base_range = 0.0;       // base uniform in +-base_range
  double amplitude_range = 0.0;  // amplitude uniform in [0, amplitude_range]
};

struct SynthSpec {
  std::vector<SynthClass> classes;
  std::vector<NuisanceTrack> nuisance;
  double scale_min = 0.8;
  double scale_max = 1.2;
  double yaw_range = 3.14159265358979323846;  // yaw uniform in +-yaw_range about the vertical axis
  double noise_sigma = 0.01;
  std::size_t frames = 32;
  std::size_t persons = 1;
};

/// Throws ConfigError unless there are >= 2 classes, 0 < scale_min <= scale_max,
/// noise_sigma >= 0, frames >= 1, persons >= 1 and track joints/axes are valid.
void validate(const SynthSpec& spec);

/// Two classes that differ only in the left- and right-elbow flexion trajectory,
/// with shoulder, spine, hip and knee nuisance motion.
SynthSpec elbow_confusable_spec();

/// Random draws behind one sample, independent of its class.
struct SynthLatent {
  std::vector<double> nuisance_base, nuisance_amplitude, nuisance_phase;
  double class_phase = 0.0;  // shared phase offset of the class tracks
  double scale = 1.0;
  double yaw = 0.0;
  std::uint64_t noise_seed = 0;
};

SynthLatent draw_latent(const SynthSpec& spec, std::uint64_t seed);

/// Forward kinematics on the kinect25 tree for one class and latent draw.
/// Person 0 carries the pose; extra persons stay zero.
Clip synthesize_clip(const SynthSpec& spec, std::size_t label, const SynthLatent& latent);

/// n_per_class clips per class, interleaved by class; deterministic in seed.
std::vector<Clip> generate_synthetic(const SynthSpec& spec, std::size_t n_per_class, std::uint64_t seed);

/// Rest-pose offset of each kinect25 joint from its parent, metres, y up.
const std::vector<Vec3>& kinect25_rest_offsets();

}  // namespace angkit
