#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "angkit/angnet.hpp"
#include "angkit/ini_config.hpp"
#include "angkit/synth.hpp"
#include "angkit/training.hpp"

namespace angkit::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kVerificationFailure = 3 };

/// Everything a run depends on. Every field has a default; a config file
/// overrides the defaults and command-line flags override the file.
struct RunConfig {
  std::string schema;  // empty: bundled kinect25
  std::string stream = "static";
  std::string features = "joint,angular";
  std::uint64_t seed = 0;
  std::size_t frames = 32;
  std::size_t max_persons = 2;
  TrainConfig train;
  AngNetConfig model;  // in_channels and num_classes are taken from the data
  SynthSpec synth = elbow_confusable_spec();
  std::size_t n_per_class = 64;
};

/// Applies [run], [train], [model] and [synth] keys; unknown keys are errors.
void apply_ini(RunConfig& cfg, const IniDocument& doc);
IniDocument to_ini(const RunConfig& cfg);

/// Entry point shared by the executable and the tests; returns an ExitCode.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace angkit::cli
