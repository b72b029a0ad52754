#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "angkit/angnet.hpp"
#include "angkit/nn/params.hpp"
#include "angkit/topology.hpp"

namespace angkit {

/// One line of the training log.
struct EpochMetrics {
  std::size_t epoch = 0;
  double lr = 0.0;
  double loss = 0.0;
  double accuracy = 0.0;

  friend bool operator==(const EpochMetrics&, const EpochMetrics&) = default;
};

/// Where a model is in its training run.
struct TrainingMeta {
  std::size_t epochs_done = 0;
  std::uint64_t seed = 0;
  std::string features;  // comma list the model was trained on
  std::string stream = "static";
  std::vector<EpochMetrics> history;

  friend bool operator==(const TrainingMeta&, const TrainingMeta&) = default;
};

/// Everything needed to rebuild a model and continue training it.
struct ModelCheckpoint {
  AngNetConfig config;
  SkeletonTopology topology;
  nn::ParamRegistry params;  // values and momentum buffers
  TrainingMeta meta;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

ModelCheckpoint snapshot(const AngNet& model, const TrainingMeta& meta);

/// Rebuilds the network and copies every value and momentum buffer in.
/// Throws FormatError when names or shapes disagree with the config.
AngNet restore_model(const ModelCheckpoint& ckpt);

void write_checkpoint(const ModelCheckpoint& ckpt, std::ostream& sink);
/// Throws FormatError on bad magic, unknown version, truncation or trailing bytes.
ModelCheckpoint read_checkpoint(std::istream& source);

void save_checkpoint(const ModelCheckpoint& ckpt, const std::string& path);
ModelCheckpoint load_checkpoint(const std::string& path);

/// Shortest round-trip decimal text for a double.
std::string format_double(double v);

}  // namespace angkit
