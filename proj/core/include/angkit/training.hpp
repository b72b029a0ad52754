#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "angkit/angnet.hpp"
#include "angkit/checkpoint.hpp"
#include "angkit/feature_tensor.hpp"
#include "angkit/nn/params.hpp"

namespace angkit {

struct TrainConfig {
  double base_lr = 0.05;
  double momentum = 0.9;
  std::size_t epochs = 40;
  std::vector<std::size_t> decay_epochs = {20, 30};
  double decay_factor = 0.1;
  std::size_t batch_size = 8;
  std::uint64_t seed = 0;
  /// When > 0, batch gradients whose global L2 norm exceeds this are rescaled to it.
  double clip_norm = 0.0;
};

/// Throws ConfigError unless 0 < decay_factor < 1, decay_epochs strictly
/// increase, batch_size >= 1, base_lr >= 0 and 0 <= momentum < 1.
void validate(const TrainConfig& cfg);

/// base_lr * decay_factor^(number of decay epochs <= epoch).
double lr_at(std::size_t epoch, const TrainConfig& cfg);

/// buffer = momentum * buffer + grad; value -= lr * buffer; grad = 0.
/// Throws NumericError naming the first parameter with a non-finite gradient,
/// before anything is modified.
void sgd_step(nn::ParamRegistry& params, double lr, double momentum);

/// Rescales all gradients so their global L2 norm is at most max_norm; returns
/// the norm before clipping. Non-finite norms are returned untouched.
double clip_grad_norm(nn::ParamRegistry& params, double max_norm);

struct Sample {
  FeatureTensor features;
  std::size_t label = 0;
};

/// Runs epochs meta.epochs_done .. cfg.epochs-1, appending to meta.history.
/// Each epoch shuffles with a generator seeded from (cfg.seed, epoch), so a
/// resumed run reproduces an uninterrupted one. Batch gradients are averaged.
/// Throws NumericError with the epoch index when the loss is not finite.
/// When `log` is set, one metrics record per epoch is written to it.
std::vector<EpochMetrics> train(AngNet& model, std::span<const Sample> data, const TrainConfig& cfg,
                                TrainingMeta& meta, std::ostream* log = nullptr);

/// "epoch=E lr=L loss=X accuracy=A"
std::string format_metrics(const EpochMetrics& m);

struct Evaluation {
  double accuracy = 0.0;
  std::vector<double> per_class;                   // NaN for classes with no samples
  std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]
};

Evaluation evaluate(const AngNet& model, std::span<const Sample> data);

/// Builds an Evaluation from predictions.
Evaluation score(std::span<const std::size_t> predicted, std::span<const std::size_t> truth, std::size_t classes);

/// Whitespace-separated grid, one row per true class.
std::string format_confusion(const Evaluation& e);

/// Argmax of the mean of the probability vectors; ties go to the lowest
/// class. Throws ConfigError for an empty list or mismatched lengths.
std::size_t ensemble_predict(std::span<const std::vector<double>> member_probs);

/// A trained model together with the sample encoding it expects.
struct EnsembleMember {
  const AngNet* model = nullptr;
  std::span<const Sample> samples;
};

/// Mean-probability ensemble over members that see the same clips in the
/// same order (possibly encoded differently).
Evaluation evaluate_ensemble(std::span<const EnsembleMember> members);

}  // namespace angkit
