#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "angkit/errors.hpp"
#include "angkit/nn/ops.hpp"
#include "angkit/training.hpp"

namespace angkit {

namespace {

std::size_t argmax(std::span<const double> v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

std::string format_metrics(const EpochMetrics& m) {
  return "epoch=" + std::to_string(m.epoch) + " lr=" + format_double(m.lr) + " loss=" + format_double(m.loss) +
         " accuracy=" + format_double(m.accuracy);
}

std::vector<EpochMetrics> train(AngNet& model, std::span<const Sample> data, const TrainConfig& cfg,
                                TrainingMeta& meta, std::ostream* log) {
  validate(cfg);
  if (data.empty()) throw ConfigError("training set is empty");
  for (const auto& s : data) {
    if (s.features.shape().channels != model.config().in_channels)
      throw ShapeError("sample has C=" + std::to_string(s.features.shape().channels) + " channels, model expects C=" +
                       std::to_string(model.config().in_channels));
    if (s.label >= model.config().num_classes) throw ConfigError("sample label out of range");
  }

  auto& params = model.params();
  std::vector<EpochMetrics> produced;
  std::vector<std::size_t> order(data.size());
  for (std::size_t epoch = meta.epochs_done; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                      static_cast<std::uint32_t>(epoch)};
    std::mt19937_64 shuffle_rng(seq);
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    const double lr = lr_at(epoch, cfg);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    params.zero_grad();
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const auto end = std::min(order.size(), start + cfg.batch_size);
      const double scale = 1.0 / static_cast<double>(end - start);
      for (std::size_t i = start; i < end; ++i) {
        const auto& s = data[order[i]];
        const auto leaves = nn::bind(params);
        const auto logits = model.forward(input_node(s.features), leaves);
        const auto out = nn::softmax_cross_entropy(logits, s.label);
        const double loss = out.loss.value()[0];
        if (!std::isfinite(loss)) throw NumericError("loss diverged in epoch " + std::to_string(epoch));
        loss_sum += loss;
        if (argmax(out.probs) == s.label) ++correct;
        nn::backward(out.loss);
        nn::accumulate_grads(params, leaves, scale);
      }
      if (cfg.clip_norm > 0.0) clip_grad_norm(params, cfg.clip_norm);
      sgd_step(params, lr, cfg.momentum);
    }
    EpochMetrics m{epoch + 1, lr, loss_sum / static_cast<double>(data.size()),
                   static_cast<double>(correct) / static_cast<double>(data.size())};
    meta.history.push_back(m);
    meta.epochs_done = epoch + 1;
    produced.push_back(m);
    if (log) *log << format_metrics(m) << '\n';
  }
  return produced;
}

Evaluation score(std::span<const std::size_t> predicted, std::span<const std::size_t> truth, std::size_t classes) {
  if (predicted.size() != truth.size()) throw ShapeError("prediction and label counts differ");
  Evaluation e;
  e.confusion.assign(classes, std::vector<std::size_t>(classes, 0));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] >= classes || predicted[i] >= classes) throw ConfigError("class index out of range");
    ++e.confusion[truth[i]][predicted[i]];
    if (truth[i] == predicted[i]) ++correct;
  }
  e.accuracy = truth.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(truth.size());
  for (std::size_t c = 0; c < classes; ++c) {
    const auto total = std::accumulate(e.confusion[c].begin(), e.confusion[c].end(), std::size_t{0});
    e.per_class.push_back(total == 0 ? std::nan("")
                                     : static_cast<double>(e.confusion[c][c]) / static_cast<double>(total));
  }
  return e;
}

Evaluation evaluate(const AngNet& model, std::span<const Sample> data) {
  std::vector<std::size_t> predicted, truth;
  for (const auto& s : data) {
    predicted.push_back(model.predict(s.features));
    truth.push_back(s.label);
  }
  return score(predicted, truth, model.config().num_classes);
}

std::string format_confusion(const Evaluation& e) {
  std::ostringstream out;
  for (const auto& row : e.confusion) {
    for (std::size_t j = 0; j < row.size(); ++j) out << (j ? " " : "") << row[j];
    out << '\n';
  }
  return out.str();
}

std::size_t ensemble_predict(std::span<const std::vector<double>> member_probs) {
  if (member_probs.empty()) throw ConfigError("ensemble needs at least one member");
  const auto k = member_probs.front().size();
  std::vector<double> mean(k, 0.0);
  for (const auto& p : member_probs) {
    if (p.size() != k) throw ConfigError("ensemble members disagree on the number of classes");
    for (std::size_t c = 0; c < k; ++c) mean[c] += p[c];
  }
  for (auto& m : mean) m /= static_cast<double>(member_probs.size());
  return argmax(mean);
}

Evaluation evaluate_ensemble(std::span<const EnsembleMember> members) {
  if (members.empty()) throw ConfigError("ensemble needs at least one member");
  const auto n = members.front().samples.size();
  const auto classes = members.front().model->config().num_classes;
  for (const auto& m : members) {
    if (m.samples.size() != n) throw ConfigError("ensemble members see different sample counts");
    if (m.model->config().num_classes != classes) throw ConfigError("ensemble members disagree on the number of classes");
  }
  std::vector<std::size_t> predicted, truth;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::vector<double>> probs;
    for (const auto& m : members) {
      if (m.samples[i].label != members.front().samples[i].label)
        throw ConfigError("ensemble members see different labels for sample " + std::to_string(i));
      probs.push_back(m.model->probabilities(m.samples[i].features));
    }
    predicted.push_back(ensemble_predict(probs));
    truth.push_back(members.front().samples[i].label);
  }
  return score(predicted, truth, classes);
}

}  // namespace angkit
