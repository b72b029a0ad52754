#include <algorithm>
#include <cmath>

#include "angkit/errors.hpp"
#include "angkit/training.hpp"

namespace angkit {

void validate(const TrainConfig& cfg) {
  if (!(cfg.decay_factor > 0.0 && cfg.decay_factor < 1.0)) throw ConfigError("decay_factor must be in (0, 1)");
  for (std::size_t i = 1; i < cfg.decay_epochs.size(); ++i) {
    if (cfg.decay_epochs[i] <= cfg.decay_epochs[i - 1]) throw ConfigError("decay_epochs must be strictly increasing");
  }
  if (cfg.batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (!(cfg.base_lr >= 0.0) || !std::isfinite(cfg.base_lr)) throw ConfigError("base_lr must be finite and >= 0");
  if (!(cfg.momentum >= 0.0 && cfg.momentum < 1.0)) throw ConfigError("momentum must be in [0, 1)");
  if (!(cfg.clip_norm >= 0.0) || !std::isfinite(cfg.clip_norm)) throw ConfigError("clip_norm must be finite and >= 0");
}

double lr_at(std::size_t epoch, const TrainConfig& cfg) {
  double lr = cfg.base_lr;
  for (auto e : cfg.decay_epochs) {
    if (e <= epoch) lr *= cfg.decay_factor;
  }
  return lr;
}

double clip_grad_norm(nn::ParamRegistry& params, double max_norm) {
  double sq = 0.0;
  for (const auto& p : params)
    for (double g : p.grad.data()) sq += g * g;
  const double norm = std::sqrt(sq);
  if (std::isfinite(norm) && norm > max_norm && norm > 0.0) {
    const double scale = max_norm / norm;
    for (auto& p : params)
      for (auto& g : p.grad.data()) g *= scale;
  }
  return norm;
}

void sgd_step(nn::ParamRegistry& params, double lr, double momentum) {
  for (const auto& p : params) {
    const auto g = p.grad.data();
    if (!std::all_of(g.begin(), g.end(), [](double x) { return std::isfinite(x); }))
      throw NumericError("non-finite gradient in parameter '" + p.name + "'");
  }
  for (auto& p : params) {
    auto value = p.value.data();
    auto grad = p.grad.data();
    auto buf = p.momentum.data();
    for (std::size_t i = 0; i < value.size(); ++i) {
      buf[i] = momentum * buf[i] + grad[i];
      value[i] -= lr * buf[i];
      grad[i] = 0.0;
    }
  }
}

}  // namespace angkit
