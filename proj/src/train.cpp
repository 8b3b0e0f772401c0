#include "iat/train.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace iat {

const char* to_string(Method m) {
  switch (m) {
    case Method::baseline: return "baseline";
    case Method::mixup: return "mixup";
    case Method::manifold_mixup: return "manifold_mixup";
    case Method::adv_train: return "adv_train";
    case Method::iat_mixup: return "iat_mixup";
    case Method::iat_manifold: return "iat_manifold";
  }
  return "?";
}

Method method_from_string(const std::string& s) {
  for (Method m : {Method::baseline, Method::mixup, Method::manifold_mixup,
                   Method::adv_train, Method::iat_mixup, Method::iat_manifold})
    if (s == to_string(m)) return m;
  throw std::invalid_argument("unknown training method: " + s);
}

bool method_uses_attack(Method m) {
  return m == Method::adv_train || m == Method::iat_mixup || m == Method::iat_manifold;
}

bool method_uses_mix(Method m) {
  return m == Method::mixup || m == Method::manifold_mixup || m == Method::iat_mixup ||
         m == Method::iat_manifold;
}

double lr_at(const LrSchedule& schedule, int epoch) {
  if (epoch < 0) throw std::invalid_argument("lr_at: negative epoch");
  double lr = schedule.initial;
  for (int at : schedule.decay_epochs)
    if (epoch >= at) lr *= schedule.decay_factor;
  return lr;
}

void TrainConfig::validate(std::size_t class_count) const {
  if (class_count < 2) throw std::invalid_argument("train: need >= 2 classes");
  if (epochs < 0) throw std::invalid_argument("train: negative epochs");
  if (batch_size == 0) throw std::invalid_argument("train: batch_size must be > 0");
  for (std::size_t k = 1; k < lr.decay_epochs.size(); ++k)
    if (lr.decay_epochs[k] <= lr.decay_epochs[k - 1])
      throw std::invalid_argument("train: lr decay epochs must be strictly increasing");
  if (method_uses_attack(method)) attack.validate();
  // Interpolating methods must use their matching mode; the interpolated
  // adversarial methods additionally accept `none` as the no-mix ablation.
  const auto allowed = [&](MixMode mode) {
    switch (method) {
      case Method::baseline:
      case Method::adv_train: return mode == MixMode::none;
      case Method::mixup: return mode == MixMode::input;
      case Method::manifold_mixup: return mode == MixMode::manifold;
      case Method::iat_mixup: return mode == MixMode::input || mode == MixMode::none;
      case Method::iat_manifold: return mode == MixMode::manifold || mode == MixMode::none;
    }
    return false;
  };
  if (!allowed(mix.mode))
    throw std::invalid_argument(std::string("train: method ") + to_string(method) +
                                " does not accept mix mode " + to_string(mix.mode));
  if (method_uses_mix(method)) mix.validate();
}

namespace {

Gradients average_grads(const Gradients& a, const Gradients& b) {
  Gradients out = a;
  for (std::size_t k = 0; k < out.affine.size(); ++k) {
    for (std::size_t i = 0; i < out.affine[k].dw.size(); ++i)
      out.affine[k].dw[i] = (a.affine[k].dw[i] + b.affine[k].dw[i]) / 2.0;
    for (std::size_t i = 0; i < out.affine[k].db.size(); ++i)
      out.affine[k].db[i] = (a.affine[k].db[i] + b.affine[k].db[i]) / 2.0;
  }
  return out;
}

}  // namespace

StepLosses iat_update(Model& m, const Tensor& x, const Tensor& y, const TrainConfig& cfg,
                      SgdState& sgd, double lr, Rng& rng) {
  // Step 1: interpolated loss on the unperturbed batch.
  const MixDraw clean_draw = make_draw(cfg.mix, x.rows(), rng);
  MixedLoss clean = mixed_loss(m, x, y, clean_draw);
  BackwardResult clean_bwd = backward(m, clean.tape, clean.dlogits);

  // Step 2: attack the raw batch with its original labels. The rng is only
  // consumed when the attack uses a random start.
  if (cfg.attack_observer) cfg.attack_observer(x, y);
  const Tensor x_adv = pgd(m, x, y, cfg.attack, &rng);

  // Step 3: interpolated loss on the adversarial batch, fresh draw.
  const MixDraw adv_draw = make_draw(cfg.mix, x.rows(), rng);
  MixedLoss adv = mixed_loss(m, x_adv, y, adv_draw);
  BackwardResult adv_bwd = backward(m, adv.tape, adv.dlogits);

  // Step 4: update on the mean of the two losses.
  sgd_step(m, average_grads(clean_bwd.grads, adv_bwd.grads), lr, cfg.momentum, sgd);
  return StepLosses{clean.loss, adv.loss, (clean.loss + adv.loss) / 2.0};
}

namespace {

struct BatchView {
  Tensor x;
  Tensor y;
  std::vector<int> labels;
};

BatchView gather_batch(const Split& split, const std::vector<std::size_t>& order,
                       std::size_t begin, std::size_t end, std::size_t class_count) {
  BatchView out;
  const std::size_t dim = split.x.cols();
  out.x = Tensor::zeros({end - begin, dim});
  out.labels.resize(end - begin);
  for (std::size_t k = begin; k < end; ++k) {
    const std::size_t src = order[k];
    std::copy(split.x.row(src), split.x.row(src) + dim, out.x.row(k - begin));
    out.labels[k - begin] = split.y[src];
  }
  out.y = one_hot(out.labels, class_count);
  return out;
}

std::size_t count_correct(const Tensor& logits, const std::vector<int>& labels) {
  std::size_t correct = 0;
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    const double* q = logits.row(r);
    std::size_t best = 0;
    for (std::size_t c = 1; c < logits.cols(); ++c)
      if (q[c] > q[best]) best = c;
    if (static_cast<int>(best) == labels[r]) ++correct;
  }
  return correct;
}

StepLosses plain_update(Model& m, const BatchView& batch, const TrainConfig& cfg,
                        SgdState& sgd, double lr) {
  auto fwd = forward(m, batch.x);
  auto loss = loss_ce(fwd.logits, batch.y);
  auto bwd = backward(m, fwd.tape, loss.dlogits);
  sgd_step(m, bwd.grads, lr, cfg.momentum, sgd);
  return StepLosses{loss.loss, loss.loss, loss.loss};
}

StepLosses mix_update(Model& m, const BatchView& batch, const TrainConfig& cfg,
                      SgdState& sgd, double lr, Rng& rng) {
  const MixDraw draw = make_draw(cfg.mix, batch.x.rows(), rng);
  MixedLoss mixed = mixed_loss(m, batch.x, batch.y, draw);
  auto bwd = backward(m, mixed.tape, mixed.dlogits);
  sgd_step(m, bwd.grads, lr, cfg.momentum, sgd);
  return StepLosses{mixed.loss, mixed.loss, mixed.loss};
}

StepLosses adv_update(Model& m, const BatchView& batch, const TrainConfig& cfg,
                      SgdState& sgd, double lr, Rng& rng) {
  if (cfg.attack_observer) cfg.attack_observer(batch.x, batch.y);
  const Tensor x_adv = pgd(m, batch.x, batch.y, cfg.attack, &rng);
  auto adv_fwd = forward(m, x_adv);
  auto adv_loss = loss_ce(adv_fwd.logits, batch.y);
  auto adv_bwd = backward(m, adv_fwd.tape, adv_loss.dlogits);
  if (!cfg.adv_include_clean) {
    sgd_step(m, adv_bwd.grads, lr, cfg.momentum, sgd);
    const double clean = loss_ce(predict(m, batch.x), batch.y).loss;
    return StepLosses{clean, adv_loss.loss, adv_loss.loss};
  }
  auto clean_fwd = forward(m, batch.x);
  auto clean_loss = loss_ce(clean_fwd.logits, batch.y);
  auto clean_bwd = backward(m, clean_fwd.tape, clean_loss.dlogits);
  sgd_step(m, average_grads(clean_bwd.grads, adv_bwd.grads), lr, cfg.momentum, sgd);
  return StepLosses{clean_loss.loss, adv_loss.loss, (clean_loss.loss + adv_loss.loss) / 2.0};
}

}  // namespace

TrainResult train(const TrainConfig& cfg, const Dataset& data) {
  data.validate();
  cfg.validate(data.class_count);
  if (method_uses_mix(cfg.method) && cfg.batch_size < 2)
    throw std::invalid_argument("train: interpolation needs batch_size >= 2");

  TrainResult result;
  result.model = make_mlp(data.input_dim, cfg.hidden, data.class_count, cfg.seed);
  Model& m = result.model;
  SgdState sgd;
  Rng rng = Rng::derive(cfg.seed, 0x7a31);

  const std::size_t n = data.train.size();
  const bool needs_pairs = method_uses_mix(cfg.method);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = lr_at(cfg.lr, epoch);
    const auto order = rng.permutation(n);

    double clean_sum = 0.0, adv_sum = 0.0;
    std::size_t seen = 0, correct = 0, batches = 0;
    for (std::size_t begin = 0; begin < n; begin += cfg.batch_size) {
      const std::size_t end = std::min(begin + cfg.batch_size, n);
      if (needs_pairs && end - begin < 2) continue;  // cannot pair a lone example
      BatchView batch = gather_batch(data.train, order, begin, end, data.class_count);

      correct += count_correct(predict(m, batch.x), batch.labels);
      seen += batch.labels.size();

      StepLosses losses;
      try {
        switch (cfg.method) {
          case Method::baseline:
            losses = plain_update(m, batch, cfg, sgd, lr);
            break;
          case Method::mixup:
          case Method::manifold_mixup:
            losses = mix_update(m, batch, cfg, sgd, lr, rng);
            break;
          case Method::adv_train:
            losses = adv_update(m, batch, cfg, sgd, lr, rng);
            break;
          case Method::iat_mixup:
          case Method::iat_manifold:
            losses = iat_update(m, batch.x, batch.y, cfg, sgd, lr, rng);
            break;
        }
      } catch (const std::runtime_error&) {
        // Non-finite activations, losses or gradients surface here.
        result.history.diverged = true;
        return result;
      }
      if (!std::isfinite(losses.combined) || losses.combined > 1e6) {
        result.history.diverged = true;
        return result;
      }
      clean_sum += losses.clean;
      adv_sum += losses.adv;
      ++batches;
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.clean_loss = batches ? clean_sum / batches : 0.0;
    rec.adv_loss = batches ? adv_sum / batches : 0.0;
    rec.combined_loss = (rec.clean_loss + rec.adv_loss) / 2.0;
    rec.train_error_pct = seen ? 100.0 * (1.0 - double(correct) / double(seen)) : 0.0;
    result.history.epochs.push_back(rec);
  }
  return result;
}

}  // namespace iat
