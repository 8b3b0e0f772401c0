#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "iat/train.hpp"

using namespace iat;

namespace {

AttackConfig attack(double eps) {
  AttackConfig a;
  a.epsilon = eps;
  a.step_size = eps > 0 ? eps / 4.0 : 0.01;
  a.iterations = 5;
  a.lo = 0.0;
  a.hi = 1.0;
  return a;
}

std::vector<double> flat_params(const Model& m) {
  std::vector<double> out;
  for (const auto& l : m.layers) {
    out.insert(out.end(), l.w.begin(), l.w.end());
    out.insert(out.end(), l.b.begin(), l.b.end());
  }
  return out;
}

}  // namespace

TEST_CASE("piecewise-constant learning-rate schedule") {
  const LrSchedule s{0.1, 0.1, {100, 150}};
  CHECK(lr_at(s, 0) == doctest::Approx(0.1));
  CHECK(lr_at(s, 99) == doctest::Approx(0.1));
  CHECK(lr_at(s, 100) == doctest::Approx(0.01));
  CHECK(lr_at(s, 120) == doctest::Approx(0.01));
  CHECK(lr_at(s, 160) == doctest::Approx(0.001));
  CHECK_THROWS(lr_at(s, -1));
}

TEST_CASE("config validation") {
  const Dataset data = synth_blobs(2, 10, 4, 5.0, 1);
  TrainConfig tc;
  tc.method = Method::iat_mixup;
  tc.attack = attack(0.05);
  tc.mix.mode = MixMode::manifold;  // wrong pairing
  tc.mix.eligible_layers = {0};
  CHECK_THROWS(tc.validate(data.class_count));
  tc.mix.mode = MixMode::input;
  CHECK_NOTHROW(tc.validate(data.class_count));
  tc.mix.mode = MixMode::none;  // degenerate ablation is allowed for iat
  CHECK_NOTHROW(tc.validate(data.class_count));
  tc.method = Method::baseline;
  tc.lr.decay_epochs = {10, 10};
  CHECK_THROWS(tc.validate(data.class_count));
}

TEST_CASE("zero epochs returns the freshly initialized model") {
  const Dataset data = synth_blobs(2, 20, 4, 5.0, 2);
  TrainConfig tc;
  tc.method = Method::baseline;
  tc.hidden = {8};
  tc.epochs = 0;
  tc.seed = 9;
  const auto result = train(tc, data);
  const Model fresh = make_mlp(data.input_dim, {8}, data.class_count, 9);
  CHECK(flat_params(result.model) == flat_params(fresh));
  CHECK(result.history.epochs.empty());
}

TEST_CASE("baseline drives separable blobs to zero train error") {
  const Dataset data = synth_blobs(2, 60, 6, 30.0, 3);
  TrainConfig tc;
  tc.method = Method::baseline;
  tc.hidden = {16};
  tc.epochs = 50;
  tc.batch_size = 16;
  tc.lr = {0.1, 0.1, {40}};
  tc.seed = 4;
  const auto result = train(tc, data);
  REQUIRE(!result.history.epochs.empty());
  CHECK(result.history.epochs.back().train_error_pct == doctest::Approx(0.0));
}

TEST_CASE("same seed twice gives bit-identical parameters") {
  const Dataset data = synth_blobs(3, 30, 5, 4.0, 5);
  TrainConfig tc;
  tc.method = Method::iat_mixup;
  tc.mix.mode = MixMode::input;
  tc.hidden = {10};
  tc.epochs = 3;
  tc.batch_size = 16;
  tc.attack = attack(0.05);
  tc.seed = 11;
  const auto a = train(tc, data);
  const auto b = train(tc, data);
  CHECK(flat_params(a.model) == flat_params(b.model));
}

TEST_CASE("combined loss is the exact mean of clean and adversarial losses") {
  const Dataset data = synth_blobs(2, 16, 4, 5.0, 6);
  TrainConfig tc;
  tc.method = Method::iat_mixup;
  tc.mix.mode = MixMode::input;
  tc.attack = attack(0.05);
  Model m = make_mlp(data.input_dim, {8}, data.class_count, 7);
  SgdState sgd;
  Rng rng(8);
  const Split sub = head(data.train, 8);
  const Tensor y = one_hot(sub.y, data.class_count);
  for (int step = 0; step < 5; ++step) {
    const StepLosses losses = iat_update(m, sub.x, y, tc, sgd, 0.05, rng);
    CHECK(losses.combined == (losses.clean + losses.adv) / 2.0);
  }
}

TEST_CASE("epoch records keep the combined-loss identity") {
  const Dataset data = synth_blobs(2, 40, 4, 4.0, 7);
  TrainConfig tc;
  tc.method = Method::adv_train;
  tc.hidden = {8};
  tc.epochs = 3;
  tc.batch_size = 16;
  tc.attack = attack(0.05);
  tc.seed = 3;
  const auto result = train(tc, data);
  for (const auto& rec : result.history.epochs)
    CHECK(std::abs(rec.combined_loss - (rec.clean_loss + rec.adv_loss) / 2.0) < 1e-12);
}

TEST_CASE("the training attack sees raw inputs and original labels") {
  const Dataset data = synth_blobs(2, 40, 4, 4.0, 8);
  std::set<std::vector<double>> train_rows;
  for (std::size_t r = 0; r < data.train.size(); ++r)
    train_rows.insert({data.train.x.row(r), data.train.x.row(r) + data.train.x.cols()});

  TrainConfig tc;
  tc.method = Method::iat_mixup;
  tc.mix.mode = MixMode::input;
  tc.hidden = {8};
  tc.epochs = 2;
  tc.batch_size = 8;
  tc.attack = attack(0.05);
  tc.seed = 12;
  std::size_t observed = 0;
  tc.attack_observer = [&](const Tensor& x, const Tensor& y) {
    validate_soft_labels(y);
    for (std::size_t r = 0; r < x.rows(); ++r) {
      const std::vector<double> row(x.row(r), x.row(r) + x.cols());
      CHECK(train_rows.count(row) == 1);  // interpolated rows would not match
      ++observed;
    }
    for (double v : y.data) CHECK((v == 0.0 || v == 1.0));  // labels stay one-hot
  };
  train(tc, data);
  CHECK(observed > 0);
}

TEST_CASE("degenerate interpolated training collapses onto the baseline") {
  const Dataset data = synth_blobs(3, 40, 5, 4.0, 9);
  TrainConfig base;
  base.method = Method::baseline;
  base.hidden = {12};
  base.epochs = 4;
  base.batch_size = 16;
  base.seed = 21;

  TrainConfig degenerate = base;
  degenerate.method = Method::iat_mixup;
  degenerate.mix.mode = MixMode::none;
  degenerate.attack = attack(0.0);

  const auto a = train(base, data);
  const auto b = train(degenerate, data);
  CHECK(flat_params(a.model) == flat_params(b.model));
}

TEST_CASE("divergence aborts with the history so far") {
  const Dataset data = synth_blobs(2, 40, 4, 4.0, 10);
  TrainConfig tc;
  tc.method = Method::baseline;
  tc.hidden = {8};
  tc.epochs = 10;
  tc.batch_size = 16;
  tc.lr = {1e12, 1.0, {}};
  tc.seed = 2;
  const auto result = train(tc, data);
  CHECK(result.history.diverged);
  CHECK(result.history.epochs.size() < 10);
}

TEST_CASE("training loss decreases from first to last quarter") {
  const Dataset data = synth_blobs(3, 50, 6, 5.0, 11);
  TrainConfig tc;
  tc.method = Method::mixup;
  tc.mix.mode = MixMode::input;
  tc.hidden = {16};
  tc.epochs = 16;
  tc.batch_size = 16;
  tc.lr = {0.1, 0.1, {12}};
  tc.seed = 6;
  const auto result = train(tc, data);
  REQUIRE(result.history.epochs.size() == 16);
  double first = 0.0, last = 0.0;
  for (int k = 0; k < 4; ++k) {
    first += result.history.epochs[k].combined_loss;
    last += result.history.epochs[12 + k].combined_loss;
  }
  CHECK(last < first);
}
