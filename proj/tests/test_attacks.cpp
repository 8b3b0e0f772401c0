#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "iat/attacks.hpp"
#include "iat/dataset.hpp"
#include "iat/train.hpp"

using namespace iat;

namespace {

// Two logits (w.x, 0) with class 0 as the target reproduce the binary
// logistic loss in the multiclass machinery.
Model logistic_model(const std::vector<double>& w) {
  Model m;
  m.input_dim = w.size();
  m.class_count = 2;
  Layer l;
  l.kind = LayerKind::affine;
  l.in_dim = w.size();
  l.out_dim = 2;
  l.w = w;
  l.w.insert(l.w.end(), w.size(), 0.0);
  l.b.assign(2, 0.0);
  m.layers.push_back(std::move(l));
  m.validate();
  return m;
}

AttackConfig cfg(double eps, double step, int iters) {
  AttackConfig a;
  a.epsilon = eps;
  a.step_size = step;
  a.iterations = iters;
  a.lo = 0.0;
  a.hi = 1.0;
  return a;
}

}  // namespace

TEST_CASE("project_linf hand clamps") {
  SUBCASE("inside ball and bounds is untouched") {
    const Tensor c = Tensor::matrix(1, 2, {0.52, 0.48});
    const Tensor o = Tensor::matrix(1, 2, {0.5, 0.5});
    const Tensor p = project_linf(c, o, 0.1, 0.0, 1.0);
    CHECK(p.data == c.data);
  }
  SUBCASE("ball clamp binds") {
    const Tensor p = project_linf(Tensor::matrix(1, 1, {0.9}),
                                  Tensor::matrix(1, 1, {0.5}), 0.1, 0.0, 1.0);
    CHECK(p.data[0] == doctest::Approx(0.6).epsilon(1e-15));
  }
  SUBCASE("bounds bind after the ball clamp") {
    const Tensor p = project_linf(Tensor::matrix(1, 1, {-0.2}),
                                  Tensor::matrix(1, 1, {0.05}), 0.1, 0.0, 1.0);
    CHECK(p.data[0] == doctest::Approx(0.0).epsilon(1e-15));
  }
}

TEST_CASE("fgsm on the logistic closed form") {
  const Model m = logistic_model({1.0, -2.0});
  const Tensor x = Tensor::matrix(1, 2, {0.5, 0.5});
  const Tensor y = one_hot({0}, 2);

  SUBCASE("epsilon 0 returns the input") {
    const Tensor adv = fgsm(m, x, y, cfg(0.0, 0.1, 1));
    CHECK(adv.data == x.data);
  }
  SUBCASE("hand-computed signed step") {
    // gradient = (sigmoid(-0.5) - 1) * (1, -2); signs are (-1, +1)
    const Tensor adv = fgsm(m, x, y, cfg(0.1, 0.1, 1));
    CHECK(adv.data[0] == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(adv.data[1] == doctest::Approx(0.6).epsilon(1e-12));
  }
  SUBCASE("zero-gradient coordinates stay put") {
    const Model m0 = logistic_model({1.0, 0.0});
    const Tensor adv = fgsm(m0, x, y, cfg(0.1, 0.1, 1));
    CHECK(adv.data[1] == 0.5);  // sgn(0) == 0
  }
}

TEST_CASE("pgd basics") {
  const Model m = logistic_model({1.0, -2.0});
  const Tensor x = Tensor::matrix(1, 2, {0.5, 0.5});
  const Tensor y = one_hot({0}, 2);

  SUBCASE("single full-size step equals fgsm") {
    AttackConfig a = cfg(0.08, 0.08, 1);
    CHECK(a.fgsm_equivalent());
    CHECK(pgd(m, x, y, a).data == fgsm(m, x, y, a).data);
  }
  SUBCASE("epsilon 0 is the identity regardless of iterations") {
    CHECK(pgd(m, x, y, cfg(0.0, 0.05, 9)).data == x.data);
  }
  SUBCASE("random start needs an rng") {
    AttackConfig a = cfg(0.1, 0.025, 3);
    a.random_start = true;
    CHECK_THROWS(pgd(m, x, y, a));
    Rng rng(5);
    const Tensor adv = pgd(m, x, y, a, &rng);
    for (std::size_t k = 0; k < adv.data.size(); ++k)
      CHECK(std::abs(adv.data[k] - x.data[k]) <= 0.1 + 1e-12);
  }
  SUBCASE("deterministic without random start") {
    AttackConfig a = cfg(0.1, 0.025, 7);
    CHECK(pgd(m, x, y, a).data == pgd(m, x, y, a).data);
  }
  SUBCASE("config validation") {
    CHECK_THROWS(pgd(m, x, y, cfg(0.1, 0.0, 7)));
    CHECK_THROWS(pgd(m, x, y, cfg(0.1, 0.01, 0)));
    AttackConfig bad = cfg(0.1, 0.01, 5);
    bad.lo = 1.0;
    bad.hi = 0.0;
    CHECK_THROWS(pgd(m, x, y, bad));
  }
}

TEST_CASE("ball invariant on random models and batches") {
  Rng rng(31);
  for (int trial = 0; trial < 5; ++trial) {
    const Model m = make_mlp(12, {16}, 4, 50 + trial);
    Tensor x = Tensor::zeros({8, 12});
    for (auto& v : x.data) v = rng.uniform();
    std::vector<int> labels(8);
    for (auto& v : labels) v = static_cast<int>(rng.index(4));
    const Tensor y = one_hot(labels, 4);
    const double eps = 0.02 + 0.1 * rng.uniform();
    const Tensor adv = pgd(m, x, y, cfg(eps, eps / 3.0, 5));
    for (std::size_t k = 0; k < adv.data.size(); ++k) {
      CHECK(std::abs(adv.data[k] - x.data[k]) <= eps + 1e-12);
      CHECK(adv.data[k] >= 0.0);
      CHECK(adv.data[k] <= 1.0);
    }
  }
}

TEST_CASE("signed steps weakly increase the loss of a linear model") {
  const Model m = logistic_model({0.8, -1.4, 0.6});
  Rng rng(33);
  Tensor x = Tensor::zeros({16, 3});
  for (auto& v : x.data) v = rng.uniform();
  std::vector<int> labels(16);
  for (auto& v : labels) v = static_cast<int>(rng.index(2));
  const Tensor y = one_hot(labels, 2);

  const Tensor adv = pgd(m, x, y, cfg(0.1, 0.025, 7));
  // Per-example loss comparison via single-row batches.
  for (std::size_t r = 0; r < 16; ++r) {
    Tensor xr = Tensor::matrix(1, 3, {x.at(r, 0), x.at(r, 1), x.at(r, 2)});
    Tensor ar = Tensor::matrix(1, 3, {adv.at(r, 0), adv.at(r, 1), adv.at(r, 2)});
    const Tensor yr = one_hot({labels[r]}, 2);
    const double clean = loss_ce(predict(m, xr), yr).loss;
    const double attacked = loss_ce(predict(m, ar), yr).loss;
    CHECK(attacked >= clean - 1e-12);
  }
}

TEST_CASE("iterative attack beats the single step on a trained model") {
  const Dataset data = synth_blobs(4, 80, 8, 4.0, 3);
  TrainConfig tc;
  tc.method = Method::baseline;
  tc.hidden = {16};
  tc.epochs = 20;
  tc.batch_size = 32;
  tc.lr = {0.1, 0.1, {15}};
  tc.seed = 2;
  const auto trained = train(tc, data);

  const Tensor y = one_hot(data.test.y, data.class_count);
  const AttackConfig f = cfg(0.08, 0.08, 1);
  const AttackConfig p = cfg(0.08, 0.02, 7);
  std::size_t fgsm_errors = 0, pgd_errors = 0;
  const Tensor adv_f = fgsm(trained.model, data.test.x, y, f);
  const Tensor adv_p = pgd(trained.model, data.test.x, y, p);
  const Tensor lf = predict(trained.model, adv_f);
  const Tensor lp = predict(trained.model, adv_p);
  for (std::size_t r = 0; r < data.test.size(); ++r) {
    std::size_t bf = 0, bp = 0;
    for (std::size_t c = 1; c < 4; ++c) {
      if (lf.at(r, c) > lf.at(r, bf)) bf = c;
      if (lp.at(r, c) > lp.at(r, bp)) bp = c;
    }
    fgsm_errors += static_cast<int>(bf) != data.test.y[r];
    pgd_errors += static_cast<int>(bp) != data.test.y[r];
  }
  CHECK(pgd_errors >= fgsm_errors);
}
