// Acceptance suite: end-to-end checks of the training methods, the attack
// battery, the representation analyses, and the numerical loss-analysis
// verifiers, each printed as one pass/fail line. Exit code 0 iff all pass.
//
// Budget notes: the training grid of criterion 2 dominates the runtime and
// is shared with criteria 3 and 4; criteria 5-7 share a second, smaller
// grid on the bottleneck architecture.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "iat/analysis.hpp"
#include "iat/checkpoint.hpp"
#include "iat/config.hpp"
#include "iat/eval.hpp"
#include "iat/experiment.hpp"
#include "iat/linalg.hpp"
#include "iat/report.hpp"
#include "iat/theory.hpp"
#include "iat/train.hpp"

#include "../test_util.hpp"

using namespace iat;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  int id;
  std::string name;
  bool pass;
  std::string detail;
  double seconds;
};

std::vector<Outcome> results;

void report(int id, const std::string& name, bool pass, const std::string& detail,
            Clock::time_point started) {
  const double secs = std::chrono::duration<double>(Clock::now() - started).count();
  results.push_back({id, name, pass, detail, secs});
  std::printf("[%s] criterion %2d: %-28s %s (%.1f s)\n", pass ? "PASS" : "FAIL", id,
              name.c_str(), detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), pattern, args...);
  return buf;
}

AttackConfig make_attack(double eps, double step, int iters) {
  AttackConfig a;
  a.epsilon = eps;
  a.step_size = step;
  a.iterations = iters;
  a.lo = 0.0;
  a.hi = 1.0;
  return a;
}

// ---------------------------------------------------------------------------
// Criterion 1: gradient exactness on random model/batch/injection triples.
// ---------------------------------------------------------------------------

void criterion_1() {
  const auto t0 = Clock::now();
  Rng rng(2024);
  double worst = 0.0;
  int failures = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t in = 3 + rng.index(6);
    const std::size_t depth = 1 + rng.index(2);  // <= 3 affine layers
    std::vector<std::size_t> hidden;
    for (std::size_t k = 0; k < depth; ++k) hidden.push_back(4 + rng.index(29));  // <= 32
    const std::size_t classes = 2 + rng.index(4);
    Model m = make_mlp(in, hidden, classes, 9000 + trial);
    // Bias jitter keeps pre-activations off the relu kink, where central
    // differences stop being a derivative oracle.
    for (auto& layer : m.layers)
      for (auto& b : layer.b) b = rng.uniform(-0.4, 0.4);

    const std::size_t batch = 2 + rng.index(5);
    Tensor x = Tensor::zeros({batch, in});
    for (auto& v : x.data) v = rng.uniform();
    std::vector<int> labels(batch);
    for (auto& v : labels) v = static_cast<int>(rng.index(classes));
    const Tensor y = one_hot(labels, classes);

    std::optional<Injection> inj;
    if (trial % 3 != 0) {
      Injection i;
      i.boundary = rng.index(m.boundaries().size());
      i.lambda = 0.1 + 0.8 * rng.uniform();
      i.permutation = rng.permutation(batch);
      inj = i;
    }
    const auto fwd = forward(m, x, inj);
    const auto loss = loss_ce(fwd.logits, y);
    const auto res = backward(m, fwd.tape, loss.dlogits);
    const auto pc = testutil::fd_check_params(m, x, y, inj, res.grads);
    const auto ic = testutil::fd_check_inputs(m, x, y, inj, res.input_grad);
    worst = std::max({worst, pc.max_rel_err, ic.max_rel_err});
    if (pc.max_rel_err >= 1e-5 || ic.max_rel_err >= 1e-5) ++failures;
  }
  report(1, "gradient exactness", failures == 0,
         fmt("100 triples, worst rel err %.2e", worst), t0);
}

// ---------------------------------------------------------------------------
// Criteria 2-4: the main training grid and its evaluation battery.
// ---------------------------------------------------------------------------

struct GridCell {
  Method method;
  std::uint64_t seed;
  Model model;
};

std::vector<GridCell> train_grid(const Dataset& data, const std::vector<Method>& methods,
                                 const std::vector<std::uint64_t>& seeds,
                                 const std::vector<std::size_t>& hidden, int epochs,
                                 const AttackConfig& attack, double manifold_alpha = 2.0) {
  std::vector<std::pair<Method, std::uint64_t>> cells;
  for (Method m : methods)
    for (std::uint64_t s : seeds) cells.emplace_back(m, s);

  std::vector<GridCell> out(cells.size());
  const std::size_t workers = 2;
  for (std::size_t begin = 0; begin < cells.size(); begin += workers) {
    const std::size_t end = std::min(begin + workers, cells.size());
    std::vector<std::future<Model>> wave;
    for (std::size_t k = begin; k < end; ++k) {
      TrainConfig tc;
      tc.method = cells[k].first;
      tc.hidden = hidden;
      tc.epochs = epochs;
      tc.batch_size = 64;
      tc.lr = {0.1, 0.1, {epochs / 2, 3 * epochs / 4}};
      tc.momentum = 0.9;
      tc.attack = attack;
      tc.seed = cells[k].second;
      if (tc.method == Method::mixup || tc.method == Method::iat_mixup) {
        tc.mix.mode = MixMode::input;
        tc.mix.alpha = tc.mix.beta = 1.0;
      } else if (tc.method == Method::manifold_mixup || tc.method == Method::iat_manifold) {
        tc.mix.mode = MixMode::manifold;
        tc.mix.alpha = tc.mix.beta = manifold_alpha;
        tc.mix.eligible_layers = {0, 1, 2};
      }
      wave.push_back(std::async(std::launch::async, [tc, &data]() {
        auto res = train(tc, data);
        if (res.history.diverged) throw std::runtime_error("training diverged");
        return std::move(res.model);
      }));
    }
    for (std::size_t k = begin; k < end; ++k) {
      out[k].method = cells[k].first;
      out[k].seed = cells[k].second;
      out[k].model = wave[k - begin].get();
    }
  }
  return out;
}

const Model& grid_model(const std::vector<GridCell>& grid, Method m, std::uint64_t seed) {
  for (const auto& cell : grid)
    if (cell.method == m && cell.seed == seed) return cell.model;
  throw std::runtime_error("missing grid cell");
}

void criteria_2_to_4(const Dataset& data) {
  const AttackConfig train_attack = make_attack(0.1, 0.025, 7);
  const std::vector<std::uint64_t> seeds{1, 2, 3};

  auto t0 = Clock::now();
  const auto grid = train_grid(data, {Method::baseline, Method::adv_train, Method::iat_mixup},
                               seeds, {128, 128, 128}, 40, train_attack);

  // --- criterion 2: clean-error ordering with a robustness match ----------
  const Split robust_split = head(data.test, 2500);
  std::map<Method, double> clean_mean, robust_mean;
  const AttackConfig pgd20 = make_attack(0.1, 0.025, 20);
  for (Method m : {Method::baseline, Method::adv_train, Method::iat_mixup}) {
    double c = 0.0, r = 0.0;
    for (std::uint64_t s : seeds) {
      const Model& model = grid_model(grid, m, s);
      c += eval_clean(model, data.test);
      r += eval_whitebox(model, robust_split, pgd20);
    }
    clean_mean[m] = c / double(seeds.size());
    robust_mean[m] = r / double(seeds.size());
  }
  const double base_c = clean_mean[Method::baseline];
  const double at_c = clean_mean[Method::adv_train];
  const double iat_c = clean_mean[Method::iat_mixup];
  const double at_r = robust_mean[Method::adv_train];
  const double iat_r = robust_mean[Method::iat_mixup];
  const bool ordering = base_c < iat_c && iat_c < at_c;
  const bool margin = at_c - iat_c >= 1.0;
  const bool robust_close = std::abs(iat_r - at_r) <= 5.0;
  report(2, "robustness/accuracy trade-off", ordering && margin && robust_close,
         fmt("clean %.2f/%.2f/%.2f%% (base/iat/at), pgd20 %.2f vs %.2f%%", base_c, iat_c,
             at_c, iat_r, at_r),
         t0);

  // --- criterion 3: gradient-obfuscation sanity suite ---------------------
  t0 = Clock::now();
  std::string detail3;
  bool ok3 = true;
  {
    const Split transfer_split = head(data.test, 2500);
    std::vector<const Model*> models;
    std::vector<std::string> ids;
    for (Method m : {Method::baseline, Method::adv_train, Method::iat_mixup}) {
      models.push_back(&grid_model(grid, m, 1));
      ids.push_back(to_string(m));
    }
    const TransferMatrix tm =
        transfer_matrix(models, ids, transfer_split, make_attack(0.1, 0.025, 7));
    const auto violations = transfer_violations(tm, 2.0);
    if (!violations.empty()) ok3 = false;
    detail3 += fmt("transfer violations %zu", violations.size());

    int order_violations = 0;
    const AttackConfig fgsm_cfg = make_attack(0.1, 0.1, 1);
    const AttackConfig pgd7 = make_attack(0.1, 0.025, 7);
    for (const Model* m : models) {
      const double e_fgsm = eval_whitebox(*m, transfer_split, fgsm_cfg);
      const double e_pgd = eval_whitebox(*m, transfer_split, pgd7);
      if (e_pgd < e_fgsm) ++order_violations;
    }
    if (order_violations > 0) ok3 = false;
    detail3 += fmt(", pgd7<fgsm on %d models", order_violations);

    const Split unbounded_split = head(data.test, 500);
    const AttackConfig unbounded = make_attack(1.0, 0.05, 40);
    double worst_unbounded = 100.0;
    for (const Model* m : models)
      worst_unbounded =
          std::min(worst_unbounded, eval_whitebox(*m, unbounded_split, unbounded));
    if (worst_unbounded < 99.0) ok3 = false;
    detail3 += fmt(", unbounded err >= %.1f%%", worst_unbounded);
  }
  report(3, "obfuscation sanity suite", ok3, detail3, t0);

  // --- criterion 4: attack-iteration stability ----------------------------
  t0 = Clock::now();
  {
    const Split sub = head(data.test, 400);
    bool ok4 = true;
    std::string detail4;
    for (Method m : {Method::adv_train, Method::iat_mixup}) {
      const Model& model = grid_model(grid, m, 1);
      const double e100 = eval_whitebox(model, sub, make_attack(0.1, 0.025, 100));
      const double e1000 = eval_whitebox(model, sub, make_attack(0.1, 0.025, 1000));
      if (std::abs(e1000 - e100) >= 1.0) ok4 = false;
      detail4 += fmt("%s |%.2f-%.2f|=%.2f ", to_string(m), e1000, e100,
                     std::abs(e1000 - e100));
    }
    report(4, "iteration stability", ok4, detail4, t0);
  }
}

// ---------------------------------------------------------------------------
// Criteria 5-7: bottleneck architecture analyses.
// ---------------------------------------------------------------------------

void criteria_5_to_7(const Dataset& data) {
  const AttackConfig train_attack = make_attack(0.1, 0.025, 7);
  auto t0 = Clock::now();
  // 6 affine layers with a 30-unit bottleneck straight after the first
  // hidden layer; boundary 2 is the bottleneck output.
  const std::vector<std::size_t> arch{256, 30, 128, 128, 128};
  const auto grid = train_grid(
      data, {Method::baseline, Method::manifold_mixup, Method::adv_train, Method::iat_manifold},
      {1}, arch, 30, train_attack);
  const Model& base = grid_model(grid, Method::baseline, 1);
  const Model& mm = grid_model(grid, Method::manifold_mixup, 1);
  const Model& at = grid_model(grid, Method::adv_train, 1);
  const Model& iat_mm = grid_model(grid, Method::iat_manifold, 1);
  const double grid_secs = std::chrono::duration<double>(Clock::now() - t0).count();

  // --- criterion 5: per-class soft-rank ordering at the bottleneck --------
  t0 = Clock::now();
  {
    const Split rank_split = head(data.test, 2000);
    const auto ranks = [&](const Model& m) {
      std::vector<double> out;
      for (const auto& row : spectrum_report(m, rank_split, 2, "m").classes)
        out.push_back(row.soft_rank);
      return out;
    };
    const auto r_base = ranks(base);
    const auto r_at = ranks(at);
    const auto r_mm = ranks(mm);
    int at_up = 0, mm_down = 0;
    for (std::size_t c = 0; c < r_base.size(); ++c) {
      if (r_at[c] > r_base[c]) ++at_up;
      if (r_mm[c] < r_base[c]) ++mm_down;
    }
    report(5, "soft-rank ordering", at_up >= 7 && mm_down >= 7,
           fmt("at>base on %d/10, mm<base on %d/10 (grid %.0fs)", at_up, mm_down, grid_secs),
           t0);
  }

  // --- criterion 6: random-label compression probe ------------------------
  t0 = Clock::now();
  {
    const Split probe_split = head(data.train, 5000);
    ProbeConfig pc;  // 2 layers, 128 hidden, 200 epochs, shared labels
    const auto probe_of = [&](const Model& m) {
      return random_label_probe(activation_at(m, probe_split.x, 1), pc);
    };
    const double acc_base = probe_of(base);
    const double acc_at = probe_of(at);
    const double acc_iat = probe_of(iat_mm);
    const bool ok = acc_at > acc_base && (acc_at - acc_iat) >= 5.0;
    report(6, "compression probe ordering", ok,
           fmt("probe acc at %.2f, base %.2f, iat-mm %.2f%%", acc_at, acc_base, acc_iat), t0);
  }

  // --- criterion 7: Frobenius norms per layer ------------------------------
  t0 = Clock::now();
  {
    const auto n_at = weight_norms(at);
    const auto n_iat = weight_norms(iat_mm);
    int at_heavier = 0;
    for (std::size_t k = 0; k < n_at.size(); ++k)
      if (n_at[k].frobenius >= n_iat[k].frobenius) ++at_heavier;
    report(7, "weight-norm ordering", at_heavier * 2 > int(n_at.size()),
           fmt("at frobenius >= iat-mm on %d/%zu layers", at_heavier, n_at.size()), t0);
  }
  (void)mm;
}

// ---------------------------------------------------------------------------
// Criteria 8-10: numerical verification of the loss analysis.
// ---------------------------------------------------------------------------

theory::TheoryData synthetic_theory_data(std::size_t n, std::size_t d, Rng& rng,
                                         const theory::LinearModel& m) {
  theory::TheoryData data;
  data.n = n;
  data.d = d;
  data.x.resize(n * d);
  std::vector<double> center(d);
  for (auto& v : center) v = 0.4 + 0.3 * rng.normal();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < d; ++k) data.x[i * d + k] = center[k] + rng.normal();
  data.y.resize(n);
  double wc = 0.0;
  for (std::size_t k = 0; k < d; ++k) wc += m.w[k] * center[k];
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < d; ++k) s += m.w[k] * data.x[i * d + k];
    data.y[i] = s >= wc ? 1 : 0;
  }
  return data;
}

void criteria_8_to_10() {
  AttackConfig attack;
  attack.epsilon = 0.05;
  attack.step_size = 0.025;
  attack.iterations = 8;
  attack.lo = -1e9;
  attack.hi = 1e9;

  Rng rng(5);
  theory::LinearModel model;
  model.w.resize(4);
  for (auto& v : model.w) v = rng.normal();
  const theory::TheoryData data = synthetic_theory_data(8, 4, rng, model);

  // --- criterion 8: decomposition residual and its scale decay ------------
  auto t0 = Clock::now();
  Rng mc_rng = Rng::derive(5, 1);
  const auto reports = theory::lemma1_scaling(model, data, 1.0, 1.0, attack,
                                              {1.0, 0.5, 0.25, 0.125}, 100000, mc_rng);
  const auto& finest = reports.back();
  const bool res_ok = std::abs(finest.residual) <= 3.0 * finest.mc_std_error;
  bool monotone = true;
  for (std::size_t k = 1; k < reports.size(); ++k) {
    const auto& p = reports[k - 1];
    const auto& c = reports[k];
    const double rp = std::abs(p.residual) / (p.scale * p.scale);
    const double rc = std::abs(c.residual) / (c.scale * c.scale);
    const double allowance = 3.0 * (p.mc_std_error / (p.scale * p.scale) +
                                    c.mc_std_error / (c.scale * c.scale));
    if (rc >= rp + allowance) monotone = false;
  }
  report(8, "loss decomposition", res_ok && monotone,
         fmt("|residual| %.2e vs 3se %.2e at s=1/8, decay %s", std::abs(finest.residual),
             3.0 * finest.mc_std_error, monotone ? "monotone" : "NOT monotone"),
         t0);

  // --- criterion 9: regularization terms and the margin condition ---------
  t0 = Clock::now();
  {
    const auto reg = theory::theorem5_terms(model, data, 1.0, 1.0, attack, 0.125);
    bool c2_pos = reg.c2 > 0.0;
    for (std::uint64_t s = 200; s < 210; ++s) {
      Rng r(s);
      theory::LinearModel m2;
      m2.w.resize(4);
      for (auto& v : m2.w) v = r.normal();
      const auto d2 = synthetic_theory_data(8, 4, r, m2);
      if (theory::theorem5_terms(m2, d2, 1.0, 1.0, attack, 1.0).c2 <= 0.0) c2_pos = false;
    }
    const bool expansion_ok =
        std::abs(finest.la_direct - reg.expansion_value) <= 3.0 * finest.mc_std_error;

    Rng prop_rng = Rng::derive(5, 2);
    double worst_c1 = 0.0;
    bool prop1_ok = true;
    for (int k = 0; k < 10000; ++k) {
      const auto inst = theory::random_margin_instance(8, 4, attack, prop_rng);
      const auto res = theory::prop1_check(inst.model, inst.data, attack);
      worst_c1 = std::min(worst_c1, res.c1);
      if (!(res.c1 >= -1e-12)) prop1_ok = false;
    }
    report(9, "regularization terms", c2_pos && expansion_ok && prop1_ok,
           fmt("c2>0 %s, expansion gap %.2e <= %.2e, worst c1 %.1e over 10^4",
               c2_pos ? "yes" : "NO", std::abs(finest.la_direct - reg.expansion_value),
               3.0 * finest.mc_std_error, worst_c1),
           t0);
  }

  // --- criterion 10: lower bound with the extra radius --------------------
  t0 = Clock::now();
  {
    Rng inst_rng = Rng::derive(5, 3);
    const auto inst = theory::symmetric_centered_instance(5, 4, attack, inst_rng);
    bool ok = true;
    std::string detail;
    for (double scale : {0.25, 0.125}) {
      Rng draw_rng = Rng::derive(5, 40 + std::uint64_t(scale * 1000));
      const auto res = theory::theorem1_check(inst.model, inst.data, 1.0, 1.0, attack,
                                              scale, 100000, draw_rng);
      if (!res.precondition_met || res.gap < -res.tolerance) ok = false;
      detail += fmt("s=%.3g gap %.2e tol %.2e; ", scale, res.gap, res.tolerance);
    }
    report(10, "adversarial lower bound", ok, detail, t0);
  }
}

// ---------------------------------------------------------------------------
// Criterion 11: infrastructure exactness.
// ---------------------------------------------------------------------------

void put_u32be(std::ofstream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

void criterion_11() {
  const auto t0 = Clock::now();
  const fs::path tmp = fs::temp_directory_path() / "iat_acceptance";
  fs::remove_all(tmp);
  fs::create_directories(tmp);
  bool ok = true;
  std::string detail;

  // Checkpoint round trip: bit-identical forward pass.
  {
    const Model m = make_mlp(20, {16, 12}, 5, 321);
    const std::string path = (tmp / "model.ckpt").string();
    save_checkpoint(m, "[run]\nname = acceptance\n", path);
    const Model back = load_checkpoint(path).model;
    Rng rng(7);
    Tensor x = Tensor::zeros({8, 20});
    for (auto& v : x.data) v = rng.uniform();
    const bool same = predict(m, x).data == predict(back, x).data;
    if (!same) ok = false;
    detail += fmt("checkpoint %s", same ? "bit-exact" : "MISMATCH");
  }

  // IDX header and consistency examples.
  {
    const fs::path img = tmp / "imgs";
    const fs::path lab = tmp / "labs";
    {
      std::ofstream out(img, std::ios::binary);
      put_u32be(out, 0x803);
      put_u32be(out, 2);
      put_u32be(out, 28);
      put_u32be(out, 28);
      std::vector<unsigned char> payload(1568, 200);
      payload[0] = 255;
      out.write(reinterpret_cast<const char*>(payload.data()), 1568);
    }
    {
      std::ofstream out(lab, std::ios::binary);
      put_u32be(out, 0x801);
      put_u32be(out, 2);
      const unsigned char labels[2] = {4, 9};
      out.write(reinterpret_cast<const char*>(labels), 2);
    }
    bool idx_ok = true;
    try {
      const Split s = load_idx(img.string(), lab.string());
      idx_ok = s.x.rows() == 2 && s.x.cols() == 784 && s.x.data[0] == 1.0 &&
               s.y == std::vector<int>{4, 9};
    } catch (...) {
      idx_ok = false;
    }
    {
      std::ofstream out(lab, std::ios::binary);
      put_u32be(out, 0x801);
      put_u32be(out, 3);
      const unsigned char labels[3] = {1, 2, 3};
      out.write(reinterpret_cast<const char*>(labels), 3);
    }
    bool mismatch_rejected = false;
    try {
      load_idx(img.string(), lab.string());
    } catch (const std::exception&) {
      mismatch_rejected = true;
    }
    if (!idx_ok || !mismatch_rejected) ok = false;
    detail += fmt(", idx %s", idx_ok && mismatch_rejected ? "ok" : "FAILED");
  }

  // Identical config => byte-identical reports.
  {
    const std::string recipe =
        "[run]\n"
        "name = determinism\n"
        "dataset = blobs\n"
        "classes = 3\n"
        "dim = 8\n"
        "separation = 5\n"
        "train_n = 240\n"
        "test_n = 60\n"
        "methods = baseline,adv_train\n"
        "seed = 2\n"
        "threads = 2\n"
        "[model]\n"
        "hidden = 16\n"
        "[train]\n"
        "epochs = 4\n"
        "batch_size = 32\n"
        "[attack]\n"
        "epsilon = 0.05\n"
        "step_size = 0.0125\n"
        "iterations = 5\n"
        "[eval]\n"
        "attacks = clean,fgsm,pgd5\n"
        "epsilon = 0.05\n"
        "unbounded_check = false\n"
        "transfer = true\n"
        "[theory]\n"
        "draws = 5000\n"
        "prop1_instances = 200\n";
    const Config cfg = Config::parse_string(recipe);
    const auto run_a = run_experiment(cfg, (tmp / "run_a").string());
    const auto run_b = run_experiment(cfg, (tmp / "run_b").string());
    bool identical = run_a.exit_code == 0 && run_b.exit_code == 0;
    std::size_t compared = 0;
    for (const auto& entry : fs::directory_iterator(tmp / "run_a")) {
      const std::string fname = entry.path().filename().string();
      if (fname == "manifest.json") continue;  // embeds the output paths
      const std::string other = (tmp / "run_b" / fname).string();
      if (!fs::exists(other) ||
          read_text_file(entry.path().string()) != read_text_file(other))
        identical = false;
      ++compared;
    }
    if (compared == 0) identical = false;
    if (!identical) ok = false;
    detail += fmt(", %zu report files %s", compared,
                  identical ? "byte-identical" : "DIFFER");
  }

  report(11, "infrastructure exactness", ok, detail, t0);
}

}  // namespace

int main() {
  const auto t_start = Clock::now();
  std::printf("acceptance suite starting\n");
  std::fflush(stdout);

  criterion_1();
  criteria_8_to_10();
  criterion_11();

  // The heavy training grids come last so the cheap verdicts print early.
  const Dataset digits = synth_digits(10000, 10000, 77);
  criteria_2_to_4(digits);
  criteria_5_to_7(digits);

  std::size_t failed = 0;
  for (const auto& r : results)
    if (!r.pass) ++failed;
  const double total = std::chrono::duration<double>(Clock::now() - t_start).count();
  std::printf("%zu/%zu criteria passed in %.0f s\n", results.size() - failed,
              results.size(), total);
  return failed == 0 ? 0 : 1;
}
