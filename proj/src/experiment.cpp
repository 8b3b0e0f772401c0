#include "iat/experiment.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <future>
#include <sstream>
#include <stdexcept>

#include "iat/analysis.hpp"
#include "iat/checkpoint.hpp"
#include "iat/eval.hpp"
#include "iat/report.hpp"
#include "iat/theory.hpp"

namespace iat {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const std::map<std::string, std::set<std::string>> kSchema = {
    {"run",
     {"name", "dataset", "data_dir", "data_seed", "train_n", "test_n", "classes", "dim",
      "separation", "seed", "seeds", "methods", "out", "threads"}},
    {"model", {"hidden"}},
    {"train",
     {"epochs", "batch_size", "lr", "lr_decay", "lr_decay_epochs", "momentum",
      "adv_include_clean"}},
    {"attack", {"epsilon", "step_size", "iterations", "random_start", "lo", "hi"}},
    {"mix", {"alpha", "beta", "manifold_alpha", "manifold_beta", "eligible_layers"}},
    {"eval",
     {"attacks", "epsilon", "step_size", "test_n", "transfer", "transfer_n",
      "transfer_iterations", "transfer_tolerance_pts", "unbounded_check", "unbounded_n",
      "epsilon_sweep", "iteration_sweep", "sweep_n"}},
    {"analysis",
     {"enabled", "rank_boundary", "rank_n", "norms", "probe", "probe_boundary", "probe_n",
      "probe_epochs"}},
    {"theory",
     {"enabled", "n", "d", "alpha", "beta", "epsilon", "draws", "seed", "prop1_instances"}},
};

std::string cell_id(Method method, std::uint64_t seed) {
  return std::string(to_string(method)) + "-s" + std::to_string(seed);
}

}  // namespace

Dataset dataset_from_config(const Config& cfg) {
  const std::string kind = cfg.get_or("run", "dataset", "synthetic-digits");
  const std::uint64_t data_seed = cfg.get_u64_or("run", "data_seed", 77);
  const std::size_t train_n = cfg.get_u64_or("run", "train_n", 10000);
  const std::size_t test_n = cfg.get_u64_or("run", "test_n", 10000);
  if (kind == "synthetic-digits") {
    Dataset d = synth_digits(train_n, test_n, data_seed);
    return d;
  }
  if (kind == "blobs") {
    const std::size_t classes = cfg.get_u64_or("run", "classes", 10);
    const std::size_t dim = cfg.get_u64_or("run", "dim", 16);
    const double separation = cfg.get_double_or("run", "separation", 6.0);
    return synth_blobs(classes, std::max<std::size_t>(train_n / classes, 1), dim, separation,
                       data_seed);
  }
  if (kind == "idx") {
    std::string dir = cfg.get_or("run", "data_dir", "");
    if (dir.empty()) {
      const char* env = std::getenv("IAT_DATA_DIR");
      if (env != nullptr) dir = env;
    }
    if (dir.empty())
      throw std::runtime_error("dataset 'idx' needs [run] data_dir or IAT_DATA_DIR");
    Dataset d = load_idx_dir(dir, "idx");
    if (train_n < d.train.size()) d.train = head(d.train, train_n);
    if (test_n < d.test.size()) d.test = head(d.test, test_n);
    return d;
  }
  throw std::runtime_error("unknown dataset kind: " + kind);
}

AttackConfig train_attack_from_config(const Config& cfg) {
  AttackConfig a;
  a.epsilon = cfg.get_double_or("attack", "epsilon", 0.1);
  a.step_size = cfg.get_double_or("attack", "step_size", 2.0 * a.epsilon / 8.0);
  a.iterations = cfg.get_int_or("attack", "iterations", 7);
  a.random_start = cfg.get_bool_or("attack", "random_start", false);
  a.lo = cfg.get_double_or("attack", "lo", 0.0);
  a.hi = cfg.get_double_or("attack", "hi", 1.0);
  return a;
}

MixPolicy mix_policy_for(const Config& cfg, Method method) {
  MixPolicy p;
  if (method == Method::mixup || method == Method::iat_mixup) {
    p.mode = MixMode::input;
    p.alpha = cfg.get_double_or("mix", "alpha", 1.0);
    p.beta = cfg.get_double_or("mix", "beta", p.alpha);
  } else if (method == Method::manifold_mixup || method == Method::iat_manifold) {
    p.mode = MixMode::manifold;
    p.alpha = cfg.get_double_or("mix", "manifold_alpha", 2.0);
    p.beta = cfg.get_double_or("mix", "manifold_beta", p.alpha);
    p.eligible_layers = cfg.get_sizes_or("mix", "eligible_layers", {0, 1, 2});
  }
  return p;
}

TrainConfig train_config_from(const Config& cfg, Method method, std::uint64_t seed) {
  TrainConfig t;
  t.method = method;
  t.hidden = cfg.get_sizes_or("model", "hidden", {128, 128, 128});
  t.epochs = cfg.get_int_or("train", "epochs", 40);
  t.batch_size = cfg.get_u64_or("train", "batch_size", 64);
  t.lr.initial = cfg.get_double_or("train", "lr", 0.1);
  t.lr.decay_factor = cfg.get_double_or("train", "lr_decay", 0.1);
  t.lr.decay_epochs = cfg.get_ints_or("train", "lr_decay_epochs", {20, 30});
  t.momentum = cfg.get_double_or("train", "momentum", 0.9);
  t.adv_include_clean = cfg.get_bool_or("train", "adv_include_clean", true);
  t.attack = train_attack_from_config(cfg);
  t.mix = mix_policy_for(cfg, method);
  t.seed = seed;
  return t;
}

EvalAttackSpec eval_attack_from_token(const Config& cfg, const std::string& token) {
  EvalAttackSpec spec;
  spec.config.epsilon = cfg.get_double_or("eval", "epsilon", 0.1);
  spec.config.step_size =
      cfg.get_double_or("eval", "step_size", 2.0 * spec.config.epsilon / 8.0);
  spec.config.lo = cfg.get_double_or("attack", "lo", 0.0);
  spec.config.hi = cfg.get_double_or("attack", "hi", 1.0);
  if (token == "clean") {
    spec.kind = "clean";
    spec.config.epsilon = 0.0;
    spec.config.iterations = 0;
    return spec;
  }
  if (token == "fgsm") {
    spec.kind = "fgsm";
    spec.config.step_size = spec.config.epsilon;
    spec.config.iterations = 1;
    return spec;
  }
  if (token.rfind("pgd", 0) == 0) {
    spec.kind = "pgd";
    spec.config.iterations = std::stoi(token.substr(3));
    if (spec.config.iterations < 1)
      throw std::runtime_error("eval attack needs >= 1 iteration: " + token);
    return spec;
  }
  throw std::runtime_error("unknown eval attack token: " + token);
}

namespace {

struct Cell {
  Method method;
  std::uint64_t seed;
  std::string id;
  TrainResult result;
};

void write_history_csv(const TrainHistory& h, const std::string& path) {
  CsvWriter csv({"epoch", "clean_loss", "adv_loss", "combined_loss", "train_error_pct"});
  for (const auto& r : h.epochs)
    csv.add_row_numeric({double(r.epoch), r.clean_loss, r.adv_loss, r.combined_loss,
                         r.train_error_pct});
  csv.write(path);
}

json theory_stage(const Config& cfg, std::vector<std::string>& diagnostics) {
  const std::size_t n = cfg.get_u64_or("theory", "n", 8);
  const std::size_t d = cfg.get_u64_or("theory", "d", 4);
  const double alpha = cfg.get_double_or("theory", "alpha", 1.0);
  const double beta = cfg.get_double_or("theory", "beta", 1.0);
  const std::size_t draws = cfg.get_u64_or("theory", "draws", 100000);
  const std::uint64_t seed = cfg.get_u64_or("theory", "seed", 5);
  const std::size_t prop1_instances = cfg.get_u64_or("theory", "prop1_instances", 10000);

  AttackConfig attack;
  attack.epsilon = cfg.get_double_or("theory", "epsilon", 0.05);
  attack.step_size = attack.epsilon / 2.0;
  attack.iterations = 8;
  attack.lo = -1e9;
  attack.hi = 1e9;

  json out;
  out["inputs"] = {{"n", n},         {"d", d},          {"alpha", alpha},
                   {"beta", beta},   {"draws", draws},  {"seed", seed},
                   {"epsilon", attack.epsilon}};

  Rng rng = Rng::derive(seed, 0);
  theory::LinearModel model;
  model.w.resize(d);
  for (auto& v : model.w) v = rng.normal();
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
  for (std::size_t k = 0; k < d; ++k) wc += model.w[k] * center[k];
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < d; ++k) s += model.w[k] * data.x[i * d + k];
    data.y[i] = s >= wc ? 1 : 0;
  }

  // Second-order decomposition with shrinking interpolation strength.
  const std::vector<double> scales{1.0, 0.5, 0.25, 0.125};
  Rng mc_rng = Rng::derive(seed, 1);
  const auto reports =
      theory::lemma1_scaling(model, data, alpha, beta, attack, scales, draws, mc_rng);
  json decomposition = json::array();
  // Ratios carry Monte-Carlo noise of se/s^2; the decrease is judged up to
  // 3 combined standard errors.
  bool monotone = true;
  for (std::size_t k = 0; k < reports.size(); ++k) {
    const auto& r = reports[k];
    const double ratio = std::abs(r.residual) / (r.scale * r.scale);
    if (k > 0) {
      const auto& p = reports[k - 1];
      const double prev_ratio = std::abs(p.residual) / (p.scale * p.scale);
      const double allowance = 3.0 * (p.mc_std_error / (p.scale * p.scale) +
                                      r.mc_std_error / (r.scale * r.scale));
      if (ratio >= prev_ratio + allowance) monotone = false;
    }
    decomposition.push_back({{"scale", r.scale},
                             {"base_loss", r.base_loss},
                             {"g1", r.g1},
                             {"g2", r.g2},
                             {"g3", r.g3},
                             {"mixed_loss_mc", r.la_direct},
                             {"residual", r.residual},
                             {"residual_over_scale_sq", ratio},
                             {"mc_std_error", r.mc_std_error}});
  }
  const auto& finest = reports.back();
  const bool lemma_ok = std::abs(finest.residual) <= 3.0 * finest.mc_std_error;
  if (!lemma_ok)
    diagnostics.push_back("decomposition residual exceeds 3 std errors at scale 1/8");
  if (!monotone)
    diagnostics.push_back("decomposition residual/scale^2 is not monotone decreasing");
  out["decomposition"] = {{"records", decomposition},
                          {"residual_within_3se_at_finest", lemma_ok},
                          {"ratio_monotone_decreasing", monotone},
                          {"verdict", lemma_ok && monotone}};

  // Regularization coefficients and the two-term expansion at the finest scale.
  const auto reg = theory::theorem5_terms(model, data, alpha, beta, attack, 0.125);
  const bool c2_pos = reg.c2 > 0.0;
  const bool expansion_ok =
      std::abs(finest.la_direct - reg.expansion_value) <= 3.0 * finest.mc_std_error;
  if (!c2_pos) diagnostics.push_back("second-order coefficient c2 is not positive");
  if (!expansion_ok)
    diagnostics.push_back("two-term expansion misses Monte-Carlo loss by > 3 std errors");
  out["regularization"] = {{"c1", reg.c1},
                           {"c2", reg.c2},
                           {"base_loss", reg.base_loss},
                           {"expansion_value", reg.expansion_value},
                           {"mixed_loss_mc", finest.la_direct},
                           {"mc_std_error", finest.mc_std_error},
                           {"c_x", reg.c_x},
                           {"q_hat", reg.q_hat},
                           {"verdict", c2_pos && expansion_ok}};

  // Margin condition -> non-negative first-order coefficient, in bulk.
  Rng prop_rng = Rng::derive(seed, 2);
  double worst_c1 = 0.0;
  bool prop1_ok = true;
  for (std::size_t k = 0; k < prop1_instances; ++k) {
    const auto inst = theory::random_margin_instance(n, d, attack, prop_rng);
    const auto res = theory::prop1_check(inst.model, inst.data, attack, alpha, beta);
    worst_c1 = std::min(worst_c1, res.c1);
    if (!(res.c1 >= -1e-12)) prop1_ok = false;
  }
  if (!prop1_ok) diagnostics.push_back("margin condition produced a negative c1");
  out["margin_condition"] = {{"instances", prop1_instances},
                             {"worst_c1", worst_c1},
                             {"verdict", prop1_ok}};

  // Lower bound with the data-dependent extra radius, on centered instances.
  json lower = json::array();
  bool lower_ok = true;
  Rng t1_rng = Rng::derive(seed, 3);
  const auto inst = theory::symmetric_centered_instance(n / 2 + 1, d, attack, t1_rng);
  for (double scale : {0.25, 0.125}) {
    Rng draw_rng = Rng::derive(seed, 4 + std::uint64_t(scale * 1000));
    const auto t1 = theory::theorem1_check(inst.model, inst.data, alpha, beta, attack,
                                           scale, draws, draw_rng);
    const bool ok = t1.precondition_met && t1.gap >= -t1.tolerance;
    if (!ok) lower_ok = false;
    lower.push_back({{"scale", scale},
                     {"precondition_met", t1.precondition_met},
                     {"note", t1.precondition_note},
                     {"lhs", t1.lhs},
                     {"rhs", t1.rhs},
                     {"gap", t1.gap},
                     {"tolerance", t1.tolerance},
                     {"c_x", t1.c_x},
                     {"verdict", ok}});
  }
  if (!lower_ok) diagnostics.push_back("lower-bound gap fell below tolerance");
  out["lower_bound"] = {{"records", lower}, {"verdict", lower_ok}};

  // Empirical adversarial gap is clamped at zero by definition.
  std::vector<std::string> gap_warnings;
  const double q_hat = theory::adversarial_gap(model, data, attack, &gap_warnings);
  out["adversarial_gap"] = {{"q_hat", q_hat}, {"warnings", gap_warnings}};
  return out;
}

}  // namespace

std::string theory_report_json(const Config& cfg, std::vector<std::string>& diagnostics) {
  return theory_stage(cfg, diagnostics).dump(2) + "\n";
}

ExperimentOutcome run_experiment(const Config& cfg, const std::string& out_dir_override,
                                 std::optional<std::uint64_t> seed_override) {
  cfg.require_known(kSchema);
  ExperimentOutcome outcome;

  const std::string name = cfg.get_or("run", "name", "experiment");
  std::string out_dir = out_dir_override.empty() ? cfg.get_or("run", "out", "runs/" + name)
                                                 : out_dir_override;
  fs::create_directories(out_dir);
  outcome.out_dir = out_dir;

  json manifest;
  manifest["name"] = name;
  char hash_hex[24];
  std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                static_cast<unsigned long long>(cfg.hash()));
  manifest["config_hash"] = hash_hex;
  manifest["config"] = cfg.text();
  manifest["status"] = "partial";

  const auto write_manifest = [&]() {
    write_text_file(out_dir + "/manifest.json", manifest.dump(2) + "\n");
  };

  try {
    // ---- dataset ----------------------------------------------------------
    const Dataset data = dataset_from_config(cfg);
    manifest["dataset"] = {{"name", data.name},
                           {"train_n", data.train.size()},
                           {"test_n", data.test.size()},
                           {"classes", data.class_count},
                           {"input_dim", data.input_dim}};

    // ---- training grid ----------------------------------------------------
    std::vector<std::string> method_names =
        cfg.get_list_or("run", "methods", {"baseline"});
    std::vector<std::uint64_t> seeds;
    if (seed_override) {
      seeds = {*seed_override};
    } else {
      for (const auto& s : cfg.get_list_or("run", "seeds", {}))
        seeds.push_back(std::stoull(s));
      if (seeds.empty()) seeds = {cfg.get_u64_or("run", "seed", 1)};
    }
    const std::size_t threads = cfg.get_u64_or("run", "threads", 2);

    std::vector<std::pair<Method, std::uint64_t>> grid;
    for (const auto& mname : method_names)
      for (std::uint64_t s : seeds) grid.emplace_back(method_from_string(mname), s);

    std::vector<Cell> cells(grid.size());
    for (std::size_t begin = 0; begin < grid.size(); begin += threads) {
      const std::size_t end = std::min(begin + threads, grid.size());
      std::vector<std::future<TrainResult>> wave;
      for (std::size_t k = begin; k < end; ++k) {
        const TrainConfig tc = train_config_from(cfg, grid[k].first, grid[k].second);
        wave.push_back(std::async(std::launch::async,
                                  [tc, &data]() { return train(tc, data); }));
      }
      for (std::size_t k = begin; k < end; ++k) {
        cells[k].method = grid[k].first;
        cells[k].seed = grid[k].second;
        cells[k].id = cell_id(grid[k].first, grid[k].second);
        cells[k].result = wave[k - begin].get();
        if (cells[k].result.history.diverged)
          outcome.diagnostics.push_back("training diverged in cell " + cells[k].id);
      }
    }

    json cell_list = json::array();
    for (const Cell& c : cells) {
      const std::string ckpt = out_dir + "/ckpt_" + c.id + ".txt";
      save_checkpoint(c.result.model, cfg.text(), ckpt);
      const std::string hist = out_dir + "/history_" + c.id + ".csv";
      write_history_csv(c.result.history, hist);
      outcome.files.push_back(ckpt);
      outcome.files.push_back(hist);
      cell_list.push_back({{"id", c.id},
                           {"method", to_string(c.method)},
                           {"seed", c.seed},
                           {"diverged", c.result.history.diverged},
                           {"checkpoint", ckpt}});
    }
    manifest["cells"] = cell_list;

    // First-seed models drive the cross-model stages.
    std::vector<const Cell*> lead_cells;
    for (const Cell& c : cells)
      if (c.seed == seeds.front()) lead_cells.push_back(&c);

    // ---- evaluation -------------------------------------------------------
    if (cfg.has_section("eval")) {
      const std::size_t eval_n = cfg.get_u64_or("eval", "test_n", data.test.size());
      const Split eval_split = head(data.test, eval_n);
      const auto tokens =
          cfg.get_list_or("eval", "attacks", {"clean", "fgsm", "pgd7", "pgd20"});

      CsvWriter whitebox({"model_id", "attack_kind", "epsilon", "step_size", "iterations",
                          "error_pct", "n"});
      std::map<std::string, std::map<std::string, double>> table;
      for (const Cell& c : cells) {
        for (const auto& token : tokens) {
          const EvalAttackSpec spec = eval_attack_from_token(cfg, token);
          const double err = spec.kind == "clean"
                                 ? eval_clean(c.result.model, eval_split)
                                 : eval_whitebox(c.result.model, eval_split, spec.config);
          table[c.id][token] = err;
          whitebox.add_row({c.id, spec.kind, CsvWriter::num(spec.config.epsilon),
                            CsvWriter::num(spec.config.step_size),
                            std::to_string(spec.config.iterations), CsvWriter::num(err),
                            std::to_string(eval_split.size())});
        }
        // Iterative attacks with small steps should beat the single big step.
        if (table[c.id].count("fgsm") && table[c.id].count("pgd7") &&
            table[c.id]["pgd7"] < table[c.id]["fgsm"])
          outcome.diagnostics.push_back("pgd7 weaker than fgsm on " + c.id);
      }
      const std::string wb_path = out_dir + "/whitebox.csv";
      whitebox.write(wb_path);
      outcome.files.push_back(wb_path);

      if (cfg.get_bool_or("eval", "transfer", true) && lead_cells.size() >= 2) {
        EvalAttackSpec spec = eval_attack_from_token(
            cfg, "pgd" + std::to_string(cfg.get_int_or("eval", "transfer_iterations", 7)));
        std::vector<const Model*> models;
        std::vector<std::string> ids;
        for (const Cell* c : lead_cells) {
          models.push_back(&c->result.model);
          ids.push_back(c->id);
        }
        const std::size_t transfer_n =
            cfg.get_u64_or("eval", "transfer_n", eval_split.size());
        const Split transfer_split = head(eval_split, transfer_n);
        const TransferMatrix tm = transfer_matrix(models, ids, transfer_split, spec.config);
        CsvWriter tcsv({"target", "source", "epsilon", "step_size", "iterations",
                        "error_pct", "n"});
        for (std::size_t t = 0; t < ids.size(); ++t)
          for (std::size_t s = 0; s < ids.size(); ++s)
            tcsv.add_row({ids[t], ids[s], CsvWriter::num(spec.config.epsilon),
                          CsvWriter::num(spec.config.step_size),
                          std::to_string(spec.config.iterations),
                          CsvWriter::num(tm.at(t, s)), std::to_string(transfer_split.size())});
        const std::string t_path = out_dir + "/transfer.csv";
        tcsv.write(t_path);
        outcome.files.push_back(t_path);
        const double tol = cfg.get_double_or("eval", "transfer_tolerance_pts", 2.0);
        for (const auto& v : transfer_violations(tm, tol)) outcome.diagnostics.push_back(v);
      }

      if (cfg.get_bool_or("eval", "unbounded_check", true)) {
        const std::size_t n_sub = cfg.get_u64_or("eval", "unbounded_n", 500);
        AttackConfig unbounded;
        unbounded.epsilon = cfg.get_double_or("attack", "hi", 1.0) -
                            cfg.get_double_or("attack", "lo", 0.0);
        unbounded.step_size = unbounded.epsilon / 10.0;
        unbounded.iterations = 30;
        unbounded.lo = cfg.get_double_or("attack", "lo", 0.0);
        unbounded.hi = cfg.get_double_or("attack", "hi", 1.0);
        const Split sub = head(eval_split, n_sub);
        for (const Cell* c : lead_cells) {
          const double err = eval_whitebox(c->result.model, sub, unbounded);
          if (err < 99.0)
            outcome.diagnostics.push_back("unbounded attack only reaches " +
                                          CsvWriter::num(err) + "% error on " + c->id);
        }
      }

      const auto eps_axis = cfg.get_doubles_or("eval", "epsilon_sweep", {});
      const auto iter_axis = cfg.get_doubles_or("eval", "iteration_sweep", {});
      const std::size_t sweep_n = cfg.get_u64_or("eval", "sweep_n", 1000);
      if (!eps_axis.empty() || !iter_axis.empty()) {
        const Split sub = head(eval_split, sweep_n);
        const EvalAttackSpec base = eval_attack_from_token(cfg, "pgd20");
        CsvWriter scsv({"model_id", "attack_kind", "epsilon", "step_size", "iterations",
                        "error_pct", "n"});
        for (const Cell* c : lead_cells) {
          if (!eps_axis.empty())
            for (const auto& row :
                 sweep(c->result.model, sub, SweepAxis::epsilon, eps_axis, base.config, c->id)
                     .rows)
              scsv.add_row({c->id, row.attack_kind, CsvWriter::num(row.epsilon),
                            CsvWriter::num(row.step_size), std::to_string(row.iterations),
                            CsvWriter::num(row.error_pct), std::to_string(row.n)});
          if (!iter_axis.empty())
            for (const auto& row : sweep(c->result.model, sub, SweepAxis::iterations,
                                         iter_axis, base.config, c->id)
                     .rows)
              scsv.add_row({c->id, row.attack_kind, CsvWriter::num(row.epsilon),
                            CsvWriter::num(row.step_size), std::to_string(row.iterations),
                            CsvWriter::num(row.error_pct), std::to_string(row.n)});
        }
        const std::string s_path = out_dir + "/sweeps.csv";
        scsv.write(s_path);
        outcome.files.push_back(s_path);
      }
    }

    // ---- representation analysis -------------------------------------------
    if (cfg.has_section("analysis") && cfg.get_bool_or("analysis", "enabled", true)) {
      const std::size_t rank_boundary = cfg.get_u64_or("analysis", "rank_boundary", 2);
      const std::size_t rank_n = cfg.get_u64_or("analysis", "rank_n", 2000);
      const Split rank_split = head(data.test, rank_n);
      CsvWriter spectra({"model_id", "class", "k", "sigma_k"});
      CsvWriter ranks({"model_id", "class", "soft_rank"});
      for (const Cell* c : lead_cells) {
        const SpectrumReport rep =
            spectrum_report(c->result.model, rank_split, rank_boundary, c->id);
        for (const auto& row : rep.classes) {
          for (std::size_t k = 0; k < row.singular_values.size(); ++k)
            spectra.add_row({c->id, std::to_string(row.class_id), std::to_string(k),
                             CsvWriter::num(row.singular_values[k])});
          ranks.add_row({c->id, std::to_string(row.class_id), CsvWriter::num(row.soft_rank)});
        }
      }
      spectra.write(out_dir + "/spectra.csv");
      ranks.write(out_dir + "/soft_rank.csv");
      outcome.files.push_back(out_dir + "/spectra.csv");
      outcome.files.push_back(out_dir + "/soft_rank.csv");

      if (cfg.get_bool_or("analysis", "norms", true)) {
        CsvWriter norms({"model_id", "layer", "frobenius", "spectral"});
        for (const Cell* c : lead_cells)
          for (const auto& l : weight_norms(c->result.model))
            norms.add_row({c->id, std::to_string(l.layer), CsvWriter::num(l.frobenius),
                           CsvWriter::num(l.spectral)});
        norms.write(out_dir + "/norms.csv");
        outcome.files.push_back(out_dir + "/norms.csv");
      }

      if (cfg.get_bool_or("analysis", "probe", true)) {
        const std::size_t probe_boundary = cfg.get_u64_or("analysis", "probe_boundary", 1);
        const std::size_t probe_n = cfg.get_u64_or("analysis", "probe_n", 5000);
        ProbeConfig pc;
        pc.epochs = cfg.get_int_or("analysis", "probe_epochs", 200);
        const Split probe_split = head(data.train, probe_n);
        CsvWriter probe({"model_id", "boundary", "n", "accuracy_pct"});
        for (const Cell* c : lead_cells) {
          const Tensor feats =
              activation_at(c->result.model, probe_split.x, probe_boundary);
          const double acc = random_label_probe(feats, pc);
          probe.add_row({c->id, std::to_string(probe_boundary),
                         std::to_string(probe_split.size()), CsvWriter::num(acc)});
        }
        probe.write(out_dir + "/probe.csv");
        outcome.files.push_back(out_dir + "/probe.csv");
      }
    }

    // ---- theory checks ------------------------------------------------------
    if (cfg.has_section("theory") && cfg.get_bool_or("theory", "enabled", true)) {
      const json report = theory_stage(cfg, outcome.diagnostics);
      write_text_file(out_dir + "/theory_report.json", report.dump(2) + "\n");
      outcome.files.push_back(out_dir + "/theory_report.json");
    }

    manifest["status"] = "complete";
  } catch (const std::exception& e) {
    outcome.diagnostics.push_back(std::string("stage failure: ") + e.what());
    manifest["status"] = "failed";
  }

  manifest["diagnostics"] = outcome.diagnostics;
  manifest["files"] = outcome.files;
  write_manifest();
  outcome.files.push_back(out_dir + "/manifest.json");
  outcome.exit_code =
      (manifest["status"] == "complete" && outcome.diagnostics.empty()) ? 0 : 1;
  return outcome;
}

}  // namespace iat
