// Command-line front end: training, attack evaluation, transfer matrices,
// epsilon/iteration sweeps, representation analysis, and the numerical
// theory checks, all driven by one flat config file.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>

#include "iat/analysis.hpp"
#include "iat/checkpoint.hpp"
#include "iat/eval.hpp"
#include "iat/experiment.hpp"
#include "iat/report.hpp"

namespace fs = std::filesystem;
using namespace iat;

namespace {

Config load_config(const std::string& path) {
  if (path.empty()) return Config::parse_string("");
  return Config::parse_file(path);
}

int cmd_run(const std::string& config_path, const std::string& out_dir,
            std::optional<std::uint64_t> seed) {
  const auto outcome = run_experiment(load_config(config_path), out_dir, seed);
  for (const auto& d : outcome.diagnostics) std::cerr << "diagnostic: " << d << "\n";
  std::cout << "artifacts in " << outcome.out_dir << "\n";
  return outcome.exit_code;
}

int cmd_train(const std::string& config_path, const std::string& method_name,
              std::optional<std::uint64_t> seed, std::string out_dir) {
  const Config cfg = load_config(config_path);
  const Method method = method_from_string(method_name);
  const std::uint64_t s = seed.value_or(cfg.get_u64_or("run", "seed", 1));
  const Dataset data = dataset_from_config(cfg);
  const TrainConfig tc = train_config_from(cfg, method, s);
  const TrainResult result = train(tc, data);
  if (out_dir.empty()) out_dir = ".";
  fs::create_directories(out_dir);
  const std::string id = std::string(to_string(method)) + "-s" + std::to_string(s);
  save_checkpoint(result.model, cfg.text(), out_dir + "/ckpt_" + id + ".txt");
  CsvWriter csv({"epoch", "clean_loss", "adv_loss", "combined_loss", "train_error_pct"});
  for (const auto& r : result.history.epochs)
    csv.add_row_numeric(
        {double(r.epoch), r.clean_loss, r.adv_loss, r.combined_loss, r.train_error_pct});
  csv.write(out_dir + "/history_" + id + ".csv");
  std::cout << "checkpoint: " << out_dir + "/ckpt_" + id + ".txt" << "\n";
  if (result.history.diverged) {
    std::cerr << "training diverged\n";
    return 1;
  }
  return 0;
}

int cmd_eval(const std::string& config_path, const std::string& ckpt_path,
             const std::string& attacks_csv, const std::string& out_file) {
  const Config cfg = load_config(config_path);
  const Model model = load_checkpoint(ckpt_path).model;
  const Dataset data = dataset_from_config(cfg);
  std::vector<std::string> tokens;
  {
    std::stringstream ss(attacks_csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) tokens.push_back(tok);
  }
  CsvWriter csv({"model_id", "attack_kind", "epsilon", "step_size", "iterations",
                 "error_pct", "n"});
  const std::string id = fs::path(ckpt_path).stem().string();
  for (const auto& token : tokens) {
    const EvalAttackSpec spec = eval_attack_from_token(cfg, token);
    const double err = spec.kind == "clean" ? eval_clean(model, data.test)
                                            : eval_whitebox(model, data.test, spec.config);
    csv.add_row({id, spec.kind, CsvWriter::num(spec.config.epsilon),
                 CsvWriter::num(spec.config.step_size), std::to_string(spec.config.iterations),
                 CsvWriter::num(err), std::to_string(data.test.size())});
    std::cout << token << ": " << err << "% error\n";
  }
  if (!out_file.empty()) csv.write(out_file);
  return 0;
}

int cmd_transfer(const std::string& config_path, const std::vector<std::string>& ckpts,
                 const std::string& out_file) {
  const Config cfg = load_config(config_path);
  const Dataset data = dataset_from_config(cfg);
  std::vector<Model> models;
  std::vector<std::string> ids;
  for (const auto& path : ckpts) {
    models.push_back(load_checkpoint(path).model);
    ids.push_back(fs::path(path).stem().string());
  }
  std::vector<const Model*> ptrs;
  for (const auto& m : models) ptrs.push_back(&m);
  const EvalAttackSpec spec = eval_attack_from_token(
      cfg, "pgd" + std::to_string(cfg.get_int_or("eval", "transfer_iterations", 7)));
  const TransferMatrix tm = transfer_matrix(ptrs, ids, data.test, spec.config);
  CsvWriter csv({"target", "source", "epsilon", "step_size", "iterations", "error_pct", "n"});
  for (std::size_t t = 0; t < ids.size(); ++t)
    for (std::size_t s = 0; s < ids.size(); ++s) {
      csv.add_row({ids[t], ids[s], CsvWriter::num(spec.config.epsilon),
                   CsvWriter::num(spec.config.step_size),
                   std::to_string(spec.config.iterations), CsvWriter::num(tm.at(t, s)),
                   std::to_string(data.test.size())});
      std::cout << ids[t] << " <- " << ids[s] << ": " << tm.at(t, s) << "%\n";
    }
  if (!out_file.empty()) csv.write(out_file);
  for (const auto& v : transfer_violations(tm, 2.0)) std::cerr << "diagnostic: " << v << "\n";
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& ckpt_path,
              const std::string& axis_name, const std::vector<double>& values,
              const std::string& out_file) {
  const Config cfg = load_config(config_path);
  const Model model = load_checkpoint(ckpt_path).model;
  const Dataset data = dataset_from_config(cfg);
  const SweepAxis axis =
      axis_name == "epsilon" ? SweepAxis::epsilon : SweepAxis::iterations;
  const EvalAttackSpec base = eval_attack_from_token(cfg, "pgd20");
  const std::string id = fs::path(ckpt_path).stem().string();
  const EvalReport rep = sweep(model, data.test, axis, values, base.config, id);
  CsvWriter csv({"model_id", "attack_kind", "epsilon", "step_size", "iterations",
                 "error_pct", "n"});
  for (const auto& row : rep.rows) {
    csv.add_row({id, row.attack_kind, CsvWriter::num(row.epsilon),
                 CsvWriter::num(row.step_size), std::to_string(row.iterations),
                 CsvWriter::num(row.error_pct), std::to_string(row.n)});
    std::cout << axis_name << "=" << (axis == SweepAxis::epsilon ? row.epsilon
                                                                 : double(row.iterations))
              << ": " << row.error_pct << "%\n";
  }
  if (!out_file.empty()) csv.write(out_file);
  return 0;
}

int cmd_analyze(const std::string& config_path, const std::string& ckpt_path,
                std::size_t boundary, const std::string& out_dir) {
  const Config cfg = load_config(config_path);
  const Model model = load_checkpoint(ckpt_path).model;
  const Dataset data = dataset_from_config(cfg);
  const std::string id = fs::path(ckpt_path).stem().string();

  const SpectrumReport rep = spectrum_report(model, data.test, boundary, id);
  std::cout << "soft ranks at boundary " << boundary << ":";
  for (const auto& row : rep.classes) std::cout << " " << row.soft_rank;
  std::cout << "\n";
  for (const auto& l : weight_norms(model))
    std::cout << "layer " << l.layer << ": frobenius " << l.frobenius << ", spectral "
              << l.spectral << "\n";

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    CsvWriter ranks({"model_id", "class", "soft_rank"});
    CsvWriter spectra({"model_id", "class", "k", "sigma_k"});
    for (const auto& row : rep.classes) {
      ranks.add_row({id, std::to_string(row.class_id), CsvWriter::num(row.soft_rank)});
      for (std::size_t k = 0; k < row.singular_values.size(); ++k)
        spectra.add_row({id, std::to_string(row.class_id), std::to_string(k),
                         CsvWriter::num(row.singular_values[k])});
    }
    ranks.write(out_dir + "/soft_rank.csv");
    spectra.write(out_dir + "/spectra.csv");
    CsvWriter norms({"model_id", "layer", "frobenius", "spectral"});
    for (const auto& l : weight_norms(model))
      norms.add_row(
          {id, std::to_string(l.layer), CsvWriter::num(l.frobenius), CsvWriter::num(l.spectral)});
    norms.write(out_dir + "/norms.csv");
  }
  return 0;
}

int cmd_verify_theory(const std::string& config_path, const std::string& out_file) {
  const Config cfg = load_config(config_path);
  std::vector<std::string> diagnostics;
  const std::string report = theory_report_json(cfg, diagnostics);
  if (!out_file.empty())
    write_text_file(out_file, report);
  else
    std::cout << report;
  for (const auto& d : diagnostics) std::cerr << "diagnostic: " << d << "\n";
  return diagnostics.empty() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adversarial-robustness laboratory: interpolated adversarial training, "
               "attack evaluation, and analysis tools"};
  app.require_subcommand(1);

  std::string config_path, out_path, method, attacks = "clean,fgsm,pgd7,pgd20";
  std::string ckpt, axis = "epsilon";
  std::vector<std::string> ckpts;
  std::vector<double> values;
  std::size_t boundary = 2;
  std::optional<std::uint64_t> seed;
  std::uint64_t seed_raw = 0;

  auto* run = app.add_subcommand("run", "run a full experiment recipe");
  run->add_option("--config", config_path, "recipe file")->required();
  run->add_option("--out", out_path, "output directory");
  auto* run_seed = run->add_option("--seed", seed_raw, "override the training seed");

  auto* tr = app.add_subcommand("train", "train one method");
  tr->add_option("--config", config_path, "recipe file")->required();
  tr->add_option("--method", method, "training method")->required();
  auto* tr_seed = tr->add_option("--seed", seed_raw, "seed");
  tr->add_option("--out", out_path, "output directory");

  auto* ev = app.add_subcommand("eval", "white-box evaluation of a checkpoint");
  ev->add_option("--config", config_path, "recipe file")->required();
  ev->add_option("--checkpoint", ckpt, "checkpoint path")->required();
  ev->add_option("--attacks", attacks, "comma list: clean,fgsm,pgd<N>");
  ev->add_option("--out", out_path, "CSV output path");

  auto* tf = app.add_subcommand("transfer", "black-box transfer matrix");
  tf->add_option("--config", config_path, "recipe file")->required();
  tf->add_option("--checkpoints", ckpts, "checkpoint paths")->required()->expected(2, -1);
  tf->add_option("--out", out_path, "CSV output path");

  auto* sw = app.add_subcommand("sweep", "epsilon or iteration sweep");
  sw->add_option("--config", config_path, "recipe file")->required();
  sw->add_option("--checkpoint", ckpt, "checkpoint path")->required();
  sw->add_option("--axis", axis, "epsilon | iterations");
  sw->add_option("--values", values, "axis values, ascending")->required()->expected(1, -1);
  sw->add_option("--out", out_path, "CSV output path");

  auto* an = app.add_subcommand("analyze", "singular spectra, soft ranks, weight norms");
  an->add_option("--config", config_path, "recipe file")->required();
  an->add_option("--checkpoint", ckpt, "checkpoint path")->required();
  an->add_option("--boundary", boundary, "representation boundary");
  an->add_option("--out", out_path, "output directory");

  auto* vt = app.add_subcommand("verify-theory", "numerical checks of the loss analysis");
  vt->add_option("--config", config_path, "recipe file (optional)");
  vt->add_option("--out", out_path, "JSON output path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      if (run_seed->count()) seed = seed_raw;
      return cmd_run(config_path, out_path, seed);
    }
    if (tr->parsed()) {
      if (tr_seed->count()) seed = seed_raw;
      return cmd_train(config_path, method, seed, out_path);
    }
    if (ev->parsed()) return cmd_eval(config_path, ckpt, attacks, out_path);
    if (tf->parsed()) return cmd_transfer(config_path, ckpts, out_path);
    if (sw->parsed()) return cmd_sweep(config_path, ckpt, axis, values, out_path);
    if (an->parsed()) return cmd_analyze(config_path, ckpt, boundary, out_path);
    if (vt->parsed()) return cmd_verify_theory(config_path, out_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
