#include "iat/eval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace iat {

namespace {

constexpr std::size_t kEvalChunk = 256;

std::size_t argmax_lowest(const double* q, std::size_t n) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < n; ++c)
    if (q[c] > q[best]) best = c;
  return best;
}

Split chunk_of(const Split& s, std::size_t begin, std::size_t end) {
  Split out;
  const std::size_t dim = s.x.cols();
  out.x = Tensor::matrix(end - begin, dim,
                         {s.x.data.begin() + begin * dim, s.x.data.begin() + end * dim});
  out.y.assign(s.y.begin() + begin, s.y.begin() + end);
  return out;
}

std::size_t count_errors(const Model& m, const Tensor& x, const std::vector<int>& labels) {
  const Tensor logits = predict(m, x);
  std::size_t errors = 0;
  for (std::size_t r = 0; r < logits.rows(); ++r)
    if (static_cast<int>(argmax_lowest(logits.row(r), logits.cols())) != labels[r]) ++errors;
  return errors;
}

}  // namespace

double eval_clean(const Model& m, const Split& test) {
  if (test.size() == 0) throw std::invalid_argument("eval_clean: empty test set");
  std::size_t errors = 0;
  for (std::size_t begin = 0; begin < test.size(); begin += kEvalChunk) {
    const std::size_t end = std::min(begin + kEvalChunk, test.size());
    const Split c = chunk_of(test, begin, end);
    errors += count_errors(m, c.x, c.y);
  }
  return 100.0 * double(errors) / double(test.size());
}

double eval_whitebox(const Model& m, const Split& test, const AttackConfig& attack,
                     Rng* rng) {
  return eval_transfer(m, m, test, attack, rng);
}

double eval_transfer(const Model& target, const Model& source, const Split& test,
                     const AttackConfig& attack, Rng* rng) {
  if (test.size() == 0) throw std::invalid_argument("eval_transfer: empty test set");
  if (target.input_dim != source.input_dim || target.class_count != source.class_count)
    throw std::invalid_argument("eval_transfer: model dimension mismatch");
  attack.validate();
  std::size_t errors = 0;
  for (std::size_t begin = 0; begin < test.size(); begin += kEvalChunk) {
    const std::size_t end = std::min(begin + kEvalChunk, test.size());
    const Split c = chunk_of(test, begin, end);
    const Tensor y = one_hot(c.y, source.class_count);
    const Tensor x_adv = pgd(source, c.x, y, attack, rng);
    errors += count_errors(target, x_adv, c.y);
  }
  return 100.0 * double(errors) / double(test.size());
}

EvalReport sweep(const Model& m, const Split& test, SweepAxis axis,
                 const std::vector<double>& values, const AttackConfig& base,
                 const std::string& model_id) {
  if (values.empty()) throw std::invalid_argument("sweep: empty axis");
  if (!std::is_sorted(values.begin(), values.end()))
    throw std::invalid_argument("sweep: axis values must be sorted ascending");
  EvalReport report;
  report.model_id = model_id;
  for (double v : values) {
    AttackConfig cfg = base;
    if (axis == SweepAxis::epsilon)
      cfg.epsilon = v;
    else
      cfg.iterations = static_cast<int>(v);
    EvalCell cell;
    cell.epsilon = cfg.epsilon;
    cell.step_size = cfg.step_size;
    cell.iterations = cfg.iterations;
    cell.n = test.size();
    if (cfg.epsilon == 0.0) {
      cell.attack_kind = "clean";
      cell.error_pct = eval_clean(m, test);
    } else {
      cell.attack_kind = "pgd";
      cell.error_pct = eval_whitebox(m, test, cfg);
    }
    report.rows.push_back(cell);
  }
  return report;
}

TransferMatrix transfer_matrix(const std::vector<const Model*>& models,
                               const std::vector<std::string>& ids, const Split& test,
                               const AttackConfig& attack) {
  if (models.size() != ids.size() || models.empty())
    throw std::invalid_argument("transfer_matrix: bad model list");
  TransferMatrix tm;
  tm.model_ids = ids;
  tm.error_pct.assign(models.size() * models.size(), 0.0);
  for (std::size_t t = 0; t < models.size(); ++t)
    for (std::size_t s = 0; s < models.size(); ++s)
      tm.error_pct[t * models.size() + s] =
          eval_transfer(*models[t], *models[s], test, attack);
  return tm;
}

std::vector<std::string> transfer_violations(const TransferMatrix& tm, double tolerance_pts) {
  std::vector<std::string> out;
  const std::size_t n = tm.model_ids.size();
  for (std::size_t t = 0; t < n; ++t) {
    const double whitebox = tm.at(t, t);
    for (std::size_t s = 0; s < n; ++s) {
      if (s == t) continue;
      if (tm.at(t, s) > whitebox + tolerance_pts) {
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "black-box attack from %s on %s scores %.2f%% vs white-box %.2f%%",
                      tm.model_ids[s].c_str(), tm.model_ids[t].c_str(), tm.at(t, s), whitebox);
        out.emplace_back(buf);
      }
    }
  }
  return out;
}

}  // namespace iat
