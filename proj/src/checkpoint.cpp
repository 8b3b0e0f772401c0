#include "iat/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace iat {

namespace {

constexpr int kVersion = 1;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& tok) {
  std::size_t pos = 0;
  double v;
  try {
    v = std::stod(tok, &pos);
  } catch (const std::exception&) {
    throw std::runtime_error("checkpoint: malformed number '" + tok + "'");
  }
  if (pos != tok.size())
    throw std::runtime_error("checkpoint: malformed number '" + tok + "'");
  return v;
}

}  // namespace

void save_checkpoint(const Model& m, const std::string& config_echo, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("checkpoint: cannot write " + path);
  out << "iatlab-checkpoint " << kVersion << "\n";
  out << "seed " << m.seed << "\n";
  out << "input_dim " << m.input_dim << "\n";
  out << "class_count " << m.class_count << "\n";
  out << "layers " << m.layers.size() << "\n";
  for (const auto& l : m.layers) {
    if (l.kind == LayerKind::affine)
      out << "affine " << l.in_dim << " " << l.out_dim << " " << (l.b.empty() ? 0 : 1) << "\n";
    else
      out << "relu\n";
  }
  for (const auto& l : m.layers) {
    if (l.kind != LayerKind::affine) continue;
    for (std::size_t o = 0; o < l.out_dim; ++o) {
      out << "w";
      for (std::size_t i = 0; i < l.in_dim; ++i) out << " " << fmt17(l.w[o * l.in_dim + i]);
      out << "\n";
    }
    if (!l.b.empty()) {
      out << "b";
      for (double v : l.b) out << " " << fmt17(v);
      out << "\n";
    }
  }
  out << "config_begin\n" << config_echo;
  if (!config_echo.empty() && config_echo.back() != '\n') out << "\n";
  out << "config_end\n";
  if (!out) throw std::runtime_error("checkpoint: write failed for " + path);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path);

  std::string word;
  int version = -1;
  in >> word >> version;
  if (word != "iatlab-checkpoint" || !in)
    throw std::runtime_error("checkpoint: not a checkpoint file: " + path);
  if (version != kVersion)
    throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));

  LoadedCheckpoint ck;
  Model& m = ck.model;
  std::size_t layer_count = 0;
  auto expect = [&](const char* key) {
    in >> word;
    if (!in || word != key)
      throw std::runtime_error(std::string("checkpoint: expected '") + key + "'");
  };
  expect("seed");
  in >> m.seed;
  expect("input_dim");
  in >> m.input_dim;
  expect("class_count");
  in >> m.class_count;
  expect("layers");
  in >> layer_count;
  if (!in) throw std::runtime_error("checkpoint: malformed header");

  for (std::size_t k = 0; k < layer_count; ++k) {
    in >> word;
    if (!in) throw std::runtime_error("checkpoint: truncated layer list");
    if (word == "affine") {
      Layer l;
      l.kind = LayerKind::affine;
      int has_bias = 0;
      in >> l.in_dim >> l.out_dim >> has_bias;
      if (!in || l.in_dim == 0 || l.out_dim == 0)
        throw std::runtime_error("checkpoint: malformed affine shape");
      l.w.resize(l.in_dim * l.out_dim);
      if (has_bias) l.b.assign(l.out_dim, 0.0);
      m.layers.push_back(std::move(l));
    } else if (word == "relu") {
      m.layers.push_back(Layer{LayerKind::relu, 0, 0, {}, {}});
    } else {
      throw std::runtime_error("checkpoint: unknown layer kind '" + word + "'");
    }
  }

  for (auto& l : m.layers) {
    if (l.kind != LayerKind::affine) continue;
    for (std::size_t o = 0; o < l.out_dim; ++o) {
      in >> word;
      if (!in || word != "w") throw std::runtime_error("checkpoint: expected weight row");
      for (std::size_t i = 0; i < l.in_dim; ++i) {
        in >> word;
        if (!in) throw std::runtime_error("checkpoint: truncated weight row");
        l.w[o * l.in_dim + i] = parse_double(word);
      }
    }
    if (!l.b.empty()) {
      in >> word;
      if (!in || word != "b") throw std::runtime_error("checkpoint: expected bias row");
      for (std::size_t i = 0; i < l.out_dim; ++i) {
        in >> word;
        if (!in) throw std::runtime_error("checkpoint: truncated bias row");
        l.b[i] = parse_double(word);
      }
    }
  }

  expect("config_begin");
  in >> std::ws;
  std::string line;
  std::ostringstream echo;
  bool closed = false;
  while (std::getline(in, line)) {
    if (line == "config_end") {
      closed = true;
      break;
    }
    echo << line << "\n";
  }
  if (!closed) throw std::runtime_error("checkpoint: missing config_end");
  ck.config_echo = echo.str();
  m.validate();
  return ck;
}

}  // namespace iat
