#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "iat/dataset.hpp"
#include "iat/nn.hpp"

namespace iat {

/// Per-class hidden representations captured at one block boundary:
/// rows = examples of that class, cols = units.
struct RepMatrix {
  int class_id = -1;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;
};

/// Forwards every example, captures the activation at `boundary`, groups by
/// true class. Classes with no examples are omitted (with a note appended to
/// `warnings` when provided).
std::vector<RepMatrix> collect_representations(const Model& m, const Split& data,
                                               std::size_t boundary,
                                               std::vector<std::string>* warnings = nullptr);

/// Sum of singular values divided by the largest one. Throws on an all-zero
/// matrix, where the ratio is undefined.
double soft_rank(const RepMatrix& m);

struct SpectrumRow {
  int class_id = -1;
  std::vector<double> singular_values;  // descending
  double soft_rank = 0.0;
};

struct SpectrumReport {
  std::string model_id;
  std::size_t boundary = 0;
  std::vector<SpectrumRow> classes;
};

SpectrumReport spectrum_report(const Model& m, const Split& data, std::size_t boundary,
                               const std::string& model_id);

struct LayerNorms {
  std::size_t layer = 0;  // affine layer ordinal
  double frobenius = 0.0;
  double spectral = 0.0;
};

/// Frobenius and largest-singular-value norms for each affine layer.
std::vector<LayerNorms> weight_norms(const Model& m);

/// Random-label memorization probe over frozen features: a fresh 2-layer
/// MLP fits fixed random binary labels; the final train accuracy measures
/// how separable (uncompressed) the representation is.
struct ProbeConfig {
  std::size_t hidden = 128;
  int epochs = 200;
  std::size_t batch_size = 64;
  double lr = 0.1;
  double momentum = 0.9;
  std::uint64_t label_seed = 9001;  // one label set shared across models
  std::uint64_t probe_seed = 7;     // probe init + shuffling
};

double random_label_probe(const Tensor& features, const ProbeConfig& cfg);

}  // namespace iat
