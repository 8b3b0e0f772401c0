#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "iat/tensor.hpp"

namespace iat {

struct Split {
  Tensor x;            // examples x input_dim, values in [0, 1]
  std::vector<int> y;  // class ids

  std::size_t size() const { return y.size(); }
  void validate(std::size_t class_count) const;
};

struct Dataset {
  std::string name;
  Split train;
  Split test;
  std::size_t class_count = 0;
  std::size_t input_dim = 0;

  void validate() const;
};

/// First `n` examples of a split (n clamped to the split size).
Split head(const Split& s, std::size_t n);

/// Parses an IDX image/label pair: big-endian magic 0x00000803 (images) /
/// 0x00000801 (labels), dimension header, unsigned byte payload. Pixels are
/// scaled to [0, 1] by /255. Throws named errors on bad magic, truncation,
/// or an image/label count mismatch.
Split load_idx(const std::string& images_path, const std::string& labels_path);

/// Loads the conventional four-file layout from a directory:
/// train-images-idx3-ubyte, train-labels-idx1-ubyte, t10k-images-idx3-ubyte,
/// t10k-labels-idx1-ubyte.
Dataset load_idx_dir(const std::string& dir, const std::string& name);

/// Gaussian clusters at seeded random centers, min-max scaled into [0, 1].
/// Cluster sigma is 1 before scaling, so separation >> 1 gives linearly
/// separable classes. Test split holds per_class/5 (at least 1) per class.
Dataset synth_blobs(std::size_t classes, std::size_t per_class, std::size_t dim,
                    double separation, std::uint64_t seed);

/// Procedural 28x28 digit images: glyph prototypes under random rotation,
/// shear, scale, shift and intensity jitter plus pixel noise. Stands in for
/// file-based digits when no IDX data is available; same shape and value
/// range, fully reproducible from the seed.
Dataset synth_digits(std::size_t train_n, std::size_t test_n, std::uint64_t seed);

}  // namespace iat
