#pragma once

#include <string>

#include "iat/nn.hpp"

namespace iat {

struct LoadedCheckpoint {
  Model model;
  std::string config_echo;
};

/// Versioned text checkpoint. Parameters are written as decimal text with
/// 17 significant digits, which round-trips binary64 exactly, so
/// load(save(model)) reproduces bit-identical parameters.
void save_checkpoint(const Model& m, const std::string& config_echo, const std::string& path);

/// Throws named errors on version mismatch, malformed shapes or values;
/// never returns a partial model.
LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace iat
