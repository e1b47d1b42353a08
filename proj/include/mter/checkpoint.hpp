#pragma once

#include <string>

#include "mter/corpus.hpp"
#include "mter/model.hpp"
#include "mter/training.hpp"

namespace mter {

struct Checkpoint {
  FactorModel model;
  IdMap users, items, features, opinions;
  int rating_scale = 5;
  TrainConfig config;
};

// Writes manifest.json plus one raw array file per parameter block
// (64-bit little-endian doubles, row-major, last core index fastest).
void save_checkpoint(const Checkpoint& ckpt, const std::string& dir);

// Inverse of save_checkpoint. Rejects unknown versions, shape mismatches,
// truncated arrays and negative parameter values.
Checkpoint load_checkpoint(const std::string& dir);

}  // namespace mter
