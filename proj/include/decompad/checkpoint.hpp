#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include "decompad/model.hpp"
#include "decompad/training.hpp"
#include "json.hpp"

namespace decompad {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// JSON document holding the model config, every named parameter as
/// {name, shape, row-major values}, the normalization statistics once
/// fine-tuning has run, and free-form metadata.
struct Checkpoint {
  ModelConfig model;
  ModelParams params;
  std::optional<NormStats> norm;
  nlohmann::json meta = nlohmann::json::object();
};

std::string checkpoint_to_string(const Checkpoint& checkpoint);
/// Parse errors report the byte offset; `origin` names the source in messages.
Checkpoint checkpoint_from_string(const std::string& text, const std::string& origin = "checkpoint");

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace decompad
