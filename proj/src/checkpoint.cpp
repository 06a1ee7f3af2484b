#include "decompad/checkpoint.hpp"

#include <algorithm>
#include <map>

#include "decompad/config.hpp"
#include "decompad/io/csv.hpp"

namespace decompad {

using nlohmann::json;

namespace {

constexpr const char* kFormat = "decompad-checkpoint";
constexpr int kVersion = 1;

}  // namespace

std::string checkpoint_to_string(const Checkpoint& c) {
  json params = json::array();
  for (const auto& np : c.params.named()) {
    params.push_back({{"name", np.name},
                      {"shape", np.tensor.shape()},
                      {"values", std::vector<double>(np.tensor.data().begin(), np.tensor.data().end())}});
  }
  json doc = {{"format", kFormat},
              {"version", kVersion},
              {"model", config::to_json(c.model)},
              {"norm_stats", nullptr},
              {"meta", c.meta},
              {"params", params}};
  if (c.norm) doc["norm_stats"] = {{"min", c.norm->min}, {"max", c.norm->max}};
  return doc.dump(1) + "\n";
}

Checkpoint checkpoint_from_string(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw CheckpointError(origin + ": parse error at byte " + std::to_string(e.byte));
  }
  try {
    if (!doc.is_object() || doc.value("format", "") != kFormat) {
      throw CheckpointError(origin + ": not a checkpoint (missing format tag)");
    }
    if (doc.at("version").get<int>() != kVersion) {
      throw CheckpointError(origin + ": unsupported checkpoint version " + doc.at("version").dump());
    }
    Checkpoint c;
    c.model = config::model_config_from_json(doc.at("model"));
    c.params = ModelParams::init(c.model, 0);
    c.meta = doc.value("meta", json::object());
    if (!doc.at("norm_stats").is_null()) {
      NormStats s{doc["norm_stats"].at("min").get<std::vector<double>>(),
                  doc["norm_stats"].at("max").get<std::vector<double>>()};
      if (s.min.size() != s.max.size()) throw CheckpointError(origin + ": norm_stats min/max lengths differ");
      c.norm = std::move(s);
    }
    std::map<std::string, const json*> stored;
    for (const auto& p : doc.at("params")) stored[p.at("name").get<std::string>()] = &p;
    const auto named = c.params.named();
    if (stored.size() != named.size()) {
      throw CheckpointError(origin + ": expected " + std::to_string(named.size()) + " parameters, found " +
                            std::to_string(stored.size()));
    }
    for (const auto& np : named) {
      auto it = stored.find(np.name);
      if (it == stored.end()) throw CheckpointError(origin + ": missing parameter " + np.name);
      const auto shape = it->second->at("shape").get<numerics::Shape>();
      const auto values = it->second->at("values").get<std::vector<double>>();
      if (shape != np.tensor.shape() || values.size() != np.tensor.size()) {
        throw CheckpointError(origin + ": parameter " + np.name + " has shape " + numerics::to_string(shape) +
                              ", config implies " + numerics::to_string(np.tensor.shape()));
      }
      Tensor t = np.tensor;
      std::copy(values.begin(), values.end(), t.mutable_data().begin());
    }
    return c;
  } catch (const json::exception& e) {
    throw CheckpointError(origin + ": malformed checkpoint: " + e.what());
  } catch (const config::ConfigError& e) {
    throw CheckpointError(origin + ": " + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  io::write_file_atomic(path, checkpoint_to_string(checkpoint));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return checkpoint_from_string(io::read_file(path), path.string());
}

}  // namespace decompad
