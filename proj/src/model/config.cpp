//
// Project LipidLM - Copyright 2026 The LipidLM Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "lipidlm/model/config.hpp"

#include "lipidlm/error.hpp"

namespace lipidlm::model {
namespace {

constexpr std::array<std::string_view, kNumTasks> kTaskNames {
  "mlm", "ntails", "connseq", "conntoken", "headtail", "pair", "regression"
};

}  // namespace

std::string_view task_name(Task t) {
  return kTaskNames[static_cast<int>(t)];
}

Task task_from_name(std::string_view name) {
  for (int i = 0; i < kNumTasks; ++i)
    if (kTaskNames[i] == name)
      return static_cast<Task>(i);
  throw Error(Errc::ConfigError, "unknown task '" + std::string(name) + "'");
}

bool TaskSet::empty() const {
  for (bool b: on_)
    if (b)
      return false;
  return true;
}

std::vector<Task> TaskSet::list() const {
  std::vector<Task> out;
  for (int i = 0; i < kNumTasks; ++i)
    if (on_[i])
      out.push_back(static_cast<Task>(i));
  return out;
}

std::string TaskSet::to_string() const {
  std::string out;
  for (Task t: list()) {
    if (!out.empty())
      out += ',';
    out += task_name(t);
  }
  return out;
}

TaskSet TaskSet::parse(std::string_view csv) {
  TaskSet s;
  std::size_t start = 0;
  while (start <= csv.size()) {
    std::size_t end = csv.find(',', start);
    if (end == std::string_view::npos)
      end = csv.size();
    const auto name = csv.substr(start, end - start);
    if (name.empty())
      throw Error(Errc::ConfigError, "empty task name in '" + std::string(csv) + "'");
    s.set(task_from_name(name));
    start = end + 1;
  }
  return s;
}

void ModelConfig::validate() const {
  auto fail = [](const std::string &msg) { throw Error(Errc::ConfigError, msg); };
  if (n_layers < 0)
    fail("model.n_layers must be non-negative");
  if (hidden < 1 || n_heads < 1 || hidden % n_heads != 0)
    fail("model.hidden must be a positive multiple of model.n_heads");
  if (ffn_dim < 1)
    fail("model.ffn_dim must be positive");
  if (max_len < 3)
    fail("model.max_len must be at least 3");
  if (vocab_size < 6)
    fail("model.vocab_size must cover the special tokens and one character");
  if (n_segments < 1)
    fail("model.n_segments must be positive");
  if (dropout < 0.0 || dropout >= 1.0)
    fail("model.dropout must lie in [0, 1)");
  if (layernorm_eps <= 0.0)
    fail("model.layernorm_eps must be positive");
  if (n_tail_classes < 1 || n_pos_classes < 1)
    fail("model class counts must be positive");
  for (int d: regression_dims)
    if (d < 1)
      fail("model.regression_dims entries must be positive");
}

ModelConfig paper_preset(int vocab_size, int max_len) {
  ModelConfig c;
  c.n_layers = 12;
  c.hidden = 768;
  c.n_heads = 12;
  c.ffn_dim = 3072;
  c.max_len = max_len;
  c.vocab_size = vocab_size;
  return c;
}

ModelConfig desk_preset(int vocab_size, int max_len) {
  ModelConfig c;
  c.n_layers = 2;
  c.hidden = 128;
  c.n_heads = 4;
  c.ffn_dim = 512;
  c.max_len = max_len;
  c.vocab_size = vocab_size;
  return c;
}

nlohmann::ordered_json to_json(const ModelConfig &c) {
  nlohmann::ordered_json j;
  j["n_layers"] = c.n_layers;
  j["hidden"] = c.hidden;
  j["n_heads"] = c.n_heads;
  j["ffn_dim"] = c.ffn_dim;
  j["max_len"] = c.max_len;
  j["vocab_size"] = c.vocab_size;
  j["n_segments"] = c.n_segments;
  j["dropout"] = c.dropout;
  j["layernorm_eps"] = c.layernorm_eps;
  j["n_tail_classes"] = c.n_tail_classes;
  j["n_pos_classes"] = c.n_pos_classes;
  j["regression_dims"] = c.regression_dims;
  j["seed"] = c.seed;
  return j;
}

ModelConfig model_config_from_json(const nlohmann::json &j, ModelConfig c) {
  if (!j.is_object())
    throw Error(Errc::ConfigError, "model config must be a JSON object");
  try {
    for (const auto &[key, v]: j.items()) {
      if (key == "n_layers") c.n_layers = v.get<int>();
      else if (key == "hidden") c.hidden = v.get<int>();
      else if (key == "n_heads") c.n_heads = v.get<int>();
      else if (key == "ffn_dim") c.ffn_dim = v.get<int>();
      else if (key == "max_len") c.max_len = v.get<int>();
      else if (key == "vocab_size") c.vocab_size = v.get<int>();
      else if (key == "n_segments") c.n_segments = v.get<int>();
      else if (key == "dropout") c.dropout = v.get<double>();
      else if (key == "layernorm_eps") c.layernorm_eps = v.get<double>();
      else if (key == "n_tail_classes") c.n_tail_classes = v.get<int>();
      else if (key == "n_pos_classes") c.n_pos_classes = v.get<int>();
      else if (key == "regression_dims") c.regression_dims = v.get<std::vector<int>>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else throw Error(Errc::ConfigError, "unknown model key '" + key + "'");
    }
  } catch (const nlohmann::json::exception &e) {
    throw Error(Errc::ConfigError, std::string("model config: ") + e.what());
  }
  return c;
}

}  // namespace lipidlm::model
