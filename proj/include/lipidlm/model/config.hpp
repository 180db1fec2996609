//
// Project LipidLM - Copyright 2026 The LipidLM Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace lipidlm::model {

enum class Task {
  Mlm,
  NumTails,
  ConnSeq,
  ConnToken,
  HeadTail,
  Pair,
  Regression,
};

inline constexpr int kNumTasks = 7;

/// Short names used on the command line and in metrics: mlm, ntails,
/// connseq, conntoken, headtail, pair, regression.
std::string_view task_name(Task t);
Task task_from_name(std::string_view name);

class TaskSet {
public:
  TaskSet() = default;
  TaskSet(std::initializer_list<Task> tasks) {
    for (Task t: tasks)
      set(t);
  }

  bool has(Task t) const { return on_[static_cast<int>(t)]; }
  void set(Task t, bool v = true) { on_[static_cast<int>(t)] = v; }
  bool empty() const;
  std::vector<Task> list() const;

  /// Comma-separated names, e.g. "mlm,headtail".
  std::string to_string() const;
  static TaskSet parse(std::string_view csv);

  bool operator==(const TaskSet &) const = default;

private:
  std::array<bool, kNumTasks> on_ {};
};

using TaskWeights = std::array<double, kNumTasks>;

inline TaskWeights unit_weights() {
  TaskWeights w;
  w.fill(1.0);
  return w;
}

struct ModelConfig {
  int n_layers = 2;
  int hidden = 128;
  int n_heads = 4;
  int ffn_dim = 512;
  int max_len = 128;
  int vocab_size = 0;
  int n_segments = 2;
  double dropout = 0.1;
  double layernorm_eps = 1e-12;
  int n_tail_classes = 5;
  int n_pos_classes = 64;
  std::vector<int> regression_dims { 512, 256, 128, 128 };
  std::uint64_t seed = 7;

  int head_dim() const { return hidden / n_heads; }

  /// Throws Error(ConfigError).
  void validate() const;

  bool operator==(const ModelConfig &) const = default;
};

/// 12 layers, hidden 768, 12 heads, FFN 3072.
ModelConfig paper_preset(int vocab_size, int max_len = 128);

/// 2 layers, hidden 128, 4 heads, FFN 512.
ModelConfig desk_preset(int vocab_size, int max_len = 128);

nlohmann::ordered_json to_json(const ModelConfig &cfg);

/// Overlays the keys of `j` onto `base`; unknown keys throw ConfigError.
ModelConfig model_config_from_json(const nlohmann::json &j,
                                   ModelConfig base = {});

}  // namespace lipidlm::model
