//
// Project LipidLM - Copyright 2026 The LipidLM Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "lipidlm/corpus/generator.hpp"
#include "lipidlm/model/config.hpp"
#include "lipidlm/train/trainer.hpp"

namespace lipidlm::cli {

struct IoConfig {
  std::string corpus;      // directory with corpus.jsonl and split.json
  std::string out;         // output directory or file
  std::string checkpoint;  // checkpoint directory
  std::string data;        // labeled JSON Lines {smiles, value}
  std::string file;        // SMILES or corpus JSON Lines input
  std::string embeddings;  // embedding CSV

  bool operator==(const IoConfig &) const = default;
};

/// Every option of every command. Sections: generator, tokenizer, model,
/// training, io. All fields are optional; unknown keys are rejected.
struct RunConfig {
  corpus::GenConfig generator;
  /// tokenizer.vocab: vocabulary file; empty builds it from the training
  /// split.
  std::string vocab;
  /// model.preset ("desk" or "paper") plus per-field overrides.
  std::string preset = "desk";
  nlohmann::json model_overrides = nlohmann::json::object();
  /// training.tasks, training.sweep, training.pretrain, training.finetune.
  model::TaskSet tasks { model::Task::Mlm };
  std::vector<int> sweep;
  train::TrainConfig pretrain = train::desk_pretrain_config();
  train::TrainConfig finetune = train::desk_finetune_config();
  IoConfig io;

  /// Model configuration for a vocabulary of `vocab_size` tokens; pair
  /// tasks get the pair length.
  model::ModelConfig model_config(int vocab_size) const;
};

/// Throws ConfigError naming the offending key.
RunConfig run_config_from_json(const nlohmann::json &j);
RunConfig load_run_config(const std::filesystem::path &path);
nlohmann::ordered_json to_json(const RunConfig &rc);

nlohmann::ordered_json to_json(const corpus::GenConfig &g);
corpus::GenConfig gen_config_from_json(const nlohmann::json &j,
                                       corpus::GenConfig base = {});

}  // namespace lipidlm::cli
