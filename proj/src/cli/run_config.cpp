//
// Project LipidLM - Copyright 2026 The LipidLM Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "lipidlm/cli/run_config.hpp"

#include <fstream>

#include "lipidlm/error.hpp"
#include "lipidlm/tokenizer/tokenizer.hpp"

namespace lipidlm::cli {
namespace {

[[noreturn]] void unknown(const std::string &section, const std::string &key) {
  throw Error(Errc::ConfigError, "unknown key " + section + "." + key);
}

template <class F>
void with_section(const nlohmann::json &j, const std::string &name, F &&f) {
  if (!j.is_object())
    throw Error(Errc::ConfigError, name + " must be a JSON object");
  try {
    f();
  } catch (const nlohmann::json::exception &e) {
    throw Error(Errc::ConfigError, name + ": " + e.what());
  }
}

}  // namespace

nlohmann::ordered_json to_json(const corpus::GenConfig &g) {
  nlohmann::ordered_json j;
  j["n_lipids"] = g.n_lipids;
  j["tails_distribution"] = g.tails_distribution;
  j["tail_len_min"] = g.tail_len_min;
  j["tail_len_max"] = g.tail_len_max;
  j["branch_prob"] = g.branch_prob;
  j["ester_prob"] = g.ester_prob;
  j["ring_prob"] = g.ring_prob;
  auto heads = nlohmann::ordered_json::array();
  for (const auto &h: g.head_templates)
    heads.push_back({ { "smiles", h.smiles }, { "attach", h.attach } });
  j["head_templates"] = heads;
  j["seed"] = g.seed;
  j["max_smiles_len"] = g.max_smiles_len;
  j["max_attempts"] = g.max_attempts;
  j["noise_sd"] = g.noise_sd;
  j["train_fraction"] = g.train_fraction;
  j["validation_fraction"] = g.validation_fraction;
  return j;
}

corpus::GenConfig gen_config_from_json(const nlohmann::json &j, corpus::GenConfig g) {
  with_section(j, "generator", [&] {
    for (const auto &[k, v]: j.items()) {
      if (k == "n_lipids") g.n_lipids = v.get<int>();
      else if (k == "tails_distribution") g.tails_distribution = v.get<std::array<double, 5>>();
      else if (k == "tail_len_min") g.tail_len_min = v.get<int>();
      else if (k == "tail_len_max") g.tail_len_max = v.get<int>();
      else if (k == "branch_prob") g.branch_prob = v.get<double>();
      else if (k == "ester_prob") g.ester_prob = v.get<double>();
      else if (k == "ring_prob") g.ring_prob = v.get<double>();
      else if (k == "head_templates") {
        g.head_templates.clear();
        for (const auto &h: v) {
          for (const auto &[hk, hv]: h.items())
            if (hk != "smiles" && hk != "attach")
              unknown("generator.head_templates[]", hk);
          g.head_templates.push_back({ h.at("smiles").get<std::string>(), h.at("attach").get<int>() });
        }
      } else if (k == "seed") g.seed = v.get<std::uint64_t>();
      else if (k == "max_smiles_len") g.max_smiles_len = v.get<int>();
      else if (k == "max_attempts") g.max_attempts = v.get<int>();
      else if (k == "noise_sd") g.noise_sd = v.get<double>();
      else if (k == "train_fraction") g.train_fraction = v.get<double>();
      else if (k == "validation_fraction") g.validation_fraction = v.get<double>();
      else unknown("generator", k);
    }
  });
  g.validate();
  return g;
}

model::ModelConfig RunConfig::model_config(int vocab_size) const {
  const int max_len = tasks.has(model::Task::Pair) ? tok::kPairLength : tok::kSingleLength;
  model::ModelConfig base;
  if (preset == "desk")
    base = model::desk_preset(vocab_size, max_len);
  else if (preset == "paper")
    base = model::paper_preset(vocab_size, max_len);
  else
    throw Error(Errc::ConfigError, "model.preset must be \"desk\" or \"paper\", got \"" + preset + "\"");
  auto cfg = model::model_config_from_json(model_overrides, base);
  cfg.vocab_size = vocab_size;
  cfg.validate();
  return cfg;
}

RunConfig run_config_from_json(const nlohmann::json &j) {
  RunConfig rc;
  with_section(j, "config", [&] {
    for (const auto &[section, body]: j.items()) {
      if (section == "generator") {
        rc.generator = gen_config_from_json(body);
      } else if (section == "tokenizer") {
        with_section(body, "tokenizer", [&] {
          for (const auto &[k, v]: body.items()) {
            if (k == "vocab") rc.vocab = v.get<std::string>();
            else unknown("tokenizer", k);
          }
        });
      } else if (section == "model") {
        with_section(body, "model", [&] {
          rc.model_overrides = nlohmann::json::object();
          for (const auto &[k, v]: body.items()) {
            if (k == "preset") rc.preset = v.get<std::string>();
            else rc.model_overrides[k] = v;
          }
        });
        // Surfaces unknown keys and bad values before any work.
        rc.model_config(tok::kNumSpecial + 1);
      } else if (section == "training") {
        with_section(body, "training", [&] {
          for (const auto &[k, v]: body.items()) {
            if (k == "tasks") rc.tasks = model::TaskSet::parse(v.get<std::string>());
            else if (k == "sweep") rc.sweep = v.get<std::vector<int>>();
            else if (k == "pretrain") rc.pretrain = train::train_config_from_json(v, rc.pretrain);
            else if (k == "finetune") rc.finetune = train::train_config_from_json(v, rc.finetune);
            else unknown("training", k);
          }
        });
      } else if (section == "io") {
        with_section(body, "io", [&] {
          for (const auto &[k, v]: body.items()) {
            if (k == "corpus") rc.io.corpus = v.get<std::string>();
            else if (k == "out") rc.io.out = v.get<std::string>();
            else if (k == "checkpoint") rc.io.checkpoint = v.get<std::string>();
            else if (k == "data") rc.io.data = v.get<std::string>();
            else if (k == "file") rc.io.file = v.get<std::string>();
            else if (k == "embeddings") rc.io.embeddings = v.get<std::string>();
            else unknown("io", k);
          }
        });
      } else {
        throw Error(Errc::ConfigError, "unknown config section " + section);
      }
    }
  });
  return rc;
}

RunConfig load_run_config(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw Error(Errc::ConfigError, "cannot open config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception &e) {
    throw Error(Errc::ConfigError, path.string() + ": " + e.what());
  }
  return run_config_from_json(j);
}

nlohmann::ordered_json to_json(const RunConfig &rc) {
  nlohmann::ordered_json j;
  j["generator"] = to_json(rc.generator);
  j["tokenizer"] = { { "vocab", rc.vocab } };
  nlohmann::ordered_json m;
  m["preset"] = rc.preset;
  // Defaults applied: every model field is echoed, resolved for a
  // placeholder vocabulary size that the commands replace.
  auto resolved = model::to_json(rc.model_config(tok::kNumSpecial + 1));
  resolved.erase("vocab_size");
  resolved.erase("max_len");
  for (const auto &[k, v]: resolved.items())
    m[k] = v;
  for (const auto &[k, v]: rc.model_overrides.items())
    if (k == "vocab_size" || k == "max_len")
      m[k] = v;
  j["model"] = m;
  nlohmann::ordered_json t;
  t["tasks"] = rc.tasks.to_string();
  t["sweep"] = rc.sweep;
  t["pretrain"] = train::to_json(rc.pretrain);
  t["finetune"] = train::to_json(rc.finetune);
  j["training"] = t;
  j["io"] = { { "corpus", rc.io.corpus },         { "out", rc.io.out },
              { "checkpoint", rc.io.checkpoint }, { "data", rc.io.data },
              { "file", rc.io.file },             { "embeddings", rc.io.embeddings } };
  return j;
}

}  // namespace lipidlm::cli
