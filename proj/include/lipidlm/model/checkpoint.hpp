//
// Project LipidLM - Copyright 2026 The LipidLM Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <filesystem>

#include <json.hpp>

#include "lipidlm/model/config.hpp"
#include "lipidlm/model/params.hpp"
#include "lipidlm/tokenizer/tokenizer.hpp"

namespace lipidlm::model {

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  ModelConfig config;
  tok::Vocab vocab;
  ModelParams<float> params;
  /// Free-form training metadata (tasks, target scaling, ...).
  nlohmann::json meta = nlohmann::json::object();
};

/// Writes <dir>/manifest.json, <dir>/vocab.json and <dir>/params.bin (the
/// tensors as little-endian float32, row-major, in visit order). Output is a
/// pure function of the checkpoint contents.
void save_checkpoint(const std::filesystem::path &dir, const Checkpoint &ckpt);

/// Throws IoFailure for unreadable or malformed files, ChecksumMismatch
/// when a tensor's CRC-32 disagrees, VersionMismatch for a different format
/// version or a tensor index that does not match the config.
Checkpoint load_checkpoint(const std::filesystem::path &dir);

/// Throws VersionMismatch unless the checkpoint encodes sequences of
/// `max_len` tokens.
void require_max_len(const Checkpoint &ckpt, int max_len);

}  // namespace lipidlm::model
