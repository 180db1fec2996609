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
#include "lipidlm/corpus/record.hpp"

namespace lipidlm::corpus {

nlohmann::ordered_json to_json(const LipidRecord &record);
LipidRecord record_from_json(const nlohmann::json &j);

nlohmann::ordered_json to_json(const SplitManifest &manifest);
SplitManifest manifest_from_json(const nlohmann::json &j);

/// JSON Lines, one record per line, fields in fixed order.
void write_corpus_jsonl(const std::filesystem::path &path,
                        const std::vector<LipidRecord> &records);
std::vector<LipidRecord> read_corpus_jsonl(const std::filesystem::path &path);

void write_split_manifest(const std::filesystem::path &path,
                          const SplitManifest &manifest);
SplitManifest read_split_manifest(const std::filesystem::path &path);

/// Records of `records` whose ids appear in `ids`, in `ids` order.
std::vector<LipidRecord> select_records(const std::vector<LipidRecord> &records,
                                        const std::vector<std::string> &ids);

}  // namespace lipidlm::corpus
