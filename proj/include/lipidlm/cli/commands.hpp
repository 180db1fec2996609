//
// Project LipidLM - Copyright 2026 The LipidLM Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lipidlm/cli/run_config.hpp"
#include "lipidlm/error.hpp"

namespace lipidlm::cli {

/// 0 success, 2 configuration or input error, 3 generation failure,
/// 4 training abort, 5 checkpoint incompatibility.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitGeneration = 3;
inline constexpr int kExitTraining = 4;
inline constexpr int kExitCheckpoint = 5;

int exit_code(Errc code);

/// Writes <io.out>/corpus.jsonl, split.json and property.jsonl ({smiles,
/// value} with the synthetic property).
void cmd_gen_corpus(const RunConfig &rc, std::ostream &out);

/// Pre-trains on <io.corpus>; writes <io.out>/checkpoint and
/// <io.out>/metrics.jsonl.
void cmd_pretrain(const RunConfig &rc, std::ostream &out);

/// Fine-tunes <io.checkpoint> on <io.data>, split 80/10/10 by the training
/// seed. With a sweep, first pre-trains on the first n lipids of
/// <io.corpus> for each size n and writes <io.out>/size-<n>/.
void cmd_finetune(const RunConfig &rc, std::ostream &out);

/// One report per input (SMILES text or corpus record JSON). Returns the
/// exit status: nonzero only when every input failed.
int cmd_analyze(const std::vector<std::string> &inputs, bool json,
                std::ostream &out, std::ostream &err);

/// [CLS] embeddings of <io.file> rows as CSV: id, e0..e(hidden-1).
void cmd_embed(const RunConfig &rc, std::ostream &out);

/// Top-2 principal-component coordinates of <io.embeddings>: id,x,y.
void cmd_project(const RunConfig &rc, std::ostream &out);

/// Rows of `x` centered and projected onto the top `k` principal axes.
/// Axis signs are fixed so that each axis's largest-magnitude loading is
/// positive.
Eigen::MatrixXd principal_components(const Eigen::MatrixXd &x, int k = 2);

struct EmbeddingTable {
  std::vector<std::string> ids;
  Eigen::MatrixXd values;
};

void write_embeddings_csv(const std::filesystem::path &path, const EmbeddingTable &t);
EmbeddingTable read_embeddings_csv(const std::filesystem::path &path);

/// Writes <path> with the resolved configuration.
void write_resolved(const std::filesystem::path &path, const RunConfig &rc);

}  // namespace lipidlm::cli
