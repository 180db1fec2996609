//
// Project LipidLM - Copyright 2026 The LipidLM Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lipidlm/chem/smiles.hpp"
#include "lipidlm/corpus/record.hpp"
#include "lipidlm/model/config.hpp"
#include "lipidlm/model/encoder.hpp"
#include "lipidlm/tokenizer/tokenizer.hpp"

namespace lipidlm::train {

// Masking ---------------------------------------------------------------------

struct MaskingConfig {
  double select_prob = 0.15;
  double mask_frac = 0.80;
  double random_frac = 0.10;
  double keep_frac = 0.10;

  /// Throws ConfigError.
  void validate() const;
  bool operator==(const MaskingConfig &) const = default;
};

struct MaskResult {
  std::vector<int> ids;
  /// Original id at selected positions, kIgnore elsewhere.
  std::vector<int> labels;
  int selected = 0;
};

/// Independently selects each non-special position with select_prob, then
/// replaces it with [MASK], a uniformly drawn non-special token, or leaves it
/// as is. Deterministic in `seed`.
MaskResult apply_mlm_mask(const tok::EncodedInput &enc, const tok::Vocab &vocab,
                          const MaskingConfig &mcfg, std::uint64_t seed);

/// Masks every input of `batch` in place and fills batch.mlm_labels. A batch
/// with no selected position is redrawn once with a derived seed; if it is
/// still empty the loss reports NoSelectedTokens.
void mask_batch(model::Batch &batch, const tok::Vocab &vocab,
                const MaskingConfig &mcfg, std::uint64_t seed);

/// The batch with MLM corruption undone and no MLM labels.
model::Batch unmasked(const model::Batch &batch);

// Task batches ----------------------------------------------------------------

/// Sequence label for NumTails: n_tails - 2, so 2..6 tails map to 0..4.
int n_tails_class(int n_tails);

/// Single-sequence encoding carrying every structural label of `record`.
/// Throws LabelOutOfRange when the connecting-atom ordinal or tail class
/// does not fit the model's class counts.
tok::EncodedInput encode_record(const corpus::LipidRecord &record,
                                const tok::Vocab &vocab,
                                const model::ModelConfig &cfg);

/// A batch and the heads it supervises.
struct TaskBatch {
  model::Batch batch;
  model::TaskSet heads;
};

/// Records prepared once for repeated epochs of batch construction.
class TaskDataset {
public:
  /// `tasks` must contain Mlm. Pair inputs use max_len tok::kPairLength and
  /// need cfg.max_len to match.
  TaskDataset(std::vector<corpus::LipidRecord> records, const tok::Vocab &vocab,
              const model::ModelConfig &cfg, model::TaskSet tasks,
              MaskingConfig mcfg = {});

  int size() const { return static_cast<int>(records_.size()); }
  const model::TaskSet &tasks() const { return tasks_; }

  /// All batches of one pass, shuffled by (seed, epoch). Single-sequence
  /// batches carry Mlm plus every active non-pair task; when Pair is active,
  /// an extra set of pair batches carries Mlm over both segments plus Pair.
  /// Half of each epoch's pairs are rearranged, half decoys. The last short
  /// batch is kept.
  std::vector<TaskBatch> epoch_batches(int batch_size, std::uint64_t seed,
                                       int epoch) const;

private:
  std::vector<corpus::LipidRecord> records_;
  std::vector<tok::EncodedInput> singles_;
  std::vector<chem::CanonicalForm> canonical_;
  tok::Vocab vocab_;
  model::ModelConfig cfg_;
  model::TaskSet tasks_;
  MaskingConfig mcfg_;
};

// Labeled regression data -----------------------------------------------------

struct LabeledExample {
  std::string smiles;
  double value = 0.0;
};

/// JSON Lines {"smiles": ..., "value": ...}. Throws IoFailure on a malformed
/// line and EmptyDataset when the file has no rows.
std::vector<LabeledExample> read_labeled_jsonl(const std::filesystem::path &path);
void write_labeled_jsonl(const std::filesystem::path &path,
                         const std::vector<LabeledExample> &rows);

/// (canonical SMILES, synth_property) per record.
std::vector<LabeledExample> labeled_from_records(
    const std::vector<corpus::LipidRecord> &records);

/// Regression batches in input order (or shuffled when `shuffle`), targets
/// transformed as (value - mean) / scale.
std::vector<model::Batch> regression_batches(const std::vector<tok::EncodedInput> &encoded,
                                             const std::vector<LabeledExample> &rows,
                                             double mean, double scale,
                                             int batch_size, bool shuffle,
                                             std::uint64_t seed);

/// Deterministic permutation of 0..n-1.
std::vector<int> shuffled_indices(int n, std::uint64_t seed);

}  // namespace lipidlm::train
