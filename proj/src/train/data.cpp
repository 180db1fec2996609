//
// Project LipidLM - Copyright 2026 The LipidLM Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "lipidlm/train/data.hpp"

#include <cmath>
#include <fstream>
#include <utility>

#include <json.hpp>

#include "lipidlm/error.hpp"
#include "lipidlm/lipid/analysis.hpp"
#include "lipidlm/random.hpp"

namespace lipidlm::train {
namespace {

// Counter-based stream so that masking does not depend on any standard
// library distribution's implementation.
class Stream {
public:
  // The seed is hashed first so that streams of nearby seeds do not overlap.
  explicit Stream(std::uint64_t seed): s_(splitmix64(seed)) {}

  std::uint64_t next() {
    s_ += 0x9e3779b97f4a7c15ULL;
    return splitmix64(s_);
  }

  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n).
  int below(int n) {
    return static_cast<int>((static_cast<unsigned __int128>(next()) * n) >> 64);
  }

private:
  std::uint64_t s_;
};

enum Stage : std::uint64_t { kSingleOrder = 1, kPairOrder, kBatchOrder, kMaskSingle, kMaskPair, kPairBuild };

}  // namespace

void MaskingConfig::validate() const {
  if (!(select_prob >= 0.0 && select_prob < 1.0))
    throw Error(Errc::ConfigError, "masking select_prob must be in [0, 1)");
  if (mask_frac < 0.0 || random_frac < 0.0 || keep_frac < 0.0
      || std::abs(mask_frac + random_frac + keep_frac - 1.0) > 1e-9)
    throw Error(Errc::ConfigError, "masking fractions must be non-negative and sum to 1");
}

MaskResult apply_mlm_mask(const tok::EncodedInput &enc, const tok::Vocab &vocab,
                          const MaskingConfig &mcfg, std::uint64_t seed) {
  MaskResult r;
  r.ids = enc.ids;
  r.labels.assign(enc.ids.size(), tok::kIgnore);
  const int n_regular = vocab.size() - tok::kNumSpecial;
  Stream rng(seed);
  for (int p = 0; p < enc.length; ++p) {
    if (vocab.is_special(enc.ids[p]))
      continue;
    // Two draws per maskable position keep later positions' decisions
    // independent of earlier outcomes.
    const double sel = rng.uniform();
    const double how = rng.uniform();
    const int replacement = n_regular > 0 ? tok::kNumSpecial + rng.below(n_regular) : enc.ids[p];
    if (sel >= mcfg.select_prob)
      continue;
    r.labels[p] = enc.ids[p];
    ++r.selected;
    if (how < mcfg.mask_frac)
      r.ids[p] = tok::kMask;
    else if (how < mcfg.mask_frac + mcfg.random_frac)
      r.ids[p] = replacement;
  }
  return r;
}

void mask_batch(model::Batch &batch, const tok::Vocab &vocab,
                const MaskingConfig &mcfg, std::uint64_t seed) {
  const std::vector<tok::EncodedInput> original = batch.inputs;
  for (std::uint64_t attempt = 0; attempt < 2; ++attempt) {
    batch.mlm_labels.clear();
    int selected = 0;
    for (std::size_t i = 0; i < original.size(); ++i) {
      auto r = apply_mlm_mask(original[i], vocab, mcfg, derive_seed(seed, { attempt, i }));
      batch.inputs[i].ids = std::move(r.ids);
      batch.mlm_labels.push_back(std::move(r.labels));
      selected += r.selected;
    }
    if (selected > 0)
      return;
  }
}

model::Batch unmasked(const model::Batch &batch) {
  model::Batch out;
  out.inputs = batch.inputs;
  for (std::size_t i = 0; i < batch.mlm_labels.size(); ++i)
    for (std::size_t p = 0; p < batch.mlm_labels[i].size(); ++p)
      if (batch.mlm_labels[i][p] != tok::kIgnore)
        out.inputs[i].ids[p] = batch.mlm_labels[i][p];
  return out;
}

int n_tails_class(int n_tails) { return n_tails - 2; }

tok::EncodedInput encode_record(const corpus::LipidRecord &record,
                                const tok::Vocab &vocab,
                                const model::ModelConfig &cfg) {
  const tok::AtomLabels labels { record.atom_regions, record.connecting_atom };
  auto e = tok::encode_single(record.canonical_smiles, vocab, tok::kSingleLength, &labels);
  const int tails = n_tails_class(record.n_tails);
  if (tails < 0 || tails >= cfg.n_tail_classes)
    throw Error(Errc::LabelOutOfRange, record.id + ": " + std::to_string(record.n_tails)
                                           + " tails is outside the NumTails classes");
  if (record.connecting_atom < 0 || record.connecting_atom >= cfg.n_pos_classes)
    throw Error(Errc::LabelOutOfRange,
                record.id + ": connecting-atom ordinal " + std::to_string(record.connecting_atom)
                    + " >= n_pos_classes " + std::to_string(cfg.n_pos_classes));
  e.n_tails_class = tails;
  e.conn_seq = record.connecting_atom;
  return e;
}

TaskDataset::TaskDataset(std::vector<corpus::LipidRecord> records,
                         const tok::Vocab &vocab, const model::ModelConfig &cfg,
                         model::TaskSet tasks, MaskingConfig mcfg)
    : records_(std::move(records)), vocab_(vocab), cfg_(cfg), tasks_(tasks),
      mcfg_(mcfg) {
  using model::Task;
  mcfg_.validate();
  if (!tasks_.has(Task::Mlm))
    throw Error(Errc::ConfigError, "pre-training tasks must include mlm");
  if (tasks_.has(Task::Regression))
    throw Error(Errc::ConfigError, "regression is a fine-tuning task");
  if (tasks_.has(Task::Pair) && cfg_.max_len < tok::kPairLength)
    throw Error(Errc::ConfigError, "the pair task needs max_len "
                                       + std::to_string(tok::kPairLength));
  if (records_.empty())
    throw Error(Errc::EmptyDataset, "no records to train on");
  singles_.reserve(records_.size());
  for (const auto &r: records_)
    singles_.push_back(encode_record(r, vocab, cfg_));
  if (tasks_.has(Task::Pair)) {
    canonical_.reserve(records_.size());
    for (const auto &r: records_)
      canonical_.push_back(chem::canonicalize(chem::parse_smiles(r.canonical_smiles)));
  }
}

std::vector<TaskBatch> TaskDataset::epoch_batches(int batch_size, std::uint64_t seed,
                                                  int epoch) const {
  using model::Task;
  if (batch_size < 1)
    throw Error(Errc::ConfigError, "batch_size must be >= 1");
  const auto e = static_cast<std::uint64_t>(epoch);
  const int n = size();

  model::TaskSet single_heads = tasks_;
  single_heads.set(Task::Pair, false);
  const bool want_single = !tasks_.has(Task::Pair) || single_heads.list().size() > 1;

  std::vector<TaskBatch> out;
  if (want_single) {
    const auto order = shuffled_indices(n, derive_seed(seed, { e, kSingleOrder }));
    for (int start = 0; start < n; start += batch_size) {
      TaskBatch tb;
      tb.heads = single_heads;
      for (int k = start; k < std::min(n, start + batch_size); ++k)
        tb.batch.inputs.push_back(singles_[order[k]]);
      mask_batch(tb.batch, vocab_, mcfg_,
                 derive_seed(seed, { e, kMaskSingle, static_cast<std::uint64_t>(start) }));
      out.push_back(std::move(tb));
    }
  }
  if (tasks_.has(Task::Pair)) {
    const auto order = shuffled_indices(n, derive_seed(seed, { e, kPairOrder }));
    for (int start = 0; start < n; start += batch_size) {
      TaskBatch tb;
      tb.heads = { Task::Mlm, Task::Pair };
      for (int k = start; k < std::min(n, start + batch_size); ++k) {
        // Alternating labels over a shuffled order: exactly half of each
        // epoch's pairs are rearranged, assigned to random records.
        const bool rearranged = k % 2 == 0;
        const auto s = derive_seed(seed, { e, kPairBuild, static_cast<std::uint64_t>(order[k]) });
        const auto pair = lipid::make_pair(canonical_[order[k]], rearranged, s);
        tb.batch.inputs.push_back(tok::encode_pair(pair.first, pair.second, vocab_,
                                                   tok::kPairLength, pair.label ? 1 : 0));
      }
      mask_batch(tb.batch, vocab_, mcfg_,
                 derive_seed(seed, { e, kMaskPair, static_cast<std::uint64_t>(start) }));
      out.push_back(std::move(tb));
    }
  }
  const auto perm = shuffled_indices(static_cast<int>(out.size()), derive_seed(seed, { e, kBatchOrder }));
  std::vector<TaskBatch> shuffled;
  shuffled.reserve(out.size());
  for (int i: perm)
    shuffled.push_back(std::move(out[i]));
  return shuffled;
}

std::vector<int> shuffled_indices(int n, std::uint64_t seed) {
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i)
    idx[i] = i;
  Stream rng(seed);
  for (int i = n - 1; i > 0; --i)
    std::swap(idx[i], idx[rng.below(i + 1)]);
  return idx;
}

std::vector<LabeledExample> read_labeled_jsonl(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw Error(Errc::IoFailure, "cannot open " + path.string());
  std::vector<LabeledExample> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    try {
      const auto j = nlohmann::json::parse(line);
      rows.push_back({ j.at("smiles").get<std::string>(), j.at("value").get<double>() });
    } catch (const nlohmann::json::exception &e) {
      throw Error(Errc::IoFailure, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (rows.empty())
    throw Error(Errc::EmptyDataset, path.string() + " has no labeled rows");
  return rows;
}

void write_labeled_jsonl(const std::filesystem::path &path,
                         const std::vector<LabeledExample> &rows) {
  std::ofstream out(path);
  for (const auto &r: rows) {
    nlohmann::ordered_json j;
    j["smiles"] = r.smiles;
    j["value"] = r.value;
    out << j.dump() << '\n';
  }
  if (!out)
    throw Error(Errc::IoFailure, "cannot write " + path.string());
}

std::vector<LabeledExample> labeled_from_records(
    const std::vector<corpus::LipidRecord> &records) {
  std::vector<LabeledExample> rows;
  rows.reserve(records.size());
  for (const auto &r: records)
    rows.push_back({ r.canonical_smiles, r.synth_property });
  return rows;
}

std::vector<model::Batch> regression_batches(const std::vector<tok::EncodedInput> &encoded,
                                             const std::vector<LabeledExample> &rows,
                                             double mean, double scale,
                                             int batch_size, bool shuffle,
                                             std::uint64_t seed) {
  if (encoded.size() != rows.size())
    throw Error(Errc::ShapeMismatch, "encoded inputs and labeled rows differ in length");
  if (batch_size < 1)
    throw Error(Errc::ConfigError, "batch_size must be >= 1");
  const int n = static_cast<int>(rows.size());
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i)
    order[i] = i;
  if (shuffle)
    order = shuffled_indices(n, seed);
  std::vector<model::Batch> out;
  for (int start = 0; start < n; start += batch_size) {
    model::Batch b;
    for (int k = start; k < std::min(n, start + batch_size); ++k) {
      auto e = encoded[order[k]];
      e.target = (rows[order[k]].value - mean) / scale;
      e.has_target = true;
      b.inputs.push_back(std::move(e));
    }
    out.push_back(std::move(b));
  }
  return out;
}

}  // namespace lipidlm::train
