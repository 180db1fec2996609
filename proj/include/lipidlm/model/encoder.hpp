//
// Project LipidLM - Copyright 2026 The LipidLM Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "lipidlm/model/config.hpp"
#include "lipidlm/model/params.hpp"
#include "lipidlm/tokenizer/tokenizer.hpp"

namespace lipidlm::model {

struct Batch {
  std::vector<tok::EncodedInput> inputs;
  /// Per input, original ids at MLM-selected positions and kIgnore elsewhere.
  /// Empty when the batch carries no MLM supervision.
  std::vector<std::vector<int>> mlm_labels;

  int size() const { return static_cast<int>(inputs.size()); }
};

struct ForwardOptions {
  TaskSet heads { Task::Mlm };
  bool training = false;
  /// Seeds every dropout mask of the pass.
  std::uint64_t dropout_seed = 0;
  /// Project every position through the MLM head instead of only the
  /// labeled ones.
  bool mlm_all_positions = false;
};

/// Activations of one pass. Sequences are packed: position p of sequence b
/// is row offsets[b] + p of every per-token matrix. Padding is never
/// computed.
template <class S>
struct Outputs {
  std::vector<int> offsets;
  std::vector<int> lengths;
  int tokens = 0;

  Mat<S> hidden;  // tokens x hidden, final layer
  Mat<S> pooled;  // batch x hidden, tanh pooler over [CLS]

  std::vector<int> mlm_rows;  // packed rows projected by the MLM head
  Mat<S> mlm;                 // mlm_rows x vocab
  Mat<S> ntails;              // batch x n_tail_classes
  Mat<S> connseq;             // batch x n_pos_classes
  Mat<S> pair;                // batch x 2
  Mat<S> regression;          // batch x 1
  Mat<S> conntoken;           // tokens x 2
  Mat<S> headtail;            // tokens x 3
};

struct LossBreakdown {
  double total = 0.0;
  /// Unweighted mean loss per task; 0 when the task had no labels.
  std::array<double, kNumTasks> task {};
  /// Labeled rows per task.
  std::array<int, kNumTasks> count {};
};

/// Inference or training-mode forward pass. Throws ShapeMismatch on
/// inconsistent inputs.
template <class S>
Outputs<S> forward(const ModelParams<S> &params, const ModelConfig &cfg,
                   const Batch &batch, const ForwardOptions &opts);

/// Cross-entropy for classification heads, mean squared error for
/// regression; total = sum of weight x task loss over opts.heads. The MLM
/// loss averages over selected positions and throws NoSelectedTokens when
/// there are none.
template <class S>
LossBreakdown compute_loss(const Outputs<S> &out, const Batch &batch,
                           const TaskSet &heads, const TaskWeights &weights);

/// Forward, loss, and (when `grads` is non-null) exact gradients of the
/// total loss accumulated into `grads`, which must have the params shapes.
template <class S>
LossBreakdown forward_backward(const ModelParams<S> &params,
                               const ModelConfig &cfg, const Batch &batch,
                               const ForwardOptions &opts,
                               const TaskWeights &weights,
                               ModelParams<S> *grads,
                               Outputs<S> *outputs = nullptr);

/// Final-layer hidden state at [CLS] (before the pooler), evaluation mode.
template <class S>
Mat<S> embed_cls(const ModelParams<S> &params, const ModelConfig &cfg,
                 std::span<const tok::EncodedInput> inputs);

}  // namespace lipidlm::model
