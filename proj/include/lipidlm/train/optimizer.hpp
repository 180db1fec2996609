//
// Project LipidLM - Copyright 2026 The LipidLM Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>

#include "lipidlm/model/params.hpp"

namespace lipidlm::train {

struct AdamWConfig {
  double lr = 5e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
  /// Linear ramp from lr / warmup_steps up to lr, then linear decay.
  int warmup_steps = 0;
  int total_steps = 1;
};

/// Learning rate applied by update number `step` (0-based): linear warmup,
/// then lr * (1 - step / total_steps), which reaches 0 at total_steps.
double learning_rate(const AdamWConfig &cfg, std::int64_t step);

template <class S>
struct AdamWState {
  model::ModelParams<S> m;
  model::ModelParams<S> v;
  std::int64_t step = 0;
};

template <class S>
AdamWState<S> make_adamw_state(const model::ModelConfig &cfg) {
  return { model::allocate_params<S>(cfg), model::allocate_params<S>(cfg), 0 };
}

/// One decoupled-weight-decay Adam update with bias correction. Weight decay
/// applies to weight and embedding tensors only, not to biases or layernorm
/// parameters. Throws NonFiniteGradient naming the first offending tensor;
/// nothing is modified in that case.
template <class S>
void adamw_step(model::ModelParams<S> &params, const model::ModelParams<S> &grads,
                AdamWState<S> &state, const AdamWConfig &cfg);

}  // namespace lipidlm::train
