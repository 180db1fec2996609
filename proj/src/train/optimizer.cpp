//
// Project LipidLM - Copyright 2026 The LipidLM Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "lipidlm/train/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "lipidlm/error.hpp"

namespace lipidlm::train {

double learning_rate(const AdamWConfig &cfg, std::int64_t step) {
  if (step < cfg.warmup_steps)
    return cfg.lr * static_cast<double>(step + 1) / cfg.warmup_steps;
  const double frac = static_cast<double>(step) / std::max(cfg.total_steps, 1);
  return cfg.lr * std::max(0.0, 1.0 - frac);
}

template <class S>
void adamw_step(model::ModelParams<S> &params, const model::ModelParams<S> &grads,
                AdamWState<S> &state, const AdamWConfig &cfg) {
  using model::Mat;
  using model::ParamKind;

  std::vector<const Mat<S> *> g;
  grads.visit([&](const std::string &name, const Mat<S> &t, ParamKind) {
    if (!t.allFinite())
      throw Error(Errc::NonFiniteGradient, "non-finite gradient in tensor " + name);
    g.push_back(&t);
  });
  std::vector<Mat<S> *> m, v;
  state.m.visit([&](const std::string &, Mat<S> &t, ParamKind) { m.push_back(&t); });
  state.v.visit([&](const std::string &, Mat<S> &t, ParamKind) { v.push_back(&t); });

  const double lr = learning_rate(cfg, state.step);
  const double t = static_cast<double>(state.step + 1);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  const S b1 = static_cast<S>(cfg.beta1), b2 = static_cast<S>(cfg.beta2);

  std::size_t i = 0;
  params.visit([&](const std::string &, Mat<S> &p, ParamKind kind) {
    const Mat<S> &gi = *g[i];
    Mat<S> &mi = *m[i];
    Mat<S> &vi = *v[i];
    ++i;
    mi = b1 * mi + (S(1) - b1) * gi;
    vi = b2 * vi + (S(1) - b2) * gi.cwiseProduct(gi);
    const bool decay = kind == ParamKind::Weight || kind == ParamKind::Embedding;
    const S wd = decay ? static_cast<S>(lr * cfg.weight_decay) : S(0);
    const S step_lr = static_cast<S>(lr);
    const S inv_c1 = static_cast<S>(1.0 / c1);
    const S inv_sqrt_c2 = static_cast<S>(1.0 / std::sqrt(c2));
    const S eps = static_cast<S>(cfg.eps);
    for (Eigen::Index k = 0; k < p.size(); ++k) {
      const S mhat = mi.data()[k] * inv_c1;
      const S denom = std::sqrt(vi.data()[k]) * inv_sqrt_c2 + eps;
      p.data()[k] -= step_lr * (mhat / denom) + wd * p.data()[k];
    }
  });
  ++state.step;
}

template void adamw_step<float>(model::ModelParams<float> &,
                                const model::ModelParams<float> &,
                                AdamWState<float> &, const AdamWConfig &);
template void adamw_step<double>(model::ModelParams<double> &,
                                 const model::ModelParams<double> &,
                                 AdamWState<double> &, const AdamWConfig &);

}  // namespace lipidlm::train
