//
// Project LipidLM - Copyright 2026 The LipidLM Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lipidlm/model/config.hpp"

namespace lipidlm::model {

template <class S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <class S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

enum class ParamKind {
  Weight,
  Bias,
  Norm,
  Embedding,
};

// Weights are stored (in, out) so that y = x W + b on row-vector
// activations. Biases and layernorm parameters are 1 x n.

template <class S>
struct LayerParams {
  Mat<S> wq, bq, wk, bk, wv, bv, wo, bo;
  Mat<S> ln1_g, ln1_b;
  Mat<S> w1, b1, w2, b2;
  Mat<S> ln2_g, ln2_b;
};

template <class S>
struct ModelParams {
  Mat<S> tok_emb, pos_emb, seg_emb, emb_ln_g, emb_ln_b;
  std::vector<LayerParams<S>> layers;

  Mat<S> mlm_w, mlm_b, mlm_ln_g, mlm_ln_b, mlm_out_w, mlm_out_b;
  Mat<S> pool_w, pool_b;
  Mat<S> ntails_w, ntails_b;
  Mat<S> connseq_w, connseq_b;
  Mat<S> conntok_w, conntok_b;
  Mat<S> headtail_w, headtail_b;
  Mat<S> pair_w, pair_b;
  std::vector<Mat<S>> reg_w, reg_b;

  /// Calls f(name, tensor, kind) for every tensor in a fixed order.
  template <class F>
  void visit(F &&f);
  template <class F>
  void visit(F &&f) const;

  void set_zero();
  std::size_t num_scalars() const;
};

/// Every tensor allocated with its declared shape and zero-filled.
template <class S>
ModelParams<S> allocate_params(const ModelConfig &cfg);

/// Weights and embeddings ~ Normal(0, 0.02), biases 0, layernorm gain 1 and
/// shift 0. Each tensor draws from its own stream derived from (seed, name).
template <class S>
ModelParams<S> init_params(const ModelConfig &cfg, std::uint64_t seed);

template <class To, class From>
ModelParams<To> cast_params(const ModelParams<From> &p);

// -----------------------------------------------------------------------------

namespace detail {

template <class P, class F>
void visit_params(P &p, F &&f) {
  f("embeddings.token", p.tok_emb, ParamKind::Embedding);
  f("embeddings.position", p.pos_emb, ParamKind::Embedding);
  f("embeddings.segment", p.seg_emb, ParamKind::Embedding);
  f("embeddings.ln.gamma", p.emb_ln_g, ParamKind::Norm);
  f("embeddings.ln.beta", p.emb_ln_b, ParamKind::Norm);
  for (std::size_t i = 0; i < p.layers.size(); ++i) {
    auto &l = p.layers[i];
    const std::string pre = "layer" + std::to_string(i) + ".";
    f(pre + "attn.wq", l.wq, ParamKind::Weight);
    f(pre + "attn.bq", l.bq, ParamKind::Bias);
    f(pre + "attn.wk", l.wk, ParamKind::Weight);
    f(pre + "attn.bk", l.bk, ParamKind::Bias);
    f(pre + "attn.wv", l.wv, ParamKind::Weight);
    f(pre + "attn.bv", l.bv, ParamKind::Bias);
    f(pre + "attn.wo", l.wo, ParamKind::Weight);
    f(pre + "attn.bo", l.bo, ParamKind::Bias);
    f(pre + "ln1.gamma", l.ln1_g, ParamKind::Norm);
    f(pre + "ln1.beta", l.ln1_b, ParamKind::Norm);
    f(pre + "ffn.w1", l.w1, ParamKind::Weight);
    f(pre + "ffn.b1", l.b1, ParamKind::Bias);
    f(pre + "ffn.w2", l.w2, ParamKind::Weight);
    f(pre + "ffn.b2", l.b2, ParamKind::Bias);
    f(pre + "ln2.gamma", l.ln2_g, ParamKind::Norm);
    f(pre + "ln2.beta", l.ln2_b, ParamKind::Norm);
  }
  f("mlm.dense.w", p.mlm_w, ParamKind::Weight);
  f("mlm.dense.b", p.mlm_b, ParamKind::Bias);
  f("mlm.ln.gamma", p.mlm_ln_g, ParamKind::Norm);
  f("mlm.ln.beta", p.mlm_ln_b, ParamKind::Norm);
  f("mlm.out.w", p.mlm_out_w, ParamKind::Weight);
  f("mlm.out.b", p.mlm_out_b, ParamKind::Bias);
  f("pooler.w", p.pool_w, ParamKind::Weight);
  f("pooler.b", p.pool_b, ParamKind::Bias);
  f("ntails.w", p.ntails_w, ParamKind::Weight);
  f("ntails.b", p.ntails_b, ParamKind::Bias);
  f("connseq.w", p.connseq_w, ParamKind::Weight);
  f("connseq.b", p.connseq_b, ParamKind::Bias);
  f("conntoken.w", p.conntok_w, ParamKind::Weight);
  f("conntoken.b", p.conntok_b, ParamKind::Bias);
  f("headtail.w", p.headtail_w, ParamKind::Weight);
  f("headtail.b", p.headtail_b, ParamKind::Bias);
  f("pair.w", p.pair_w, ParamKind::Weight);
  f("pair.b", p.pair_b, ParamKind::Bias);
  for (std::size_t i = 0; i < p.reg_w.size(); ++i) {
    const std::string pre = "regression." + std::to_string(i) + ".";
    f(pre + "w", p.reg_w[i], ParamKind::Weight);
    f(pre + "b", p.reg_b[i], ParamKind::Bias);
  }
}

}  // namespace detail

template <class S>
template <class F>
void ModelParams<S>::visit(F &&f) {
  detail::visit_params(*this, f);
}

template <class S>
template <class F>
void ModelParams<S>::visit(F &&f) const {
  detail::visit_params(*this, f);
}

template <class S>
void ModelParams<S>::set_zero() {
  visit([](const std::string &, Mat<S> &t, ParamKind) { t.setZero(); });
}

template <class S>
std::size_t ModelParams<S>::num_scalars() const {
  std::size_t n = 0;
  visit([&](const std::string &, const Mat<S> &t, ParamKind) { n += t.size(); });
  return n;
}

template <class To, class From>
ModelParams<To> cast_params(const ModelParams<From> &p) {
  ModelParams<To> out;
  out.layers.resize(p.layers.size());
  out.reg_w.resize(p.reg_w.size());
  out.reg_b.resize(p.reg_b.size());
  std::vector<const Mat<From> *> src;
  p.visit([&](const std::string &, const Mat<From> &t, ParamKind) { src.push_back(&t); });
  std::size_t i = 0;
  out.visit([&](const std::string &, Mat<To> &t, ParamKind) {
    t = src[i++]->template cast<To>();
  });
  return out;
}

}  // namespace lipidlm::model
