//
// Project LipidLM - Copyright 2026 The LipidLM Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "lipidlm/model/params.hpp"

#include <random>

#include "lipidlm/random.hpp"

namespace lipidlm::model {
namespace {

std::uint64_t name_hash(const std::string &s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c: s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

template <class S>
ModelParams<S> allocate_params(const ModelConfig &cfg) {
  cfg.validate();
  const int h = cfg.hidden, f = cfg.ffn_dim, v = cfg.vocab_size;
  auto mat = [](int r, int c) { return Mat<S>::Zero(r, c); };

  ModelParams<S> p;
  p.tok_emb = mat(v, h);
  p.pos_emb = mat(cfg.max_len, h);
  p.seg_emb = mat(cfg.n_segments, h);
  p.emb_ln_g = mat(1, h);
  p.emb_ln_b = mat(1, h);
  p.layers.resize(cfg.n_layers);
  for (auto &l: p.layers) {
    l.wq = mat(h, h), l.bq = mat(1, h);
    l.wk = mat(h, h), l.bk = mat(1, h);
    l.wv = mat(h, h), l.bv = mat(1, h);
    l.wo = mat(h, h), l.bo = mat(1, h);
    l.ln1_g = mat(1, h), l.ln1_b = mat(1, h);
    l.w1 = mat(h, f), l.b1 = mat(1, f);
    l.w2 = mat(f, h), l.b2 = mat(1, h);
    l.ln2_g = mat(1, h), l.ln2_b = mat(1, h);
  }
  p.mlm_w = mat(h, h), p.mlm_b = mat(1, h);
  p.mlm_ln_g = mat(1, h), p.mlm_ln_b = mat(1, h);
  p.mlm_out_w = mat(h, v), p.mlm_out_b = mat(1, v);
  p.pool_w = mat(h, h), p.pool_b = mat(1, h);
  p.ntails_w = mat(h, cfg.n_tail_classes), p.ntails_b = mat(1, cfg.n_tail_classes);
  p.connseq_w = mat(h, cfg.n_pos_classes), p.connseq_b = mat(1, cfg.n_pos_classes);
  p.conntok_w = mat(h, 2), p.conntok_b = mat(1, 2);
  p.headtail_w = mat(h, 3), p.headtail_b = mat(1, 3);
  p.pair_w = mat(h, 2), p.pair_b = mat(1, 2);
  int in = h;
  for (int d: cfg.regression_dims) {
    p.reg_w.push_back(mat(in, d));
    p.reg_b.push_back(mat(1, d));
    in = d;
  }
  p.reg_w.push_back(mat(in, 1));
  p.reg_b.push_back(mat(1, 1));
  return p;
}

template <class S>
ModelParams<S> init_params(const ModelConfig &cfg, std::uint64_t seed) {
  ModelParams<S> p = allocate_params<S>(cfg);
  p.visit([&](const std::string &name, Mat<S> &t, ParamKind kind) {
    switch (kind) {
    case ParamKind::Bias: t.setZero(); break;
    case ParamKind::Norm:
      if (name.ends_with(".gamma"))
        t.setOnes();
      else
        t.setZero();
      break;
    case ParamKind::Weight:
    case ParamKind::Embedding: {
      std::mt19937_64 rng(derive_seed(seed, { name_hash(name) }));
      std::normal_distribution<double> dist(0.0, 0.02);
      for (Eigen::Index i = 0; i < t.size(); ++i)
        t.data()[i] = static_cast<S>(dist(rng));
      break;
    }
    }
  });
  return p;
}

template ModelParams<float> allocate_params<float>(const ModelConfig &);
template ModelParams<double> allocate_params<double>(const ModelConfig &);
template ModelParams<float> init_params<float>(const ModelConfig &, std::uint64_t);
template ModelParams<double> init_params<double>(const ModelConfig &, std::uint64_t);

}  // namespace lipidlm::model
