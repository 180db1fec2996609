//
// Project LipidLM - Copyright 2026 The LipidLM Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "lipidlm/model/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "lipidlm/error.hpp"
#include "lipidlm/random.hpp"

namespace lipidlm::model {
namespace {

using tok::kIgnore;

// Dropout sites, used to derive independent mask streams.
enum Site : std::uint64_t {
  kSiteEmbedding = 1,
  kSiteAttnProbs,
  kSiteAttnOut,
  kSiteFfnOut,
  kSitePooled,
};

template <class S>
S gelu(S x) {
  return S(0.5) * x * (S(1) + std::erf(x * S(M_SQRT1_2)));
}

template <class S>
S gelu_grad(S x) {
  const S cdf = S(0.5) * (S(1) + std::erf(x * S(M_SQRT1_2)));
  const S pdf = std::exp(S(-0.5) * x * x) * S(0.3989422804014327);
  return cdf + x * pdf;
}

template <class S>
Mat<S> linear(const Mat<S> &x, const Mat<S> &w, const Mat<S> &b) {
  Mat<S> y(x.rows(), w.cols());
  y.noalias() = x * w;
  y.rowwise() += b.row(0);
  return y;
}

// dW += x^T dy, db += colsum(dy), returns dy W^T.
template <class S>
Mat<S> linear_backward(const Mat<S> &x, const Mat<S> &w, const Mat<S> &dy,
                       Mat<S> &dw, Mat<S> &db) {
  dw.noalias() += x.transpose() * dy;
  db += dy.colwise().sum();
  Mat<S> dx(dy.rows(), w.rows());
  dx.noalias() = dy * w.transpose();
  return dx;
}

template <class S>
struct LnCache {
  Mat<S> xhat;
  Vec<S> rstd;
};

template <class S>
Mat<S> layer_norm(const Mat<S> &x, const Mat<S> &g, const Mat<S> &b, S eps,
                  LnCache<S> &c) {
  const Vec<S> mu = x.rowwise().mean();
  Mat<S> xc = x.colwise() - mu;
  const Vec<S> var = xc.array().square().rowwise().mean();
  c.rstd = (var.array() + eps).sqrt().inverse();
  c.xhat = xc.array().colwise() * c.rstd.array();
  Mat<S> y = c.xhat.array().rowwise() * g.row(0).array();
  y.rowwise() += b.row(0);
  return y;
}

template <class S>
Mat<S> layer_norm_backward(const Mat<S> &dy, const Mat<S> &g,
                           const LnCache<S> &c, Mat<S> &dg, Mat<S> &db) {
  dg += (dy.array() * c.xhat.array()).colwise().sum().matrix();
  db += dy.colwise().sum();
  Mat<S> dxh = dy.array().rowwise() * g.row(0).array();
  const Vec<S> m1 = dxh.rowwise().mean();
  const Vec<S> m2 = (dxh.array() * c.xhat.array()).rowwise().mean();
  dxh.colwise() -= m1;
  dxh.array() -= c.xhat.array().colwise() * m2.array();
  return dxh.array().colwise() * c.rstd.array();
}

template <class S>
void softmax_rows(Mat<S> &s) {
  for (Eigen::Index r = 0; r < s.rows(); ++r) {
    auto row = s.row(r);
    row.array() -= row.maxCoeff();
    row = row.array().exp();
    row /= row.sum();
  }
}

class MaskStream {
public:
  MaskStream(std::uint64_t seed, Site site, std::uint64_t index)
      : rng_(derive_seed(seed, { site, index })) { }

  template <class S>
  Mat<S> mask(Eigen::Index rows, Eigen::Index cols, double p) {
    Mat<S> m(rows, cols);
    const S keep = S(1.0 / (1.0 - p));
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
      m.data()[i] = u < p ? S(0) : keep;
    }
    return m;
  }

private:
  std::mt19937_64 rng_;
};

// Softmax cross-entropy over rows with label != kIgnore. Writes the gradient
// of scale * mean loss into dlogits when non-null.
template <class S>
double cross_entropy(const Mat<S> &logits, const std::vector<int> &labels,
                     double scale, Mat<S> *dlogits, int &count) {
  count = 0;
  for (int y: labels)
    count += y != kIgnore ? 1 : 0;
  if (dlogits != nullptr)
    dlogits->setZero(logits.rows(), logits.cols());
  if (count == 0)
    return 0.0;
  double total = 0.0;
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const int y = labels[r];
    if (y == kIgnore)
      continue;
    if (y < 0 || y >= logits.cols())
      throw Error(Errc::LabelOutOfRange, "label " + std::to_string(y)
                                             + " outside " + std::to_string(logits.cols())
                                             + " classes");
    const double mx = static_cast<double>(logits.row(r).maxCoeff());
    double z = 0.0;
    for (Eigen::Index c = 0; c < logits.cols(); ++c)
      z += std::exp(static_cast<double>(logits(r, c)) - mx);
    const double lse = mx + std::log(z);
    total += lse - static_cast<double>(logits(r, y));
    if (dlogits != nullptr) {
      const double k = scale / count;
      for (Eigen::Index c = 0; c < logits.cols(); ++c)
        (*dlogits)(r, c) =
            static_cast<S>(k * std::exp(static_cast<double>(logits(r, c)) - lse));
      (*dlogits)(r, y) -= static_cast<S>(k);
    }
  }
  return total / count;
}

template <class S>
class Engine {
public:
  Engine(const ModelParams<S> &p, const ModelConfig &cfg, const Batch &batch,
         const ForwardOptions &opts)
      : p_(p), cfg_(cfg), batch_(batch), opts_(opts),
        drop_(opts.training ? cfg.dropout : 0.0) { }

  void forward();
  LossBreakdown loss(const TaskWeights &weights, bool want_grad);
  void backward(ModelParams<S> &g);

  Outputs<S> out;

private:
  struct LayerCache {
    Mat<S> xin, q, k, v, ctx, attn_mask, x1, h, f, ffn_mask;
    LnCache<S> ln1, ln2;
    std::vector<Mat<S>> probs, prob_masks;
  };

  bool dropout_on() const { return drop_ > 0.0; }
  bool seq_heads() const {
    return opts_.heads.has(Task::NumTails) || opts_.heads.has(Task::ConnSeq)
           || opts_.heads.has(Task::Pair) || opts_.heads.has(Task::Regression);
  }
  void check_inputs();
  Mat<S> apply_mask(const Mat<S> &x, const Mat<S> &m) const {
    return m.size() == 0 ? x : Mat<S>(x.cwiseProduct(m));
  }

  const ModelParams<S> &p_;
  const ModelConfig &cfg_;
  const Batch &batch_;
  const ForwardOptions &opts_;
  const double drop_;

  std::vector<int> ids_, pos_, seg_;
  LnCache<S> emb_ln_;
  Mat<S> emb_mask_;
  std::vector<LayerCache> layers_;

  Mat<S> cls_, pooled_mask_, pooled_d_;
  std::vector<Mat<S>> reg_pre_, reg_act_;  // pre-activations, layer inputs
  Mat<S> mlm_x_, mlm_pre_, mlm_act_;
  LnCache<S> mlm_ln_;
  Mat<S> mlm_norm_;

  // Loss gradients with respect to head outputs.
  Mat<S> d_mlm_, d_ntails_, d_connseq_, d_pair_, d_reg_, d_conntok_, d_headtail_;
  bool has_mlm_ = false;
};

template <class S>
void Engine<S>::check_inputs() {
  const int B = batch_.size();
  if (!batch_.mlm_labels.empty() && static_cast<int>(batch_.mlm_labels.size()) != B)
    throw Error(Errc::ShapeMismatch, "mlm_labels must have one entry per input");
  out.offsets.resize(B);
  out.lengths.resize(B);
  int total = 0;
  for (int b = 0; b < B; ++b) {
    const auto &e = batch_.inputs[b];
    const int L = e.max_len();
    if (static_cast<int>(e.attention_mask.size()) != L
        || static_cast<int>(e.segment_ids.size()) != L)
      throw Error(Errc::ShapeMismatch, "input vectors differ in length");
    int len = 0;
    while (len < L && e.attention_mask[len] == 1)
      ++len;
    for (int i = len; i < L; ++i)
      if (e.attention_mask[i] != 0)
        throw Error(Errc::ShapeMismatch, "attention mask is not a prefix of ones");
    if (len == 0)
      throw Error(Errc::ShapeMismatch, "empty input sequence");
    if (len > cfg_.max_len)
      throw Error(Errc::ShapeMismatch, "sequence of length " + std::to_string(len)
                                           + " exceeds max_len "
                                           + std::to_string(cfg_.max_len));
    if (!batch_.mlm_labels.empty()
        && static_cast<int>(batch_.mlm_labels[b].size()) != L)
      throw Error(Errc::ShapeMismatch, "mlm label vector length mismatch");
    for (int i = 0; i < len; ++i) {
      if (e.ids[i] < 0 || e.ids[i] >= cfg_.vocab_size)
        throw Error(Errc::ShapeMismatch, "token id outside vocabulary");
      if (e.segment_ids[i] < 0 || e.segment_ids[i] >= cfg_.n_segments)
        throw Error(Errc::ShapeMismatch, "segment id out of range");
    }
    out.offsets[b] = total;
    out.lengths[b] = len;
    total += len;
  }
  out.tokens = total;
  ids_.resize(total);
  pos_.resize(total);
  seg_.resize(total);
  for (int b = 0; b < B; ++b)
    for (int i = 0; i < out.lengths[b]; ++i) {
      const int r = out.offsets[b] + i;
      ids_[r] = batch_.inputs[b].ids[i];
      pos_[r] = i;
      seg_[r] = batch_.inputs[b].segment_ids[i];
    }
}

template <class S>
void Engine<S>::forward() {
  check_inputs();
  const int T = out.tokens, B = batch_.size(), h = cfg_.hidden;
  const int nh = cfg_.n_heads, dh = cfg_.head_dim();
  const S eps = static_cast<S>(cfg_.layernorm_eps);
  const S scale = S(1) / std::sqrt(static_cast<S>(dh));

  Mat<S> e(T, h);
  for (int r = 0; r < T; ++r)
    e.row(r) = p_.tok_emb.row(ids_[r]) + p_.pos_emb.row(pos_[r])
               + p_.seg_emb.row(seg_[r]);
  Mat<S> x = layer_norm(e, p_.emb_ln_g, p_.emb_ln_b, eps, emb_ln_);
  if (dropout_on()) {
    emb_mask_ = MaskStream(opts_.dropout_seed, kSiteEmbedding, 0).mask<S>(T, h, drop_);
    x = x.cwiseProduct(emb_mask_);
  }

  layers_.resize(cfg_.n_layers);
  for (int l = 0; l < cfg_.n_layers; ++l) {
    const auto &lp = p_.layers[l];
    auto &c = layers_[l];
    c.xin = std::move(x);
    c.q = linear(c.xin, lp.wq, lp.bq);
    c.k = linear(c.xin, lp.wk, lp.bk);
    c.v = linear(c.xin, lp.wv, lp.bv);
    c.ctx.resize(T, h);
    c.probs.assign(static_cast<std::size_t>(B) * nh, Mat<S>());
    c.prob_masks.assign(dropout_on() ? static_cast<std::size_t>(B) * nh : 0, Mat<S>());
    MaskStream attn_stream(opts_.dropout_seed, kSiteAttnProbs, l);
    for (int b = 0; b < B; ++b) {
      const int off = out.offsets[b], len = out.lengths[b];
      for (int a = 0; a < nh; ++a) {
        const auto qb = c.q.block(off, a * dh, len, dh);
        const auto kb = c.k.block(off, a * dh, len, dh);
        const auto vb = c.v.block(off, a * dh, len, dh);
        Mat<S> s(len, len);
        s.noalias() = qb * kb.transpose();
        s *= scale;
        softmax_rows(s);
        const std::size_t idx = static_cast<std::size_t>(b) * nh + a;
        if (dropout_on()) {
          c.prob_masks[idx] = attn_stream.mask<S>(len, len, drop_);
          c.ctx.block(off, a * dh, len, dh).noalias() =
              s.cwiseProduct(c.prob_masks[idx]) * vb;
        } else {
          c.ctx.block(off, a * dh, len, dh).noalias() = s * vb;
        }
        c.probs[idx] = std::move(s);
      }
    }
    Mat<S> attn = linear(c.ctx, lp.wo, lp.bo);
    if (dropout_on()) {
      c.attn_mask = MaskStream(opts_.dropout_seed, kSiteAttnOut, l).mask<S>(T, h, drop_);
      attn = attn.cwiseProduct(c.attn_mask);
    }
    c.x1 = layer_norm<S>(c.xin + attn, lp.ln1_g, lp.ln1_b, eps, c.ln1);
    c.h = linear(c.x1, lp.w1, lp.b1);
    c.f = c.h.unaryExpr([](S v) { return gelu(v); });
    Mat<S> ffn = linear(c.f, lp.w2, lp.b2);
    if (dropout_on()) {
      c.ffn_mask = MaskStream(opts_.dropout_seed, kSiteFfnOut, l).mask<S>(T, h, drop_);
      ffn = ffn.cwiseProduct(c.ffn_mask);
    }
    x = layer_norm<S>(c.x1 + ffn, lp.ln2_g, lp.ln2_b, eps, c.ln2);
  }
  out.hidden = std::move(x);

  if (seq_heads()) {
    cls_.resize(B, h);
    for (int b = 0; b < B; ++b)
      cls_.row(b) = out.hidden.row(out.offsets[b]);
    out.pooled = linear(cls_, p_.pool_w, p_.pool_b).array().tanh();
    pooled_d_ = out.pooled;
    if (dropout_on()) {
      pooled_mask_ = MaskStream(opts_.dropout_seed, kSitePooled, 0).mask<S>(B, h, drop_);
      pooled_d_ = pooled_d_.cwiseProduct(pooled_mask_);
    }
    if (opts_.heads.has(Task::NumTails))
      out.ntails = linear(pooled_d_, p_.ntails_w, p_.ntails_b);
    if (opts_.heads.has(Task::ConnSeq))
      out.connseq = linear(pooled_d_, p_.connseq_w, p_.connseq_b);
    if (opts_.heads.has(Task::Pair))
      out.pair = linear(pooled_d_, p_.pair_w, p_.pair_b);
    if (opts_.heads.has(Task::Regression)) {
      const std::size_t n = p_.reg_w.size();
      reg_pre_.resize(n);
      reg_act_.resize(n);
      Mat<S> z = pooled_d_;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        reg_act_[i] = std::move(z);
        reg_pre_[i] = linear(reg_act_[i], p_.reg_w[i], p_.reg_b[i]);
        z = reg_pre_[i].unaryExpr([](S v) { return gelu(v); });
      }
      reg_act_[n - 1] = std::move(z);
      out.regression = linear(reg_act_[n - 1], p_.reg_w[n - 1], p_.reg_b[n - 1]);
    }
  }
  if (opts_.heads.has(Task::ConnToken))
    out.conntoken = linear(out.hidden, p_.conntok_w, p_.conntok_b);
  if (opts_.heads.has(Task::HeadTail))
    out.headtail = linear(out.hidden, p_.headtail_w, p_.headtail_b);

  has_mlm_ = opts_.heads.has(Task::Mlm)
             && (opts_.mlm_all_positions || !batch_.mlm_labels.empty());
  if (has_mlm_) {
    out.mlm_rows.clear();
    for (int b = 0; b < B; ++b)
      for (int i = 0; i < out.lengths[b]; ++i)
        if (opts_.mlm_all_positions || batch_.mlm_labels[b][i] != kIgnore)
          out.mlm_rows.push_back(out.offsets[b] + i);
    const int n = static_cast<int>(out.mlm_rows.size());
    mlm_x_.resize(n, h);
    for (int i = 0; i < n; ++i)
      mlm_x_.row(i) = out.hidden.row(out.mlm_rows[i]);
    mlm_pre_ = linear(mlm_x_, p_.mlm_w, p_.mlm_b);
    mlm_act_ = mlm_pre_.unaryExpr([](S v) { return gelu(v); });
    mlm_norm_ = layer_norm(mlm_act_, p_.mlm_ln_g, p_.mlm_ln_b, eps, mlm_ln_);
    out.mlm = linear(mlm_norm_, p_.mlm_out_w, p_.mlm_out_b);
  }
}

template <class S>
LossBreakdown Engine<S>::loss(const TaskWeights &w, bool want_grad) {
  LossBreakdown lb;
  const int B = batch_.size();
  const auto &heads = opts_.heads;
  auto add = [&](Task t, double value) {
    lb.task[static_cast<int>(t)] = value;
    lb.total += w[static_cast<int>(t)] * value;
  };
  auto weight = [&](Task t) { return w[static_cast<int>(t)]; };

  if (heads.has(Task::Mlm)) {
    if (batch_.mlm_labels.empty())
      throw Error(Errc::NoSelectedTokens, "MLM is active but the batch has no MLM labels");
    std::vector<int> labels(out.mlm_rows.size(), kIgnore);
    for (std::size_t i = 0; i < out.mlm_rows.size(); ++i) {
      const int r = out.mlm_rows[i];
      int b = static_cast<int>(std::upper_bound(out.offsets.begin(), out.offsets.end(), r)
                               - out.offsets.begin()) - 1;
      labels[i] = batch_.mlm_labels[b][r - out.offsets[b]];
    }
    int count = 0;
    const double l = cross_entropy(out.mlm, labels, weight(Task::Mlm),
                                   want_grad ? &d_mlm_ : nullptr, count);
    if (count == 0)
      throw Error(Errc::NoSelectedTokens, "batch has no MLM-selected positions");
    lb.count[static_cast<int>(Task::Mlm)] = count;
    add(Task::Mlm, l);
  }

  auto seq_ce = [&](Task t, const Mat<S> &logits, auto label_of, Mat<S> &grad) {
    std::vector<int> labels(B);
    for (int b = 0; b < B; ++b)
      labels[b] = label_of(batch_.inputs[b]);
    int count = 0;
    const double l = cross_entropy(logits, labels, weight(t),
                                   want_grad ? &grad : nullptr, count);
    lb.count[static_cast<int>(t)] = count;
    add(t, l);
  };
  auto tok_ce = [&](Task t, const Mat<S> &logits, auto member, Mat<S> &grad) {
    std::vector<int> labels(out.tokens, kIgnore);
    for (int b = 0; b < B; ++b) {
      const auto &lab = batch_.inputs[b].*member;
      for (int i = 0; i < out.lengths[b]; ++i)
        labels[out.offsets[b] + i] = i < static_cast<int>(lab.size()) ? lab[i] : kIgnore;
    }
    int count = 0;
    const double l = cross_entropy(logits, labels, weight(t),
                                   want_grad ? &grad : nullptr, count);
    lb.count[static_cast<int>(t)] = count;
    add(t, l);
  };

  if (heads.has(Task::NumTails))
    seq_ce(Task::NumTails, out.ntails,
           [](const tok::EncodedInput &e) { return e.n_tails_class; }, d_ntails_);
  if (heads.has(Task::ConnSeq))
    seq_ce(Task::ConnSeq, out.connseq,
           [](const tok::EncodedInput &e) { return e.conn_seq; }, d_connseq_);
  if (heads.has(Task::Pair))
    seq_ce(Task::Pair, out.pair,
           [](const tok::EncodedInput &e) { return e.pair; }, d_pair_);
  if (heads.has(Task::ConnToken))
    tok_ce(Task::ConnToken, out.conntoken, &tok::EncodedInput::conn_token, d_conntok_);
  if (heads.has(Task::HeadTail))
    tok_ce(Task::HeadTail, out.headtail, &tok::EncodedInput::head_tail, d_headtail_);

  if (heads.has(Task::Regression)) {
    int count = 0;
    for (const auto &e: batch_.inputs)
      count += e.has_target ? 1 : 0;
    double l = 0.0;
    if (want_grad)
      d_reg_.setZero(B, 1);
    for (int b = 0; b < B; ++b) {
      if (!batch_.inputs[b].has_target)
        continue;
      const double diff = static_cast<double>(out.regression(b, 0)) - batch_.inputs[b].target;
      l += diff * diff;
      if (want_grad)
        d_reg_(b, 0) = static_cast<S>(2.0 * diff * weight(Task::Regression) / count);
    }
    lb.count[static_cast<int>(Task::Regression)] = count;
    add(Task::Regression, count > 0 ? l / count : 0.0);
  }
  return lb;
}

template <class S>
void Engine<S>::backward(ModelParams<S> &g) {
  const int T = out.tokens, B = batch_.size(), h = cfg_.hidden;
  const int nh = cfg_.n_heads, dh = cfg_.head_dim();
  const S scale = S(1) / std::sqrt(static_cast<S>(dh));
  const auto &heads = opts_.heads;

  Mat<S> dx = Mat<S>::Zero(T, h);

  if (has_mlm_ && heads.has(Task::Mlm)) {
    Mat<S> d = linear_backward(mlm_norm_, p_.mlm_out_w, d_mlm_, g.mlm_out_w, g.mlm_out_b);
    d = layer_norm_backward(d, p_.mlm_ln_g, mlm_ln_, g.mlm_ln_g, g.mlm_ln_b);
    d = d.cwiseProduct(mlm_pre_.unaryExpr([](S v) { return gelu_grad(v); }));
    d = linear_backward(mlm_x_, p_.mlm_w, d, g.mlm_w, g.mlm_b);
    for (std::size_t i = 0; i < out.mlm_rows.size(); ++i)
      dx.row(out.mlm_rows[i]) += d.row(i);
  }
  if (heads.has(Task::ConnToken))
    dx += linear_backward(out.hidden, p_.conntok_w, d_conntok_, g.conntok_w, g.conntok_b);
  if (heads.has(Task::HeadTail))
    dx += linear_backward(out.hidden, p_.headtail_w, d_headtail_, g.headtail_w, g.headtail_b);

  if (seq_heads()) {
    Mat<S> dp = Mat<S>::Zero(B, h);
    if (heads.has(Task::NumTails))
      dp += linear_backward(pooled_d_, p_.ntails_w, d_ntails_, g.ntails_w, g.ntails_b);
    if (heads.has(Task::ConnSeq))
      dp += linear_backward(pooled_d_, p_.connseq_w, d_connseq_, g.connseq_w, g.connseq_b);
    if (heads.has(Task::Pair))
      dp += linear_backward(pooled_d_, p_.pair_w, d_pair_, g.pair_w, g.pair_b);
    if (heads.has(Task::Regression)) {
      const std::size_t n = p_.reg_w.size();
      Mat<S> d = linear_backward(reg_act_[n - 1], p_.reg_w[n - 1], d_reg_,
                                 g.reg_w[n - 1], g.reg_b[n - 1]);
      for (std::size_t i = n - 1; i-- > 0;) {
        d = d.cwiseProduct(reg_pre_[i].unaryExpr([](S v) { return gelu_grad(v); }));
        d = linear_backward(reg_act_[i], p_.reg_w[i], d, g.reg_w[i], g.reg_b[i]);
      }
      dp += d;
    }
    dp = apply_mask(dp, pooled_mask_);
    dp = dp.cwiseProduct((S(1) - out.pooled.array().square()).matrix());
    const Mat<S> dcls = linear_backward(cls_, p_.pool_w, dp, g.pool_w, g.pool_b);
    for (int b = 0; b < B; ++b)
      dx.row(out.offsets[b]) += dcls.row(b);
  }

  for (int l = cfg_.n_layers - 1; l >= 0; --l) {
    const auto &lp = p_.layers[l];
    auto &gl = g.layers[l];
    auto &c = layers_[l];

    // dx is the gradient at this layer's output.
    Mat<S> dr2 = layer_norm_backward(dx, lp.ln2_g, c.ln2, gl.ln2_g, gl.ln2_b);
    Mat<S> dffn = apply_mask(dr2, c.ffn_mask);
    Mat<S> df = linear_backward(c.f, lp.w2, dffn, gl.w2, gl.b2);
    df = df.cwiseProduct(c.h.unaryExpr([](S v) { return gelu_grad(v); }));
    Mat<S> dx1 = linear_backward(c.x1, lp.w1, df, gl.w1, gl.b1);
    dx1 += dr2;

    Mat<S> dr1 = layer_norm_backward(dx1, lp.ln1_g, c.ln1, gl.ln1_g, gl.ln1_b);
    Mat<S> dattn = apply_mask(dr1, c.attn_mask);
    const Mat<S> dctx = linear_backward(c.ctx, lp.wo, dattn, gl.wo, gl.bo);

    Mat<S> dq(T, h), dk(T, h), dv(T, h);
    for (int b = 0; b < B; ++b) {
      const int off = out.offsets[b], len = out.lengths[b];
      for (int a = 0; a < nh; ++a) {
        const std::size_t idx = static_cast<std::size_t>(b) * nh + a;
        const Mat<S> &P = c.probs[idx];
        const auto qb = c.q.block(off, a * dh, len, dh);
        const auto kb = c.k.block(off, a * dh, len, dh);
        const auto vb = c.v.block(off, a * dh, len, dh);
        const auto dcb = dctx.block(off, a * dh, len, dh);
        Mat<S> dprob(len, len);
        dprob.noalias() = dcb * vb.transpose();
        if (dropout_on()) {
          const Mat<S> &M = c.prob_masks[idx];
          dv.block(off, a * dh, len, dh).noalias() = P.cwiseProduct(M).transpose() * dcb;
          dprob = dprob.cwiseProduct(M);
        } else {
          dv.block(off, a * dh, len, dh).noalias() = P.transpose() * dcb;
        }
        const Vec<S> rowdot = dprob.cwiseProduct(P).rowwise().sum();
        dprob.colwise() -= rowdot;
        Mat<S> ds = P.cwiseProduct(dprob) * scale;
        dq.block(off, a * dh, len, dh).noalias() = ds * kb;
        dk.block(off, a * dh, len, dh).noalias() = ds.transpose() * qb;
      }
    }
    dx = dr1;
    dx += linear_backward(c.xin, lp.wq, dq, gl.wq, gl.bq);
    dx += linear_backward(c.xin, lp.wk, dk, gl.wk, gl.bk);
    dx += linear_backward(c.xin, lp.wv, dv, gl.wv, gl.bv);
  }

  dx = apply_mask(dx, emb_mask_);
  const Mat<S> de = layer_norm_backward(dx, p_.emb_ln_g, emb_ln_, g.emb_ln_g, g.emb_ln_b);
  for (int r = 0; r < T; ++r) {
    g.tok_emb.row(ids_[r]) += de.row(r);
    g.pos_emb.row(pos_[r]) += de.row(r);
    g.seg_emb.row(seg_[r]) += de.row(r);
  }
}

}  // namespace

template <class S>
Outputs<S> forward(const ModelParams<S> &params, const ModelConfig &cfg,
                   const Batch &batch, const ForwardOptions &opts) {
  Engine<S> e(params, cfg, batch, opts);
  e.forward();
  return std::move(e.out);
}

template <class S>
LossBreakdown compute_loss(const Outputs<S> &out, const Batch &batch,
                           const TaskSet &heads, const TaskWeights &weights) {
  // Reuses the engine's loss on precomputed outputs.
  static const ModelParams<S> kNoParams;
  static const ModelConfig kNoConfig;
  ForwardOptions opts;
  opts.heads = heads;
  Engine<S> e(kNoParams, kNoConfig, batch, opts);
  e.out = out;
  return e.loss(weights, false);
}

template <class S>
LossBreakdown forward_backward(const ModelParams<S> &params,
                               const ModelConfig &cfg, const Batch &batch,
                               const ForwardOptions &opts,
                               const TaskWeights &weights,
                               ModelParams<S> *grads, Outputs<S> *outputs) {
  Engine<S> e(params, cfg, batch, opts);
  e.forward();
  const LossBreakdown lb = e.loss(weights, grads != nullptr);
  if (grads != nullptr)
    e.backward(*grads);
  if (outputs != nullptr)
    *outputs = std::move(e.out);
  return lb;
}

template <class S>
Mat<S> embed_cls(const ModelParams<S> &params, const ModelConfig &cfg,
                 std::span<const tok::EncodedInput> inputs) {
  Batch batch;
  batch.inputs.assign(inputs.begin(), inputs.end());
  ForwardOptions opts;
  opts.heads = TaskSet {};
  const Outputs<S> out = forward(params, cfg, batch, opts);
  Mat<S> cls(batch.size(), cfg.hidden);
  for (int b = 0; b < batch.size(); ++b)
    cls.row(b) = out.hidden.row(out.offsets[b]);
  return cls;
}

#define LIPIDLM_INSTANTIATE(S)                                                 \
  template Outputs<S> forward<S>(const ModelParams<S> &, const ModelConfig &,  \
                                 const Batch &, const ForwardOptions &);       \
  template LossBreakdown compute_loss<S>(const Outputs<S> &, const Batch &,    \
                                         const TaskSet &, const TaskWeights &);\
  template LossBreakdown forward_backward<S>(                                  \
      const ModelParams<S> &, const ModelConfig &, const Batch &,              \
      const ForwardOptions &, const TaskWeights &, ModelParams<S> *,           \
      Outputs<S> *);                                                           \
  template Mat<S> embed_cls<S>(const ModelParams<S> &, const ModelConfig &,    \
                               std::span<const tok::EncodedInput>);

LIPIDLM_INSTANTIATE(float)
LIPIDLM_INSTANTIATE(double)

#undef LIPIDLM_INSTANTIATE

}  // namespace lipidlm::model
