//
// Project LipidLM - Copyright 2026 The LipidLM Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "lipidlm/train/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "lipidlm/error.hpp"
#include "lipidlm/random.hpp"
#include "lipidlm/train/metrics.hpp"

namespace lipidlm::train {
namespace {

using model::Task;
using model::kNumTasks;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

enum Stream : std::uint64_t { kTrainOrder = 11, kValidation, kDropout, kFinetuneOrder };

int idx(Task t) { return static_cast<int>(t); }

template <class M>
int argmax_row(const M &m, Eigen::Index r) {
  Eigen::Index best;
  m.row(r).maxCoeff(&best);
  return static_cast<int>(best);
}

struct Tally {
  std::array<long, kNumTasks> correct {};
  std::array<long, kNumTasks> seen {};

  void add(Task t, bool ok) {
    ++seen[idx(t)];
    correct[idx(t)] += ok ? 1 : 0;
  }
};

void tally_batch(const model::Outputs<float> &out, const model::Batch &batch,
                 const model::TaskSet &heads, Tally &tally) {
  const int B = batch.size();
  if (heads.has(Task::Mlm)) {
    for (std::size_t i = 0; i < out.mlm_rows.size(); ++i) {
      const int r = out.mlm_rows[i];
      const int b = static_cast<int>(std::upper_bound(out.offsets.begin(), out.offsets.end(), r)
                                     - out.offsets.begin()) - 1;
      const int label = batch.mlm_labels[b][r - out.offsets[b]];
      if (label != tok::kIgnore)
        tally.add(Task::Mlm, argmax_row(out.mlm, static_cast<Eigen::Index>(i)) == label);
    }
  }
  auto seq = [&](Task t, const model::Mat<float> &logits, auto label_of) {
    if (!heads.has(t))
      return;
    for (int b = 0; b < B; ++b) {
      const int label = label_of(batch.inputs[b]);
      if (label != tok::kIgnore)
        tally.add(t, argmax_row(logits, b) == label);
    }
  };
  seq(Task::NumTails, out.ntails, [](const tok::EncodedInput &e) { return e.n_tails_class; });
  seq(Task::ConnSeq, out.connseq, [](const tok::EncodedInput &e) { return e.conn_seq; });
  seq(Task::Pair, out.pair, [](const tok::EncodedInput &e) { return e.pair; });

  for (int b = 0; b < B; ++b) {
    const auto &e = batch.inputs[b];
    if (heads.has(Task::HeadTail))
      for (int p = 0; p < e.length; ++p)
        if (e.head_tail[p] != tok::kIgnore)
          tally.add(Task::HeadTail, argmax_row(out.headtail, out.offsets[b] + p) == e.head_tail[p]);
    if (heads.has(Task::ConnToken)) {
      int best = -1;
      float best_score = -std::numeric_limits<float>::infinity();
      bool any = false;
      for (int p = 0; p < e.length; ++p) {
        if (e.conn_token[p] == tok::kIgnore)
          continue;
        any = true;
        const int r = out.offsets[b] + p;
        const float score = out.conntoken(r, 1) - out.conntoken(r, 0);
        if (score > best_score) {
          best_score = score;
          best = p;
        }
      }
      if (any)
        tally.add(Task::ConnToken, e.conn_token[best] == 1);
    }
  }
}

/// NaN-safe JSON number.
nlohmann::ordered_json num(double v) {
  return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t fingerprint(const std::string &s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c: s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

class MetricsSink {
public:
  MetricsSink(const std::filesystem::path &path, const nlohmann::ordered_json &header) {
    if (path.empty())
      return;
    if (path.has_parent_path())
      std::filesystem::create_directories(path.parent_path());
    out_.open(path, std::ios::trunc);
    if (!out_)
      throw Error(Errc::IoFailure, "cannot write " + path.string());
    out_ << header.dump() << '\n';
    out_.flush();
  }

  void write(const nlohmann::ordered_json &line) {
    if (!out_.is_open())
      return;
    out_ << line.dump() << '\n';
    out_.flush();
  }

private:
  std::ofstream out_;
};

AdamWConfig adam_config(const TrainConfig &t, int total_steps) {
  AdamWConfig a;
  a.lr = t.lr;
  a.beta1 = t.beta1;
  a.beta2 = t.beta2;
  a.eps = t.eps;
  a.weight_decay = t.weight_decay;
  a.warmup_steps = t.warmup_steps;
  a.total_steps = total_steps;
  return a;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void log_epoch(const char *stage, const EpochMetrics &m, const model::TaskSet &tasks) {
  std::ostringstream os;
  os << stage << " epoch " << m.epoch << ": train " << m.train_total << ", validation "
     << m.validation.total;
  for (Task t: tasks.list()) {
    const double a = m.validation.accuracy[idx(t)];
    if (std::isfinite(a))
      os << ", " << model::task_name(t) << " acc " << a;
  }
  if (tasks.has(Task::Regression))
    os << ", r2 " << m.r2 << ", pearson " << m.pearson;
  os << " (" << m.wall_seconds << " s)";
  std::cerr << os.str() << std::endl;
}

}  // namespace

// Configuration ------------------------------------------------------------------

void TrainConfig::validate() const {
  if (batch_size < 1)
    throw Error(Errc::ConfigError, "training.batch_size must be >= 1");
  if (epochs < 1)
    throw Error(Errc::ConfigError, "training.epochs must be >= 1");
  if (!(lr > 0.0))
    throw Error(Errc::ConfigError, "training.lr must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0))
    throw Error(Errc::ConfigError, "training betas must be in [0, 1)");
  if (!(eps > 0.0) || weight_decay < 0.0 || warmup_steps < 0)
    throw Error(Errc::ConfigError, "training eps must be positive, weight_decay and warmup_steps non-negative");
  for (double w: weights)
    if (!(w >= 0.0) || !std::isfinite(w))
      throw Error(Errc::ConfigError, "task weights must be finite and non-negative");
  masking.validate();
}

model::TaskWeights chance_normalized_weights(const model::ModelConfig &cfg) {
  auto w = model::unit_weights();
  auto inv_log = [](int classes) { return 1.0 / std::log(static_cast<double>(classes)); };
  w[idx(Task::NumTails)] = inv_log(cfg.n_tail_classes);
  w[idx(Task::ConnSeq)] = inv_log(cfg.n_pos_classes);
  w[idx(Task::ConnToken)] = inv_log(2);
  w[idx(Task::HeadTail)] = inv_log(3);
  w[idx(Task::Pair)] = inv_log(2);
  return w;
}

TrainConfig desk_pretrain_config() {
  TrainConfig t;
  t.lr = 2e-3;
  t.warmup_steps = 30;
  t.weights = chance_normalized_weights(model::ModelConfig {});
  return t;
}

TrainConfig desk_finetune_config() {
  TrainConfig t;
  t.lr = 2e-4;
  t.epochs = 30;
  t.batch_size = 32;
  return t;
}

nlohmann::ordered_json to_json(const TrainConfig &c) {
  nlohmann::ordered_json j;
  j["batch_size"] = c.batch_size;
  j["epochs"] = c.epochs;
  j["lr"] = c.lr;
  j["beta1"] = c.beta1;
  j["beta2"] = c.beta2;
  j["eps"] = c.eps;
  j["weight_decay"] = c.weight_decay;
  j["warmup_steps"] = c.warmup_steps;
  j["seed"] = c.seed;
  j["clean_auxiliary"] = c.clean_auxiliary;
  nlohmann::ordered_json w;
  for (int t = 0; t < kNumTasks; ++t)
    w[std::string(model::task_name(static_cast<Task>(t)))] = c.weights[t];
  j["weights"] = w;
  j["masking"] = { { "select_prob", c.masking.select_prob },
                   { "mask_frac", c.masking.mask_frac },
                   { "random_frac", c.masking.random_frac },
                   { "keep_frac", c.masking.keep_frac } };
  return j;
}

TrainConfig train_config_from_json(const nlohmann::json &j, TrainConfig c) {
  if (!j.is_object())
    throw Error(Errc::ConfigError, "training section must be an object");
  try {
    for (const auto &[key, value]: j.items()) {
      if (key == "batch_size") c.batch_size = value.get<int>();
      else if (key == "epochs") c.epochs = value.get<int>();
      else if (key == "lr") c.lr = value.get<double>();
      else if (key == "beta1") c.beta1 = value.get<double>();
      else if (key == "beta2") c.beta2 = value.get<double>();
      else if (key == "eps") c.eps = value.get<double>();
      else if (key == "weight_decay") c.weight_decay = value.get<double>();
      else if (key == "warmup_steps") c.warmup_steps = value.get<int>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "clean_auxiliary") c.clean_auxiliary = value.get<bool>();
      else if (key == "weights") {
        for (const auto &[name, w]: value.items())
          c.weights[idx(model::task_from_name(name))] = w.get<double>();
      } else if (key == "masking") {
        for (const auto &[name, v]: value.items()) {
          if (name == "select_prob") c.masking.select_prob = v.get<double>();
          else if (name == "mask_frac") c.masking.mask_frac = v.get<double>();
          else if (name == "random_frac") c.masking.random_frac = v.get<double>();
          else if (name == "keep_frac") c.masking.keep_frac = v.get<double>();
          else throw Error(Errc::ConfigError, "unknown key training.masking." + name);
        }
      } else
        throw Error(Errc::ConfigError, "unknown key training." + key);
    }
  } catch (const nlohmann::json::exception &e) {
    throw Error(Errc::ConfigError, std::string("training: ") + e.what());
  }
  c.validate();
  return c;
}

// Evaluation -----------------------------------------------------------------------

EvalResult evaluate(const model::ModelParams<float> &params,
                    const model::ModelConfig &cfg,
                    const std::vector<TaskBatch> &batches,
                    const model::TaskWeights &weights) {
  EvalResult r;
  std::array<double, kNumTasks> sum {};
  Tally tally;
  model::TaskSet seen_heads;
  auto run = [&](const model::Batch &batch, const model::TaskSet &heads) {
    model::ForwardOptions opts;
    opts.heads = heads;
    model::Outputs<float> out;
    const auto lb = model::forward_backward<float>(params, cfg, batch, opts, weights,
                                                   nullptr, &out);
    for (Task t: heads.list()) {
      seen_heads.set(t);
      sum[idx(t)] += lb.task[idx(t)] * lb.count[idx(t)];
      r.count[idx(t)] += lb.count[idx(t)];
    }
    tally_batch(out, batch, heads, tally);
    if (heads.has(Task::Regression))
      for (int b = 0; b < batch.size(); ++b) {
        r.predictions.push_back(out.regression(b, 0));
        r.targets.push_back(batch.inputs[b].target);
      }
  };
  for (const auto &tb: batches) {
    if (!tb.heads.has(Task::Mlm)) {
      run(tb.batch, tb.heads);
      continue;
    }
    run(tb.batch, { Task::Mlm });
    auto rest = tb.heads;
    rest.set(Task::Mlm, false);
    if (!rest.empty())
      run(unmasked(tb.batch), rest);
  }
  for (int t = 0; t < kNumTasks; ++t) {
    r.loss[t] = r.count[t] > 0 ? sum[t] / r.count[t] : 0.0;
    r.accuracy[t] = tally.seen[t] > 0
                        ? static_cast<double>(tally.correct[t]) / static_cast<double>(tally.seen[t])
                        : kNaN;
    if (seen_heads.has(static_cast<Task>(t)))
      r.total += weights[t] * r.loss[t];
  }
  return r;
}

// Metrics -----------------------------------------------------------------------------

nlohmann::ordered_json to_json(const EpochMetrics &m, const model::TaskSet &tasks,
                               bool include_timing) {
  nlohmann::ordered_json j;
  j["type"] = "epoch";
  j["epoch"] = m.epoch;
  j["lr"] = m.lr;
  nlohmann::ordered_json train, val, acc;
  for (Task t: tasks.list()) {
    const std::string name(model::task_name(t));
    train[name] = m.train_loss[idx(t)];
    val[name] = m.validation.loss[idx(t)];
    if (t != Task::Regression)
      acc[name] = num(m.validation.accuracy[idx(t)]);
  }
  train["total"] = m.train_total;
  val["total"] = m.validation.total;
  j["train_loss"] = train;
  j["validation_loss"] = val;
  if (!acc.empty())
    j["validation_accuracy"] = acc;
  if (tasks.has(Task::Regression)) {
    j["validation_r2"] = num(m.r2);
    j["validation_pearson"] = num(m.pearson);
    if (m.degenerate_target)
      j["degenerate_target"] = true;
  }
  if (include_timing)
    j["wall_seconds"] = m.wall_seconds;
  return j;
}

std::string MetricsReport::to_jsonl(bool include_timing) const {
  const auto tasks = model::TaskSet::parse(header.at("tasks").get<std::string>());
  std::string s = header.dump() + "\n";
  for (const auto &e: epochs)
    s += to_json(e, tasks, include_timing).dump() + "\n";
  return s;
}

// Pre-training -------------------------------------------------------------------------

TrainResult pretrain(const std::vector<corpus::LipidRecord> &train,
                     const std::vector<corpus::LipidRecord> &validation,
                     const tok::Vocab &vocab, model::ModelConfig cfg,
                     const model::TaskSet &tasks, const TrainConfig &tcfg,
                     const RunOutputs &io) {
  tcfg.validate();
  cfg.vocab_size = vocab.size();
  cfg.validate();
  if (validation.empty())
    throw Error(Errc::EmptyDataset, "pre-training needs a non-empty validation split");

  const TaskDataset train_ds(train, vocab, cfg, tasks, tcfg.masking);
  const TaskDataset valid_ds(validation, vocab, cfg, tasks, tcfg.masking);
  // Validation masking and pairs are drawn once so epochs are comparable.
  const auto valid_batches = valid_ds.epoch_batches(
      tcfg.batch_size, derive_seed(tcfg.seed, { kValidation }), 0);

  const int steps_per_epoch = static_cast<int>(
      train_ds.epoch_batches(tcfg.batch_size, tcfg.seed, 0).size());
  const AdamWConfig adam = adam_config(tcfg, steps_per_epoch * tcfg.epochs);

  TrainResult result;
  auto &header = result.report.header;
  header["type"] = "header";
  header["stage"] = "pretrain";
  header["tasks"] = tasks.to_string();
  header["model"] = model::to_json(cfg);
  header["training"] = to_json(tcfg);
  header["seeds"] = { { "training", tcfg.seed }, { "init", cfg.seed } };
  header["n_train"] = train.size();
  header["n_validation"] = validation.size();
  header["fingerprint"] = hex64(fingerprint(header.dump()));
  MetricsSink sink(io.metrics_path, header);

  auto params = model::init_params<float>(cfg, cfg.seed);
  auto grads = model::allocate_params<float>(cfg);
  auto state = make_adamw_state<float>(cfg);
  double best_total = std::numeric_limits<double>::infinity();

  for (int epoch = 1; epoch <= tcfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto batches = train_ds.epoch_batches(tcfg.batch_size,
                                                derive_seed(tcfg.seed, { kTrainOrder }), epoch);
    EpochMetrics m;
    m.epoch = epoch;
    std::array<double, kNumTasks> sum {};
    std::array<long, kNumTasks> count {};
    for (std::size_t s = 0; s < batches.size(); ++s) {
      model::ForwardOptions opts;
      opts.heads = batches[s].heads;
      opts.training = true;
      opts.dropout_seed = derive_seed(tcfg.seed, { kDropout, static_cast<std::uint64_t>(epoch), s });
      grads.set_zero();
      const auto &tb = batches[s];
      auto accumulate = [&](const model::LossBreakdown &lb, const model::TaskSet &heads) {
        for (Task t: heads.list()) {
          sum[idx(t)] += lb.task[idx(t)] * lb.count[idx(t)];
          count[idx(t)] += lb.count[idx(t)];
        }
      };
      auto rest = tb.heads;
      rest.set(Task::Mlm, false);
      if (tcfg.clean_auxiliary && !rest.empty()) {
        opts.heads = { Task::Mlm };
        accumulate(model::forward_backward<float>(params, cfg, tb.batch, opts, tcfg.weights, &grads),
                   opts.heads);
        opts.heads = rest;
        opts.dropout_seed = derive_seed(opts.dropout_seed, { 1 });
        accumulate(model::forward_backward<float>(params, cfg, unmasked(tb.batch), opts,
                                                  tcfg.weights, &grads),
                   rest);
      } else {
        accumulate(model::forward_backward<float>(params, cfg, tb.batch, opts, tcfg.weights, &grads),
                   tb.heads);
      }
      m.lr = learning_rate(adam, state.step);
      adamw_step(params, grads, state, adam);
    }
    for (Task t: tasks.list()) {
      m.train_loss[idx(t)] = count[idx(t)] > 0 ? sum[idx(t)] / count[idx(t)] : 0.0;
      m.train_total += tcfg.weights[idx(t)] * m.train_loss[idx(t)];
    }
    m.validation = evaluate(params, cfg, valid_batches, tcfg.weights);
    m.r2 = m.pearson = kNaN;
    m.wall_seconds = seconds_since(t0);

    if (m.validation.total < best_total) {
      best_total = m.validation.total;
      result.report.best_epoch = epoch;
      result.best.config = cfg;
      result.best.vocab = vocab;
      result.best.params = params;
      result.best.meta = { { "stage", "pretrain" },
                           { "tasks", tasks.to_string() },
                           { "best_epoch", epoch },
                           { "validation_total_loss", best_total },
                           { "seed", tcfg.seed } };
      if (!io.checkpoint_dir.empty())
        model::save_checkpoint(io.checkpoint_dir, result.best);
    }
    sink.write(to_json(m, tasks));
    if (io.verbose)
      log_epoch("pretrain", m, tasks);
    result.report.epochs.push_back(std::move(m));
  }
  return result;
}

// Fine-tuning -------------------------------------------------------------------------

model::Checkpoint fresh_checkpoint(const tok::Vocab &vocab, model::ModelConfig cfg) {
  cfg.vocab_size = vocab.size();
  cfg.validate();
  model::Checkpoint c;
  c.config = cfg;
  c.vocab = vocab;
  c.params = model::init_params<float>(cfg, cfg.seed);
  c.meta = { { "stage", "init" } };
  return c;
}

namespace {

std::vector<tok::EncodedInput> encode_rows(const std::vector<LabeledExample> &rows,
                                           const tok::Vocab &vocab) {
  std::vector<tok::EncodedInput> out;
  out.reserve(rows.size());
  for (const auto &r: rows)
    out.push_back(tok::encode_single(r.smiles, vocab, tok::kSingleLength));
  return out;
}

}  // namespace

TrainResult finetune(const model::Checkpoint &start,
                     const std::vector<LabeledExample> &train,
                     const std::vector<LabeledExample> &validation,
                     const TrainConfig &tcfg, const RunOutputs &io) {
  tcfg.validate();
  const auto &cfg = start.config;
  if (cfg.max_len < tok::kSingleLength || cfg.vocab_size != start.vocab.size())
    throw Error(Errc::IncompatibleCheckpoint,
                "checkpoint cannot encode single sequences of "
                    + std::to_string(tok::kSingleLength) + " tokens with its vocabulary");
  if (train.empty() || validation.empty())
    throw Error(Errc::EmptyDataset, "fine-tuning needs non-empty training and validation rows");

  double mean = 0.0;
  for (const auto &r: train)
    mean += r.value;
  mean /= static_cast<double>(train.size());
  double var = 0.0;
  for (const auto &r: train)
    var += (r.value - mean) * (r.value - mean);
  const double sd = std::sqrt(var / static_cast<double>(train.size()));
  const double scale = sd > 0.0 ? sd : 1.0;

  const auto train_enc = encode_rows(train, start.vocab);
  const auto valid_enc = encode_rows(validation, start.vocab);
  std::vector<TaskBatch> valid_batches;
  for (auto &b: regression_batches(valid_enc, validation, mean, scale, tcfg.batch_size, false, 0))
    valid_batches.push_back({ std::move(b), { Task::Regression } });
  std::vector<double> valid_values;
  for (const auto &r: validation)
    valid_values.push_back(r.value);

  const int steps_per_epoch = (static_cast<int>(train.size()) + tcfg.batch_size - 1) / tcfg.batch_size;
  const AdamWConfig adam = adam_config(tcfg, steps_per_epoch * tcfg.epochs);
  const model::TaskSet tasks { Task::Regression };

  TrainResult result;
  auto &header = result.report.header;
  header["type"] = "header";
  header["stage"] = "finetune";
  header["tasks"] = tasks.to_string();
  header["model"] = model::to_json(cfg);
  header["training"] = to_json(tcfg);
  header["seeds"] = { { "training", tcfg.seed } };
  header["start"] = start.meta;
  header["n_train"] = train.size();
  header["n_validation"] = validation.size();
  header["target_mean"] = mean;
  header["target_scale"] = scale;
  header["fingerprint"] = hex64(fingerprint(header.dump()));
  MetricsSink sink(io.metrics_path, header);

  auto params = start.params;
  auto grads = model::allocate_params<float>(cfg);
  auto state = make_adamw_state<float>(cfg);
  double best_r2 = -std::numeric_limits<double>::infinity();

  for (int epoch = 1; epoch <= tcfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto batches = regression_batches(
        train_enc, train, mean, scale, tcfg.batch_size, true,
        derive_seed(tcfg.seed, { kFinetuneOrder, static_cast<std::uint64_t>(epoch) }));
    EpochMetrics m;
    m.epoch = epoch;
    double sum = 0.0;
    long count = 0;
    for (std::size_t s = 0; s < batches.size(); ++s) {
      model::ForwardOptions opts;
      opts.heads = tasks;
      opts.training = true;
      opts.dropout_seed = derive_seed(tcfg.seed, { kDropout, static_cast<std::uint64_t>(epoch), s });
      grads.set_zero();
      const auto lb = model::forward_backward<float>(params, cfg, batches[s], opts,
                                                     tcfg.weights, &grads);
      m.lr = learning_rate(adam, state.step);
      adamw_step(params, grads, state, adam);
      sum += lb.task[idx(Task::Regression)] * batches[s].size();
      count += batches[s].size();
    }
    m.train_loss[idx(Task::Regression)] = sum / static_cast<double>(count);
    m.train_total = tcfg.weights[idx(Task::Regression)] * m.train_loss[idx(Task::Regression)];
    m.validation = evaluate(params, cfg, valid_batches, tcfg.weights);

    std::vector<double> pred;
    for (double p: m.validation.predictions)
      pred.push_back(p * scale + mean);
    if (valid_values.size() >= 2) {
      try {
        m.r2 = compute_r2(pred, valid_values);
      } catch (const Error &e) {
        if (e.code() != Errc::DegenerateTarget)
          throw;
        // Nothing to explain: report the constant-model baseline.
        m.r2 = 0.0;
        m.degenerate_target = true;
      }
      try {
        m.pearson = compute_pearson(pred, valid_values);
      } catch (const Error &e) {
        if (e.code() != Errc::DegenerateInput)
          throw;
        m.pearson = 0.0;
      }
    } else {
      m.r2 = m.pearson = kNaN;
    }
    m.wall_seconds = seconds_since(t0);

    const double score = std::isfinite(m.r2) ? m.r2 : -m.validation.total;
    if (score > best_r2 || result.report.best_epoch == 0) {
      best_r2 = score;
      result.report.best_epoch = epoch;
      result.best.config = cfg;
      result.best.vocab = start.vocab;
      result.best.params = params;
      result.best.meta = { { "stage", "finetune" },
                           { "best_epoch", epoch },
                           { "validation_r2", num(m.r2) },
                           { "validation_pearson", num(m.pearson) },
                           { "target_mean", mean },
                           { "target_scale", scale },
                           { "seed", tcfg.seed } };
      if (!io.checkpoint_dir.empty())
        model::save_checkpoint(io.checkpoint_dir, result.best);
    }
    sink.write(to_json(m, tasks));
    if (io.verbose)
      log_epoch("finetune", m, tasks);
    result.report.epochs.push_back(std::move(m));
  }
  return result;
}

std::vector<double> predict(const model::Checkpoint &ckpt,
                            const std::vector<std::string> &smiles, int batch_size) {
  const double mean = ckpt.meta.value("target_mean", 0.0);
  const double scale = ckpt.meta.value("target_scale", 1.0);
  std::vector<double> out;
  out.reserve(smiles.size());
  model::ForwardOptions opts;
  opts.heads = { Task::Regression };
  for (std::size_t start = 0; start < smiles.size(); start += batch_size) {
    model::Batch b;
    for (std::size_t k = start; k < std::min(smiles.size(), start + batch_size); ++k)
      b.inputs.push_back(tok::encode_single(smiles[k], ckpt.vocab, tok::kSingleLength));
    const auto o = model::forward(ckpt.params, ckpt.config, b, opts);
    for (int i = 0; i < b.size(); ++i)
      out.push_back(o.regression(i, 0) * scale + mean);
  }
  return out;
}

}  // namespace lipidlm::train
