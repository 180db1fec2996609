//
// Project LipidLM - Copyright 2026 The LipidLM Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "lipidlm/cli/commands.hpp"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "lipidlm/chem/smiles.hpp"
#include "lipidlm/corpus/corpus_io.hpp"
#include "lipidlm/lipid/analysis.hpp"
#include "lipidlm/model/checkpoint.hpp"
#include "lipidlm/model/encoder.hpp"

namespace lipidlm::cli {
namespace {

namespace fs = std::filesystem;

void require(const std::string &value, const char *what) {
  if (value.empty())
    throw Error(Errc::ConfigError, std::string("missing ") + what);
}

void ensure_dir(const fs::path &dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    throw Error(Errc::IoFailure, "cannot create " + dir.string() + ": " + ec.message());
}

struct LoadedCorpus {
  std::vector<corpus::LipidRecord> records;
  corpus::SplitManifest split;
};

LoadedCorpus load_corpus(const fs::path &dir) {
  return { corpus::read_corpus_jsonl(dir / "corpus.jsonl"),
           corpus::read_split_manifest(dir / "split.json") };
}

tok::Vocab resolve_vocab(const RunConfig &rc, const std::vector<corpus::LipidRecord> &train) {
  if (!rc.vocab.empty())
    return tok::Vocab::load(rc.vocab);
  std::vector<std::string> smiles;
  smiles.reserve(train.size());
  for (const auto &r: train)
    smiles.push_back(r.canonical_smiles);
  return tok::build_vocab(smiles);
}

/// Checkpoint problems are reported as incompatibility.
model::Checkpoint open_checkpoint(const fs::path &dir) {
  try {
    return model::load_checkpoint(dir);
  } catch (const Error &e) {
    if (e.code() == Errc::IoFailure && !fs::exists(dir / "manifest.json"))
      throw;
    throw Error(Errc::IncompatibleCheckpoint, e.what());
  }
}

struct InputRow {
  std::string id;
  std::string smiles;
  std::optional<corpus::LipidRecord> record;
};

/// Each non-blank line is either a corpus record (JSON object) or SMILES.
std::vector<InputRow> read_inputs(const std::vector<std::string> &lines) {
  std::vector<InputRow> rows;
  int n = 0;
  for (const auto &raw: lines) {
    const auto b = raw.find_first_not_of(" \t\r");
    if (b == std::string::npos)
      continue;
    const auto e = raw.find_last_not_of(" \t\r");
    const std::string line = raw.substr(b, e - b + 1);
    InputRow row;
    row.id = "row-" + std::to_string(n++);
    if (line.front() == '{') {
      try {
        row.record = corpus::record_from_json(nlohmann::json::parse(line));
        row.id = row.record->id;
        row.smiles = row.record->canonical_smiles;
      } catch (const nlohmann::json::exception &ex) {
        throw Error(Errc::IoFailure, "line " + std::to_string(n) + ": " + ex.what());
      }
    } else {
      row.smiles = line;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<std::string> read_lines(const fs::path &path) {
  std::ifstream in(path);
  if (!in)
    throw Error(Errc::IoFailure, "cannot open " + path.string());
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);)
    lines.push_back(line);
  return lines;
}

std::string fixed4(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4) << v;
  return os.str();
}

struct Split3 {
  std::vector<train::LabeledExample> train, validation;
};

Split3 split_labeled(const std::vector<train::LabeledExample> &rows, std::uint64_t seed) {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < rows.size(); ++i)
    ids.push_back(std::to_string(i));
  const auto m = corpus::make_split(ids, 0.8, 0.1, seed);
  Split3 s;
  for (const auto &id: m.train)
    s.train.push_back(rows[std::stoul(id)]);
  for (const auto &id: m.validation)
    s.validation.push_back(rows[std::stoul(id)]);
  if (s.train.empty() || s.validation.empty())
    throw Error(Errc::EmptyDataset, "labeled data too small for a train/validation split");
  return s;
}

}  // namespace

int exit_code(Errc code) {
  switch (code) {
  case Errc::GenerationBudgetExceeded:
    return kExitGeneration;
  case Errc::NonFiniteGradient:
    return kExitTraining;
  case Errc::VersionMismatch:
  case Errc::ChecksumMismatch:
  case Errc::IncompatibleCheckpoint:
    return kExitCheckpoint;
  default:
    return kExitConfig;
  }
}

void write_resolved(const fs::path &path, const RunConfig &rc) {
  if (path.has_parent_path())
    ensure_dir(path.parent_path());
  std::ofstream out(path);
  out << to_json(rc).dump(2) << '\n';
  if (!out)
    throw Error(Errc::IoFailure, "cannot write " + path.string());
}

// gen-corpus --------------------------------------------------------------------

void cmd_gen_corpus(const RunConfig &rc, std::ostream &out) {
  require(rc.io.out, "output directory (--out)");
  rc.generator.validate();
  const fs::path dir = rc.io.out;
  ensure_dir(dir);
  write_resolved(dir / "gen-corpus.resolved.json", rc);
  const auto c = corpus::generate_corpus(rc.generator);
  corpus::write_corpus_jsonl(dir / "corpus.jsonl", c.records);
  corpus::write_split_manifest(dir / "split.json", c.split);
  train::write_labeled_jsonl(dir / "property.jsonl", train::labeled_from_records(c.records));
  out << "generated " << c.records.size() << " lipids (" << c.split.train.size() << " train, "
      << c.split.validation.size() << " validation, " << c.split.test.size() << " test)\n"
      << "corpus: " << (dir / "corpus.jsonl").string() << '\n'
      << "split: " << (dir / "split.json").string() << '\n'
      << "property: " << (dir / "property.jsonl").string() << '\n';
}

// pretrain ------------------------------------------------------------------------

namespace {

train::TrainResult pretrain_on(const RunConfig &rc, const std::vector<corpus::LipidRecord> &train_recs,
                               const std::vector<corpus::LipidRecord> &valid_recs,
                               const fs::path &ckpt_dir, const fs::path &metrics) {
  if (!rc.tasks.has(model::Task::Mlm))
    throw Error(Errc::ConfigError, "pre-training tasks must include mlm, got " + rc.tasks.to_string());
  const auto vocab = resolve_vocab(rc, train_recs);
  const auto cfg = rc.model_config(vocab.size());
  train::RunOutputs io;
  io.checkpoint_dir = ckpt_dir;
  io.metrics_path = metrics;
  io.verbose = true;
  return train::pretrain(train_recs, valid_recs, vocab, cfg, rc.tasks, rc.pretrain, io);
}

}  // namespace

void cmd_pretrain(const RunConfig &rc, std::ostream &out) {
  require(rc.io.corpus, "corpus directory (--corpus)");
  require(rc.io.out, "output directory (--out)");
  if (!rc.tasks.has(model::Task::Mlm))
    throw Error(Errc::ConfigError, "pre-training tasks must include mlm, got " + rc.tasks.to_string());
  const fs::path dir = rc.io.out;
  ensure_dir(dir);
  write_resolved(dir / "pretrain.resolved.json", rc);
  const auto c = load_corpus(rc.io.corpus);
  const auto train_recs = corpus::select_records(c.records, c.split.train);
  const auto valid_recs = corpus::select_records(c.records, c.split.validation);
  const auto res = pretrain_on(rc, train_recs, valid_recs, dir / "checkpoint", dir / "metrics.jsonl");
  const auto &best = res.report.epochs[res.report.best_epoch - 1];
  out << "best epoch " << res.report.best_epoch << ": validation total loss "
      << fixed4(best.validation.total) << '\n'
      << "checkpoint: " << (dir / "checkpoint").string() << '\n'
      << "metrics: " << (dir / "metrics.jsonl").string() << '\n';
}

// finetune ------------------------------------------------------------------------

void cmd_finetune(const RunConfig &rc, std::ostream &out) {
  require(rc.io.data, "labeled data (--data)");
  require(rc.io.out, "output directory (--out)");
  const fs::path dir = rc.io.out;
  ensure_dir(dir);
  write_resolved(dir / "finetune.resolved.json", rc);
  const auto rows = train::read_labeled_jsonl(rc.io.data);
  const auto split = split_labeled(rows, rc.finetune.seed);

  train::RunOutputs io;
  io.verbose = true;
  if (rc.sweep.empty()) {
    require(rc.io.checkpoint, "checkpoint (--checkpoint)");
    const auto start = open_checkpoint(rc.io.checkpoint);
    io.checkpoint_dir = dir / "checkpoint";
    io.metrics_path = dir / "metrics.jsonl";
    const auto res = train::finetune(start, split.train, split.validation, rc.finetune, io);
    out << "best validation R2: " << fixed4(res.report.epochs[res.report.best_epoch - 1].r2)
        << " (epoch " << res.report.best_epoch << ")\n"
        << "checkpoint: " << io.checkpoint_dir.string() << '\n'
        << "metrics: " << io.metrics_path.string() << '\n';
    return;
  }

  require(rc.io.corpus, "corpus directory (--corpus) for the sweep");
  const auto c = load_corpus(rc.io.corpus);
  for (int n: rc.sweep) {
    if (n < 10 || n > static_cast<int>(c.records.size()))
      throw Error(Errc::ConfigError, "sweep size " + std::to_string(n) + " must be in [10, "
                                         + std::to_string(c.records.size()) + "]");
    const std::vector<corpus::LipidRecord> subset(c.records.begin(), c.records.begin() + n);
    std::vector<std::string> ids;
    for (const auto &r: subset)
      ids.push_back(r.id);
    const auto m = corpus::make_split(ids, rc.generator.train_fraction,
                                      rc.generator.validation_fraction, rc.generator.seed);
    const fs::path sub = dir / ("size-" + std::to_string(n));
    const auto pre = pretrain_on(rc, corpus::select_records(subset, m.train),
                                 corpus::select_records(subset, m.validation),
                                 sub / "pretrain-checkpoint", sub / "pretrain-metrics.jsonl");
    io.checkpoint_dir = sub / "checkpoint";
    io.metrics_path = sub / "metrics.jsonl";
    const auto res = train::finetune(pre.best, split.train, split.validation, rc.finetune, io);
    out << "size " << n << ": best validation R2 "
        << fixed4(res.report.epochs[res.report.best_epoch - 1].r2) << " (metrics "
        << io.metrics_path.string() << ")\n";
  }
}

// analyze ---------------------------------------------------------------------------

int cmd_analyze(const std::vector<std::string> &inputs, bool json, std::ostream &out,
                std::ostream &err) {
  int ok = 0, failed = 0, line = 0;
  for (const auto &raw: inputs) {
    ++line;
    if (raw.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    try {
      const auto rows = read_inputs({ raw });
      const auto &row = rows.front();
      const auto graph = chem::parse_smiles(row.smiles);
      const auto canonical = chem::canonicalize(graph);
      const int tails = lipid::count_tails(graph);

      std::optional<int> conn;
      std::optional<std::vector<Region>> regions;
      if (row.record && !row.record->provenance.empty()) {
        // Provenance is indexed by canonical atoms, as is the record SMILES.
        regions = lipid::label_head_tail(*row.record);
        conn = row.record->connecting_atom;
      } else {
        // Without provenance: tail chains are Tail, the rest Head; report the
        // connecting atom only when that split has a single junction.
        std::vector<Region> guess(graph.num_atoms(), Region::Head);
        for (const auto &chain: lipid::tail_chains(graph))
          for (int a: chain)
            guess[a] = Region::Tail;
        try {
          conn = lipid::find_connecting_atom(graph, guess);
          regions = guess;
        } catch (const Error &) {
        }
      }

      if (json) {
        nlohmann::ordered_json j;
        j["input"] = row.smiles;
        if (row.record)
          j["id"] = row.id;
        j["canonical_smiles"] = canonical.smiles;
        j["n_tails"] = tails;
        j["connecting_atom"] = conn ? nlohmann::ordered_json(*conn) : nlohmann::ordered_json(nullptr);
        if (regions) {
          std::string s;
          for (Region r: *regions)
            s += r == Region::Head ? 'H' : 'T';
          j["head_tail"] = s;
        }
        out << j.dump() << '\n';
      } else {
        out << canonical.smiles << "\tn_tails=" << tails << "\tconnecting_atom="
            << (conn ? std::to_string(*conn) : std::string("n/a")) << '\n';
      }
      ++ok;
    } catch (const Error &e) {
      ++failed;
      err << "line " << line << ": " << e.what() << '\n';
      if (json)
        out << nlohmann::json { { "input", raw }, { "error", e.what() } }.dump() << '\n';
    }
  }
  return ok == 0 && failed > 0 ? kExitConfig : kExitOk;
}

// embed / project ---------------------------------------------------------------------

void write_embeddings_csv(const fs::path &path, const EmbeddingTable &t) {
  if (path.has_parent_path())
    ensure_dir(path.parent_path());
  std::ofstream out(path);
  out << "id";
  for (Eigen::Index c = 0; c < t.values.cols(); ++c)
    out << ",e" << c;
  out << '\n';
  char buf[32];
  for (Eigen::Index r = 0; r < t.values.rows(); ++r) {
    out << t.ids[r];
    for (Eigen::Index c = 0; c < t.values.cols(); ++c) {
      std::snprintf(buf, sizeof buf, ",%.9g", t.values(r, c));
      out << buf;
    }
    out << '\n';
  }
  if (!out)
    throw Error(Errc::IoFailure, "cannot write " + path.string());
}

EmbeddingTable read_embeddings_csv(const fs::path &path) {
  const auto lines = read_lines(path);
  if (lines.empty())
    throw Error(Errc::EmptyDataset, path.string() + " is empty");
  EmbeddingTable t;
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty())
      continue;
    std::stringstream ss(lines[i]);
    std::string cell;
    std::getline(ss, cell, ',');
    t.ids.push_back(cell);
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception &) {
        throw Error(Errc::IoFailure, path.string() + ":" + std::to_string(i + 1) + ": bad number " + cell);
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw Error(Errc::IoFailure, path.string() + ":" + std::to_string(i + 1) + ": ragged row");
    rows.push_back(std::move(row));
  }
  if (rows.empty())
    throw Error(Errc::EmptyDataset, path.string() + " has no rows");
  t.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      t.values(r, c) = rows[r][c];
  return t;
}

void cmd_embed(const RunConfig &rc, std::ostream &out) {
  require(rc.io.checkpoint, "checkpoint (--checkpoint)");
  require(rc.io.file, "input file (--file)");
  require(rc.io.out, "output CSV (--out)");
  write_resolved(rc.io.out + ".resolved.json", rc);
  const auto ckpt = open_checkpoint(rc.io.checkpoint);
  const auto rows = read_inputs(read_lines(rc.io.file));
  if (rows.empty())
    throw Error(Errc::EmptyDataset, rc.io.file + " has no inputs");
  EmbeddingTable t;
  t.values.resize(static_cast<Eigen::Index>(rows.size()), ckpt.config.hidden);
  constexpr std::size_t kChunk = 256;
  for (std::size_t start = 0; start < rows.size(); start += kChunk) {
    std::vector<tok::EncodedInput> enc;
    for (std::size_t i = start; i < std::min(rows.size(), start + kChunk); ++i)
      enc.push_back(tok::encode_single(rows[i].smiles, ckpt.vocab,
                                       std::min(ckpt.config.max_len, tok::kSingleLength)));
    const auto e = model::embed_cls(ckpt.params, ckpt.config, enc);
    t.values.middleRows(static_cast<Eigen::Index>(start), e.rows()) = e.cast<double>();
  }
  for (const auto &r: rows)
    t.ids.push_back(r.id);
  write_embeddings_csv(rc.io.out, t);
  out << "wrote " << rows.size() << " embeddings of dimension " << ckpt.config.hidden << " to "
      << rc.io.out << '\n';
}

Eigen::MatrixXd principal_components(const Eigen::MatrixXd &x, int k) {
  if (x.rows() < 1 || k < 1 || k > x.cols())
    throw Error(Errc::ShapeMismatch, "projection needs at least one row and k <= columns");
  const Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
  const Eigen::MatrixXd cov = centered.transpose() * centered;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  // Eigenvalues ascend; take the last k columns in descending order.
  Eigen::MatrixXd axes(x.cols(), k);
  for (int i = 0; i < k; ++i) {
    Eigen::VectorXd a = eig.eigenvectors().col(x.cols() - 1 - i);
    Eigen::Index big;
    a.cwiseAbs().maxCoeff(&big);
    if (a(big) < 0)
      a = -a;
    axes.col(i) = a;
  }
  return centered * axes;
}

void cmd_project(const RunConfig &rc, std::ostream &out) {
  require(rc.io.embeddings, "embedding CSV (--embeddings)");
  require(rc.io.out, "output CSV (--out)");
  write_resolved(rc.io.out + ".resolved.json", rc);
  const auto t = read_embeddings_csv(rc.io.embeddings);
  const auto xy = principal_components(t.values, 2);
  std::ofstream f(rc.io.out);
  f << "id,x,y\n";
  char buf[64];
  for (Eigen::Index r = 0; r < xy.rows(); ++r) {
    std::snprintf(buf, sizeof buf, ",%.9g,%.9g\n", xy(r, 0), xy(r, 1));
    f << t.ids[r] << buf;
  }
  if (!f)
    throw Error(Errc::IoFailure, "cannot write " + rc.io.out);
  out << "projected " << xy.rows() << " rows to " << rc.io.out << '\n';
}

}  // namespace lipidlm::cli
