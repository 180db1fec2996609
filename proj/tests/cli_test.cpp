//
// Project LipidLM - Copyright 2026 The LipidLM Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <unistd.h>

#include <gtest/gtest.h>

#include "lipidlm/cli/commands.hpp"
#include "lipidlm/cli/run_config.hpp"
#include "lipidlm/corpus/corpus_io.hpp"
#include "lipidlm/error.hpp"
#include "lipidlm/model/checkpoint.hpp"

namespace lipidlm::cli {
namespace {

namespace fs = std::filesystem;

Errc error_code(auto &&fn) {
  try {
    fn();
  } catch (const Error &e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return Errc::InvalidArgument;
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

std::vector<std::string> lines_of(const std::string &s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string line; std::getline(ss, line);)
    out.push_back(line);
  return out;
}

// Run configuration ------------------------------------------------------------------

TEST(RunConfig, DefaultsRoundTrip) {
  const RunConfig rc;
  EXPECT_EQ(rc.preset, "desk");
  EXPECT_EQ(rc.generator.n_lipids, 5000);
  const auto back = run_config_from_json(nlohmann::json::parse(to_json(rc).dump()));
  EXPECT_EQ(to_json(back), to_json(rc));
  EXPECT_EQ(back.model_config(12), rc.model_config(12));
  EXPECT_EQ(back.pretrain, rc.pretrain);
  EXPECT_EQ(back.finetune, rc.finetune);
  EXPECT_EQ(back.generator.head_templates, rc.generator.head_templates);
}

TEST(RunConfig, PairTasksUsePairLength) {
  RunConfig rc;
  EXPECT_EQ(rc.model_config(12).max_len, 128);
  rc.tasks = model::TaskSet::parse("mlm,pair");
  EXPECT_EQ(rc.model_config(12).max_len, 256);
}

TEST(RunConfig, RejectsUnknownKeysEverywhere) {
  for (const char *text: {
           R"({"bogus": {}})",
           R"({"generator": {"n_lipid": 3}})",
           R"({"tokenizer": {"vocab_path": "x"}})",
           R"({"model": {"hiden": 3}})",
           R"({"model": {"preset": "huge"}})",
           R"({"training": {"task": "mlm"}})",
           R"({"training": {"pretrain": {"epoch": 1}}})",
           R"({"training": {"tasks": "mlm,bogus"}})",
           R"({"io": {"outdir": "x"}})",
           R"({"generator": {"n_lipids": 0}})",
           R"({"generator": {"n_lipids": "many"}})",
       })
    EXPECT_EQ(error_code([&] { run_config_from_json(nlohmann::json::parse(text)); }),
              Errc::ConfigError)
        << text;
}

TEST(RunConfig, OverridesApply) {
  const auto rc = run_config_from_json(nlohmann::json::parse(R"({
    "model": {"hidden": 32, "n_heads": 2, "ffn_dim": 64, "regression_dims": [32, 16]},
    "training": {"tasks": "mlm,headtail", "sweep": [10, 20], "pretrain": {"epochs": 3}},
    "io": {"out": "o"}})"));
  EXPECT_EQ(rc.model_config(12).hidden, 32);
  EXPECT_EQ(rc.pretrain.epochs, 3);
  EXPECT_EQ(rc.finetune, train::desk_finetune_config());
  EXPECT_EQ(rc.sweep, (std::vector<int> { 10, 20 }));
  EXPECT_EQ(rc.io.out, "o");
}

TEST(ExitCodes, StableContract) {
  EXPECT_EQ(exit_code(Errc::ConfigError), 2);
  EXPECT_EQ(exit_code(Errc::EmptyDataset), 2);
  EXPECT_EQ(exit_code(Errc::UnknownElement), 2);
  EXPECT_EQ(exit_code(Errc::GenerationBudgetExceeded), 3);
  EXPECT_EQ(exit_code(Errc::NonFiniteGradient), 4);
  EXPECT_EQ(exit_code(Errc::IncompatibleCheckpoint), 5);
  EXPECT_EQ(exit_code(Errc::ChecksumMismatch), 5);
  EXPECT_EQ(exit_code(Errc::VersionMismatch), 5);
}

// Projection --------------------------------------------------------------------------

TEST(Projection, PlanarDataKeepsDistances) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd(0.0, 1.0);
  // 50 points in a random 2-plane of R^8, offset from the origin.
  Eigen::MatrixXd basis(2, 8);
  for (Eigen::Index i = 0; i < basis.size(); ++i)
    basis.data()[i] = nd(rng);
  Eigen::MatrixXd coef(50, 2);
  for (Eigen::Index i = 0; i < coef.size(); ++i)
    coef.data()[i] = nd(rng) * 3.0;
  Eigen::MatrixXd x = coef * basis;
  x.rowwise() += Eigen::RowVectorXd::Constant(8, 5.0);

  const auto y = principal_components(x, 2);
  ASSERT_EQ(y.rows(), 50);
  ASSERT_EQ(y.cols(), 2);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i)
    for (int j = 0; j < 50; ++j)
      worst = std::max(worst, std::abs((x.row(i) - x.row(j)).norm() - (y.row(i) - y.row(j)).norm()));
  EXPECT_LT(worst, 1e-8);
  // Centered output.
  EXPECT_LT(y.colwise().mean().norm(), 1e-9);
}

TEST(Projection, IdenticalRowsCoincide) {
  Eigen::MatrixXd x(4, 3);
  x << 1, 2, 3, 1, 2, 3, 0, 5, 1, 2, -1, 4;
  const auto y = principal_components(x, 2);
  EXPECT_EQ(y.row(0), y.row(1));
  EXPECT_EQ(error_code([&] { principal_components(x, 4); }), Errc::ShapeMismatch);
}

// Analyze -------------------------------------------------------------------------------

TEST(Analyze, ReportsAndPerLineErrors) {
  std::ostringstream out, err;
  const int rc = cmd_analyze(
      { "CCCCCCCCC(CCCCCC)C(=O)OCCCCCCN(CCCCO)CCCCCCOC(=O)C(CCCCCC)CCCCCCCC", "not-smiles",
        "CCCCCCCCN(CCO)CCCC" },
      true, out, err);
  EXPECT_EQ(rc, kExitOk);
  const auto lines = lines_of(out.str());
  ASSERT_EQ(lines.size(), 3u);
  const auto a = nlohmann::json::parse(lines[0]);
  EXPECT_EQ(a["n_tails"], 4);
  EXPECT_TRUE(nlohmann::json::parse(lines[1]).contains("error"));
  const auto c = nlohmann::json::parse(lines[2]);
  EXPECT_EQ(c["n_tails"], 2);
  EXPECT_EQ(c["connecting_atom"], 8);
  EXPECT_EQ(c["head_tail"], "TTTTTTTTHHHHTTTT");
  EXPECT_NE(err.str().find("line 2"), std::string::npos);

  std::ostringstream o2, e2;
  EXPECT_EQ(cmd_analyze({ "not-smiles", "C1CC" }, false, o2, e2), kExitConfig);
}

TEST(Analyze, CorpusRecordsUseProvenance) {
  corpus::GenConfig g;
  g.n_lipids = 30;
  const auto c = corpus::generate_corpus(g, 1);
  std::vector<std::string> inputs;
  for (const auto &r: c.records)
    inputs.push_back(corpus::to_json(r).dump());
  std::ostringstream out, err;
  EXPECT_EQ(cmd_analyze(inputs, true, out, err), kExitOk);
  const auto lines = lines_of(out.str());
  ASSERT_EQ(lines.size(), c.records.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto j = nlohmann::json::parse(lines[i]);
    EXPECT_EQ(j["id"], c.records[i].id);
    EXPECT_EQ(j["n_tails"], c.records[i].n_tails);
    EXPECT_EQ(j["connecting_atom"], c.records[i].connecting_atom);
    EXPECT_EQ(j["canonical_smiles"], c.records[i].canonical_smiles);
  }
}

// Commands end to end ---------------------------------------------------------------------

class Workflow: public ::testing::Test {
protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path()
           / ("lipidlm_cli_" + std::to_string(::getpid()) + "_"
              + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  /// Small model and short schedules so the whole pipeline runs in seconds.
  RunConfig small(const std::string &out) const {
    auto rc = run_config_from_json(nlohmann::json::parse(R"({
      "generator": {"n_lipids": 60, "seed": 11},
      "model": {"n_layers": 1, "hidden": 16, "n_heads": 2, "ffn_dim": 32,
                "regression_dims": [16, 8]},
      "training": {"pretrain": {"epochs": 2, "batch_size": 16},
                   "finetune": {"epochs": 2, "batch_size": 16}}})"));
    rc.io.out = (dir_ / out).string();
    return rc;
  }

  fs::path dir_;
};

TEST_F(Workflow, GenCorpusIsReproducible) {
  std::ostringstream log;
  auto rc = small("a");
  cmd_gen_corpus(rc, log);
  rc.io.out = (dir_ / "b").string();
  cmd_gen_corpus(rc, log);
  for (const char *f: { "corpus.jsonl", "split.json", "property.jsonl" })
    EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
  EXPECT_NE(log.str().find("generated 60 lipids"), std::string::npos);
  EXPECT_EQ(corpus::read_corpus_jsonl(dir_ / "a" / "corpus.jsonl").size(), 60u);

  // The echoed configuration reproduces the run.
  auto again = load_run_config(dir_ / "a" / "gen-corpus.resolved.json");
  again.io.out = (dir_ / "c").string();
  cmd_gen_corpus(again, log);
  EXPECT_EQ(slurp(dir_ / "a" / "corpus.jsonl"), slurp(dir_ / "c" / "corpus.jsonl"));
}

TEST_F(Workflow, PretrainFinetuneEmbedProject) {
  std::ostringstream log;
  auto gen = small("corpus");
  cmd_gen_corpus(gen, log);

  auto pre = small("pre");
  pre.io.corpus = (dir_ / "corpus").string();
  pre.tasks = model::TaskSet::parse("ntails");
  EXPECT_EQ(error_code([&] { cmd_pretrain(pre, log); }), Errc::ConfigError);
  pre.tasks = model::TaskSet::parse("mlm,headtail");
  cmd_pretrain(pre, log);
  EXPECT_TRUE(fs::exists(dir_ / "pre" / "checkpoint" / "manifest.json"));
  EXPECT_EQ(lines_of(slurp(dir_ / "pre" / "metrics.jsonl")).size(), 3u);

  // Re-running from the echoed configuration gives identical checkpoints.
  auto again = load_run_config(dir_ / "pre" / "pretrain.resolved.json");
  again.io.out = (dir_ / "pre2").string();
  cmd_pretrain(again, log);
  EXPECT_EQ(slurp(dir_ / "pre" / "checkpoint" / "params.bin"),
            slurp(dir_ / "pre2" / "checkpoint" / "params.bin"));

  auto ft = small("ft");
  ft.io.checkpoint = (dir_ / "pre" / "checkpoint").string();
  ft.io.data = (dir_ / "corpus" / "property.jsonl").string();
  std::ostringstream ft_log;
  cmd_finetune(ft, ft_log);
  EXPECT_NE(ft_log.str().find("best validation R2: "), std::string::npos);
  const auto r2_text = ft_log.str().substr(ft_log.str().find(": ") + 2);
  const auto dot = r2_text.find('.');
  ASSERT_NE(dot, std::string::npos);
  EXPECT_TRUE(std::isdigit(static_cast<unsigned char>(r2_text[dot + 4])));
  EXPECT_FALSE(std::isdigit(static_cast<unsigned char>(r2_text[dot + 5])));

  // Empty data and damaged checkpoints.
  std::ofstream(dir_ / "empty.jsonl").close();
  ft.io.data = (dir_ / "empty.jsonl").string();
  EXPECT_EQ(error_code([&] { cmd_finetune(ft, log); }), Errc::EmptyDataset);
  ft.io.data = (dir_ / "corpus" / "property.jsonl").string();
  fs::copy(dir_ / "pre" / "checkpoint", dir_ / "broken");
  {
    std::fstream f(dir_ / "broken" / "params.bin", std::ios::binary | std::ios::in | std::ios::out);
    f.seekp(8);
    f.put('\x55');
  }
  ft.io.checkpoint = (dir_ / "broken").string();
  Errc code = error_code([&] { cmd_finetune(ft, log); });
  EXPECT_EQ(code, Errc::IncompatibleCheckpoint);
  EXPECT_EQ(exit_code(code), kExitCheckpoint);

  // Embeddings of the corpus and their projection.
  auto emb = small("emb.csv");
  emb.io.checkpoint = (dir_ / "pre" / "checkpoint").string();
  emb.io.file = (dir_ / "corpus" / "corpus.jsonl").string();
  cmd_embed(emb, log);
  const auto table = read_embeddings_csv(dir_ / "emb.csv");
  EXPECT_EQ(table.values.rows(), 60);
  EXPECT_EQ(table.values.cols(), 16);
  EXPECT_EQ(table.ids.front(), "LIP000000");

  auto proj = small("proj.csv");
  proj.io.embeddings = (dir_ / "emb.csv").string();
  cmd_project(proj, log);
  const auto rows = lines_of(slurp(dir_ / "proj.csv"));
  ASSERT_EQ(rows.size(), 61u);
  EXPECT_EQ(rows[0], "id,x,y");
  EXPECT_TRUE(fs::exists(dir_ / "proj.csv.resolved.json"));
}

TEST_F(Workflow, SweepWritesOneMetricsFilePerSize) {
  std::ostringstream log;
  auto gen = small("corpus");
  cmd_gen_corpus(gen, log);
  auto rc = small("sweep");
  rc.io.corpus = (dir_ / "corpus").string();
  rc.io.data = (dir_ / "corpus" / "property.jsonl").string();
  rc.sweep = { 30, 60 };
  rc.pretrain.epochs = 1;
  rc.finetune.epochs = 1;
  cmd_finetune(rc, log);
  for (int n: { 30, 60 }) {
    const auto sub = dir_ / "sweep" / ("size-" + std::to_string(n));
    EXPECT_TRUE(fs::exists(sub / "metrics.jsonl"));
    EXPECT_TRUE(fs::exists(sub / "pretrain-metrics.jsonl"));
    EXPECT_NE(log.str().find("size " + std::to_string(n) + ": best validation R2 "),
              std::string::npos);
  }
  rc.sweep = { 61 };
  EXPECT_EQ(error_code([&] { cmd_finetune(rc, log); }), Errc::ConfigError);
}

}  // namespace
}  // namespace lipidlm::cli
