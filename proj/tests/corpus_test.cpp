//
// Project LipidLM - Copyright 2026 The LipidLM Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <unordered_set>
#include <unistd.h>

#include <gtest/gtest.h>

#include "lipidlm/chem/smiles.hpp"
#include "lipidlm/corpus/corpus_io.hpp"
#include "lipidlm/corpus/generator.hpp"
#include "lipidlm/error.hpp"
#include "lipidlm/lipid/analysis.hpp"
#include "lipidlm/random.hpp"

#include "test_support.hpp"

namespace lipidlm::corpus {
namespace {

Errc error_code(auto &&fn) {
  try {
    fn();
  } catch (const Error &e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return Errc::InvalidArgument;
}

const Corpus &default_corpus() {
  static const Corpus c = generate_corpus(GenConfig {});
  return c;
}

TEST(AssembleLipid, Deterministic) {
  GenConfig cfg;
  for (std::uint64_t seed = 0; seed < 50; ++seed)
    EXPECT_EQ(assemble_lipid(cfg, seed), assemble_lipid(cfg, seed));
}

TEST(AssembleLipid, DiesterFourTailAmine) {
  GenConfig cfg;
  cfg.tails_distribution = { 0.0, 0.0, 1.0, 0.0, 0.0 };
  cfg.ester_prob = 1.0;
  cfg.branch_prob = 0.0;
  cfg.ring_prob = 0.0;
  cfg.head_templates = { { "OCCCC", 4 } };
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto rec = assemble_lipid(cfg, seed);
    const auto g = chem::parse_smiles(rec.canonical_smiles);
    EXPECT_EQ(rec.n_tails, 4);
    EXPECT_EQ(lipid::count_tails(g), 4);
    EXPECT_EQ(lipid::count_esters(g), 2);
    EXPECT_EQ(g.atom(rec.connecting_atom).element, "N");
    EXPECT_EQ(g.ring_count(), 0);
  }
}

TEST(AssembleLipid, RecordInvariants) {
  GenConfig cfg;
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    const auto rec = assemble_lipid(cfg, seed);
    const auto g = chem::parse_smiles(rec.canonical_smiles);
    ASSERT_LE(static_cast<int>(rec.canonical_smiles.size()), cfg.max_smiles_len);
    EXPECT_EQ(chem::canonical_smiles(rec.canonical_smiles),
              rec.canonical_smiles);
    EXPECT_EQ(static_cast<int>(rec.atom_regions.size()), g.num_atoms());
    EXPECT_EQ(static_cast<int>(rec.provenance.atom_fragment.size()),
              g.num_atoms());
    EXPECT_EQ(lipid::count_tails(g), rec.n_tails);
    EXPECT_GE(rec.n_tails, 2);
    EXPECT_LE(rec.n_tails, 6);
    EXPECT_EQ(rec.atom_regions[rec.connecting_atom], Region::Head);
    EXPECT_EQ(rec.provenance.atom_fragment[rec.connecting_atom],
              kJunctionFragment);
    int tails = 0;
    for (const auto &arm: rec.provenance.arms)
      tails += static_cast<int>(arm.tails.size());
    EXPECT_EQ(tails, rec.n_tails);
    EXPECT_TRUE(std::isfinite(rec.synth_property));
  }
}

TEST(AssembleLipid, BudgetExceeded) {
  GenConfig cfg;
  cfg.tails_distribution = { 0.0, 0.0, 0.0, 0.0, 1.0 };
  cfg.max_smiles_len = 20;
  cfg.max_attempts = 5;
  EXPECT_EQ(error_code([&] { assemble_lipid(cfg, 1); }),
            Errc::GenerationBudgetExceeded);
}

TEST(GenerateCorpus, TailCountDistribution) {
  GenConfig cfg;
  cfg.n_lipids = 10000;
  const auto c = generate_corpus(cfg);
  std::array<int, 5> counts {};
  for (const auto &r: c.records)
    ++counts[r.n_tails - 2];
  for (int k = 0; k < 5; ++k)
    EXPECT_NEAR(counts[k] / 10000.0, 0.2, 0.02) << "k=" << k + 2;
}

TEST(GenerateCorpus, SkewedDistribution) {
  GenConfig cfg;
  cfg.n_lipids = 4000;
  cfg.tails_distribution = { 0.5, 0.0, 0.5, 0.0, 0.0 };
  const auto c = generate_corpus(cfg);
  int two = 0;
  for (const auto &r: c.records) {
    ASSERT_TRUE(r.n_tails == 2 || r.n_tails == 4);
    two += r.n_tails == 2 ? 1 : 0;
  }
  EXPECT_NEAR(two / 4000.0, 0.5, 0.03);
}

TEST(GenerateCorpus, UniqueAndSplit) {
  const auto &c = default_corpus();
  ASSERT_EQ(c.records.size(), 5000u);
  std::unordered_set<std::string> smiles, ids;
  for (const auto &r: c.records) {
    smiles.insert(r.canonical_smiles);
    ids.insert(r.id);
  }
  EXPECT_EQ(smiles.size(), 5000u);
  EXPECT_EQ(ids.size(), 5000u);
  EXPECT_EQ(c.records.front().id, "LIP000000");

  EXPECT_EQ(c.split.train.size(), 4000u);
  EXPECT_EQ(c.split.validation.size(), 500u);
  EXPECT_EQ(c.split.test.size(), 500u);
  std::set<std::string> all(c.split.train.begin(), c.split.train.end());
  all.insert(c.split.validation.begin(), c.split.validation.end());
  all.insert(c.split.test.begin(), c.split.test.end());
  EXPECT_EQ(all.size(), 5000u);
}

TEST(GenerateCorpus, WorkerCountIndependent) {
  GenConfig cfg;
  cfg.n_lipids = 600;
  const auto one = generate_corpus(cfg, 1);
  const auto three = generate_corpus(cfg, 3);
  EXPECT_EQ(one.records, three.records);
  EXPECT_EQ(one.split, three.split);
  EXPECT_EQ(one.stats.duplicates_resampled, three.stats.duplicates_resampled);
}

TEST(GenerateCorpus, SeedChangesOutput) {
  GenConfig a, b;
  a.n_lipids = b.n_lipids = 100;
  b.seed = a.seed + 1;
  EXPECT_NE(generate_corpus(a).records, generate_corpus(b).records);
}

TEST(MakeSplit, SizesAndDeterminism) {
  std::vector<std::string> ids;
  for (int i = 0; i < 103; ++i)
    ids.push_back("x" + std::to_string(i));
  const auto m = make_split(ids, 0.8, 0.1, 5);
  EXPECT_EQ(m.validation.size(), 10u);
  EXPECT_EQ(m.test.size(), 10u);
  EXPECT_EQ(m.train.size(), 83u);
  EXPECT_EQ(m, make_split(ids, 0.8, 0.1, 5));
  EXPECT_NE(m, make_split(ids, 0.8, 0.1, 6));
}

TEST(SynthProperty, NoiselessMatchesStructureFunction) {
  const auto g = chem::parse_smiles(
      "CCCCCCCCC(CCCCCC)C(=O)OCCCCCCN(CCCCO)CCCCCCOC(=O)C(CCCCCC)CCCCCCCC");
  const auto f = property_features(g);
  EXPECT_EQ(f.n_tails, 4);
  EXPECT_EQ(f.esters, 2);
  EXPECT_EQ(f.rings, 0);
  // Tails: 8 + 6 + 6 + 8 carbons. C48H95NO5: 6 heteroatoms over 54 heavy atoms.
  EXPECT_DOUBLE_EQ(f.mean_tail_len, 7.0);
  EXPECT_DOUBLE_EQ(f.hetero_fraction, 6.0 / 54.0);
  const double expected = 4.0 + 0.25 * 7.0 + 0.6 * 2 + 6.0 * 6.0 / 54.0;
  EXPECT_DOUBLE_EQ(synth_property(g, 0.0, 99), expected);
}

TEST(SynthProperty, PermutationInvariant) {
  GenConfig cfg;
  std::mt19937_64 rng(11);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto rec = assemble_lipid(cfg, seed);
    const auto g = chem::parse_smiles(rec.canonical_smiles);
    const auto p = g.permuted(lipidlm::testing::random_permutation(rng, g.num_atoms()));
    EXPECT_DOUBLE_EQ(synth_property(g, 0.0, 0), synth_property(p, 0.0, 0));
    EXPECT_DOUBLE_EQ(synth_property(g, 0.05, 3), synth_property(p, 0.05, 3));
  }
}

TEST(SynthProperty, VariesAcrossCorpus) {
  const auto &c = default_corpus();
  double mean = 0.0;
  for (const auto &r: c.records)
    mean += r.synth_property;
  mean /= c.records.size();
  double var = 0.0;
  for (const auto &r: c.records)
    var += (r.synth_property - mean) * (r.synth_property - mean);
  var /= c.records.size();
  EXPECT_GT(var, 1.0);
}

TEST(SynthProperty, NoiseScale) {
  const auto g = chem::parse_smiles("CCCCCN(CCCCC)CCO");
  const double clean = synth_property(g, 0.0, 0);
  double sum = 0.0, sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double d = synth_property(g, 0.05, derive_seed(1, { std::uint64_t(i) }))
                     - clean;
    sum += d;
    sq += d * d;
  }
  const double sd = std::sqrt(sq / n - (sum / n) * (sum / n));
  EXPECT_NEAR(sd, 0.05 * kPropertyRange, 0.01);
}

TEST(GenConfig, Validation) {
  auto bad = [](auto mutate) {
    GenConfig cfg;
    mutate(cfg);
    return error_code([&] { cfg.validate(); });
  };
  EXPECT_EQ(bad([](GenConfig &c) { c.n_lipids = 0; }), Errc::ConfigError);
  EXPECT_EQ(bad([](GenConfig &c) { c.tails_distribution[0] = 0.5; }),
            Errc::ConfigError);
  EXPECT_EQ(bad([](GenConfig &c) { c.tail_len_min = 3; }), Errc::ConfigError);
  EXPECT_EQ(bad([](GenConfig &c) { c.tail_len_max = 3; }), Errc::ConfigError);
  EXPECT_EQ(bad([](GenConfig &c) { c.ester_prob = 1.5; }), Errc::ConfigError);
  EXPECT_EQ(bad([](GenConfig &c) { c.head_templates.clear(); }),
            Errc::ConfigError);
  EXPECT_EQ(bad([](GenConfig &c) { c.head_templates = { { "OC(", 0 } }; }),
            Errc::ConfigError);
  EXPECT_EQ(bad([](GenConfig &c) { c.head_templates = { { "OCC", 3 } }; }),
            Errc::ConfigError);
  GenConfig ok;
  EXPECT_NO_THROW(ok.validate());
}

class CorpusIo: public ::testing::Test {
protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path()
           / ("lipidlm_corpus_io_" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }

  std::filesystem::path dir_;
};

TEST_F(CorpusIo, RoundTrip) {
  GenConfig cfg;
  cfg.n_lipids = 200;
  const auto c = generate_corpus(cfg);
  write_corpus_jsonl(dir_ / "sub" / "corpus.jsonl", c.records);
  write_split_manifest(dir_ / "split.json", c.split);
  EXPECT_EQ(read_corpus_jsonl(dir_ / "sub" / "corpus.jsonl"), c.records);
  EXPECT_EQ(read_split_manifest(dir_ / "split.json"), c.split);

  const auto picked = select_records(c.records, c.split.test);
  ASSERT_EQ(picked.size(), c.split.test.size());
  EXPECT_EQ(picked.front().id, c.split.test.front());
}

TEST_F(CorpusIo, FieldOrder) {
  const auto rec = assemble_lipid(GenConfig {}, 3);
  const auto j = to_json(rec);
  std::vector<std::string> keys;
  for (const auto &item: j.items())
    keys.push_back(item.key());
  EXPECT_EQ(keys, (std::vector<std::string> {
                      "id", "canonical_smiles", "n_tails", "connecting_atom",
                      "atom_regions", "provenance", "synth_property" }));
}

TEST_F(CorpusIo, Errors) {
  EXPECT_EQ(error_code([&] { read_corpus_jsonl(dir_ / "missing.jsonl"); }),
            Errc::IoFailure);
  std::filesystem::create_directories(dir_);
  std::ofstream(dir_ / "bad.jsonl") << "{\"id\": 1}\n";
  EXPECT_EQ(error_code([&] { read_corpus_jsonl(dir_ / "bad.jsonl"); }),
            Errc::IoFailure);
  std::ofstream(dir_ / "garbage.jsonl") << "not json\n";
  EXPECT_EQ(error_code([&] { read_corpus_jsonl(dir_ / "garbage.jsonl"); }),
            Errc::IoFailure);
  EXPECT_EQ(error_code([&] { select_records({}, { "nope" }); }),
            Errc::IoFailure);
}

TEST_F(CorpusIo, RecordWithoutProvenance) {
  const auto j = nlohmann::json::parse(
      R"({"id":"e1","canonical_smiles":"CCO","n_tails":0,"connecting_atom":0,)"
      R"("atom_regions":["H","H","H"],"synth_property":1.5})");
  const auto rec = record_from_json(j);
  EXPECT_TRUE(rec.provenance.empty());
  EXPECT_EQ(error_code([&] { lipid::label_head_tail(rec); }),
            Errc::MissingProvenance);
}

}  // namespace
}  // namespace lipidlm::corpus
