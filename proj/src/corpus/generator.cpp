//
// Project LipidLM - Copyright 2026 The LipidLM Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "lipidlm/corpus/generator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <thread>
#include <unordered_set>

#include "lipidlm/chem/smiles.hpp"
#include "lipidlm/error.hpp"
#include "lipidlm/lipid/analysis.hpp"
#include "lipidlm/random.hpp"

namespace lipidlm::corpus {

using chem::BondOrder;
using chem::MolGraph;

const std::vector<HeadTemplate> &default_head_templates() {
  static const std::vector<HeadTemplate> heads {
    { "OCCCC", 4 },         // 4-hydroxybutyl
    { "OCC", 2 },           // 2-hydroxyethyl
    { "COCC", 3 },          // 2-methoxyethyl
    { "CN(C)CCC", 5 },      // 3-(dimethylamino)propyl
    { "OCCOCC", 5 },        // 2-(2-hydroxyethoxy)ethyl
    { "CN1CCC(CC1)", 4 },   // 1-methylpiperidin-4-yl
    { "OCC(O)C", 4 },       // 2,3-dihydroxypropyl
    { "CN1CCN(CC1)CC", 8 }, // 2-(4-methylpiperazin-1-yl)ethyl
  };
  return heads;
}

void GenConfig::validate() const {
  auto fail = [](const std::string &msg) {
    throw Error(Errc::ConfigError, msg);
  };
  if (n_lipids < 1)
    fail("generator.n_lipids must be at least 1");
  double total = 0.0;
  for (double w: tails_distribution) {
    if (w < 0.0)
      fail("generator.tails_distribution weights must be non-negative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9)
    fail("generator.tails_distribution must sum to 1");
  if (tail_len_min < lipid::kDefaultMinTailLen || tail_len_max < tail_len_min)
    fail("generator.tail_len_range must satisfy 4 <= min <= max");
  for (double p: { branch_prob, ester_prob, ring_prob })
    if (p < 0.0 || p > 1.0)
      fail("generator probabilities must lie in [0, 1]");
  if (head_templates.empty())
    fail("generator.head_templates must not be empty");
  for (const auto &h: head_templates) {
    MolGraph g;
    try {
      g = chem::parse_smiles(h.smiles);
    } catch (const ParseError &e) {
      fail("head template '" + h.smiles + "' does not parse: " + e.what());
    }
    if (h.attach < 0 || h.attach >= g.num_atoms())
      fail("head template '" + h.smiles + "' has an invalid attach index");
  }
  if (max_smiles_len < 1 || max_smiles_len > 126)
    fail("generator.max_smiles_len must lie in [1, 126]");
  if (max_attempts < 1)
    fail("generator.max_attempts must be positive");
  if (noise_sd < 0.0)
    fail("generator.noise_sd must be non-negative");
  if (train_fraction <= 0.0 || validation_fraction < 0.0
      || train_fraction + validation_fraction > 1.0)
    fail("generator split fractions are invalid");
}

namespace {

class Builder {
public:
  int add(const std::string &element, int fragment) {
    chem::Atom a;
    a.element = element;
    fragment_.push_back(fragment);
    return g_.add_atom(std::move(a));
  }

  void bond(int a, int b, BondOrder order = BondOrder::Single) {
    g_.add_bond(a, b, order);
  }

  // Tail chain of spec.length carbons hanging off `from`.
  void tail(int from, const TailSpec &spec, int fragment) {
    std::vector<int> chain;
    int prev = from;
    for (int k = 1; k <= spec.length; ++k) {
      const int c = add("C", fragment);
      bond(prev, c);
      chain.push_back(c);
      prev = c;
    }
    if (spec.branch_at >= 1)
      bond(chain[spec.branch_at - 1], add("C", fragment));
    if (spec.ring_at >= 1) {
      const int x = add("C", fragment);
      bond(chain[spec.ring_at - 1], x);
      bond(chain[spec.ring_at], x);
    }
  }

  void arm(int junction, const ArmSpec &spec, int fragment) {
    int prev = junction;
    for (int k = 0; k < spec.linker; ++k) {
      const int c = add("C", fragment);
      bond(prev, c);
      prev = c;
    }
    if (spec.ester == EsterKind::CarbonylFirst) {
      const int c = add("C", fragment);
      bond(prev, c);
      bond(c, add("O", fragment), BondOrder::Double);
      const int o = add("O", fragment);
      bond(c, o);
      prev = o;
    } else if (spec.ester == EsterKind::OxygenFirst) {
      const int o = add("O", fragment);
      bond(prev, o);
      const int c = add("C", fragment);
      bond(o, c);
      bond(c, add("O", fragment), BondOrder::Double);
      prev = c;
    }
    if (spec.tails.size() == 1) {
      tail(prev, spec.tails.front(), fragment);
      return;
    }
    const int branch = add("C", fragment);
    bond(prev, branch);
    for (const auto &t: spec.tails)
      tail(branch, t, fragment);
  }

  MolGraph &graph() { return g_; }
  const std::vector<int> &fragments() const { return fragment_; }

private:
  MolGraph g_;
  std::vector<int> fragment_;
};

TailSpec sample_tail(const GenConfig &cfg, std::mt19937_64 &rng) {
  const int min_len = lipid::kDefaultMinTailLen;
  TailSpec t;
  t.length = std::uniform_int_distribution<int>(cfg.tail_len_min,
                                                cfg.tail_len_max)(rng);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double r_ring = u(rng), r_branch = u(rng);
  // The terminal segment past any decoration keeps at least min_len carbons.
  if (r_ring < cfg.ring_prob && t.length >= min_len + 2) {
    t.ring_at = std::uniform_int_distribution<int>(1, t.length - min_len - 1)(rng);
  } else if (r_branch < cfg.branch_prob && t.length >= min_len + 1) {
    t.branch_at = std::uniform_int_distribution<int>(1, t.length - min_len)(rng);
  }
  return t;
}

ArmSpec sample_arm(const GenConfig &cfg, int n_tails, std::mt19937_64 &rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ArmSpec arm;
  if (u(rng) < cfg.ester_prob)
    arm.ester = u(rng) < 0.5 ? EsterKind::CarbonylFirst : EsterKind::OxygenFirst;
  if (arm.ester != EsterKind::None)
    arm.linker = std::uniform_int_distribution<int>(2, 6)(rng);
  else if (n_tails > 1)
    arm.linker = std::uniform_int_distribution<int>(1, 3)(rng);
  for (int k = 0; k < n_tails; ++k)
    arm.tails.push_back(sample_tail(cfg, rng));
  return arm;
}

int sample_tail_count(const GenConfig &cfg, std::mt19937_64 &rng) {
  std::discrete_distribution<int> dist(cfg.tails_distribution.begin(),
                                       cfg.tails_distribution.end());
  return 2 + dist(rng);
}

}  // namespace

LipidRecord assemble_lipid(const GenConfig &cfg, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const int k = sample_tail_count(cfg, rng);

  for (int attempt = 0; attempt < cfg.max_attempts; ++attempt) {
    const int head_idx = std::uniform_int_distribution<int>(
        0, static_cast<int>(cfg.head_templates.size()) - 1)(rng);
    const HeadTemplate &head = cfg.head_templates[head_idx];

    // Two arms on the junction nitrogen, each carrying one to three tails.
    const int lo = std::max(1, k - 3), hi = std::min(3, k - 1);
    const int first = std::uniform_int_distribution<int>(lo, hi)(rng);

    Provenance prov;
    prov.seed = seed;
    prov.head_template = head_idx;
    prov.arms.push_back(sample_arm(cfg, first, rng));
    prov.arms.push_back(sample_arm(cfg, k - first, rng));

    Builder b;
    const MolGraph head_graph = chem::parse_smiles(head.smiles);
    for (const auto &a: head_graph.atoms()) {
      const int idx = b.add(a.element, kHeadFragment);
      b.graph().atom(idx) = a;
    }
    for (const auto &bd: head_graph.bonds())
      b.bond(bd.begin, bd.end, bd.order);
    const int junction = b.add("N", kJunctionFragment);
    b.bond(head.attach, junction);
    for (std::size_t a = 0; a < prov.arms.size(); ++a)
      b.arm(junction, prov.arms[a], static_cast<int>(a) + 1);

    MolGraph &g = b.graph();
    g.assign_implicit_hydrogens();
    const chem::CanonicalForm cf = chem::canonicalize(g);
    if (static_cast<int>(cf.smiles.size()) > cfg.max_smiles_len)
      continue;

    LipidRecord rec;
    rec.canonical_smiles = cf.smiles;
    rec.n_tails = k;
    const int n = g.num_atoms();
    prov.atom_fragment.resize(n);
    rec.atom_regions.resize(n);
    for (int ord = 0; ord < n; ++ord) {
      const int src = cf.atom_order[ord];
      const int frag = b.fragments()[src];
      prov.atom_fragment[ord] = frag;
      rec.atom_regions[ord] =
          frag == kHeadFragment || frag == kJunctionFragment ? Region::Head
                                                             : Region::Tail;
      if (src == junction)
        rec.connecting_atom = ord;
    }
    rec.provenance = std::move(prov);

    const MolGraph canon = chem::parse_smiles(rec.canonical_smiles);
    rec.synth_property = synth_property(
        canon, cfg.noise_sd, derive_seed(seed, { 0x50524f50ULL }));
    return rec;
  }
  throw Error(Errc::GenerationBudgetExceeded,
              "no lipid with " + std::to_string(k) + " tails fits within "
                  + std::to_string(cfg.max_smiles_len) + " characters after "
                  + std::to_string(cfg.max_attempts) + " attempts");
}

PropertyFeatures property_features(const MolGraph &g) {
  PropertyFeatures f;
  const auto chains = lipid::tail_chains(g);
  f.n_tails = static_cast<int>(chains.size());
  if (!chains.empty()) {
    double total = 0.0;
    for (const auto &c: chains)
      total += static_cast<double>(c.size());
    f.mean_tail_len = total / static_cast<double>(chains.size());
  }
  f.esters = lipid::count_esters(g);
  f.rings = g.ring_count();
  int hetero = 0;
  for (const auto &a: g.atoms())
    hetero += a.element != "C" ? 1 : 0;
  f.hetero_fraction =
      g.num_atoms() > 0 ? static_cast<double>(hetero) / g.num_atoms() : 0.0;
  return f;
}

double structure_function(const PropertyFeatures &f) {
  return 1.0 * f.n_tails + 0.25 * f.mean_tail_len + 0.6 * f.esters
         + 0.8 * f.rings + 6.0 * f.hetero_fraction;
}

double synth_property(const MolGraph &g, double noise_sd, std::uint64_t seed) {
  const double clean = structure_function(property_features(g));
  if (noise_sd <= 0.0)
    return clean;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, noise_sd * kPropertyRange);
  return clean + noise(rng);
}

SplitManifest make_split(const std::vector<std::string> &ids,
                         double train_fraction, double validation_fraction,
                         std::uint64_t seed) {
  const auto n = static_cast<long>(ids.size());
  const long n_val = std::lround(static_cast<double>(n) * validation_fraction);
  const long n_test = std::lround(
      static_cast<double>(n) * (1.0 - train_fraction - validation_fraction));
  const long n_train = n - n_val - n_test;

  std::vector<std::string> shuffled = ids;
  std::mt19937_64 rng(derive_seed(seed, { 0x53504c4954ULL }));
  std::shuffle(shuffled.begin(), shuffled.end(), rng);

  SplitManifest m;
  m.seed = seed;
  m.train.assign(shuffled.begin(), shuffled.begin() + n_train);
  m.validation.assign(shuffled.begin() + n_train,
                      shuffled.begin() + n_train + n_val);
  m.test.assign(shuffled.begin() + n_train + n_val, shuffled.end());
  return m;
}

Corpus generate_corpus(const GenConfig &cfg, int workers) {
  cfg.validate();
  if (workers <= 0)
    workers = worker_count();
  const int n = cfg.n_lipids;
  auto seed_for = [&](int i, int attempt) {
    return derive_seed(cfg.seed, { static_cast<std::uint64_t>(i),
                                   static_cast<std::uint64_t>(attempt) });
  };

  // First attempt for every index, computed in parallel blocks.
  std::vector<LipidRecord> first(n);
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (int i = w; i < n; i += workers)
            first[i] = assemble_lipid(cfg, seed_for(i, 0));
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto &t: pool)
      t.join();
  }
  for (const auto &e: errors)
    if (e)
      std::rethrow_exception(e);

  // Serial de-duplication in index order keeps the result worker-independent.
  Corpus out;
  std::unordered_set<std::string> seen;
  out.records.reserve(n);
  for (int i = 0; i < n; ++i) {
    LipidRecord rec = std::move(first[i]);
    int attempt = 0;
    while (seen.count(rec.canonical_smiles) > 0) {
      if (++attempt > cfg.max_attempts)
        throw Error(Errc::GenerationBudgetExceeded,
                    "could not find a unique lipid for index "
                        + std::to_string(i));
      ++out.stats.duplicates_resampled;
      rec = assemble_lipid(cfg, seed_for(i, attempt));
    }
    seen.insert(rec.canonical_smiles);
    char id[32];
    std::snprintf(id, sizeof id, "LIP%06d", i);
    rec.id = id;
    out.records.push_back(std::move(rec));
  }

  std::vector<std::string> ids;
  ids.reserve(n);
  for (const auto &r: out.records)
    ids.push_back(r.id);
  out.split = make_split(ids, cfg.train_fraction, cfg.validation_fraction,
                         cfg.seed);
  return out;
}

}  // namespace lipidlm::corpus
