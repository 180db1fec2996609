//
// Project LipidLM - Copyright 2026 The LipidLM Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lipidlm/chem/mol_graph.hpp"
#include "lipidlm/corpus/record.hpp"

namespace lipidlm::corpus {

/// Head fragment with the atom that bonds to the junction nitrogen.
struct HeadTemplate {
  std::string smiles;
  int attach = 0;

  bool operator==(const HeadTemplate &) const = default;
};

const std::vector<HeadTemplate> &default_head_templates();

struct GenConfig {
  int n_lipids = 5000;
  /// Weights over tail counts 2, 3, 4, 5, 6.
  std::array<double, 5> tails_distribution { 0.2, 0.2, 0.2, 0.2, 0.2 };
  int tail_len_min = 4;
  int tail_len_max = 10;
  double branch_prob = 0.2;
  double ester_prob = 0.5;
  double ring_prob = 0.15;
  std::vector<HeadTemplate> head_templates = default_head_templates();
  std::uint64_t seed = 7;
  int max_smiles_len = 96;
  int max_attempts = 500;
  double noise_sd = 0.05;
  double train_fraction = 0.8;
  double validation_fraction = 0.1;

  /// Throws Error(ConfigError) describing the first violated constraint.
  void validate() const;
};

/// One lipid from `seed`: tail count sampled first, then the head, arm
/// layout, and tail decorations; resampled (same tail count) until the
/// canonical SMILES fits max_smiles_len. Throws GenerationBudgetExceeded.
LipidRecord assemble_lipid(const GenConfig &cfg, std::uint64_t seed);

// Synthetic regression target ------------------------------------------------

struct PropertyFeatures {
  int n_tails = 0;
  double mean_tail_len = 0.0;
  int esters = 0;
  int rings = 0;
  double hetero_fraction = 0.0;
};

PropertyFeatures property_features(const chem::MolGraph &graph);

/// Noiseless structure function:
///   1.0 n_tails + 0.25 mean_tail_len + 0.6 esters + 0.8 rings
///   + 6.0 hetero_fraction
double structure_function(const PropertyFeatures &f);

/// Declared spread of structure_function over default-config lipids; noise
/// standard deviation is noise_sd times this value.
inline constexpr double kPropertyRange = 8.0;

double synth_property(const chem::MolGraph &graph, double noise_sd,
                      std::uint64_t seed);

// Corpus ----------------------------------------------------------------------

struct SplitManifest {
  std::uint64_t seed = 0;
  std::vector<std::string> train;
  std::vector<std::string> validation;
  std::vector<std::string> test;

  bool operator==(const SplitManifest &) const = default;
};

struct GenerationStats {
  int duplicates_resampled = 0;
};

struct Corpus {
  std::vector<LipidRecord> records;
  SplitManifest split;
  GenerationStats stats;
};

/// Generates n_lipids unique records. Record i depends only on (seed, i), so
/// output is identical for any worker count. workers <= 0 means
/// worker_count().
Corpus generate_corpus(const GenConfig &cfg, int workers = 0);

/// Seeded shuffle of ids into train/validation/test of exact sizes.
SplitManifest make_split(const std::vector<std::string> &ids,
                         double train_fraction, double validation_fraction,
                         std::uint64_t seed);

}  // namespace lipidlm::corpus
