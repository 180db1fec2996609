//
// Project LipidLM - Copyright 2026 The LipidLM Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lipidlm/chem/mol_graph.hpp"
#include "lipidlm/chem/smiles.hpp"
#include "lipidlm/corpus/record.hpp"

namespace lipidlm::lipid {

inline constexpr int kDefaultMinTailLen = 4;

/// Maximal terminal unbranched carbon paths. Each path starts at a degree-1
/// carbon and extends through degree-2 carbons; it stops before the first
/// heteroatom or branching atom. Atoms are listed from the chain tip inward.
std::vector<std::vector<int>> tail_chains(const chem::MolGraph &graph,
                                          int min_tail_len = kDefaultMinTailLen);

int count_tails(const chem::MolGraph &graph,
                int min_tail_len = kDefaultMinTailLen);

/// The unique head atom adjacent to a tail atom whose removal disconnects
/// every tail atom from the rest of the head.
///
/// Throws NoConnectingAtom / AmbiguousConnectingAtom.
int find_connecting_atom(const chem::MolGraph &graph,
                         std::span<const Region> regions);

/// Head/tail labels from generation provenance: head fragment plus junction
/// are Head, arm fragments are Tail. Throws MissingProvenance when the record
/// has no per-atom fragment membership.
std::vector<Region> label_head_tail(const corpus::LipidRecord &record);

/// Ester motifs C(=O)-O-C, counted once per carbonyl carbon.
int count_esters(const chem::MolGraph &graph);

/// Non-canonical SMILES of the same molecule: DFS from a random non-root
/// atom with shuffled neighbor order. Throws ExhaustedRetries if every
/// attempt reproduces the canonical text.
std::string make_rearranged(const chem::CanonicalForm &canonical,
                            std::uint64_t seed);

/// A SMILES one adjacent-character transposition away from the canonical
/// text that parses and denotes a different molecule. Candidate swaps are
/// tried ester-oxygen/carbon first, then any C/O pair, then C/N pairs.
/// Throws NoValidDecoy.
std::string make_decoy(const chem::CanonicalForm &canonical,
                       std::uint64_t seed);

struct SmilesPair {
  std::string first;
  std::string second;
  bool label = false;  // true: same molecule (rearranged)
};

/// Pair used by the same-molecule classification task.
SmilesPair make_pair(const chem::CanonicalForm &canonical, bool rearranged,
                     std::uint64_t seed);

}  // namespace lipidlm::lipid
