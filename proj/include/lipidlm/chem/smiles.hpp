//
// Project LipidLM - Copyright 2026 The LipidLM Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lipidlm/chem/mol_graph.hpp"

namespace lipidlm::chem {

/// Parses a single-fragment SMILES string. Atom order follows the left-to-right
/// order of atom symbols; each atom remembers the offset of its symbol.
///
/// Supported: organic subset (B C N O P S F Cl Br), aromatic b c n o p s,
/// bracket atoms with H count, charge, chirality and atom class, bond symbols
/// - = # : / \, branches and ring closures (digits and %nn).
///
/// Throws ParseError carrying the character offset of the failure.
MolGraph parse_smiles(std::string_view smiles);

/// Depth-first SMILES emission from `start_atom`. Neighbors are visited in
/// ascending `priority` (one entry per atom); ties fall back to atom index.
/// When `emitted` is non-null it receives atom indices in output order.
///
/// Directional bond and chirality annotations are not written.
std::string write_smiles(const MolGraph &graph, int start_atom,
                         std::span<const int> priority,
                         std::vector<int> *emitted = nullptr);

/// Emission in input order (priority == atom index).
std::string write_smiles(const MolGraph &graph, int start_atom = 0);

/// Emission with neighbor priorities drawn from a seeded shuffle.
std::string write_smiles_shuffled(const MolGraph &graph, int start_atom,
                                  std::uint64_t seed);

struct CanonicalForm {
  std::string smiles;
  /// atom_order[k] = index (in the source graph) of the k-th atom written.
  std::vector<int> atom_order;
};

/// Deterministic canonical SMILES. Atom invariants are refined to a stable
/// partition; remaining ties are resolved by individualizing each tied atom
/// in turn and keeping the lexicographically smallest emitted string.
CanonicalForm canonicalize(const MolGraph &graph);

/// parse + canonicalize convenience.
std::string canonical_smiles(std::string_view smiles);

}  // namespace lipidlm::chem
