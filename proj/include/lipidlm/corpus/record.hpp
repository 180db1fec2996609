//
// Project LipidLM - Copyright 2026 The LipidLM Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace lipidlm {

enum class Region : std::uint8_t {
  Head,
  Tail,
};

namespace corpus {

/// Fragment id stored per atom in Provenance::atom_fragment.
inline constexpr int kHeadFragment = 0;
inline constexpr int kJunctionFragment = -1;

enum class EsterKind : std::uint8_t {
  None,
  CarbonylFirst,  // N...C(=O)O...tail
  OxygenFirst,    // N...OC(=O)...tail
};

struct TailSpec {
  int length = 0;      // carbons in the chain, not counting ring extras
  int branch_at = -1;  // chain position carrying a methyl branch, or -1
  int ring_at = -1;    // chain position fused into a cyclopropane, or -1

  bool operator==(const TailSpec &) const = default;
};

/// One substituent of the junction nitrogen. Carries one to three tails.
struct ArmSpec {
  int linker = 0;  // CH2 units between nitrogen and ester / branch carbon
  EsterKind ester = EsterKind::None;
  std::vector<TailSpec> tails;

  bool operator==(const ArmSpec &) const = default;
};

struct Provenance {
  std::uint64_t seed = 0;
  int head_template = -1;
  std::vector<ArmSpec> arms;
  /// Per canonical atom: kHeadFragment, kJunctionFragment, or 1-based arm.
  std::vector<int> atom_fragment;

  bool empty() const { return atom_fragment.empty(); }
  bool operator==(const Provenance &) const = default;
};

struct LipidRecord {
  std::string id;
  std::string canonical_smiles;
  int n_tails = 0;
  int connecting_atom = -1;  // canonical atom ordinal
  std::vector<Region> atom_regions;
  Provenance provenance;
  double synth_property = 0.0;

  bool operator==(const LipidRecord &) const = default;
};

}  // namespace corpus
}  // namespace lipidlm
