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

namespace lipidlm::chem {

enum class BondOrder : std::uint8_t {
  Single = 1,
  Double = 2,
  Triple = 3,
  Aromatic = 4,
};

/// Directional bond annotation ('/' or '\'). Kept for round-tripping input but
/// never consulted by canonicalization.
enum class BondStereo : std::uint8_t {
  None,
  Up,
  Down,
};

struct Atom {
  std::string element;  // capitalized symbol, e.g. "C", "Cl"
  int formal_charge = 0;
  bool aromatic = false;
  int explicit_h = 0;   // hydrogens written inside a bracket atom
  int implicit_h = 0;   // hydrogens implied by valence (organic subset only)
  bool bracket = false;
  std::string chirality;  // "@" / "@@" annotation, empty if none

  int total_h() const { return explicit_h + implicit_h; }
};

struct Bond {
  int begin;
  int end;
  BondOrder order = BondOrder::Single;
  BondStereo stereo = BondStereo::None;

  int other(int atom) const { return atom == begin ? end : begin; }
};

struct Neighbor {
  int atom;
  int bond;
};

// Element table ---------------------------------------------------------------

/// Elements accepted by the parser. Aromatic lower-case forms map onto these.
bool is_supported_element(std::string_view symbol);

/// Ordering key used by canonical invariants; smaller sorts first.
int element_rank(std::string_view symbol);

/// Allowed total valences for an element in the given charge state, ascending.
std::vector<int> allowed_valences(std::string_view symbol, int charge);

/// Sum of bond orders counted for valence purposes (aromatic counts as 1, plus
/// one extra for an atom carrying at least one aromatic bond).
int bond_valence(BondOrder order);

// Graph -----------------------------------------------------------------------

class MolGraph {
public:
  MolGraph() = default;

  int add_atom(Atom atom, int source_offset = -1);

  /// Adds a bond; rejects self loops and duplicate bonds with InvalidBond.
  int add_bond(int a, int b, BondOrder order = BondOrder::Single,
               BondStereo stereo = BondStereo::None);

  int num_atoms() const { return static_cast<int>(atoms_.size()); }
  int num_bonds() const { return static_cast<int>(bonds_.size()); }

  const std::vector<Atom> &atoms() const { return atoms_; }
  const std::vector<Bond> &bonds() const { return bonds_; }
  const Atom &atom(int i) const { return atoms_[i]; }
  Atom &atom(int i) { return atoms_[i]; }
  const Bond &bond(int i) const { return bonds_[i]; }

  std::span<const Neighbor> neighbors(int atom) const {
    return adjacency_[atom];
  }
  int degree(int atom) const {
    return static_cast<int>(adjacency_[atom].size());
  }

  /// Bond index joining a and b, or -1.
  int bond_between(int a, int b) const;

  /// Character offset of the atom's element symbol in the parsed text, or -1
  /// for atoms built programmatically.
  int source_offset(int atom) const { return offsets_[atom]; }
  const std::vector<int> &source_offsets() const { return offsets_; }

  bool is_connected() const;

  /// Per-bond flag: bond lies on a cycle.
  std::vector<bool> ring_bonds() const;
  /// Per-atom flag: atom lies on a cycle.
  std::vector<bool> ring_atoms() const;
  /// Cyclomatic number (independent ring count) of a connected graph.
  int ring_count() const { return num_bonds() - num_atoms() + 1; }

  /// Sum of bond valence contributions at an atom, excluding hydrogens.
  int heavy_valence(int atom) const;

  /// Recomputes implicit hydrogens for non-bracket atoms and checks every atom
  /// against its allowed valences. Throws Error(ValenceViolation) naming the
  /// offending atom index.
  void assign_implicit_hydrogens();

  /// Returns the graph relabelled so that old atom i becomes new atom
  /// new_index[i]. Bonds are re-emitted in ascending (begin, end) order.
  MolGraph permuted(std::span<const int> new_index) const;

private:
  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::vector<std::vector<Neighbor>> adjacency_;
  std::vector<int> offsets_;
};

/// Default hydrogen count for an organic-subset atom with the given heavy
/// valence, or -1 if no allowed valence fits.
int default_implicit_h(const Atom &atom, int heavy_valence);

}  // namespace lipidlm::chem
