//
// Project LipidLM - Copyright 2026 The LipidLM Authors.
// SPDX-License-Identifier: Apache-2.0
//

// Test-only oracles. Nothing here calls into the canonicalizer.

#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <tuple>
#include <utility>
#include <vector>

#include "lipidlm/chem/mol_graph.hpp"

namespace lipidlm::testing {

/// Exhaustive-permutation isomorphism check; intended for graphs of at most
/// eight atoms.
inline bool isomorphic_bruteforce(const chem::MolGraph &a,
                                  const chem::MolGraph &b) {
  const int n = a.num_atoms();
  if (n != b.num_atoms() || a.num_bonds() != b.num_bonds())
    return false;

  auto atom_key = [](const chem::Atom &x) {
    return std::tuple(x.element, x.formal_charge, x.aromatic, x.total_h());
  };
  std::map<std::pair<int, int>, chem::BondOrder> bonds_b;
  for (const auto &bd: b.bonds())
    bonds_b[std::minmax(bd.begin, bd.end)] = bd.order;

  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  do {
    bool ok = true;
    for (int i = 0; i < n && ok; ++i)
      ok = atom_key(a.atom(i)) == atom_key(b.atom(perm[i]));
    for (const auto &bd: a.bonds()) {
      if (!ok)
        break;
      auto it = bonds_b.find(std::minmax(perm[bd.begin], perm[bd.end]));
      ok = it != bonds_b.end() && it->second == bd.order;
    }
    if (ok)
      return true;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return false;
}

/// Random connected molecule: a random tree over C/N/O/S plus optional extra
/// ring bonds, with bond orders raised where valence allows.
inline chem::MolGraph random_molecule(std::mt19937_64 &rng, int n_atoms,
                                      int extra_bonds) {
  static const char *kElems[] = { "C", "C", "C", "N", "O", "S" };
  auto pick = [&](int hi) {
    return std::uniform_int_distribution<int>(0, hi - 1)(rng);
  };

  for (;;) {
    chem::MolGraph g;
    for (int i = 0; i < n_atoms; ++i) {
      chem::Atom a;
      a.element = kElems[pick(6)];
      g.add_atom(a);
    }
    for (int i = 1; i < n_atoms; ++i)
      g.add_bond(pick(i), i);
    for (int k = 0; k < extra_bonds; ++k) {
      const int x = pick(n_atoms), y = pick(n_atoms);
      if (x != y && g.bond_between(x, y) < 0)
        g.add_bond(x, y);
    }
    chem::MolGraph h;
    for (int i = 0; i < n_atoms; ++i)
      h.add_atom(g.atom(i));
    for (const auto &b: g.bonds()) {
      chem::BondOrder order = chem::BondOrder::Single;
      if (pick(4) == 0)
        order = chem::BondOrder::Double;
      h.add_bond(b.begin, b.end, order);
    }
    try {
      h.assign_implicit_hydrogens();
      return h;
    } catch (...) {
      continue;
    }
  }
}

inline std::vector<int> random_permutation(std::mt19937_64 &rng, int n) {
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

}  // namespace lipidlm::testing
