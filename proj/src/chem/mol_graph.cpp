//
// Project LipidLM - Copyright 2026 The LipidLM Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "lipidlm/chem/mol_graph.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <utility>

#include "lipidlm/error.hpp"

namespace lipidlm::chem {
namespace {

struct ElementInfo {
  std::string_view symbol;
  int valence_electrons;
  int period;
};

constexpr std::array<ElementInfo, 9> kElements = { {
    { "C", 4, 2 },
    { "N", 5, 2 },
    { "O", 6, 2 },
    { "P", 5, 3 },
    { "S", 6, 3 },
    { "F", 7, 2 },
    { "Cl", 7, 3 },
    { "Br", 7, 4 },
    { "B", 3, 2 },
} };

const ElementInfo *find_element(std::string_view symbol) {
  for (const auto &e: kElements)
    if (e.symbol == symbol)
      return &e;
  return nullptr;
}

}  // namespace

bool is_supported_element(std::string_view symbol) {
  return find_element(symbol) != nullptr;
}

int element_rank(std::string_view symbol) {
  for (std::size_t i = 0; i < kElements.size(); ++i)
    if (kElements[i].symbol == symbol)
      return static_cast<int>(i);
  return static_cast<int>(kElements.size());
}

std::vector<int> allowed_valences(std::string_view symbol, int charge) {
  const ElementInfo *info = find_element(symbol);
  if (info == nullptr)
    return {};

  const int ve = info->valence_electrons - charge;
  if (ve <= 0 || ve >= 8)
    return { 0 };

  std::vector<int> out;
  const int base = ve <= 4 ? ve : 8 - ve;
  out.push_back(base);
  if (info->period >= 3 && ve >= 5)
    for (int v = base + 2; v <= ve; v += 2)
      out.push_back(v);
  return out;
}

int bond_valence(BondOrder order) {
  switch (order) {
  case BondOrder::Single: return 1;
  case BondOrder::Double: return 2;
  case BondOrder::Triple: return 3;
  case BondOrder::Aromatic: return 1;
  }
  return 1;
}

int default_implicit_h(const Atom &atom, int heavy_valence) {
  for (int v: allowed_valences(atom.element, atom.formal_charge))
    if (v >= heavy_valence)
      return v - heavy_valence;
  return -1;
}

int MolGraph::add_atom(Atom atom, int source_offset) {
  atoms_.push_back(std::move(atom));
  adjacency_.emplace_back();
  offsets_.push_back(source_offset);
  return num_atoms() - 1;
}

int MolGraph::add_bond(int a, int b, BondOrder order, BondStereo stereo) {
  if (a == b || a < 0 || b < 0 || a >= num_atoms() || b >= num_atoms())
    throw Error(Errc::InvalidBond, "bond endpoints must be distinct atoms");
  if (bond_between(a, b) >= 0)
    throw Error(Errc::InvalidBond, "duplicate bond between atoms "
                                       + std::to_string(a) + " and "
                                       + std::to_string(b));
  const int idx = num_bonds();
  bonds_.push_back({ a, b, order, stereo });
  adjacency_[a].push_back({ b, idx });
  adjacency_[b].push_back({ a, idx });
  return idx;
}

int MolGraph::bond_between(int a, int b) const {
  for (const Neighbor &n: adjacency_[a])
    if (n.atom == b)
      return n.bond;
  return -1;
}

bool MolGraph::is_connected() const {
  if (atoms_.empty())
    return true;
  std::vector<char> seen(atoms_.size(), 0);
  std::vector<int> stack { 0 };
  seen[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (const Neighbor &n: adjacency_[v]) {
      if (!seen[n.atom]) {
        seen[n.atom] = 1;
        ++count;
        stack.push_back(n.atom);
      }
    }
  }
  return count == num_atoms();
}

std::vector<bool> MolGraph::ring_bonds() const {
  // Tarjan bridge finding; every non-bridge bond is a ring bond.
  const int n = num_atoms();
  std::vector<int> disc(n, -1), low(n, 0);
  std::vector<bool> in_ring(bonds_.size(), true);
  int timer = 0;

  std::function<void(int, int)> dfs = [&](int v, int parent_bond) {
    disc[v] = low[v] = timer++;
    for (const Neighbor &nb: adjacency_[v]) {
      if (nb.bond == parent_bond)
        continue;
      if (disc[nb.atom] >= 0) {
        low[v] = std::min(low[v], disc[nb.atom]);
      } else {
        dfs(nb.atom, nb.bond);
        low[v] = std::min(low[v], low[nb.atom]);
        if (low[nb.atom] > disc[v])
          in_ring[nb.bond] = false;
      }
    }
  };
  for (int v = 0; v < n; ++v)
    if (disc[v] < 0)
      dfs(v, -1);
  return in_ring;
}

std::vector<bool> MolGraph::ring_atoms() const {
  std::vector<bool> out(atoms_.size(), false);
  const auto rb = ring_bonds();
  for (std::size_t i = 0; i < bonds_.size(); ++i) {
    if (rb[i]) {
      out[bonds_[i].begin] = true;
      out[bonds_[i].end] = true;
    }
  }
  return out;
}

int MolGraph::heavy_valence(int atom) const {
  int sum = 0;
  bool aromatic = false;
  for (const Neighbor &n: adjacency_[atom]) {
    const BondOrder order = bonds_[n.bond].order;
    sum += bond_valence(order);
    aromatic = aromatic || order == BondOrder::Aromatic;
  }
  return sum + (aromatic ? 1 : 0);
}

void MolGraph::assign_implicit_hydrogens() {
  for (int i = 0; i < num_atoms(); ++i) {
    Atom &a = atoms_[i];
    const int heavy = heavy_valence(i);
    if (a.bracket) {
      const auto allowed = allowed_valences(a.element, a.formal_charge);
      const int total = heavy + a.explicit_h;
      if (allowed.empty() || total > allowed.back())
        throw Error(Errc::ValenceViolation,
                    "atom " + std::to_string(i) + " (" + a.element
                        + ") exceeds its allowed valence");
      a.implicit_h = 0;
      continue;
    }
    const int h = default_implicit_h(a, heavy);
    if (h < 0)
      throw Error(Errc::ValenceViolation,
                  "atom " + std::to_string(i) + " (" + a.element
                      + ") exceeds its allowed valence");
    a.implicit_h = h;
  }
}

MolGraph MolGraph::permuted(std::span<const int> new_index) const {
  const int n = num_atoms();
  std::vector<int> old_of_new(n);
  for (int i = 0; i < n; ++i)
    old_of_new[new_index[i]] = i;

  MolGraph out;
  for (int j = 0; j < n; ++j)
    out.add_atom(atoms_[old_of_new[j]], offsets_[old_of_new[j]]);

  std::vector<Bond> sorted;
  sorted.reserve(bonds_.size());
  for (const Bond &b: bonds_) {
    int x = new_index[b.begin], y = new_index[b.end];
    if (x > y)
      std::swap(x, y);
    sorted.push_back({ x, y, b.order, b.stereo });
  }
  std::sort(sorted.begin(), sorted.end(), [](const Bond &l, const Bond &r) {
    return std::pair(l.begin, l.end) < std::pair(r.begin, r.end);
  });
  for (const Bond &b: sorted)
    out.add_bond(b.begin, b.end, b.order, b.stereo);
  return out;
}

}  // namespace lipidlm::chem
