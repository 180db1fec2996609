//
// Project LipidLM - Copyright 2026 The LipidLM Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "lipidlm/chem/smiles.hpp"
#include "lipidlm/error.hpp"

namespace lipidlm::chem {
namespace {

bool is_organic_subset(const std::string &element) {
  return element == "B" || element == "C" || element == "N" || element == "O"
         || element == "P" || element == "S" || element == "F"
         || element == "Cl" || element == "Br";
}

std::string atom_text(const MolGraph &g, int i) {
  const Atom &a = g.atom(i);
  std::string sym = a.element;
  if (a.aromatic)
    sym[0] = static_cast<char>(sym[0] - 'A' + 'a');

  const int heavy = g.heavy_valence(i);
  if (a.formal_charge == 0 && is_organic_subset(a.element)
      && default_implicit_h(a, heavy) == a.total_h())
    return sym;

  std::string out = "[" + sym;
  if (a.total_h() > 0) {
    out += 'H';
    if (a.total_h() > 1)
      out += std::to_string(a.total_h());
  }
  if (a.formal_charge != 0) {
    out += a.formal_charge > 0 ? '+' : '-';
    if (std::abs(a.formal_charge) > 1)
      out += std::to_string(std::abs(a.formal_charge));
  }
  out += ']';
  return out;
}

std::string bond_text(const MolGraph &g, const Bond &b) {
  const bool both_aromatic = g.atom(b.begin).aromatic && g.atom(b.end).aromatic;
  switch (b.order) {
  case BondOrder::Single: return both_aromatic ? "-" : "";
  case BondOrder::Double: return "=";
  case BondOrder::Triple: return "#";
  case BondOrder::Aromatic: return both_aromatic ? "" : ":";
  }
  return "";
}

std::string ring_label(int digit) {
  if (digit < 10)
    return std::string(1, static_cast<char>('0' + digit));
  return "%" + std::to_string(digit);
}

class Writer {
public:
  Writer(const MolGraph &g, std::span<const int> priority)
      : g_(g), priority_(priority), visit_(g.num_atoms(), -1),
        children_(g.num_atoms()), closures_(g.num_atoms()),
        is_closure_(g.num_bonds(), false), digit_of_bond_(g.num_bonds(), -1) { }

  std::string run(int start, std::vector<int> *emitted) {
    plan(start, -1);
    emit(start, -1, emitted);
    return std::move(out_);
  }

private:
  std::vector<Neighbor> ordered_neighbors(int v) const {
    auto nbs = g_.neighbors(v);
    std::vector<Neighbor> out(nbs.begin(), nbs.end());
    std::sort(out.begin(), out.end(), [&](const Neighbor &a, const Neighbor &b) {
      if (priority_[a.atom] != priority_[b.atom])
        return priority_[a.atom] < priority_[b.atom];
      return a.atom < b.atom;
    });
    return out;
  }

  void plan(int v, int parent_bond) {
    visit_[v] = counter_++;
    for (const Neighbor &nb: ordered_neighbors(v)) {
      if (nb.bond == parent_bond)
        continue;
      if (visit_[nb.atom] >= 0) {
        if (!is_closure_[nb.bond]) {
          is_closure_[nb.bond] = true;
          closures_[v].push_back(nb.bond);
          closures_[nb.atom].push_back(nb.bond);
        }
        continue;
      }
      children_[v].push_back(nb);
      plan(nb.atom, nb.bond);
    }
  }

  int take_digit() {
    for (int d = 1;; ++d) {
      if (std::find(used_.begin(), used_.end(), d) == used_.end()) {
        used_.push_back(d);
        return d;
      }
    }
  }

  void emit(int v, int in_bond, std::vector<int> *emitted) {
    if (in_bond >= 0)
      out_ += bond_text(g_, g_.bond(in_bond));
    out_ += atom_text(g_, v);
    if (emitted != nullptr)
      emitted->push_back(v);

    // Ring bonds at v, ordered by partner's visit order.
    auto &rings = closures_[v];
    std::sort(rings.begin(), rings.end(), [&](int x, int y) {
      return visit_[g_.bond(x).other(v)] < visit_[g_.bond(y).other(v)];
    });
    std::vector<int> freed;
    for (int b: rings) {
      if (digit_of_bond_[b] >= 0) {
        out_ += ring_label(digit_of_bond_[b]);
        freed.push_back(digit_of_bond_[b]);
      } else {
        const int d = take_digit();
        digit_of_bond_[b] = d;
        out_ += bond_text(g_, g_.bond(b));
        out_ += ring_label(d);
      }
    }
    for (int d: freed)
      used_.erase(std::find(used_.begin(), used_.end(), d));

    const auto &kids = children_[v];
    for (std::size_t k = 0; k < kids.size(); ++k) {
      const bool last = k + 1 == kids.size();
      if (!last)
        out_ += '(';
      emit(kids[k].atom, kids[k].bond, emitted);
      if (!last)
        out_ += ')';
    }
  }

  const MolGraph &g_;
  std::span<const int> priority_;
  std::vector<int> visit_;
  std::vector<std::vector<Neighbor>> children_;
  std::vector<std::vector<int>> closures_;
  std::vector<bool> is_closure_;
  std::vector<int> digit_of_bond_;
  std::vector<int> used_;
  std::string out_;
  int counter_ = 0;
};

}  // namespace

std::string write_smiles(const MolGraph &graph, int start_atom,
                         std::span<const int> priority,
                         std::vector<int> *emitted) {
  if (start_atom < 0 || start_atom >= graph.num_atoms())
    throw Error(Errc::InvalidArgument, "start atom out of range");
  if (static_cast<int>(priority.size()) != graph.num_atoms())
    throw Error(Errc::InvalidArgument, "priority size must equal atom count");
  if (!graph.is_connected())
    throw Error(Errc::DisconnectedGraph, "cannot write a disconnected graph");
  return Writer(graph, priority).run(start_atom, emitted);
}

std::string write_smiles(const MolGraph &graph, int start_atom) {
  std::vector<int> priority(graph.num_atoms());
  std::iota(priority.begin(), priority.end(), 0);
  return write_smiles(graph, start_atom, priority);
}

std::string write_smiles_shuffled(const MolGraph &graph, int start_atom,
                                  std::uint64_t seed) {
  std::vector<int> priority(graph.num_atoms());
  std::iota(priority.begin(), priority.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(priority.begin(), priority.end(), rng);
  return write_smiles(graph, start_atom, priority);
}

}  // namespace lipidlm::chem
