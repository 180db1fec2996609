//
// Project LipidLM - Copyright 2026 The LipidLM Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <numeric>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "lipidlm/chem/smiles.hpp"
#include "lipidlm/error.hpp"

namespace lipidlm::chem {
namespace {

using Ranks = std::vector<int>;

// Assigns rank = number of atoms with a strictly smaller key.
template <class Key>
int rank_by_keys(const std::vector<Key> &keys, Ranks &ranks) {
  const int n = static_cast<int>(keys.size());
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](int a, int b) { return keys[a] < keys[b]; });
  int classes = 0;
  for (int k = 0; k < n; ++k) {
    if (k == 0 || keys[idx[k - 1]] < keys[idx[k]]) {
      ranks[idx[k]] = k;
      ++classes;
    } else {
      ranks[idx[k]] = ranks[idx[k - 1]];
    }
  }
  return classes;
}

int count_classes(const Ranks &ranks) {
  std::vector<int> r = ranks;
  std::sort(r.begin(), r.end());
  return static_cast<int>(std::unique(r.begin(), r.end()) - r.begin());
}

class Canonicalizer {
public:
  explicit Canonicalizer(const MolGraph &g): g_(g) { }

  CanonicalForm run() {
    const int n = g_.num_atoms();
    const auto in_ring = g_.ring_atoms();

    using Invariant = std::tuple<int, int, int, int, int, int>;
    std::vector<Invariant> init(n);
    for (int i = 0; i < n; ++i) {
      const Atom &a = g_.atom(i);
      init[i] = { g_.degree(i), element_rank(a.element),
                  a.aromatic ? 1 : 0, a.formal_charge, in_ring[i] ? 1 : 0,
                  a.total_h() };
    }
    Ranks ranks(n);
    rank_by_keys(init, ranks);
    search(std::move(ranks));

    CanonicalForm out;
    out.smiles = std::move(best_);
    out.atom_order = std::move(best_order_);
    return out;
  }

private:
  // Neighborhood refinement to a stable partition.
  void refine(Ranks &ranks) const {
    const int n = g_.num_atoms();
    using Key = std::pair<int, std::vector<std::pair<int, int>>>;
    std::vector<Key> keys(n);
    int classes = count_classes(ranks);
    while (classes < n) {
      for (int i = 0; i < n; ++i) {
        auto &[own, nbr] = keys[i];
        own = ranks[i];
        nbr.clear();
        for (const Neighbor &nb: g_.neighbors(i))
          nbr.emplace_back(ranks[nb.atom],
                           static_cast<int>(g_.bond(nb.bond).order));
        std::sort(nbr.begin(), nbr.end());
      }
      const int next = rank_by_keys(keys, ranks);
      if (next == classes)
        break;
      classes = next;
    }
  }

  void search(Ranks ranks) {
    refine(ranks);
    const int n = g_.num_atoms();

    // Target cell: smallest non-singleton cell, lowest rank on ties.
    std::vector<int> size(n, 0);
    for (int r: ranks)
      ++size[r];
    int target = -1;
    for (int r = 0; r < n; ++r)
      if (size[r] > 1 && (target < 0 || size[r] < size[target]))
        target = r;

    if (target < 0) {
      const int root = static_cast<int>(
          std::find(ranks.begin(), ranks.end(), 0) - ranks.begin());
      std::vector<int> order;
      std::string s = write_smiles(g_, root, ranks, &order);
      if (!have_best_ || s < best_) {
        best_ = std::move(s);
        best_order_ = std::move(order);
        have_best_ = true;
      }
      return;
    }

    for (int a = 0; a < n; ++a) {
      if (ranks[a] != target)
        continue;
      Ranks child = ranks;
      for (int b = 0; b < n; ++b)
        if (b != a && ranks[b] == target)
          child[b] = target + 1;
      search(std::move(child));
    }
  }

  const MolGraph &g_;
  std::string best_;
  std::vector<int> best_order_;
  bool have_best_ = false;
};

}  // namespace

CanonicalForm canonicalize(const MolGraph &graph) {
  if (graph.num_atoms() == 0)
    throw Error(Errc::InvalidArgument, "cannot canonicalize an empty graph");
  if (!graph.is_connected())
    throw Error(Errc::DisconnectedGraph,
                "cannot canonicalize a disconnected graph");
  return Canonicalizer(graph).run();
}

std::string canonical_smiles(std::string_view smiles) {
  return canonicalize(parse_smiles(smiles)).smiles;
}

}  // namespace lipidlm::chem
