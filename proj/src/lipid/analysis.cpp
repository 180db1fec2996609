//
// Project LipidLM - Copyright 2026 The LipidLM Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "lipidlm/lipid/analysis.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <random>
#include <utility>

#include "lipidlm/error.hpp"

namespace lipidlm::lipid {

using chem::BondOrder;
using chem::MolGraph;

namespace {

bool is_carbon(const MolGraph &g, int i) {
  return g.atom(i).element == "C";
}

bool is_ester_oxygen(const MolGraph &g, int o) {
  if (g.atom(o).element != "O" || g.degree(o) != 2)
    return false;
  bool has_carbonyl = false;
  for (const auto &nb: g.neighbors(o)) {
    if (g.bond(nb.bond).order != BondOrder::Single || !is_carbon(g, nb.atom))
      return false;
    for (const auto &nn: g.neighbors(nb.atom))
      if (g.atom(nn.atom).element == "O"
          && g.bond(nn.bond).order == BondOrder::Double)
        has_carbonyl = true;
  }
  return has_carbonyl;
}

}  // namespace

std::vector<std::vector<int>> tail_chains(const MolGraph &g,
                                          int min_tail_len) {
  std::vector<std::vector<int>> out;
  for (int t = 0; t < g.num_atoms(); ++t) {
    if (!is_carbon(g, t) || g.degree(t) != 1)
      continue;
    std::vector<int> path { t };
    int prev = t;
    int cur = g.neighbors(t)[0].atom;
    bool whole_molecule = false;
    while (is_carbon(g, cur)) {
      if (g.degree(cur) == 2) {
        path.push_back(cur);
        const auto nbs = g.neighbors(cur);
        const int next = nbs[0].atom == prev ? nbs[1].atom : nbs[0].atom;
        prev = cur;
        cur = next;
      } else if (g.degree(cur) == 1) {
        path.push_back(cur);
        whole_molecule = true;
        break;
      } else {
        break;
      }
    }
    // A bare carbon chain is one path; count it from its lower-index tip.
    if (whole_molecule && path.back() < t)
      continue;
    if (static_cast<int>(path.size()) >= min_tail_len)
      out.push_back(std::move(path));
  }
  return out;
}

int count_tails(const MolGraph &g, int min_tail_len) {
  return static_cast<int>(tail_chains(g, min_tail_len).size());
}

int find_connecting_atom(const MolGraph &g, std::span<const Region> regions) {
  const int n = g.num_atoms();
  if (static_cast<int>(regions.size()) != n)
    throw Error(Errc::InvalidArgument, "region labels must cover every atom");
  const bool any_head = std::find(regions.begin(), regions.end(), Region::Head)
                        != regions.end();
  const bool any_tail = std::find(regions.begin(), regions.end(), Region::Tail)
                        != regions.end();
  if (!any_head || !any_tail)
    throw Error(Errc::NoConnectingAtom,
                "labels need at least one head and one tail atom");

  std::vector<int> found;
  for (int v = 0; v < n; ++v) {
    if (regions[v] != Region::Head)
      continue;
    bool touches_tail = false;
    for (const auto &nb: g.neighbors(v))
      touches_tail = touches_tail || regions[nb.atom] == Region::Tail;
    if (!touches_tail)
      continue;

    // With v removed, no tail atom may reach a head atom.
    std::vector<char> seen(n, 0);
    seen[v] = 1;
    std::vector<int> stack;
    for (int t = 0; t < n; ++t) {
      if (regions[t] == Region::Tail) {
        seen[t] = 1;
        stack.push_back(t);
      }
    }
    bool separated = true;
    while (!stack.empty() && separated) {
      const int x = stack.back();
      stack.pop_back();
      for (const auto &nb: g.neighbors(x)) {
        if (seen[nb.atom])
          continue;
        if (regions[nb.atom] == Region::Head) {
          separated = false;
          break;
        }
        seen[nb.atom] = 1;
        stack.push_back(nb.atom);
      }
    }
    if (separated)
      found.push_back(v);
  }

  if (found.empty())
    throw Error(Errc::NoConnectingAtom,
                "no head atom separates the tails from the head");
  if (found.size() > 1)
    throw Error(Errc::AmbiguousConnectingAtom,
                std::to_string(found.size()) + " candidate connecting atoms");
  return found.front();
}

std::vector<Region> label_head_tail(const corpus::LipidRecord &record) {
  if (record.provenance.empty())
    throw Error(Errc::MissingProvenance,
                "record " + record.id + " carries no fragment membership");
  std::vector<Region> out;
  out.reserve(record.provenance.atom_fragment.size());
  for (int frag: record.provenance.atom_fragment)
    out.push_back(frag == corpus::kHeadFragment
                          || frag == corpus::kJunctionFragment
                      ? Region::Head
                      : Region::Tail);
  return out;
}

int count_esters(const MolGraph &g) {
  int count = 0;
  for (int c = 0; c < g.num_atoms(); ++c) {
    if (!is_carbon(g, c))
      continue;
    bool carbonyl = false, ester_o = false;
    for (const auto &nb: g.neighbors(c)) {
      const auto order = g.bond(nb.bond).order;
      if (g.atom(nb.atom).element != "O")
        continue;
      if (order == BondOrder::Double)
        carbonyl = true;
      else if (order == BondOrder::Single && g.degree(nb.atom) == 2) {
        for (const auto &nn: g.neighbors(nb.atom))
          if (nn.atom != c && is_carbon(g, nn.atom))
            ester_o = true;
      }
    }
    if (carbonyl && ester_o)
      ++count;
  }
  return count;
}

std::string make_rearranged(const chem::CanonicalForm &canonical,
                            std::uint64_t seed) {
  constexpr int kAttempts = 64;
  const MolGraph g = chem::parse_smiles(canonical.smiles);
  const int n = g.num_atoms();
  if (n < 2)
    throw Error(Errc::ExhaustedRetries,
                "a single atom has no alternative SMILES");

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick_start(1, n - 1);
  std::vector<int> priority(n);
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    std::iota(priority.begin(), priority.end(), 0);
    std::shuffle(priority.begin(), priority.end(), rng);
    const int start = pick_start(rng);
    std::string s = chem::write_smiles(g, start, priority);
    if (s != canonical.smiles)
      return s;
  }
  throw Error(Errc::ExhaustedRetries,
              "every emission reproduced the canonical text");
}

std::string make_decoy(const chem::CanonicalForm &canonical,
                       std::uint64_t seed) {
  const std::string &text = canonical.smiles;
  const MolGraph g = chem::parse_smiles(text);

  // Character offset -> atom for plain one-letter C/N/O atoms.
  std::vector<int> atom_at(text.size(), -1);
  for (int i = 0; i < g.num_atoms(); ++i) {
    const auto &a = g.atom(i);
    if (a.bracket || a.aromatic)
      continue;
    if (a.element == "C" || a.element == "N" || a.element == "O")
      atom_at[g.source_offset(i)] = i;
  }

  std::array<std::vector<std::size_t>, 3> tiers;
  for (std::size_t i = 0; i + 1 < text.size(); ++i) {
    const int x = atom_at[i], y = atom_at[i + 1];
    if (x < 0 || y < 0)
      continue;
    const std::string pair { text[i], text[i + 1] };
    if (pair == "CO" || pair == "OC") {
      const int o = text[i] == 'O' ? x : y;
      tiers[is_ester_oxygen(g, o) ? 0 : 1].push_back(i);
    } else if (pair == "CN" || pair == "NC") {
      tiers[2].push_back(i);
    }
  }

  std::mt19937_64 rng(seed);
  for (auto &tier: tiers) {
    std::shuffle(tier.begin(), tier.end(), rng);
    for (std::size_t i: tier) {
      std::string candidate = text;
      std::swap(candidate[i], candidate[i + 1]);
      try {
        if (chem::canonical_smiles(candidate) != text)
          return candidate;
      } catch (const ParseError &) {
        continue;
      }
    }
  }
  throw Error(Errc::NoValidDecoy,
              "no adjacent C/O or C/N transposition yields a distinct molecule");
}

SmilesPair make_pair(const chem::CanonicalForm &canonical, bool rearranged,
                     std::uint64_t seed) {
  SmilesPair p;
  p.first = canonical.smiles;
  p.label = rearranged;
  p.second = rearranged ? make_rearranged(canonical, seed)
                        : make_decoy(canonical, seed);
  return p;
}

}  // namespace lipidlm::lipid
