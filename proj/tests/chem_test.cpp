//
// Project LipidLM - Copyright 2026 The LipidLM Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <random>
#include <string>

#include <gtest/gtest.h>

#include "lipidlm/chem/smiles.hpp"
#include "lipidlm/error.hpp"
#include "test_support.hpp"

namespace lipidlm::chem {
namespace {

Errc parse_error_code(std::string_view s, std::size_t *offset = nullptr) {
  try {
    parse_smiles(s);
  } catch (const ParseError &e) {
    if (offset != nullptr)
      *offset = e.offset();
    return e.code();
  }
  ADD_FAILURE() << "expected a parse error for " << s;
  return Errc::InvalidArgument;
}

TEST(ParseSmiles, Ethanol) {
  const MolGraph g = parse_smiles("CCO");
  ASSERT_EQ(g.num_atoms(), 3);
  EXPECT_EQ(g.atom(0).element, "C");
  EXPECT_EQ(g.atom(1).element, "C");
  EXPECT_EQ(g.atom(2).element, "O");
  ASSERT_EQ(g.num_bonds(), 2);
  EXPECT_GE(g.bond_between(0, 1), 0);
  EXPECT_GE(g.bond_between(1, 2), 0);
  EXPECT_EQ(g.bond(g.bond_between(0, 1)).order, BondOrder::Single);
  EXPECT_EQ(g.atom(0).total_h(), 3);
  EXPECT_EQ(g.atom(1).total_h(), 2);
  EXPECT_EQ(g.atom(2).total_h(), 1);
}

TEST(ParseSmiles, Cyclopropane) {
  const MolGraph g = parse_smiles("C1CC1");
  ASSERT_EQ(g.num_atoms(), 3);
  ASSERT_EQ(g.num_bonds(), 3);
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(g.degree(i), 2);
    EXPECT_EQ(g.atom(i).total_h(), 2);
  }
  EXPECT_EQ(g.ring_count(), 1);
}

TEST(ParseSmiles, EthylAcetateGraph) {
  // Hand-drawn: C0-C1(=O2)-O3-C4-C5
  const MolGraph g = parse_smiles("CC(=O)OCC");
  ASSERT_EQ(g.num_atoms(), 6);
  ASSERT_EQ(g.num_bonds(), 5);
  EXPECT_EQ(g.atom(2).element, "O");
  EXPECT_EQ(g.bond(g.bond_between(1, 2)).order, BondOrder::Double);
  EXPECT_EQ(g.bond(g.bond_between(1, 3)).order, BondOrder::Single);
  EXPECT_EQ(g.bond(g.bond_between(3, 4)).order, BondOrder::Single);
  EXPECT_EQ(g.bond_between(2, 3), -1);
  EXPECT_EQ(g.atom(1).total_h(), 0);
  EXPECT_EQ(g.atom(3).total_h(), 0);
}

TEST(ParseSmiles, ErrorsNameOffsets) {
  std::size_t off = 0;
  EXPECT_EQ(parse_error_code("C(", &off), Errc::UnbalancedParenthesis);
  EXPECT_EQ(off, 1u);
  EXPECT_EQ(parse_error_code("CC)C", &off), Errc::UnbalancedParenthesis);
  EXPECT_EQ(off, 2u);
  EXPECT_EQ(parse_error_code("C1CC", &off), Errc::UnclosedRingBond);
  EXPECT_EQ(off, 1u);
  EXPECT_EQ(parse_error_code("CXC", &off), Errc::UnknownElement);
  EXPECT_EQ(off, 1u);
  EXPECT_EQ(parse_error_code("C[Si]C", &off), Errc::UnknownElement);
  EXPECT_EQ(off, 2u);
  EXPECT_EQ(parse_error_code("CC(C)(C)(C)C", &off), Errc::ValenceViolation);
  EXPECT_EQ(off, 1u);
  EXPECT_EQ(parse_error_code("O=O=O", &off), Errc::ValenceViolation);
  EXPECT_EQ(off, 2u);
  EXPECT_EQ(parse_error_code("", &off), Errc::EmptyInput);
  EXPECT_EQ(parse_error_code("CC.CC", &off), Errc::UnexpectedCharacter);
  EXPECT_EQ(off, 2u);
  EXPECT_EQ(parse_error_code("C==C"), Errc::UnexpectedCharacter);
  EXPECT_EQ(parse_error_code("C11"), Errc::InvalidBond);
  EXPECT_EQ(parse_error_code("cc"), Errc::ValenceViolation);
}

TEST(ParseSmiles, BracketAtomsAndTwoLetterElements) {
  const MolGraph g = parse_smiles("C[N+](C)(C)CCl");
  ASSERT_EQ(g.num_atoms(), 6);
  EXPECT_EQ(g.atom(1).element, "N");
  EXPECT_EQ(g.atom(1).formal_charge, 1);
  EXPECT_EQ(g.atom(1).total_h(), 0);
  EXPECT_EQ(g.atom(5).element, "Cl");
  EXPECT_EQ(g.source_offset(1), 2);
  EXPECT_EQ(g.source_offset(5), 12);

  const MolGraph h = parse_smiles("[NH4+]");
  EXPECT_EQ(h.atom(0).total_h(), 4);
  const MolGraph o = parse_smiles("C[O-]");
  EXPECT_EQ(o.atom(1).formal_charge, -1);
}

TEST(ParseSmiles, StereoIsAnnotationOnly) {
  const MolGraph g = parse_smiles("F/C=C/F");
  EXPECT_EQ(g.bond(0).stereo, BondStereo::Up);
  EXPECT_EQ(canonical_smiles("F/C=C/F"), canonical_smiles("FC=CF"));
  EXPECT_EQ(canonical_smiles("F/C=C\\F"), canonical_smiles("FC=CF"));
  const MolGraph c = parse_smiles("N[C@@H](C)O");
  EXPECT_EQ(c.atom(1).chirality, "@@");
  EXPECT_EQ(canonical_smiles("N[C@@H](C)O"), canonical_smiles("NC(C)O"));
}

TEST(ParseSmiles, AromaticRing) {
  const MolGraph g = parse_smiles("c1ccncc1");
  EXPECT_EQ(g.num_bonds(), 6);
  EXPECT_EQ(g.bond(0).order, BondOrder::Aromatic);
  EXPECT_EQ(g.atom(0).total_h(), 1);
  EXPECT_EQ(g.atom(3).total_h(), 0);
}

TEST(WriteSmiles, Examples) {
  EXPECT_EQ(write_smiles(parse_smiles("C1CC1"), 0), "C1CC1");
  EXPECT_EQ(write_smiles(parse_smiles("CCO"), 2), "OCC");
  EXPECT_EQ(write_smiles(parse_smiles("CC(=O)OCC"), 0), "CC(=O)OCC");
  EXPECT_EQ(write_smiles(parse_smiles("C[N+](C)(C)C"), 0), "C[N+](C)(C)C");
}

TEST(WriteSmiles, DisconnectedGraphRejected) {
  MolGraph g;
  g.add_atom(Atom { .element = "C", .chirality = {} });
  g.add_atom(Atom { .element = "C", .chirality = {} });
  try {
    write_smiles(g, 0);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), Errc::DisconnectedGraph);
  }
}

TEST(WriteSmiles, RoundTripIsomorphicBruteForce) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + trial % 7;
    const MolGraph g = testing::random_molecule(rng, n, trial % 3);
    const MolGraph back = parse_smiles(write_smiles(g, 0));
    EXPECT_TRUE(testing::isomorphic_bruteforce(g, back));
    const int start = static_cast<int>(rng() % n);
    const MolGraph shuffled =
        parse_smiles(write_smiles_shuffled(g, start, rng()));
    EXPECT_TRUE(testing::isomorphic_bruteforce(g, shuffled));
  }
}

TEST(Canonicalize, SameMoleculeSameText) {
  EXPECT_EQ(canonical_smiles("OCC"), canonical_smiles("CCO"));
  EXPECT_EQ(canonical_smiles("C(C)O"), canonical_smiles("CCO"));
  EXPECT_EQ(canonical_smiles("CCO"), "CCO");
  EXPECT_EQ(canonical_smiles("OC(=O)C"), canonical_smiles("CC(O)=O"));
  EXPECT_NE(canonical_smiles("CCO"), canonical_smiles("COC"));
}

TEST(Canonicalize, Idempotent) {
  for (const char *s: { "CCO", "C1CC1", "CC(=O)OCC", "c1ccncc1",
                        "CN1CCN(CC1)CCN(CCCC)CCCC", "C[N+](C)(C)CC[O-]" }) {
    const std::string c = canonical_smiles(s);
    EXPECT_EQ(canonical_smiles(c), c) << s;
  }
}

TEST(Canonicalize, AtomOrderIsBijectionMatchingText) {
  const MolGraph g = parse_smiles("OCC(=O)N1CCCC1");
  const CanonicalForm c = canonicalize(g);
  std::vector<int> sorted = c.atom_order;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < g.num_atoms(); ++i)
    EXPECT_EQ(sorted[i], i);
  const MolGraph back = parse_smiles(c.smiles);
  for (int k = 0; k < g.num_atoms(); ++k)
    EXPECT_EQ(back.atom(k).element, g.atom(c.atom_order[k]).element);
}

// Permuting atom indices never changes the canonical text, and the text is a
// complete invariant: equal text <=> isomorphic (checked exhaustively).
TEST(Canonicalize, PermutationInvarianceAndCompleteness) {
  std::mt19937_64 rng(5);
  std::vector<MolGraph> graphs;
  for (int trial = 0; trial < 80; ++trial) {
    const int n = 3 + trial % 6;
    MolGraph g = testing::random_molecule(rng, n, trial % 3);
    const std::string c = canonicalize(g).smiles;
    for (int k = 0; k < 5; ++k) {
      const auto perm = testing::random_permutation(rng, n);
      EXPECT_EQ(canonicalize(g.permuted(perm)).smiles, c);
    }
    graphs.push_back(std::move(g));
  }
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    for (std::size_t j = i + 1; j < graphs.size(); ++j) {
      if (graphs[i].num_atoms() != graphs[j].num_atoms())
        continue;
      const bool same_text = canonicalize(graphs[i]).smiles
                             == canonicalize(graphs[j]).smiles;
      EXPECT_EQ(same_text,
                testing::isomorphic_bruteforce(graphs[i], graphs[j]));
    }
  }
}

TEST(Canonicalize, SymmetricRegularGraphs) {
  // Refinement alone cannot split these; the tie-breaking search must.
  const std::string cube = "C12C3C4C1C5C2C3C45";
  const std::string prism = "C1CC2CCC12";
  for (const std::string &s: { cube, prism }) {
    const MolGraph g = parse_smiles(s);
    const std::string c = canonicalize(g).smiles;
    std::mt19937_64 rng(3);
    for (int k = 0; k < 10; ++k)
      EXPECT_EQ(canonicalize(g.permuted(
                    testing::random_permutation(rng, g.num_atoms())))
                    .smiles,
                c);
  }
}

TEST(ParseSmiles, FuzzNeverCrashes) {
  std::mt19937_64 rng(99);
  const std::string alphabet = "CNOPSFcnos()[]=#-+123456789%@/\\.HlBrx ";
  int parsed = 0;
  for (int trial = 0; trial < 20000; ++trial) {
    std::string s;
    const int len = 1 + static_cast<int>(rng() % 24);
    for (int i = 0; i < len; ++i) {
      if (trial % 4 == 0)
        s += static_cast<char>(rng() % 256);
      else
        s += alphabet[rng() % alphabet.size()];
    }
    try {
      const MolGraph g = parse_smiles(s);
      ++parsed;
      const std::string c = canonicalize(g).smiles;
      EXPECT_EQ(canonical_smiles(c), c) << s;
    } catch (const ParseError &e) {
      EXPECT_LE(e.offset(), s.size());
    }
  }
  EXPECT_GT(parsed, 0);
}

}  // namespace
}  // namespace lipidlm::chem
