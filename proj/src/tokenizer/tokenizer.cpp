//
// Project LipidLM - Copyright 2026 The LipidLM Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "lipidlm/tokenizer/tokenizer.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "lipidlm/chem/smiles.hpp"
#include "lipidlm/error.hpp"

namespace lipidlm::tok {
namespace {

const std::array<std::string, kNumSpecial> kSpecialNames {
  "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"
};

EncodedInput blank(int max_len) {
  EncodedInput e;
  e.ids.assign(max_len, kPad);
  e.attention_mask.assign(max_len, 0);
  e.segment_ids.assign(max_len, 0);
  e.atom_alignment.assign(max_len, -1);
  e.head_tail.assign(max_len, kIgnore);
  e.conn_token.assign(max_len, kIgnore);
  return e;
}

// Writes s starting at `pos` and aligns its atoms to ordinals from
// `first_atom`. Returns the number of atoms.
int place(EncodedInput &e, std::string_view s, int pos, int segment,
          int first_atom, const Vocab &vocab) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    const int id = vocab.id(s[i]);
    e.n_unknown += id == kUnk ? 1 : 0;
    e.ids[pos + i] = id;
    e.segment_ids[pos + i] = segment;
  }
  const chem::MolGraph g = chem::parse_smiles(s);
  for (int a = 0; a < g.num_atoms(); ++a)
    e.atom_alignment[pos + g.source_offset(a)] = first_atom + a;
  return g.num_atoms();
}

void finish(EncodedInput &e) {
  for (int i = 0; i < e.length; ++i)
    e.attention_mask[i] = 1;
}

}  // namespace

Vocab::Vocab(): Vocab(std::span<const char> {}) { }

Vocab::Vocab(std::span<const char> chars) {
  char_ids_.fill(kUnk);
  tokens_.assign(kSpecialNames.begin(), kSpecialNames.end());
  for (char c: chars) {
    if (char_ids_[static_cast<unsigned char>(c)] != kUnk)
      throw Error(Errc::InvalidArgument,
                  std::string("duplicate vocabulary character '") + c + "'");
    char_ids_[static_cast<unsigned char>(c)] = static_cast<int>(tokens_.size());
    tokens_.emplace_back(1, c);
  }
}

nlohmann::ordered_json Vocab::to_json() const {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < tokens_.size(); ++i)
    j[tokens_[i]] = i;
  return j;
}

Vocab Vocab::from_json(const nlohmann::json &j) {
  if (!j.is_object())
    throw Error(Errc::IoFailure, "vocabulary must be a JSON object");
  std::vector<std::string> by_id(j.size());
  for (const auto &[tok, val]: j.items()) {
    if (!val.is_number_integer())
      throw Error(Errc::IoFailure, "vocabulary id for '" + tok + "' is not an integer");
    const auto id = val.get<long>();
    if (id < 0 || id >= static_cast<long>(by_id.size()) || !by_id[id].empty())
      throw Error(Errc::IoFailure, "vocabulary ids must be a permutation of 0..n-1");
    by_id[id] = tok;
  }
  if (by_id.size() < kNumSpecial)
    throw Error(Errc::IoFailure, "vocabulary is missing special tokens");
  for (int i = 0; i < kNumSpecial; ++i)
    if (by_id[i] != kSpecialNames[i])
      throw Error(Errc::IoFailure, "special token " + kSpecialNames[i]
                                       + " must have id " + std::to_string(i));
  std::vector<char> chars;
  for (std::size_t i = kNumSpecial; i < by_id.size(); ++i) {
    if (by_id[i].size() != 1)
      throw Error(Errc::IoFailure, "vocabulary token '" + by_id[i]
                                       + "' is not a single character");
    chars.push_back(by_id[i][0]);
  }
  return Vocab(chars);
}

void Vocab::save(const std::filesystem::path &path) const {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  out << to_json().dump(2) << '\n';
  if (!out)
    throw Error(Errc::IoFailure, "cannot write vocabulary to " + path.string());
}

Vocab Vocab::load(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw Error(Errc::IoFailure, "cannot open vocabulary " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception &e) {
    throw Error(Errc::IoFailure, path.string() + ": " + e.what());
  }
}

Vocab build_vocab(std::span<const std::string> smiles) {
  if (smiles.empty())
    throw Error(Errc::EmptyCorpus, "cannot build a vocabulary from an empty corpus");
  std::set<char> seen;
  for (const auto &s: smiles)
    seen.insert(s.begin(), s.end());
  const std::vector<char> chars(seen.begin(), seen.end());
  return Vocab(chars);
}

EncodedInput encode_single(std::string_view s, const Vocab &vocab, int max_len,
                           const AtomLabels *labels) {
  if (static_cast<long>(s.size()) > max_len - 2)
    throw Error(Errc::TooLong, "SMILES of length " + std::to_string(s.size())
                                   + " does not fit max_len "
                                   + std::to_string(max_len));
  EncodedInput e = blank(max_len);
  e.ids[0] = kCls;
  e.n_atoms = place(e, s, 1, 0, 0, vocab);
  e.ids[s.size() + 1] = kSep;
  e.length = static_cast<int>(s.size()) + 2;
  finish(e);

  if (labels != nullptr) {
    if (!labels->regions.empty()
        && static_cast<int>(labels->regions.size()) != e.n_atoms)
      throw Error(Errc::ShapeMismatch, "atom label count does not match atoms in '"
                                           + std::string(s) + "'");
    for (int p = 1; p <= static_cast<int>(s.size()); ++p) {
      const int atom = e.atom_alignment[p];
      if (!labels->regions.empty())
        e.head_tail[p] = atom < 0 ? kOtherClass
                         : labels->regions[atom] == Region::Head ? kHeadClass
                                                                 : kTailClass;
      if (labels->connecting_atom >= 0 && atom >= 0)
        e.conn_token[p] = atom == labels->connecting_atom ? 1 : 0;
    }
  }
  return e;
}

EncodedInput encode_pair(std::string_view a, std::string_view b,
                         const Vocab &vocab, int max_len, int label) {
  if (static_cast<long>(a.size() + b.size()) > max_len - 3)
    throw Error(Errc::TooLong, "pair of combined length "
                                   + std::to_string(a.size() + b.size())
                                   + " does not fit max_len "
                                   + std::to_string(max_len));
  EncodedInput e = blank(max_len);
  const int na = static_cast<int>(a.size());
  const int nb = static_cast<int>(b.size());
  e.ids[0] = kCls;
  e.n_atoms = place(e, a, 1, 0, 0, vocab);
  e.ids[na + 1] = kSep;
  e.n_atoms += place(e, b, na + 2, 1, e.n_atoms, vocab);
  e.ids[na + nb + 2] = kSep;
  e.segment_ids[na + nb + 2] = 1;
  e.length = na + nb + 3;
  e.pair = label;
  finish(e);
  return e;
}

std::string decode(std::span<const int> ids, const Vocab &vocab,
                   bool strip_specials) {
  std::string out;
  for (int id: ids) {
    if (strip_specials && vocab.is_special(id))
      continue;
    out += vocab.token(id);
  }
  return out;
}

}  // namespace lipidlm::tok
