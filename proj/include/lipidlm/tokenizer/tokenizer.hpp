//
// Project LipidLM - Copyright 2026 The LipidLM Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lipidlm/corpus/record.hpp"

namespace lipidlm::tok {

inline constexpr int kPad = 0;
inline constexpr int kUnk = 1;
inline constexpr int kCls = 2;
inline constexpr int kSep = 3;
inline constexpr int kMask = 4;
inline constexpr int kNumSpecial = 5;

/// Label value excluded from every loss and metric.
inline constexpr int kIgnore = -100;

inline constexpr int kSingleLength = 128;
inline constexpr int kPairLength = 256;

/// Per-token head/tail classes.
inline constexpr int kHeadClass = 0;
inline constexpr int kTailClass = 1;
inline constexpr int kOtherClass = 2;

class Vocab {
public:
  Vocab();

  /// Specials followed by `chars` in the given order.
  explicit Vocab(std::span<const char> chars);

  int size() const { return static_cast<int>(tokens_.size()); }
  const std::string &token(int id) const { return tokens_.at(id); }

  /// Id of a single character, or kUnk.
  int id(char c) const { return char_ids_[static_cast<unsigned char>(c)]; }

  bool is_special(int id) const { return id < kNumSpecial; }

  nlohmann::ordered_json to_json() const;
  static Vocab from_json(const nlohmann::json &j);

  void save(const std::filesystem::path &path) const;
  static Vocab load(const std::filesystem::path &path);

  bool operator==(const Vocab &o) const { return tokens_ == o.tokens_; }

private:
  std::vector<std::string> tokens_;
  std::array<int, 256> char_ids_;
};

/// Specials plus the sorted distinct characters of `smiles`.
/// Throws Error(EmptyCorpus).
Vocab build_vocab(std::span<const std::string> smiles);

/// Atom-level supervision carried into token positions.
struct AtomLabels {
  std::vector<Region> regions;
  int connecting_atom = -1;
};

struct EncodedInput {
  std::vector<int> ids;
  std::vector<int> attention_mask;
  std::vector<int> segment_ids;
  /// Atom ordinal per position, -1 for non-atom positions.
  std::vector<int> atom_alignment;
  /// Number of non-pad positions.
  int length = 0;
  int n_atoms = 0;
  /// Characters mapped to [UNK].
  int n_unknown = 0;

  // Token-level labels, kIgnore where not applicable.
  std::vector<int> head_tail;
  std::vector<int> conn_token;

  // Sequence-level labels, kIgnore when absent.
  int n_tails_class = kIgnore;
  int conn_seq = kIgnore;
  int pair = kIgnore;
  double target = 0.0;
  bool has_target = false;

  int max_len() const { return static_cast<int>(ids.size()); }
};

/// [CLS] s [SEP] [PAD]... of length L. With `labels`, head_tail gets the atom
/// region on atom tokens and kOtherClass on other characters; conn_token is 1
/// on the connecting atom's token and 0 on other atom tokens.
/// Throws Error(TooLong) when s does not fit, ParseError for invalid SMILES.
EncodedInput encode_single(std::string_view s, const Vocab &vocab,
                           int max_len = kSingleLength,
                           const AtomLabels *labels = nullptr);

/// [CLS] a [SEP] b [SEP] [PAD]... with segment 1 over b and its [SEP]. Atoms of
/// b are numbered after those of a.
EncodedInput encode_pair(std::string_view a, std::string_view b,
                         const Vocab &vocab, int max_len = kPairLength,
                         int label = kIgnore);

/// Concatenated token text; specials are dropped when strip_specials is set.
std::string decode(std::span<const int> ids, const Vocab &vocab,
                   bool strip_specials = true);

}  // namespace lipidlm::tok
