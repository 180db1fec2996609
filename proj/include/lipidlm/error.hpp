//
// Project LipidLM - Copyright 2026 The LipidLM Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lipidlm {

/// Named failure kinds shared by every module. The CLI maps these onto exit
/// codes, so enumerators must not be reordered once persisted anywhere.
enum class Errc {
  // SMILES parsing
  EmptyInput,
  UnbalancedParenthesis,
  UnclosedRingBond,
  UnknownElement,
  ValenceViolation,
  UnexpectedCharacter,
  InvalidBond,
  // graph algorithms
  DisconnectedGraph,
  InvalidArgument,
  // lipid analysis
  NoConnectingAtom,
  AmbiguousConnectingAtom,
  MissingProvenance,
  ExhaustedRetries,
  NoValidDecoy,
  // corpus
  GenerationBudgetExceeded,
  IoFailure,
  // tokenizer
  EmptyCorpus,
  TooLong,
  // model
  ShapeMismatch,
  NoSelectedTokens,
  VersionMismatch,
  ChecksumMismatch,
  // training
  LabelOutOfRange,
  NonFiniteGradient,
  IncompatibleCheckpoint,
  EmptyDataset,
  DegenerateTarget,
  DegenerateInput,
  // configuration
  ConfigError,
};

std::string_view errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
public:
  Error(Errc code, const std::string &what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what),
        code_(code) { }

  Errc code() const noexcept { return code_; }

private:
  Errc code_;
};

/// Parse failure pinned to a character offset of the input.
class ParseError : public Error {
public:
  ParseError(Errc code, std::size_t offset, const std::string &what)
      : Error(code, what + " at offset " + std::to_string(offset)),
        offset_(offset) { }

  std::size_t offset() const noexcept { return offset_; }

private:
  std::size_t offset_;
};

}  // namespace lipidlm
