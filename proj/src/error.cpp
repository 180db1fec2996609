//
// Project LipidLM - Copyright 2026 The LipidLM Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "lipidlm/error.hpp"

namespace lipidlm {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
  case Errc::EmptyInput: return "EmptyInput";
  case Errc::UnbalancedParenthesis: return "UnbalancedParenthesis";
  case Errc::UnclosedRingBond: return "UnclosedRingBond";
  case Errc::UnknownElement: return "UnknownElement";
  case Errc::ValenceViolation: return "ValenceViolation";
  case Errc::UnexpectedCharacter: return "UnexpectedCharacter";
  case Errc::InvalidBond: return "InvalidBond";
  case Errc::DisconnectedGraph: return "DisconnectedGraph";
  case Errc::InvalidArgument: return "InvalidArgument";
  case Errc::NoConnectingAtom: return "NoConnectingAtom";
  case Errc::AmbiguousConnectingAtom: return "AmbiguousConnectingAtom";
  case Errc::MissingProvenance: return "MissingProvenance";
  case Errc::ExhaustedRetries: return "ExhaustedRetries";
  case Errc::NoValidDecoy: return "NoValidDecoy";
  case Errc::GenerationBudgetExceeded: return "GenerationBudgetExceeded";
  case Errc::IoFailure: return "IoFailure";
  case Errc::EmptyCorpus: return "EmptyCorpus";
  case Errc::TooLong: return "TooLong";
  case Errc::ShapeMismatch: return "ShapeMismatch";
  case Errc::NoSelectedTokens: return "NoSelectedTokens";
  case Errc::VersionMismatch: return "VersionMismatch";
  case Errc::ChecksumMismatch: return "ChecksumMismatch";
  case Errc::LabelOutOfRange: return "LabelOutOfRange";
  case Errc::NonFiniteGradient: return "NonFiniteGradient";
  case Errc::IncompatibleCheckpoint: return "IncompatibleCheckpoint";
  case Errc::EmptyDataset: return "EmptyDataset";
  case Errc::DegenerateTarget: return "DegenerateTarget";
  case Errc::DegenerateInput: return "DegenerateInput";
  case Errc::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace lipidlm
