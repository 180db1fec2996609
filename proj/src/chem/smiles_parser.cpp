//
// Project LipidLM - Copyright 2026 The LipidLM Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <cctype>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lipidlm/chem/smiles.hpp"
#include "lipidlm/error.hpp"

namespace lipidlm::chem {
namespace {

struct PendingBond {
  BondOrder order;
  BondStereo stereo;
  std::size_t offset;
};

struct RingOpening {
  int atom;
  std::optional<PendingBond> bond;
  std::size_t offset;
};

bool is_aromatic_symbol(std::string_view s) {
  return s == "b" || s == "c" || s == "n" || s == "o" || s == "p" || s == "s";
}

std::string capitalize(std::string_view s) {
  std::string out(s);
  out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
  return out;
}

class Parser {
public:
  explicit Parser(std::string_view text): text_(text) { }

  MolGraph run() {
    if (text_.empty())
      throw ParseError(Errc::EmptyInput, 0, "empty SMILES");

    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '[') {
        parse_bracket_atom();
      } else if (std::isalpha(static_cast<unsigned char>(c))) {
        parse_organic_atom();
      } else if (c == '-' || c == '=' || c == '#' || c == ':' || c == '/'
                 || c == '\\') {
        parse_bond_symbol();
      } else if (c == '(') {
        if (prev_ < 0)
          fail(Errc::UnexpectedCharacter, "branch before any atom");
        if (pending_)
          fail(Errc::UnexpectedCharacter, "bond symbol before branch");
        branches_.emplace_back(prev_, pos_);
        ++pos_;
      } else if (c == ')') {
        if (branches_.empty())
          fail(Errc::UnbalancedParenthesis, "unmatched ')'");
        if (pending_)
          fail(Errc::UnexpectedCharacter, "dangling bond symbol");
        prev_ = branches_.back().first;
        branches_.pop_back();
        ++pos_;
      } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '%') {
        parse_ring_bond();
      } else if (c == '.') {
        fail(Errc::UnexpectedCharacter,
             "multi-fragment SMILES are not supported");
      } else {
        fail(Errc::UnexpectedCharacter,
             std::string("unexpected character '") + c + "'");
      }
    }

    if (pending_)
      throw ParseError(Errc::UnexpectedCharacter, pending_->offset,
                       "dangling bond symbol");
    if (!branches_.empty())
      throw ParseError(Errc::UnbalancedParenthesis, branches_.front().second,
                       "unclosed '('");
    if (!rings_.empty()) {
      std::size_t first = text_.size();
      for (const auto &[digit, open]: rings_)
        first = std::min(first, open.offset);
      throw ParseError(Errc::UnclosedRingBond, first, "unclosed ring bond");
    }

    finish_valence();
    return std::move(graph_);
  }

private:
  [[noreturn]] void fail(Errc code, const std::string &what) const {
    throw ParseError(code, pos_, what);
  }

  void attach(int atom) {
    if (prev_ >= 0) {
      BondOrder order = BondOrder::Single;
      BondStereo stereo = BondStereo::None;
      if (pending_) {
        order = pending_->order;
        stereo = pending_->stereo;
      } else if (graph_.atom(prev_).aromatic && graph_.atom(atom).aromatic) {
        order = BondOrder::Aromatic;
      }
      graph_.add_bond(prev_, atom, order, stereo);
    }
    pending_.reset();
    prev_ = atom;
  }

  void parse_organic_atom() {
    const std::size_t start = pos_;
    std::string_view sym = text_.substr(pos_, 1);
    if (pos_ + 1 < text_.size()) {
      const std::string_view two = text_.substr(pos_, 2);
      if (two == "Cl" || two == "Br")
        sym = two;
    }

    Atom atom;
    if (is_aromatic_symbol(sym)) {
      atom.aromatic = true;
      atom.element = capitalize(sym);
    } else if (sym == "B" || sym == "C" || sym == "N" || sym == "O"
               || sym == "P" || sym == "S" || sym == "F" || sym == "Cl"
               || sym == "Br") {
      atom.element = std::string(sym);
    } else {
      fail(Errc::UnknownElement,
           "unknown element '" + std::string(sym) + "'");
    }
    pos_ += sym.size();
    attach(graph_.add_atom(std::move(atom), static_cast<int>(start)));
  }

  void parse_bracket_atom() {
    const std::size_t open = pos_;
    ++pos_;  // '['
    if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
      fail(Errc::UnexpectedCharacter, "isotopes are not supported");
    if (pos_ >= text_.size() || !std::isalpha(static_cast<unsigned char>(text_[pos_])))
      fail(Errc::UnexpectedCharacter, "expected element symbol");

    const std::size_t sym_offset = pos_;
    Atom atom;
    atom.bracket = true;
    std::string_view sym;
    if (std::islower(static_cast<unsigned char>(text_[pos_]))) {
      sym = text_.substr(pos_, 1);
      if (!is_aromatic_symbol(sym))
        fail(Errc::UnknownElement, "unknown element '" + std::string(sym) + "'");
      atom.aromatic = true;
      atom.element = capitalize(sym);
    } else {
      sym = text_.substr(pos_, 1);
      if (pos_ + 1 < text_.size()
          && std::islower(static_cast<unsigned char>(text_[pos_ + 1]))) {
        sym = text_.substr(pos_, 2);
      }
      if (!is_supported_element(sym))
        fail(Errc::UnknownElement, "unknown element '" + std::string(sym) + "'");
      atom.element = std::string(sym);
    }
    pos_ += sym.size();

    if (pos_ < text_.size() && text_[pos_] == '@') {
      atom.chirality = "@";
      ++pos_;
      if (pos_ < text_.size() && text_[pos_] == '@') {
        atom.chirality = "@@";
        ++pos_;
      }
    }
    if (pos_ < text_.size() && text_[pos_] == 'H') {
      ++pos_;
      atom.explicit_h = 1;
      if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
        atom.explicit_h = text_[pos_++] - '0';
    }
    if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) {
      const char sign = text_[pos_];
      int magnitude = 0;
      while (pos_ < text_.size() && text_[pos_] == sign) {
        ++magnitude;
        ++pos_;
      }
      if (magnitude == 1 && pos_ < text_.size()
          && std::isdigit(static_cast<unsigned char>(text_[pos_])))
        magnitude = text_[pos_++] - '0';
      atom.formal_charge = sign == '+' ? magnitude : -magnitude;
    }
    if (pos_ < text_.size() && text_[pos_] == ':') {
      ++pos_;
      if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_])))
        fail(Errc::UnexpectedCharacter, "expected atom class digits");
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
        ++pos_;
    }
    if (pos_ >= text_.size())
      throw ParseError(Errc::UnexpectedCharacter, open, "unclosed '['");
    if (text_[pos_] != ']')
      fail(Errc::UnexpectedCharacter, "expected ']'");
    ++pos_;
    attach(graph_.add_atom(std::move(atom), static_cast<int>(sym_offset)));
  }

  void parse_bond_symbol() {
    if (prev_ < 0)
      fail(Errc::UnexpectedCharacter, "bond before any atom");
    if (pending_)
      fail(Errc::UnexpectedCharacter, "consecutive bond symbols");
    PendingBond b { BondOrder::Single, BondStereo::None, pos_ };
    switch (text_[pos_]) {
    case '=': b.order = BondOrder::Double; break;
    case '#': b.order = BondOrder::Triple; break;
    case ':': b.order = BondOrder::Aromatic; break;
    case '/': b.stereo = BondStereo::Up; break;
    case '\\': b.stereo = BondStereo::Down; break;
    default: break;
    }
    pending_ = b;
    ++pos_;
  }

  void parse_ring_bond() {
    const std::size_t start = pos_;
    if (prev_ < 0)
      fail(Errc::UnexpectedCharacter, "ring bond before any atom");
    int digit;
    if (text_[pos_] == '%') {
      if (pos_ + 2 >= text_.size()
          || !std::isdigit(static_cast<unsigned char>(text_[pos_ + 1]))
          || !std::isdigit(static_cast<unsigned char>(text_[pos_ + 2])))
        fail(Errc::UnexpectedCharacter, "expected two digits after '%'");
      digit = (text_[pos_ + 1] - '0') * 10 + (text_[pos_ + 2] - '0');
      pos_ += 3;
    } else {
      digit = text_[pos_] - '0';
      ++pos_;
    }

    auto it = rings_.find(digit);
    if (it == rings_.end()) {
      rings_.emplace(digit, RingOpening { prev_, pending_, start });
      pending_.reset();
      return;
    }

    const RingOpening open = it->second;
    rings_.erase(it);
    BondOrder order = BondOrder::Single;
    BondStereo stereo = BondStereo::None;
    if (open.bond && pending_ && open.bond->order != pending_->order)
      throw ParseError(Errc::InvalidBond, start,
                       "conflicting ring-closure bond orders");
    if (pending_) {
      order = pending_->order;
      stereo = pending_->stereo;
    } else if (open.bond) {
      order = open.bond->order;
      stereo = open.bond->stereo;
    } else if (graph_.atom(open.atom).aromatic && graph_.atom(prev_).aromatic) {
      order = BondOrder::Aromatic;
    }
    if (open.atom == prev_ || graph_.bond_between(open.atom, prev_) >= 0)
      throw ParseError(Errc::InvalidBond, start,
                       "ring closure duplicates an existing bond");
    graph_.add_bond(open.atom, prev_, order, stereo);
    pending_.reset();
  }

  void finish_valence() {
    const auto in_ring = graph_.ring_atoms();
    for (int i = 0; i < graph_.num_atoms(); ++i) {
      if (graph_.atom(i).aromatic && !in_ring[i])
        throw ParseError(Errc::ValenceViolation,
                         static_cast<std::size_t>(graph_.source_offset(i)),
                         "aromatic atom outside a ring");
    }
    for (int i = 0; i < graph_.num_atoms(); ++i) {
      Atom &a = graph_.atom(i);
      const int heavy = graph_.heavy_valence(i);
      const auto allowed = allowed_valences(a.element, a.formal_charge);
      bool ok;
      if (a.bracket) {
        ok = !allowed.empty() && heavy + a.explicit_h <= allowed.back();
      } else {
        const int h = default_implicit_h(a, heavy);
        ok = h >= 0;
        if (ok)
          a.implicit_h = h;
      }
      if (!ok)
        throw ParseError(Errc::ValenceViolation,
                         static_cast<std::size_t>(graph_.source_offset(i)),
                         "valence exceeded for " + a.element);
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  MolGraph graph_;
  int prev_ = -1;
  std::optional<PendingBond> pending_;
  std::vector<std::pair<int, std::size_t>> branches_;
  std::map<int, RingOpening> rings_;
};

}  // namespace

MolGraph parse_smiles(std::string_view smiles) {
  return Parser(smiles).run();
}

}  // namespace lipidlm::chem
