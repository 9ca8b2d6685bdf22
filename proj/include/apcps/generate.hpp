#pragma once

#include <random>
#include <string>

#include "apcps/model.hpp"

namespace apcps {

struct RandomSpecParams {
  std::size_t max_nonterminals = 4;
  std::size_t max_channels = 2;
  std::size_t max_messages = 2;
  std::size_t max_labels = 2;
  std::size_t max_rules_per_nt = 2;
};

/// Uniform-ish random spec; every non-terminal gets at least one rule so the
/// result always validates.
inline ApcpsSpec random_spec(std::mt19937& rng, const RandomSpecParams& p = {}) {
  auto pick = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  ApcpsSpec s;
  const auto nN = pick(1, p.max_nonterminals);
  const auto nC = pick(1, p.max_channels);
  const auto nM = pick(1, p.max_messages);
  const auto nL = pick(1, p.max_labels);
  for (std::size_t i = 0; i < nN; ++i) s.nonterminals.push_back("N" + std::to_string(i));
  for (std::size_t i = 0; i < nC; ++i) s.channels.push_back("c" + std::to_string(i));
  for (std::size_t i = 0; i < nM; ++i) s.messages.push_back("m" + std::to_string(i));
  for (std::size_t i = 0; i < nL; ++i) s.labels.push_back("l" + std::to_string(i));
  s.start_name = "N0";
  s.start = 0;

  auto nt = [&] { return static_cast<NtId>(pick(0, nN - 1)); };
  auto action = [&]() -> Action {
    switch (pick(0, 3)) {
      case 0:
        return Symbol::send(static_cast<ChanId>(pick(0, nC - 1)), static_cast<MsgId>(pick(0, nM - 1)));
      case 1:
        return Symbol::recv(static_cast<ChanId>(pick(0, nC - 1)), static_cast<MsgId>(pick(0, nM - 1)));
      case 2:
        return Symbol::spawn(nt());
      default:
        return Symbol::label(static_cast<LabelId>(pick(0, nL - 1)));
    }
  };
  for (NtId a = 0; a < nN; ++a) {
    const auto n = pick(1, p.max_rules_per_nt);
    for (std::size_t j = 0; j < n; ++j) {
      switch (pick(0, 4)) {
        case 0:
          s.rules.push_back(Rule::eps(a));
          break;
        case 1:
          s.rules.push_back(Rule::simple(a, action()));
          break;
        case 2:
        case 3:
          s.rules.push_back(Rule::tail(a, action(), nt()));
          break;
        default:
          s.rules.push_back(Rule::call(a, nt(), nt()));
          break;
      }
    }
  }
  return s;
}

/// Spec in the input format; parse_spec(to_source(s)) reproduces s up to
/// declaration order of non-terminals.
inline std::string to_source(const ApcpsSpec& s) {
  std::string out;
  auto decl = [&](const char* kw, const std::vector<std::string>& names) {
    if (names.empty()) return;
    out += kw;
    for (const auto& n : names) out += " " + n;
    out += "\n";
  };
  decl("channels", s.channels);
  decl("messages", s.messages);
  decl("labels", s.labels);
  out += "start " + s.start_name + "\n";
  auto sym = [&](const Symbol& x) -> std::string {
    switch (x.kind) {
      case SymbolKind::NonTerminal: return s.nonterminals.at(x.a);
      case SymbolKind::Send: return "send " + s.channels.at(x.a) + " " + s.messages.at(x.b);
      case SymbolKind::Recv: return "recv " + s.channels.at(x.a) + " " + s.messages.at(x.b);
      case SymbolKind::Spawn: return "spawn " + s.nonterminals.at(x.a);
      case SymbolKind::Label: return "label " + s.labels.at(x.a);
    }
    return {};
  };
  for (const auto& r : s.rules) {
    out += "rule " + s.nonterminals.at(r.lhs) + " ->";
    auto rhs = r.rhs();
    if (rhs.empty()) out += " eps";
    for (const auto& x : rhs) out += " " + sym(x);
    out += "\n";
  }
  return out;
}

}  // namespace apcps
