#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>

#include "apcps/multiset.hpp"

namespace apcps {

using NtId = std::uint32_t;
using ChanId = std::uint32_t;
using MsgId = std::uint32_t;
using LabelId = std::uint32_t;

enum class SymbolKind : std::uint8_t { NonTerminal, Send, Recv, Spawn, Label };

/// A grammar symbol: a non-terminal or one of the four action kinds.
/// Field meaning by kind: NonTerminal/Spawn use `a` as the non-terminal,
/// Send/Recv use (`a`, `b`) as (channel, message), Label uses `a`.
struct Symbol {
  SymbolKind kind = SymbolKind::NonTerminal;
  std::uint32_t a = 0;
  std::uint32_t b = 0;

  static constexpr Symbol nonterminal(NtId x) { return {SymbolKind::NonTerminal, x, 0}; }
  static constexpr Symbol send(ChanId c, MsgId m) { return {SymbolKind::Send, c, m}; }
  static constexpr Symbol recv(ChanId c, MsgId m) { return {SymbolKind::Recv, c, m}; }
  static constexpr Symbol spawn(NtId x) { return {SymbolKind::Spawn, x, 0}; }
  static constexpr Symbol label(LabelId l) { return {SymbolKind::Label, l, 0}; }

  constexpr bool is_nonterminal() const { return kind == SymbolKind::NonTerminal; }
  constexpr bool is_terminal() const { return kind != SymbolKind::NonTerminal; }
  constexpr bool is_recv() const { return kind == SymbolKind::Recv; }
  constexpr bool is_label() const { return kind == SymbolKind::Label; }

  friend constexpr bool operator==(const Symbol&, const Symbol&) = default;
  friend constexpr auto operator<=>(const Symbol&, const Symbol&) = default;
};

/// Actions are the terminal symbols.
using Action = Symbol;

using SymbolBag = Multiset<Symbol>;

}  // namespace apcps

template <>
struct std::hash<apcps::Symbol> {
  std::size_t operator()(const apcps::Symbol& s) const noexcept {
    return (static_cast<std::size_t>(s.kind) << 56) ^ (static_cast<std::size_t>(s.a) << 24) ^ s.b;
  }
};
