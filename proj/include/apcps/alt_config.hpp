#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "apcps/model.hpp"
#include "apcps/std_semantics.hpp"

namespace apcps {

enum class CacheSort : std::uint8_t { Term, Mixed, NonTerm };

/// Invariants: Term holds no non-terminal, Mixed holds at least one, NonTerm
/// is never empty (the empty cache is Term).
struct Cache {
  CacheSort sort = CacheSort::Term;
  SymbolBag items;

  static Cache from(SymbolBag m) {
    Cache c;
    c.sort = m.any_of([](const Symbol& s) { return s.is_nonterminal(); }) ? CacheSort::Mixed : CacheSort::Term;
    c.items = std::move(m);
    return c;
  }
  static Cache nonterm(SymbolBag m) {
    Cache c;
    c.sort = m.empty() ? CacheSort::Term : CacheSort::NonTerm;
    c.items = std::move(m);
    return c;
  }

  bool has_nonterminal() const {
    return items.any_of([](const Symbol& s) { return s.is_nonterminal(); });
  }
  bool well_sorted() const {
    switch (sort) {
      case CacheSort::Term:
        return !has_nonterminal();
      case CacheSort::Mixed:
        return has_nonterminal();
      case CacheSort::NonTerm:
        return !items.empty() &&
               !items.any_of([](const Symbol& s) { return !s.is_nonterminal() && !s.is_label(); });
    }
    return false;
  }

  std::size_t hash() const {
    std::size_t h = static_cast<std::size_t>(sort);
    hash_combine(h, items.hash());
    return h;
  }

  friend bool operator==(const Cache&, const Cache&) = default;
  friend auto operator<=>(const Cache&, const Cache&) = default;
};

enum class HeadKind : std::uint8_t { NT, ActNT, Act, Delayed };

/// NT uses `nt`; ActNT uses `act` and `nt`; Act uses `act`; Delayed uses neither.
struct Head {
  HeadKind kind = HeadKind::NT;
  Symbol act{};
  NtId nt = 0;
  Cache cache;

  static Head nonterminal(NtId a, Cache m = {}) { return {HeadKind::NT, Symbol{}, a, std::move(m)}; }
  static Head act_nt(Symbol a, NtId b, Cache m = {}) { return {HeadKind::ActNT, a, b, std::move(m)}; }
  static Head action(Symbol a, Cache m = {}) { return {HeadKind::Act, a, 0, std::move(m)}; }
  static Head delayed(Cache m = {}) { return {HeadKind::Delayed, Symbol{}, 0, std::move(m)}; }

  std::size_t hash() const {
    std::size_t h = static_cast<std::size_t>(kind);
    hash_combine(h, std::hash<Symbol>{}(act));
    hash_combine(h, nt);
    hash_combine(h, cache.hash());
    return h;
  }

  friend bool operator==(const Head&, const Head&) = default;
  friend auto operator<=>(const Head&, const Head&) = default;
};

struct Frame {
  NtId nt = 0;
  Cache cache;

  friend bool operator==(const Frame&, const Frame&) = default;
  friend auto operator<=>(const Frame&, const Frame&) = default;
};

/// stack[0] is the frame directly below the head.
struct AltControl {
  Head head;
  std::vector<Frame> stack;

  std::size_t hash() const {
    std::size_t h = head.hash();
    for (const auto& f : stack) {
      hash_combine(h, f.nt);
      hash_combine(h, f.cache.hash());
    }
    return h;
  }

  friend bool operator==(const AltControl&, const AltControl&) = default;
  friend auto operator<=>(const AltControl&, const AltControl&) = default;
};

struct AltConfig {
  std::vector<AltControl> procs;  // sorted
  Channels chans;

  void normalize() { std::sort(procs.begin(), procs.end()); }

  std::size_t hash() const {
    std::size_t h = hash_channels(chans);
    for (const auto& p : procs) hash_combine(h, p.hash());
    return h;
  }

  friend bool operator==(const AltConfig&, const AltConfig&) = default;
  friend auto operator<=>(const AltConfig&, const AltConfig&) = default;
};

inline std::string show(const ApcpsSpec& spec, const SymbolBag& m) {
  std::string out = "{";
  bool first = true;
  for (const auto& [x, n] : m) {
    for (std::uint32_t i = 0; i < n; ++i) {
      if (!first) out += ",";
      out += spec.show(x);
      first = false;
    }
  }
  return out + "}";
}

inline std::string show(const ApcpsSpec& spec, const Cache& c) {
  static const char* sorts[] = {"T", "M", "N"};
  return show(spec, c.items) + ":" + sorts[static_cast<int>(c.sort)];
}

inline std::string show(const ApcpsSpec& spec, const AltControl& g) {
  std::string out;
  const auto& h = g.head;
  switch (h.kind) {
    case HeadKind::NT:
      out = "NT(" + spec.nonterminals.at(h.nt) + "," + show(spec, h.cache) + ")";
      break;
    case HeadKind::ActNT:
      out = "ActNT(" + spec.show(h.act) + "," + spec.nonterminals.at(h.nt) + "," + show(spec, h.cache) + ")";
      break;
    case HeadKind::Act:
      out = "Act(" + spec.show(h.act) + "," + show(spec, h.cache) + ")";
      break;
    case HeadKind::Delayed:
      out = "Delayed(" + show(spec, h.cache) + ")";
      break;
  }
  for (const auto& f : g.stack) out += " (" + spec.nonterminals.at(f.nt) + "," + show(spec, f.cache) + ")";
  return "<" + out + ">";
}

inline std::string show(const ApcpsSpec& spec, const Channels& ch) {
  std::string out;
  for (std::size_t c = 0; c < ch.size(); ++c) {
    if (ch[c].empty()) continue;
    if (!out.empty()) out += " ";
    out += spec.channels.at(c) + ":{";
    bool first = true;
    for (const auto& [m, n] : ch[c])
      for (std::uint32_t i = 0; i < n; ++i) {
        if (!first) out += ",";
        out += spec.messages.at(m);
        first = false;
      }
    out += "}";
  }
  return out.empty() ? "{}" : out;
}

inline std::string show(const ApcpsSpec& spec, const AltConfig& c) {
  std::string out;
  for (std::size_t i = 0; i < c.procs.size(); ++i) out += (i ? " || " : "") + show(spec, c.procs[i]);
  if (c.procs.empty()) out = "<>";
  return out + " <| " + show(spec, c.chans);
}

}  // namespace apcps
