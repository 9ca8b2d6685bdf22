#pragma once

#include <compare>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "apcps/model.hpp"

namespace apcps {

/// A word modulo the independence congruence: a leading block of commutative
/// symbols followed by (non-commutative symbol, block) pairs. Because every
/// non-commutative symbol is dependent on everything, blocks are exactly the
/// maximal commutative segments and their order is irrelevant.
struct CanonicalWord {
  SymbolBag lead;
  std::vector<std::pair<Symbol, SymbolBag>> spine;

  bool empty() const { return lead.empty() && spine.empty(); }

  std::size_t hash() const {
    std::size_t h = lead.hash();
    for (const auto& [s, b] : spine) {
      hash_combine(h, std::hash<Symbol>{}(s));
      hash_combine(h, b.hash());
    }
    return h;
  }

  /// One representative word, blocks listed in element order.
  std::vector<Symbol> linearize() const {
    std::vector<Symbol> out;
    auto dump = [&](const SymbolBag& b) {
      for (const auto& [x, n] : b)
        for (std::uint32_t i = 0; i < n; ++i) out.push_back(x);
    };
    dump(lead);
    for (const auto& [s, b] : spine) {
      out.push_back(s);
      dump(b);
    }
    return out;
  }

  friend bool operator==(const CanonicalWord&, const CanonicalWord&) = default;
  friend auto operator<=>(const CanonicalWord&, const CanonicalWord&) = default;
};

/// Appends symbols left to right.
inline void append(const Classification& cl, CanonicalWord& w, const Symbol& s) {
  if (!cl.declared(s)) throw ModelError("unknown symbol");
  if (cl.is_commutative(s)) {
    if (w.spine.empty()) w.lead.add(s);
    else w.spine.back().second.add(s);
  } else {
    w.spine.emplace_back(s, SymbolBag{});
  }
}

inline CanonicalWord canon(const Classification& cl, std::span<const Symbol> word) {
  CanonicalWord w;
  for (const auto& s : word) append(cl, w, s);
  return w;
}

/// canon(u v) from canon(u) and canon(v).
inline CanonicalWord concat(CanonicalWord u, const CanonicalWord& v) {
  if (u.spine.empty()) u.lead += v.lead;
  else u.spine.back().second += v.lead;
  u.spine.insert(u.spine.end(), v.spine.begin(), v.spine.end());
  return u;
}

}  // namespace apcps
