#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "apcps/alt_config.hpp"
#include "apcps/matching.hpp"

namespace apcps {

/// Injective embedding of occurrence lists: each element of m1 goes to a
/// distinct element of m2 that is leq-above it.
template <typename T, typename Leq>
bool multiset_embeds(Leq&& leq, const std::vector<T>& m1, const std::vector<T>& m2) {
  return perfect_left_matching(m1.size(), m2.size(), [&](std::size_t i, std::size_t j) { return leq(m1[i], m2[j]); });
}

template <typename T, typename Leq>
bool multiset_embeds(Leq&& leq, const Multiset<T>& m1, const Multiset<T>& m2) {
  auto expand = [](const Multiset<T>& m) {
    std::vector<T> out;
    for (const auto& [x, n] : m)
      for (std::uint32_t i = 0; i < n; ++i) out.push_back(x);
    return out;
  };
  return multiset_embeds(std::forward<Leq>(leq), expand(m1), expand(m2));
}

inline bool leq_cache(const Cache& a, const Cache& b) { return a.sort == b.sort && a.items.included_in(b.items); }

inline bool leq_head(const Head& a, const Head& b) {
  return a.kind == b.kind && a.act == b.act && a.nt == b.nt && leq_cache(a.cache, b.cache);
}

/// Same head shape and symbols, equal spines, caches pointwise included.
inline bool leq_control(const AltControl& a, const AltControl& b) {
  if (a.stack.size() != b.stack.size() || !leq_head(a.head, b.head)) return false;
  for (std::size_t i = 0; i < a.stack.size(); ++i)
    if (a.stack[i].nt != b.stack[i].nt || !leq_cache(a.stack[i].cache, b.stack[i].cache)) return false;
  return true;
}
inline bool leq_control(std::size_t /*k*/, const AltControl& a, const AltControl& b) { return leq_control(a, b); }

inline bool leq_channels(const Channels& a, const Channels& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t c = 0; c < a.size(); ++c)
    if (!a[c].included_in(b[c])) return false;
  return true;
}

inline bool leq_config(const AltConfig& a, const AltConfig& b) {
  if (a.procs.size() > b.procs.size() || !leq_channels(a.chans, b.chans)) return false;
  return multiset_embeds([](const AltControl& x, const AltControl& y) { return leq_control(x, y); }, a.procs,
                         b.procs);
}
inline bool leq_config(std::size_t /*k*/, const AltConfig& a, const AltConfig& b) { return leq_config(a, b); }

/// Antichain of minimal elements representing an upward-closed set.
struct Basis {
  std::vector<AltConfig> elements;

  bool covers(const AltConfig& x) const {
    return std::any_of(elements.begin(), elements.end(), [&](const AltConfig& b) { return leq_config(b, x); });
  }
};

inline Basis basis_insert(Basis b, const AltConfig& x) {
  if (b.covers(x)) return b;
  std::erase_if(b.elements, [&](const AltConfig& e) { return leq_config(x, e); });
  b.elements.push_back(x);
  return b;
}

}  // namespace apcps
