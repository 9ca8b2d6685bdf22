#pragma once

#include <cstddef>
#include <vector>

#include "apcps/alt_config.hpp"
#include "apcps/matching.hpp"
#include "apcps/std_semantics.hpp"

namespace apcps {

/// Every alternative control that can stand for the standard process word w.
/// A word alpha_0 X_1 alpha_1 ... is read with each commutative block as a cache
/// and the non-commutative spine as the stack; the leading block admits several
/// head readings because the split between head and cache is not recorded in
/// the word. Throws when w is not of the shaped form.
inline std::vector<AltControl> abstract_process(const Classification& cl, const CanonicalWord& w) {
  std::vector<AltControl> out;
  auto frames_from = [&](std::size_t first) {
    std::vector<Frame> st;
    for (std::size_t i = first; i < w.spine.size(); ++i) {
      const auto& [x, blk] = w.spine[i];
      if (!x.is_nonterminal() || cl.is_commutative(x)) throw ModelError("process word not in shaped form");
      st.push_back(Frame{x.a, Cache::from(blk)});
    }
    return st;
  };
  auto only_nt_or_label = [](const SymbolBag& m) {
    return !m.any_of([](const Symbol& s) { return !s.is_nonterminal() && !s.is_label(); });
  };

  if (!w.lead.empty()) {
    const auto st = frames_from(0);
    const auto& b0 = w.lead;
    for (const auto& [x, n] : b0) {
      SymbolBag rest = b0;
      rest.remove(x);
      if (x.is_nonterminal()) {
        out.push_back(AltControl{Head::nonterminal(x.a, Cache::from(rest)), st});
      } else {
        out.push_back(AltControl{Head::action(x, Cache::from(rest)), st});
        for (const auto& [y, m] : rest) {
          if (!y.is_nonterminal()) continue;
          SymbolBag r2 = rest;
          r2.remove(y);
          out.push_back(AltControl{Head::act_nt(x, y.a, Cache::from(r2)), st});
        }
      }
    }
    out.push_back(AltControl{Head::delayed(Cache::from(b0)), st});
    if (only_nt_or_label(b0)) out.push_back(AltControl{Head::delayed(Cache::nonterm(b0)), st});
  } else if (!w.spine.empty()) {
    const auto& [s1, b1] = w.spine.front();
    if (s1.is_nonterminal()) {
      const auto st = frames_from(1);
      out.push_back(AltControl{Head::nonterminal(s1.a, Cache::from(b1)), st});
      out.push_back(AltControl{Head::delayed(), frames_from(0)});
    } else {
      const auto st = frames_from(1);
      out.push_back(AltControl{Head::action(s1, Cache::from(b1)), st});
      for (const auto& [y, m] : b1) {
        if (!y.is_nonterminal()) continue;
        SymbolBag r = b1;
        r.remove(y);
        out.push_back(AltControl{Head::act_nt(s1, y.a, Cache::from(r)), st});
      }
      if (b1.empty() && w.spine.size() > 1) {
        const auto& [s2, b2] = w.spine[1];
        if (s2.is_nonterminal() && !cl.is_commutative(s2))
          out.push_back(AltControl{Head::act_nt(s1, s2.a, Cache::from(b2)), frames_from(2)});
      }
    }
  } else {
    out.push_back(AltControl{Head::delayed(), {}});
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// All readings of a standard configuration (product of per-process readings).
inline std::vector<AltConfig> abstract_config(const Classification& cl, const StdConfig& c) {
  std::vector<std::vector<AltControl>> per;
  for (const auto& w : c.procs) per.push_back(abstract_process(cl, w));
  std::vector<AltConfig> out{AltConfig{{}, c.chans}};
  for (const auto& options : per) {
    std::vector<AltConfig> next;
    for (const auto& base : out)
      for (const auto& g : options) {
        AltConfig n = base;
        n.procs.push_back(g);
        next.push_back(std::move(n));
      }
    out = std::move(next);
  }
  for (auto& a : out) a.normalize();
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// True iff `a` is one of the readings of `c`, without enumerating the product.
inline bool is_reading_of(const Classification& cl, const AltConfig& a, const StdConfig& c) {
  if (a.chans != c.chans || a.procs.size() != c.procs.size()) return false;
  std::vector<std::vector<AltControl>> per;
  for (const auto& w : c.procs) per.push_back(abstract_process(cl, w));
  return perfect_left_matching(per.size(), a.procs.size(), [&](std::size_t i, std::size_t j) {
    return std::binary_search(per[i].begin(), per[i].end(), a.procs[j]);
  });
}

}  // namespace apcps
