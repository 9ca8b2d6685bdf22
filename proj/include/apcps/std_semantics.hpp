#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "apcps/canonical_word.hpp"
#include "apcps/explore.hpp"
#include "apcps/matching.hpp"
#include "apcps/model.hpp"

namespace apcps {

using Channels = std::vector<Multiset<MsgId>>;

inline std::size_t hash_channels(const Channels& ch) {
  std::size_t h = ch.size();
  for (const auto& m : ch) hash_combine(h, m.hash());
  return h;
}

/// Standard configuration: process words modulo the congruence, plus channels.
/// Processes are kept sorted so equal configurations compare equal.
struct StdConfig {
  std::vector<CanonicalWord> procs;
  Channels chans;

  void normalize() { std::sort(procs.begin(), procs.end()); }

  std::size_t hash() const {
    std::size_t h = hash_channels(chans);
    for (const auto& p : procs) hash_combine(h, p.hash());
    return h;
  }

  friend bool operator==(const StdConfig&, const StdConfig&) = default;
  friend auto operator<=>(const StdConfig&, const StdConfig&) = default;
};

inline StdConfig std_initial(const ApcpsSpec& spec, const Classification& cl) {
  StdConfig c;
  const Symbol s = Symbol::nonterminal(spec.start_id());
  c.procs.push_back(canon(cl, std::span<const Symbol>(&s, 1)));
  c.chans.assign(spec.channels.size(), {});
  return c;
}

namespace detail {

inline void std_rewrite_at(const ApcpsSpec& spec, const Classification& cl,
                           const std::vector<std::vector<std::size_t>>& by_lhs, const StdConfig& c,
                           std::size_t i, const Symbol& x, const CanonicalWord& rest,
                           std::vector<std::pair<TraceStep, StdConfig>>& out) {
  auto replace = [&](std::vector<CanonicalWord> extra, CanonicalWord w, Channels ch, int tag) {
    StdConfig n;
    n.chans = std::move(ch);
    n.procs = c.procs;
    n.procs[i] = std::move(w);
    for (auto& e : extra) n.procs.push_back(std::move(e));
    n.normalize();
    out.emplace_back(TraceStep{tag, i, 0}, std::move(n));
  };
  switch (x.kind) {
    case SymbolKind::NonTerminal:
      for (auto ri : by_lhs[x.a]) {
        auto rhs = spec.rules[ri].rhs();
        replace({}, concat(canon(cl, rhs), rest), c.chans, 2);
      }
      break;
    case SymbolKind::Recv:
      if (c.chans[x.a].contains(x.b)) {
        auto ch = c.chans;
        ch[x.a].remove(x.b);
        replace({}, rest, std::move(ch), 3);
      }
      break;
    case SymbolKind::Send: {
      auto ch = c.chans;
      ch[x.a].add(x.b);
      replace({}, rest, std::move(ch), 4);
      break;
    }
    case SymbolKind::Label:
      replace({}, rest, c.chans, 5);
      break;
    case SymbolKind::Spawn: {
      const Symbol y = Symbol::nonterminal(x.a);
      replace({canon(cl, std::span<const Symbol>(&y, 1))}, rest, c.chans, 6);
      break;
    }
  }
}

}  // namespace detail

/// Successors with their rule tags, in deterministic order.
inline std::vector<std::pair<TraceStep, StdConfig>> std_successors(const ApcpsSpec& spec, const Classification& cl,
                                                                   const StdConfig& c) {
  const auto by_lhs = spec.rules_by_lhs();
  std::vector<std::pair<TraceStep, StdConfig>> out;
  for (std::size_t i = 0; i < c.procs.size(); ++i) {
    if (i > 0 && c.procs[i] == c.procs[i - 1]) continue;  // identical process, identical moves
    const auto& w = c.procs[i];
    if (!w.lead.empty()) {
      for (const auto& [x, n] : w.lead) {
        CanonicalWord rest = w;
        rest.lead.remove(x);
        detail::std_rewrite_at(spec, cl, by_lhs, c, i, x, rest, out);
      }
    } else if (!w.spine.empty()) {
      CanonicalWord rest;
      rest.lead = w.spine.front().second;
      rest.spine.assign(w.spine.begin() + 1, w.spine.end());
      detail::std_rewrite_at(spec, cl, by_lhs, c, i, w.spine.front().first, rest, out);
    }
  }
  return out;
}

inline std::vector<StdConfig> std_step(const ApcpsSpec& spec, const Classification& cl, const StdConfig& c) {
  std::vector<StdConfig> out;
  for (auto& [s, n] : std_successors(spec, cl, c)) out.push_back(std::move(n));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// VP1 covering: each target occurrence is exposed at the head of a distinct process.
inline bool std_covers(const StdConfig& c, const std::vector<LabelId>& targets) {
  return perfect_left_matching(targets.size(), c.procs.size(), [&](std::size_t t, std::size_t p) {
    return c.procs[p].lead.contains(Symbol::label(targets[t]));
  });
}

inline ExploreResult<StdConfig> std_explore(const ApcpsSpec& spec, const Classification& cl,
                                            const ExploreBounds& bounds, const std::vector<LabelId>& targets,
                                            const std::function<void(const StdConfig&)>& visit = {}) {
  return bfs_explore(
      std_initial(spec, cl), [&](const StdConfig& c) { return std_successors(spec, cl, c); },
      [&](const StdConfig& c) { return std_covers(c, targets); }, bounds, visit);
}

}  // namespace apcps
