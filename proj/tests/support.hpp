#pragma once

// Shared helpers for the test binaries: corpus loading and random specs.

#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "apcps/apcps.hpp"

namespace apcps::testing {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Rules one per line, for failure messages.
inline std::string rules_text(const ApcpsSpec& s) {
  std::string out;
  for (const auto& r : s.rules) out += s.show(r) + "\n";
  return out;
}

inline ApcpsSpec load_corpus(const std::string& name) {
  return parse_spec(read_file(std::string(APCPS_CORPUS_DIR) + "/" + name + ".apcps"));
}

using apcps::RandomSpecParams;
using apcps::random_spec;

/// Small random alternative configuration over 3 non-terminals, 2 labels and
/// one channel with 2 messages; caches are well sorted.
inline AltConfig random_alt_config(std::mt19937& rng, std::size_t max_procs = 3) {
  auto pick = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  auto cache = [&] {
    SymbolBag m;
    for (std::size_t i = pick(0, 2); i > 0; --i) {
      switch (pick(0, 2)) {
        case 0: m.add(Symbol::label(static_cast<LabelId>(pick(0, 1)))); break;
        case 1: m.add(Symbol::send(0, static_cast<MsgId>(pick(0, 1)))); break;
        default: m.add(Symbol::nonterminal(static_cast<NtId>(pick(0, 2)))); break;
      }
    }
    return Cache::from(std::move(m));
  };
  auto control = [&] {
    AltControl g;
    const Symbol act = pick(0, 1) ? Symbol::label(static_cast<LabelId>(pick(0, 1))) : Symbol::send(0, 0);
    switch (pick(0, 3)) {
      case 0: g.head = Head::nonterminal(static_cast<NtId>(pick(0, 2)), cache()); break;
      case 1: g.head = Head::act_nt(act, static_cast<NtId>(pick(0, 2)), cache()); break;
      case 2: g.head = Head::action(act, cache()); break;
      default: g.head = Head::delayed(cache()); break;
    }
    for (std::size_t i = pick(0, 1); i > 0; --i) g.stack.push_back(Frame{static_cast<NtId>(pick(0, 1)), cache()});
    return g;
  };
  AltConfig c;
  for (std::size_t i = pick(1, max_procs); i > 0; --i) c.procs.push_back(control());
  c.chans.assign(1, {});
  for (std::size_t i = pick(0, 2); i > 0; --i) c.chans[0].add(static_cast<MsgId>(pick(0, 1)));
  c.normalize();
  return c;
}

/// Random place/transition net with small arc weights.
inline PetriNet random_net(std::mt19937& rng, std::size_t max_places = 6, std::size_t max_transitions = 8) {
  auto pick = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  PetriNet net;
  const auto np = pick(1, max_places);
  const auto nt = pick(1, max_transitions);
  for (std::size_t i = 0; i < np; ++i) net.places.push_back("p" + std::to_string(i));
  auto bag = [&](std::size_t max_tokens) {
    Marking m;
    const auto n = pick(0, max_tokens);
    for (std::size_t i = 0; i < n; ++i) m.add(static_cast<Place>(pick(0, np - 1)));
    return m;
  };
  for (std::size_t t = 0; t < nt; ++t) {
    Transition tr;
    tr.pre = bag(2);
    tr.post = bag(3);
    tr.tag = "t" + std::to_string(t);
    net.transitions.push_back(std::move(tr));
  }
  return net;
}

inline Marking random_marking(std::mt19937& rng, std::size_t places, std::size_t max_tokens) {
  Marking m;
  const auto n = std::uniform_int_distribution<std::size_t>(0, max_tokens)(rng);
  for (std::size_t i = 0; i < n; ++i)
    m.add(static_cast<Place>(std::uniform_int_distribution<std::size_t>(0, places - 1)(rng)));
  return m;
}

/// Oracle: forward breadth-first search over markings bounded componentwise
/// by target + init + slack. Returns whether some reached marking covers target.
inline bool forward_cover_bfs(const PetriNet& net, const Marking& init, const Marking& target,
                              std::uint32_t slack = 8) {
  const std::size_t np = net.places.size();
  std::vector<std::uint32_t> cap(np, slack);
  for (const auto& [p, n] : init) cap[p] += n;
  for (const auto& [p, n] : target) cap[p] += n;
  std::set<std::vector<std::uint32_t>> seen;
  std::vector<std::vector<std::uint32_t>> todo;
  std::vector<std::uint32_t> v0(np, 0);
  for (const auto& [p, n] : init) v0[p] += n;
  seen.insert(v0);
  todo.push_back(v0);
  while (!todo.empty()) {
    auto v = todo.back();
    todo.pop_back();
    bool covers = true;
    for (const auto& [p, n] : target) covers &= v[p] >= n;
    if (covers) return true;
    for (const auto& t : net.transitions) {
      auto w = v;
      bool ok = true;
      for (const auto& [p, n] : t.pre) {
        if (w[p] < n) ok = false;
        else w[p] -= n;
      }
      if (!ok) continue;
      for (const auto& [p, n] : t.post) w[p] += n;
      for (std::size_t p = 0; p < np; ++p) ok &= w[p] <= cap[p];
      if (ok && seen.insert(w).second) todo.push_back(w);
    }
  }
  return false;
}

}  // namespace apcps::testing
