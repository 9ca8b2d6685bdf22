#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "apcps/model.hpp"

namespace apcps {

using Place = std::uint32_t;
using Marking = Multiset<Place>;

struct Transition {
  Marking pre;
  Marking post;
  std::string tag;
  std::size_t rule = static_cast<std::size_t>(-1);  // originating grammar rule, if any
};

struct PetriNet {
  std::vector<std::string> places;
  std::vector<Transition> transitions;

  std::string dump() const {
    std::string out = "places:";
    for (const auto& p : places) out += " " + p;
    out += "\n";
    auto bag = [&](const Marking& m) {
      std::string s;
      for (const auto& [p, n] : m) s += (s.empty() ? "" : " ") + places.at(p) + (n > 1 ? "*" + std::to_string(n) : "");
      return s.empty() ? std::string("-") : s;
    };
    for (const auto& t : transitions) out += t.tag + ": " + bag(t.pre) + " => " + bag(t.post) + "\n";
    return out;
  }
};

inline std::optional<Marking> fire(const PetriNet& net, const Marking& m, std::size_t t) {
  const auto& tr = net.transitions.at(t);
  if (!tr.pre.included_in(m)) return std::nullopt;
  return (m - tr.pre) + tr.post;
}

/// Commutative fragment of a spec as a net. Places 0..symbols.size()-1 are
/// the commutative non-terminals and the commutative terminals occurring in
/// some rule; a bounded encoding adds `budget` and `done`.
struct CcfgNet {
  PetriNet net;
  std::vector<Symbol> symbols;
  std::optional<Place> budget;
  std::optional<Place> done;
  std::size_t k_idx = 0;

  std::optional<Place> place(const Symbol& s) const {
    auto it = std::lower_bound(symbols.begin(), symbols.end(), s);
    if (it == symbols.end() || *it != s) return std::nullopt;
    return static_cast<Place>(it - symbols.begin());
  }

  /// Marking for a multiset of grammar symbols; empty when a symbol has no place.
  std::optional<Marking> marking(const SymbolBag& m) const {
    Marking out;
    for (const auto& [s, n] : m) {
      auto p = place(s);
      if (!p) return std::nullopt;
      out.add(*p, n);
    }
    return out;
  }

  SymbolBag symbols_of(const Marking& m) const {
    SymbolBag out;
    for (const auto& [p, n] : m)
      if (p < symbols.size()) out.add(symbols[p], n);
    return out;
  }

  /// Initial marking for deriving from c: {c} plus, when bounded, k_idx-1
  /// budget tokens so that budget + non-terminal tokens stays k_idx.
  Marking initial(NtId c) const {
    Marking m{*place(Symbol::nonterminal(c))};
    if (budget && k_idx > 1) m.add(*budget, static_cast<std::uint32_t>(k_idx - 1));
    return m;
  }
};

inline CcfgNet encode_ccfg(const ApcpsSpec& spec, const Classification& cl) {
  CcfgNet out;
  for (auto x : cl.com_nonterminals()) out.symbols.push_back(Symbol::nonterminal(x));
  for (const auto& r : spec.rules)
    if (r.action && cl.is_commutative(*r.action)) out.symbols.push_back(*r.action);
  std::sort(out.symbols.begin(), out.symbols.end());
  out.symbols.erase(std::unique(out.symbols.begin(), out.symbols.end()), out.symbols.end());
  for (const auto& s : out.symbols) out.net.places.push_back(spec.show(s));
  for (std::size_t i = 0; i < spec.rules.size(); ++i) {
    const auto& r = spec.rules[i];
    if (!cl.is_com_nt(r.lhs)) continue;
    Transition t;
    t.pre.add(*out.place(Symbol::nonterminal(r.lhs)));
    for (const auto& s : r.rhs()) {
      auto p = out.place(s);
      if (!p) throw ModelError("commutative rule with non-commutative right-hand side: " + spec.show(r));
      t.post.add(*p);
    }
    t.tag = spec.show(r);
    t.rule = i;
    out.net.transitions.push_back(std::move(t));
  }
  return out;
}

/// Budgeted encoding: calls consume a budget token, terminal and eps rules
/// return one, tail calls are neutral; `done` fires once all k_idx tokens are
/// back, i.e. when no non-terminal is left.
inline CcfgNet encode_ccfg_bounded(const ApcpsSpec& spec, const Classification& cl, std::size_t k_idx) {
  if (k_idx < 1) throw ModelError("index bound must be at least 1");
  CcfgNet out = encode_ccfg(spec, cl);
  out.k_idx = k_idx;
  out.budget = static_cast<Place>(out.net.places.size());
  out.net.places.push_back("budget");
  out.done = static_cast<Place>(out.net.places.size());
  out.net.places.push_back("done");
  for (auto& t : out.net.transitions) {
    const auto& r = spec.rules[t.rule];
    if (r.kind == RuleKind::Call) t.pre.add(*out.budget);
    if (r.kind == RuleKind::Simple) t.post.add(*out.budget);
  }
  Transition d;
  d.pre.add(*out.budget, static_cast<std::uint32_t>(k_idx));
  d.post = d.pre;
  d.post.add(*out.done);
  d.tag = "done";
  out.net.transitions.push_back(std::move(d));
  return out;
}

inline std::size_t default_index_bound(const Classification& cl) { return cl.com_nonterminals().size() + 1; }

/// One backward step per transition: pre + (target - post), truncated.
inline std::vector<Marking> petri_pre(const PetriNet& net, const Marking& target) {
  std::vector<Marking> out;
  for (const auto& t : net.transitions) out.push_back(t.pre + (target - t.post));
  return out;
}

struct PetriCoverResult {
  bool coverable = false;
  std::vector<std::size_t> witness;  // transition indices, replayable from init
  std::size_t basis_size = 0;
};

/// Backward coverability over the minimal-basis antichain. The witness is the
/// chain of transitions recorded on the way from the target to init.
inline PetriCoverResult petri_coverable(const PetriNet& net, const Marking& init, const Marking& target) {
  using Vec = std::vector<std::uint32_t>;
  const std::size_t np = net.places.size();
  auto dense = [&](const Marking& m) {
    Vec v(np, 0);
    for (const auto& [p, n] : m) v.at(p) += n;
    return v;
  };
  auto leq = [](const Vec& a, const Vec& b) {
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i] > b[i]) return false;
    return true;
  };
  std::vector<Vec> pre(net.transitions.size()), post(net.transitions.size());
  for (std::size_t t = 0; t < net.transitions.size(); ++t) {
    pre[t] = dense(net.transitions[t].pre);
    post[t] = dense(net.transitions[t].post);
  }
  const Vec v0 = dense(init);

  struct Record {
    Vec m;
    std::size_t trans;
    std::size_t next;
  };
  const std::size_t none = static_cast<std::size_t>(-1);
  std::vector<Record> recs{{dense(target), none, none}};
  std::vector<std::size_t> basis{0};
  std::deque<std::size_t> work{0};
  std::vector<char> alive{1};

  auto finish = [&](std::size_t r) {
    PetriCoverResult res;
    res.coverable = true;
    for (std::size_t i = r; recs[i].trans != none; i = recs[i].next) res.witness.push_back(recs[i].trans);
    res.basis_size = basis.size();
    // Forward validation of the recorded chain.
    Marking m = init;
    for (auto t : res.witness) {
      auto n = fire(net, m, t);
      if (!n) throw ModelError("petri witness does not replay");
      m = *n;
    }
    if (!target.included_in(m)) throw ModelError("petri witness does not cover target");
    return res;
  };

  if (leq(recs[0].m, v0)) return finish(0);
  while (!work.empty()) {
    auto r = work.front();
    work.pop_front();
    if (!alive[r]) continue;
    for (std::size_t t = 0; t < net.transitions.size(); ++t) {
      Vec cand(np);
      for (std::size_t p = 0; p < np; ++p) {
        auto need = recs[r].m[p] > post[t][p] ? recs[r].m[p] - post[t][p] : 0;
        cand[p] = pre[t][p] + need;
      }
      bool subsumed = false;
      for (auto b : basis)
        if (leq(recs[b].m, cand)) {
          subsumed = true;
          break;
        }
      if (subsumed) continue;
      std::erase_if(basis, [&](std::size_t b) {
        if (!leq(cand, recs[b].m)) return false;
        alive[b] = 0;
        return true;
      });
      recs.push_back(Record{std::move(cand), t, r});
      alive.push_back(1);
      const auto id = recs.size() - 1;
      basis.push_back(id);
      if (leq(recs[id].m, v0)) return finish(id);
      work.push_back(id);
    }
  }
  PetriCoverResult res;
  res.basis_size = basis.size();
  return res;
}

/// Rule (7) sub-oracle: which caches can a commutative non-terminal C produce?
/// Results carry a concrete image (the marking reached) for witness replay.
class CcfgOracle {
 public:
  enum class Mode : std::uint8_t {
    Any,       // some sentential form C ->* w with t <= M(w)
    Terminal,  // as Any, with w a terminal word
    WithNT,    // as Any, with w still holding a non-terminal
  };

  CcfgOracle(const ApcpsSpec& spec, const Classification& cl, std::size_t k_idx = 0)
      : cl_(cl), plain_(encode_ccfg(spec, cl)),
        bounded_(encode_ccfg_bounded(spec, cl, k_idx ? k_idx : default_index_bound(cl))) {}

  const CcfgNet& plain() const { return plain_; }
  const CcfgNet& bounded() const { return bounded_; }

  std::optional<SymbolBag> image_covering(NtId c, const SymbolBag& t, Mode mode) {
    auto key = std::make_tuple(c, t, mode);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    auto res = compute(c, t, mode);
    memo_.emplace(std::move(key), res);
    return res;
  }

  bool productive(NtId c) { return image_covering(c, {}, Mode::Terminal).has_value(); }

 private:
  static std::optional<SymbolBag> run(const CcfgNet& n, const Marking& init, const Marking& target) {
    auto r = petri_coverable(n.net, init, target);
    if (!r.coverable) return std::nullopt;
    Marking m = init;
    for (auto tr : r.witness) m = *fire(n.net, m, tr);
    return n.symbols_of(m);
  }

  std::optional<SymbolBag> compute(NtId c, const SymbolBag& t, Mode mode) {
    switch (mode) {
      case Mode::Any: {
        auto target = plain_.marking(t);
        if (!target) return std::nullopt;
        return run(plain_, plain_.initial(c), *target);
      }
      case Mode::Terminal: {
        if (t.any_of([](const Symbol& s) { return s.is_nonterminal(); })) return std::nullopt;
        auto target = bounded_.marking(t);
        if (!target) return std::nullopt;
        target->add(*bounded_.done);
        return run(bounded_, bounded_.initial(c), *target);
      }
      case Mode::WithNT: {
        if (t.any_of([](const Symbol& s) { return s.is_nonterminal(); })) return image_covering(c, t, Mode::Any);
        for (auto d : cl_.com_nonterminals()) {
          auto td = t;
          td.add(Symbol::nonterminal(d));
          if (auto img = image_covering(c, td, Mode::Any)) return img;
        }
        return std::nullopt;
      }
    }
    return std::nullopt;
  }

  Classification cl_;
  CcfgNet plain_;
  CcfgNet bounded_;
  std::map<std::tuple<NtId, SymbolBag, Mode>, std::optional<SymbolBag>> memo_;
};

/// Minimal pairs (C, residual) with residual + M(w) >= demand for some C ->* w.
inline std::vector<std::pair<NtId, SymbolBag>> commutative_cover_oracle(const ApcpsSpec& spec,
                                                                        const Classification& cl,
                                                                        const SymbolBag& demand) {
  if (demand.any_of([&](const Symbol& s) { return !cl.is_commutative(s); }))
    throw ModelError("demand must be over commutative symbols");
  CcfgOracle oracle(spec, cl);
  auto subs = demand.sub_multisets();
  std::sort(subs.begin(), subs.end(), [](const SymbolBag& a, const SymbolBag& b) { return a.size() > b.size(); });
  std::vector<std::pair<NtId, SymbolBag>> out;
  for (auto c : cl.com_nonterminals()) {
    std::vector<SymbolBag> kept;  // maximal coverable t
    for (const auto& t : subs) {
      if (std::any_of(kept.begin(), kept.end(), [&](const SymbolBag& k) { return t.included_in(k); })) continue;
      if (oracle.image_covering(c, t, CcfgOracle::Mode::Any)) kept.push_back(t);
    }
    std::vector<SymbolBag> residuals;
    for (const auto& t : kept) residuals.push_back(demand - t);
    for (const auto& r : residuals) {
      bool dominated = std::any_of(residuals.begin(), residuals.end(), [&](const SymbolBag& o) {
        return o != r && o.included_in(r);
      });
      if (!dominated) out.emplace_back(c, r);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace apcps
