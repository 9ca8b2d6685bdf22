#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <iterator>
#include <map>
#include <set>
#include <vector>

#include "apcps/alt_config.hpp"
#include "apcps/alt_semantics.hpp"
#include "apcps/matching.hpp"
#include "apcps/model.hpp"

namespace apcps {

/// A control with caches reduced to their sort.
struct AbsFrame {
  NtId nt = 0;
  CacheSort sort = CacheSort::Term;
  friend auto operator<=>(const AbsFrame&, const AbsFrame&) = default;
};

struct AbsControl {
  HeadKind kind = HeadKind::NT;
  Symbol act{};
  NtId nt = 0;
  CacheSort sort = CacheSort::Term;
  std::vector<AbsFrame> stack;
  friend auto operator<=>(const AbsControl&, const AbsControl&) = default;
};

/// One abstract move: `rule` is the forward rule number; `act` is the fired
/// action for (12)-(15), `cached` the commutative non-terminal for (7).
struct AbsEdge {
  AbsControl from, to;
  int rule = 0;
  Symbol act{};
  NtId cached = 0;
  friend auto operator<=>(const AbsEdge&, const AbsEdge&) = default;
};

inline AbsControl abstract_control(const AltControl& g) {
  AbsControl a{g.head.kind, g.head.act, g.head.nt, g.head.cache.sort, {}};
  for (const auto& f : g.stack) a.stack.push_back(AbsFrame{f.nt, f.cache.sort});
  return a;
}

/// Over-approximation of what the alternative semantics can reach, used to
/// prune the backward search. Per root (the start symbol or a spawn target)
/// it explores controls up to cache contents, remembering for every cache the
/// alphabet it can draw from; it also bounds how many processes each root can
/// have. Every reachable configuration passes feasible().
class Feasibility {
 public:
  static constexpr std::size_t kUnbounded = 1000;  // saturation value for counts

  Feasibility(const ApcpsSpec& spec, const Classification& cl, std::size_t k, const AltOptions& opt = {})
      : spec_(spec), cl_(cl), k_(k), opt_(opt), by_lhs_(spec.rules_by_lhs()) {
    compute_closures();
    compute_productive();
    compute_roots();
    for (std::size_t r = 0; r < roots_.size(); ++r) explore(r);
  }

  /// Reachable control shapes over all roots.
  const std::set<AbsControl>& controls() const { return shapes_; }
  const std::set<AbsEdge>& edges() const { return edges_; }
  const std::set<Symbol>& cacheable() const { return cacheable_; }
  const std::vector<NtId>& cacheable_nonterminals() const { return cacheable_nts_; }
  bool productive(NtId x) const { return productive_.at(x); }
  const std::vector<NtId>& roots() const { return roots_; }
  /// Upper bound on live processes descending from roots()[r]; kUnbounded if none.
  std::size_t capacity(std::size_t r) const { return capacity_.at(r); }

  /// Indices of the roots whose exploration admits g (cache patterns allowed:
  /// a Mixed pattern need not hold a non-terminal, a NonTerm one may be empty).
  std::vector<std::size_t> roots_of(const AltControl& g) const {
    std::vector<std::size_t> out;
    auto it = by_shape_.find(abstract_control(g));
    if (it == by_shape_.end()) return out;
    for (const auto& [r, alpha] : it->second) {
      if (!out.empty() && out.back() == r) continue;
      bool ok = within(g.head.cache, alpha[0]);
      for (std::size_t i = 0; ok && i < g.stack.size(); ++i) ok = within(g.stack[i].cache, alpha[i + 1]);
      if (ok) out.push_back(r);
    }
    return out;
  }

  bool feasible(const AltControl& g) const { return !roots_of(g).empty(); }

  /// Every process feasible, and processes confined to bounded roots fit in
  /// those roots' capacities.
  bool feasible(const AltConfig& c) const {
    std::vector<std::vector<std::size_t>> need;
    for (const auto& g : c.procs) {
      auto rs = roots_of(g);
      if (rs.empty()) return false;
      if (std::none_of(rs.begin(), rs.end(), [&](std::size_t r) { return capacity_[r] >= kUnbounded; }))
        need.push_back(std::move(rs));
    }
    if (need.empty()) return true;
    std::vector<std::size_t> slot_root;
    for (std::size_t r = 0; r < roots_.size(); ++r)
      if (capacity_[r] < kUnbounded) slot_root.insert(slot_root.end(), capacity_[r], r);
    return perfect_left_matching(need.size(), slot_root.size(), [&](std::size_t i, std::size_t s) {
      return std::find(need[i].begin(), need[i].end(), slot_root[s]) != need[i].end();
    });
  }

  /// The empty pattern of a sort; its upward closure is every cache of that sort.
  std::vector<Cache> minimal_caches(CacheSort s) const { return {Cache{s, {}}}; }

  /// Minimal controls of a shape; `head` replaces the head pattern when given.
  std::vector<AltControl> concretize(const AbsControl& a, const std::vector<Cache>* head = nullptr) const {
    std::vector<Cache> heads = head ? *head : minimal_caches(a.sort);
    std::vector<AltControl> out;
    for (auto& c : heads) {
      AltControl g;
      g.head = Head{a.kind, a.act, a.nt, c};
      for (const auto& f : a.stack) g.stack.push_back(Frame{f.nt, Cache{f.sort, {}}});
      out.push_back(std::move(g));
    }
    return out;
  }

  /// A well-sorted cache above pattern c.
  Cache instantiate(const Cache& c) const {
    if (c.sort == CacheSort::Mixed && !c.has_nonterminal() && !cacheable_nts_.empty())
      return Cache{c.sort, c.items + SymbolBag{Symbol::nonterminal(cacheable_nts_.front())}};
    if (c.sort == CacheSort::NonTerm && c.items.empty() && !cacheable_nts_.empty())
      return Cache{c.sort, SymbolBag{Symbol::nonterminal(cacheable_nts_.front())}};
    return c;
  }
  AltConfig instantiate(AltConfig c) const {
    for (auto& g : c.procs) {
      g.head.cache = instantiate(g.head.cache);
      for (auto& f : g.stack) f.cache = instantiate(f.cache);
    }
    c.normalize();
    return c;
  }

 private:
  using Alpha = std::vector<Symbol>;  // sorted, unique

  struct State {
    AbsControl shape;
    std::vector<Alpha> alpha;  // head first, then frames top-down
    friend auto operator<=>(const State&, const State&) = default;
  };

  static bool within(const Cache& c, const Alpha& a) {
    return !c.items.any_of([&](const Symbol& s) { return !std::binary_search(a.begin(), a.end(), s); });
  }

  static Alpha join(const Alpha& a, const Alpha& b) {
    Alpha out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
  }

  template <typename Keep>
  static Alpha keep_if(const Alpha& a, Keep&& keep) {
    Alpha out;
    std::copy_if(a.begin(), a.end(), std::back_inserter(out), keep);
    return out;
  }

  /// closure_[C]: every symbol of a sentential form derivable from C.
  void compute_closures() {
    closure_.assign(spec_.nonterminals.size(), {});
    for (NtId c = 0; c < spec_.nonterminals.size(); ++c) {
      std::set<Symbol> acc{Symbol::nonterminal(c)};
      std::vector<NtId> todo{c};
      while (!todo.empty()) {
        NtId x = todo.back();
        todo.pop_back();
        for (auto ri : by_lhs_[x])
          for (const auto& s : spec_.rules[ri].rhs())
            if (acc.insert(s).second && s.is_nonterminal()) todo.push_back(s.a);
      }
      closure_[c].assign(acc.begin(), acc.end());
    }
    for (const auto& r : spec_.rules)
      if (r.kind == RuleKind::Call && cl_.is_com_nt(r.second))
        cacheable_.insert(closure_[r.second].begin(), closure_[r.second].end());
    for (const auto& s : cacheable_)
      if (s.is_nonterminal()) cacheable_nts_.push_back(s.a);
  }

  void compute_productive() {
    productive_.assign(spec_.nonterminals.size(), false);
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& r : spec_.rules) {
        if (productive_[r.lhs]) continue;
        bool ok = true;
        for (const auto& s : r.rhs()) ok &= !s.is_nonterminal() || productive_[s.a];
        if (ok) productive_[r.lhs] = changed = true;
      }
    }
  }

  /// Roots and their capacities. spawns[a][y] bounds the spawn(y) occurrences
  /// in any sentential form derivable from a; the start root has one process.
  void compute_roots() {
    if (spec_.start) roots_.push_back(*spec_.start);
    for (const auto& r : spec_.rules)
      if (r.action && r.action->kind == SymbolKind::Spawn &&
          std::find(roots_.begin(), roots_.end(), r.action->a) == roots_.end())
        roots_.push_back(r.action->a);

    const std::size_t n = spec_.nonterminals.size();
    auto sat = [](std::size_t v) { return std::min(v, kUnbounded); };
    std::vector<std::vector<std::size_t>> spawns(n, std::vector<std::size_t>(n, 0));
    for (bool changed = true; changed;) {
      changed = false;
      for (const auto& r : spec_.rules)
        for (NtId y = 0; y < n; ++y) {
          std::size_t v = 0;
          for (const auto& s : r.rhs()) {
            if (s.kind == SymbolKind::Spawn && s.a == y) v = sat(v + 1);
            if (s.is_nonterminal()) v = sat(v + spawns[s.a][y]);
          }
          if (v > spawns[r.lhs][y]) {
            spawns[r.lhs][y] = v;
            changed = true;
          }
        }
    }
    capacity_.assign(roots_.size(), 0);
    for (bool changed = true; changed;) {
      changed = false;
      for (std::size_t t = 0; t < roots_.size(); ++t) {
        std::size_t v = (spec_.start && t == 0) ? 1 : 0;
        for (std::size_t s = 0; s < roots_.size(); ++s) v = sat(v + sat(capacity_[s] * spawns[roots_[s]][roots_[t]]));
        if (v > capacity_[t]) {
          capacity_[t] = v;
          changed = true;
        }
      }
    }
  }

  static int fired(const Symbol& a) {
    switch (a.kind) {
      case SymbolKind::Recv: return 12;
      case SymbolKind::Spawn: return 13;
      case SymbolKind::Send: return 14;
      default: return 15;
    }
  }

  void explore(std::size_t root) {
    std::set<State> seen;
    std::vector<State> todo;
    auto add = [&](State st) {
      if (st.shape.stack.size() > k_) throw ModelError("stack bound k exceeded");
      if (seen.insert(st).second) todo.push_back(std::move(st));
    };
    add(State{AbsControl{HeadKind::NT, {}, roots_[root], CacheSort::Term, {}}, {Alpha{}}});

    while (!todo.empty()) {
      const State st = todo.back();
      todo.pop_back();
      const AbsControl& a = st.shape;
      auto step = [&](State next, int rule, Symbol act = {}, NtId cached = 0) {
        edges_.insert(AbsEdge{a, next.shape, rule, act, cached});
        add(std::move(next));
      };
      auto with_head = [&](HeadKind k, Symbol act, NtId nt, CacheSort s, Alpha alpha) {
        State b = st;
        b.shape.kind = k;
        b.shape.act = act;
        b.shape.nt = nt;
        b.shape.sort = s;
        b.alpha[0] = std::move(alpha);
        return b;
      };
      const Alpha& here = st.alpha[0];
      switch (a.kind) {
        case HeadKind::NT:
          for (auto ri : by_lhs_[a.nt]) {
            const Rule& r = spec_.rules[ri];
            switch (r.kind) {
              case RuleKind::Call:
                if (cl_.is_com_nt(r.second)) {
                  Alpha grown = join(here, closure_[r.second]);
                  if (a.sort == CacheSort::NonTerm) {
                    step(with_head(HeadKind::NT, {}, r.first, CacheSort::NonTerm, grown), 7, {}, r.second);
                  } else {
                    step(with_head(HeadKind::NT, {}, r.first, CacheSort::Mixed, grown), 7, {}, r.second);
                    if (a.sort == CacheSort::Term && productive_[r.second])
                      step(with_head(HeadKind::NT, {}, r.first, CacheSort::Term, grown), 7, {}, r.second);
                  }
                } else {
                  State b = with_head(HeadKind::NT, {}, r.first, CacheSort::Term, Alpha{});
                  b.shape.stack.insert(b.shape.stack.begin(), AbsFrame{r.second, a.sort});
                  b.alpha.insert(b.alpha.begin() + 1, here);
                  step(std::move(b), 8);
                }
                break;
              case RuleKind::TailCall:
                step(with_head(HeadKind::ActNT, *r.action, r.first, a.sort, here), 9);
                break;
              case RuleKind::Simple:
                if (r.action) step(with_head(HeadKind::Act, *r.action, 0, a.sort, here), 10);
                else step(with_head(HeadKind::Delayed, {}, 0, a.sort, here), 10);
                break;
            }
          }
          break;
        case HeadKind::Act:
          step(with_head(HeadKind::Delayed, {}, 0, a.sort, here), fired(a.act), a.act);
          break;
        case HeadKind::ActNT:
          step(with_head(HeadKind::NT, {}, a.nt, a.sort, here), fired(a.act), a.act);
          break;
        case HeadKind::Delayed:
          if (a.sort == CacheSort::Term && !a.stack.empty()) {
            State b;
            b.shape = AbsControl{HeadKind::NT, {}, a.stack.front().nt, a.stack.front().sort,
                                 std::vector<AbsFrame>(a.stack.begin() + 1, a.stack.end())};
            b.alpha.assign(st.alpha.begin() + 1, st.alpha.end());
            step(std::move(b), 16);
          } else if (a.sort == CacheSort::Mixed) {
            step(with_head(HeadKind::Delayed, {}, 0, CacheSort::NonTerm,
                           keep_if(here, [](const Symbol& s) { return s.is_nonterminal() || s.is_label(); })),
                 17);
          } else if (a.sort == CacheSort::Term && a.stack.empty() && opt_.dispatch_term_caches) {
            step(with_head(HeadKind::Delayed, {}, 0, CacheSort::NonTerm,
                           keep_if(here, [](const Symbol& s) { return s.is_label(); })),
                 17);
          }
          break;
      }
    }
    for (const auto& st : seen) {
      shapes_.insert(st.shape);
      by_shape_[st.shape].emplace_back(root, st.alpha);
    }
  }

  const ApcpsSpec& spec_;
  const Classification& cl_;
  std::size_t k_;
  AltOptions opt_;
  std::vector<std::vector<std::size_t>> by_lhs_;
  std::vector<Alpha> closure_;
  std::set<Symbol> cacheable_;
  std::vector<NtId> cacheable_nts_;
  std::vector<bool> productive_;
  std::vector<NtId> roots_;
  std::vector<std::size_t> capacity_;
  std::set<AbsControl> shapes_;
  std::set<AbsEdge> edges_;
  std::map<AbsControl, std::vector<std::pair<std::size_t, std::vector<Alpha>>>> by_shape_;
};

}  // namespace apcps
