#pragma once

#include <algorithm>
#include <cstddef>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "apcps/alt_semantics.hpp"
#include "apcps/invariant.hpp"
#include "apcps/model.hpp"
#include "apcps/order.hpp"
#include "apcps/petri.hpp"
#include "apcps/shapes.hpp"

namespace apcps {

struct Query {
  std::vector<LabelId> labels;  // non-empty, multiplicities allowed
};

inline Query make_query(const ApcpsSpec& spec, const std::vector<std::string>& names) {
  if (names.empty()) throw ModelError("query needs at least one label");
  Query q;
  for (const auto& n : names) {
    auto l = spec.label(n);
    if (!l) throw ModelError("unknown label " + n);
    q.labels.push_back(*l);
  }
  return q;
}

/// How a predecessor reaches its basis element: the forward rule, the grammar
/// rule for (7)-(10), and the image for (7).
struct BackStep {
  int rule = 0;
  std::size_t rule_index = static_cast<std::size_t>(-1);
  SymbolBag image;
};

struct WitnessStep {
  AltStep step;
  AltConfig config;  // configuration after the step
};

struct CoverOptions {
  AltOptions alt;
  std::size_t k_idx = 0;  // Petri index bound for terminal images; 0 picks the default
  bool check_preds = true;
  bool witness = true;
  std::size_t max_iterations = 0;  // 0 runs to the fixpoint
  bool semi_invariants = true;     // drop targets a structural semi-invariant rules out
  std::function<void(std::size_t iterations, std::size_t basis, std::size_t pending)> progress;
};

struct Decision {
  bool covered = false;
  bool complete = true;  // false only when max_iterations cut the fixpoint short
  std::size_t iterations = 0;
  std::size_t basis_size = 0;
  std::size_t preds_emitted = 0;
  std::size_t pred_failures = 0;
  std::size_t targets_refuted = 0;
  std::optional<std::vector<WitnessStep>> witness;
};

class NotShaped : public ModelError {
 public:
  explicit NotShaped(ShapeReport r) : ModelError("not shaped"), report(std::move(r)) {}
  ShapeReport report;
};

/// Antichain of configurations indexed by their multiset of control shapes.
/// leq_control preserves shapes, so e <= x requires shapes(e) to be a
/// sub-multiset of shapes(x); lookups only test those candidates.
class IndexedBasis {
 public:
  std::size_t size() const { return live_; }
  bool alive(std::size_t id) const { return alive_.at(id); }
  const AltConfig& at(std::size_t id) const { return cfgs_.at(id); }
  std::vector<AltConfig> elements() const {
    std::vector<AltConfig> out;
    for (std::size_t id = 0; id < cfgs_.size(); ++id)
      if (alive_[id]) out.push_back(cfgs_[id]);
    return out;
  }

  bool covers(const AltConfig& x) {
    const Sig sig = signature(x);
    bool found = false;
    for_each_sub(sig, [&](const Sig& sub) {
      if (found) return;
      auto it = by_sig_.find(sub);
      if (it == by_sig_.end()) return;
      for (auto id : it->second)
        if (alive_[id] && leq_config(cfgs_[id], x)) {
          found = true;
          return;
        }
    });
    return found;
  }

  /// Adds x unless covered, dropping elements above it. Ids are dense and
  /// never reused.
  std::optional<std::size_t> insert(const AltConfig& x) {
    if (covers(x)) return std::nullopt;
    Sig sig = signature(x);
    if (sig.empty()) {
      for (std::size_t id = 0; id < cfgs_.size(); ++id) kill_if_above(id, x);
    } else {
      auto rarest = std::min_element(sig.begin(), sig.end(), [&](auto a, auto b) {
        return by_shape_[a].size() < by_shape_[b].size();
      });
      for (auto id : by_shape_[*rarest]) kill_if_above(id, x);
    }
    const std::size_t id = cfgs_.size();
    cfgs_.push_back(x);
    alive_.push_back(true);
    ++live_;
    by_sig_[sig].push_back(id);
    Sig distinct = sig;
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    for (auto s : distinct) by_shape_[s].push_back(id);
    return id;
  }

 private:
  using Sig = std::vector<std::uint32_t>;

  void kill_if_above(std::size_t id, const AltConfig& x) {
    if (alive_[id] && leq_config(x, cfgs_[id])) {
      alive_[id] = false;
      --live_;
    }
  }

  Sig signature(const AltConfig& c) {
    Sig sig;
    for (const auto& g : c.procs) {
      auto [it, fresh] = ids_.emplace(abstract_control(g), static_cast<std::uint32_t>(ids_.size()));
      if (fresh) by_shape_.emplace_back();
      sig.push_back(it->second);
    }
    std::sort(sig.begin(), sig.end());
    return sig;
  }

  template <typename F>
  static void for_each_sub(const Sig& sig, F&& f) {
    std::vector<std::pair<std::uint32_t, std::size_t>> groups;
    for (auto s : sig) {
      if (!groups.empty() && groups.back().first == s) ++groups.back().second;
      else groups.emplace_back(s, 1);
    }
    Sig cur;
    auto rec = [&](auto&& self, std::size_t g) -> void {
      if (g == groups.size()) {
        f(cur);
        return;
      }
      const std::size_t mark = cur.size();
      for (std::size_t n = 0; n <= groups[g].second; ++n) {
        if (n) cur.push_back(groups[g].first);
        self(self, g + 1);
      }
      cur.resize(mark);
    };
    rec(rec, 0);
  }

  std::map<AbsControl, std::uint32_t> ids_;
  std::map<Sig, std::vector<std::size_t>> by_sig_;
  std::vector<std::vector<std::size_t>> by_shape_;
  std::vector<AltConfig> cfgs_;
  std::vector<bool> alive_;
  std::size_t live_ = 0;
};

class BackwardCover {
 public:
  BackwardCover(const ApcpsSpec& spec, const Classification& cl, std::size_t k, CoverOptions opt = {})
      : spec_(spec), cl_(cl), k_(k), opt_(opt), sem_(spec, cl, k, opt.alt), feas_(spec, cl, k, opt.alt),
        invariants_(spec, feas_), oracle_(spec, cl, opt.k_idx) {}

  const AltSemantics& semantics() const { return sem_; }
  const Feasibility& feasibility() const { return feas_; }
  const SemiInvariants& invariants() const { return invariants_; }
  /// The antichain left by the last run().
  const IndexedBasis& basis() const { return basis_; }

  /// Minimal configurations realizing every query occurrence, one process each.
  std::vector<AltConfig> target_basis(const Query& q) const {
    if (q.labels.empty()) throw ModelError("query needs at least one label");
    for (auto l : q.labels)
      if (l >= spec_.labels.size()) throw ModelError("unknown label id " + std::to_string(l));
    std::set<AltConfig> layer{empty_config()};
    for (auto l : q.labels) {
      std::set<AltConfig> next;
      for (const auto& form : label_forms(l))
        for (const auto& c : layer) {
          AltConfig d = c;
          d.procs.push_back(form);
          d.normalize();
          if (feas_.feasible(d)) next.insert(std::move(d));
        }
      layer = std::move(next);
    }
    Basis b;
    for (const auto& c : layer) b = basis_insert(std::move(b), c);
    std::sort(b.elements.begin(), b.elements.end());
    return b.elements;
  }

  /// Minimal predecessors of the upward closure of b that b does not already cover.
  std::map<AltConfig, BackStep> pred_basis(const AltConfig& b) {
    Preds out{b, {}};
    for (std::size_t i = 0; i < b.procs.size(); ++i) {
      if (i > 0 && b.procs[i] == b.procs[i - 1]) continue;
      matched_preds(b, i, out);
    }
    fresh_preds(b, out);
    return std::move(out.found);
  }

  /// Some rule application on some process of p reaches a configuration
  /// above b. Cache patterns in p are first made well-sorted.
  bool pred_sound(const AltConfig& pattern, const BackStep& s, const AltConfig& b) const {
    const AltConfig p = feas_.instantiate(pattern);
    for (std::size_t i = 0; i < p.procs.size(); ++i) {
      auto n = sem_.apply(p, AltStep{s.rule, i, s.rule_index, s.image});
      if (n && leq_config(b, *n)) return true;
    }
    return false;
  }

  Decision run(const Query& q) {
    Decision d;
    const AltConfig init = sem_.initial();
    recs_.clear();
    basis_ = IndexedBasis{};
    IndexedBasis& basis = basis_;
    std::deque<std::size_t> work;
    std::optional<std::size_t> hit;

    auto insert = [&](const AltConfig& x, std::size_t next, const BackStep& st) {
      auto id = basis.insert(x);
      if (!id) return;
      recs_.push_back(Rec{x, next, st});  // recs_ and basis share ids
      work.push_back(*id);
      if (!hit && leq_config(x, init)) hit = *id;
    };

    for (const auto& t : target_basis(q)) {
      if (opt_.semi_invariants && invariants_.refutes(t)) ++d.targets_refuted;
      else insert(t, kNone, {});
    }
    while (!hit && !work.empty()) {
      if (opt_.max_iterations && d.iterations >= opt_.max_iterations) {
        d.complete = false;
        break;
      }
      const std::size_t id = work.front();
      work.pop_front();
      if (!basis.alive(id)) continue;  // subsumed meanwhile
      ++d.iterations;
      if (opt_.progress) opt_.progress(d.iterations, basis.size(), work.size());
      const AltConfig b = recs_[id].cfg;
      for (const auto& [p, st] : pred_basis(b)) {
        ++d.preds_emitted;
        if (opt_.check_preds && !pred_sound(p, st, b)) ++d.pred_failures;
        insert(p, id, st);
        if (hit) break;
      }
    }
    d.basis_size = basis.size();
    d.covered = hit.has_value();
    if (hit && opt_.witness) d.witness = replay(*hit, q);
    return d;
  }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  struct Rec {
    AltConfig cfg;
    std::size_t next;  // record this one steps into; kNone for targets
    BackStep step;
  };

  struct Preds {
    const AltConfig& b;
    std::map<AltConfig, BackStep> found;
  };

  /// Sends and spawns a dispatched cache may have contributed to b.
  struct Attribution {
    SymbolBag items;
    Channels chans;
    std::vector<std::size_t> dropped;
  };

  AltConfig empty_config() const {
    AltConfig c;
    c.chans.assign(spec_.channels.size(), {});
    return c;
  }

  static AltControl fresh(NtId y) { return AltControl{Head::nonterminal(y), {}}; }

  std::vector<AltControl> label_forms(LabelId l) const {
    const Symbol lab = Symbol::label(l);
    std::vector<AltControl> out;
    for (const auto& a : feas_.controls()) {
      std::vector<AltControl> gs;
      if ((a.kind == HeadKind::Act || a.kind == HeadKind::ActNT) && a.act == lab) {
        gs = feas_.concretize(a);
      } else if (a.kind == HeadKind::Delayed && feas_.cacheable().count(lab)) {
        std::vector<Cache> heads;
        if (a.sort == CacheSort::Term) heads.push_back(Cache::from(SymbolBag{lab}));
        if (a.sort == CacheSort::NonTerm) heads.push_back(Cache{CacheSort::NonTerm, SymbolBag{lab}});
        if (a.sort == CacheSort::Mixed) heads.push_back(Cache{CacheSort::Mixed, SymbolBag{lab}});
        gs = feas_.concretize(a, &heads);
      }
      out.insert(out.end(), gs.begin(), gs.end());
    }
    return out;
  }

  /// Replaces process i of b (kNone: adds a process), drops the listed
  /// processes, and records the result unless infeasible or subsumed by b.
  void emit(Preds& out, std::size_t i, AltControl actor, Channels chans, const std::vector<std::size_t>& drop,
            BackStep st) {
    if (!feas_.feasible(actor)) return;
    AltConfig p;
    p.chans = std::move(chans);
    for (std::size_t j = 0; j < out.b.procs.size(); ++j)
      if (j != i && std::find(drop.begin(), drop.end(), j) == drop.end()) p.procs.push_back(out.b.procs[j]);
    p.procs.push_back(std::move(actor));
    p.normalize();
    if (leq_config(out.b, p) || !feas_.feasible(p)) return;
    out.found.emplace(std::move(p), std::move(st));
  }

  std::vector<Attribution> attributions(const AltConfig& b, std::size_t exclude) const {
    struct Slot {
      Symbol sym;
      std::uint32_t max;
      std::vector<std::size_t> procs;  // for spawns: candidate processes to absorb
    };
    std::vector<Slot> slots;
    for (ChanId c = 0; c < b.chans.size(); ++c)
      for (const auto& [m, n] : b.chans[c])
        if (feas_.cacheable().count(Symbol::send(c, m))) slots.push_back(Slot{Symbol::send(c, m), n, {}});
    std::map<NtId, std::vector<std::size_t>> spawned;
    for (std::size_t j = 0; j < b.procs.size(); ++j) {
      const auto& g = b.procs[j];
      if (j != exclude && g == fresh(g.head.nt) && feas_.cacheable().count(Symbol::spawn(g.head.nt)))
        spawned[g.head.nt].push_back(j);
    }
    for (auto& [y, js] : spawned)
      slots.push_back(Slot{Symbol::spawn(y), static_cast<std::uint32_t>(js.size()), js});

    std::vector<Attribution> out{Attribution{{}, b.chans, {}}};
    for (const auto& s : slots) {
      std::vector<Attribution> next;
      for (const auto& a : out)
        for (std::uint32_t n = 0; n <= s.max; ++n) {
          Attribution x = a;
          if (n) x.items.add(s.sym, n);
          if (s.sym.kind == SymbolKind::Send) x.chans[s.sym.a].remove(s.sym.b, n);
          else x.dropped.insert(x.dropped.end(), s.procs.begin(), s.procs.begin() + n);
          next.push_back(std::move(x));
        }
      out = std::move(next);
    }
    return out;
  }

  /// Backward (12)-(15): actor fires action a and becomes process i of b.
  void prefix_action(Preds& out, std::size_t i, const Symbol& a, AltControl actor) {
    const AltConfig& b = out.b;
    Channels ch = b.chans;
    switch (a.kind) {
      case SymbolKind::Recv:
        ch.at(a.a).add(a.b);
        emit(out, i, std::move(actor), std::move(ch), {}, BackStep{12});
        break;
      case SymbolKind::Send:
        ch.at(a.a).remove(a.b);  // absent m is slack
        emit(out, i, std::move(actor), std::move(ch), {}, BackStep{14});
        break;
      case SymbolKind::Spawn: {
        emit(out, i, actor, ch, {}, BackStep{13});
        for (std::size_t j = 0; j < b.procs.size(); ++j)
          if (j != i && b.procs[j] == fresh(a.a)) {
            emit(out, i, std::move(actor), std::move(ch), {j}, BackStep{13});
            break;
          }
        break;
      }
      case SymbolKind::Label:
        emit(out, i, std::move(actor), std::move(ch), {}, BackStep{15});
        break;
      case SymbolKind::NonTerminal:
        break;
    }
  }

  void matched_preds(const AltConfig& b, std::size_t i, Preds& out) {
    const AltControl& q = b.procs[i];
    const Head& h = q.head;
    const auto& delta = q.stack;

    switch (h.kind) {
      case HeadKind::NT:
        for (std::size_t ri = 0; ri < spec_.rules.size(); ++ri) {
          const Rule& r = spec_.rules[ri];
          if (r.kind == RuleKind::Call && r.first == h.nt) {
            if (cl_.is_com_nt(r.second)) rule7_preds(out, i, ri, q);
            else if (h.cache == Cache{} && !delta.empty() && delta.front().nt == r.second)
              emit(out, i,
                   AltControl{Head::nonterminal(r.lhs, delta.front().cache),
                              std::vector<Frame>(delta.begin() + 1, delta.end())},
                   b.chans, {}, BackStep{8, ri});
          }
          if (r.kind == RuleKind::TailCall && r.first == h.nt)
            prefix_action(out, i, *r.action, AltControl{Head::act_nt(*r.action, h.nt, h.cache), delta});
        }
        // (16): a Term cache dispatched above this frame.
        if (delta.size() + 1 <= k_) {
          std::vector<Frame> st{Frame{h.nt, h.cache}};
          st.insert(st.end(), delta.begin(), delta.end());
          for (const auto& a : attributions(b, i))
            emit(out, i, AltControl{Head::delayed(Cache::from(a.items)), st}, a.chans, a.dropped, BackStep{16});
        }
        break;

      case HeadKind::ActNT:
        for (std::size_t ri = 0; ri < spec_.rules.size(); ++ri) {
          const Rule& r = spec_.rules[ri];
          if (r.kind == RuleKind::TailCall && *r.action == h.act && r.first == h.nt)
            emit(out, i, AltControl{Head::nonterminal(r.lhs, h.cache), delta}, b.chans, {}, BackStep{9, ri});
        }
        break;

      case HeadKind::Act:
        for (std::size_t ri = 0; ri < spec_.rules.size(); ++ri) {
          const Rule& r = spec_.rules[ri];
          if (r.kind == RuleKind::Simple && r.action && *r.action == h.act)
            emit(out, i, AltControl{Head::nonterminal(r.lhs, h.cache), delta}, b.chans, {}, BackStep{10, ri});
        }
        break;

      case HeadKind::Delayed: {
        std::set<Symbol> acts;
        for (std::size_t ri = 0; ri < spec_.rules.size(); ++ri) {
          const Rule& r = spec_.rules[ri];
          if (r.kind != RuleKind::Simple) continue;
          if (!r.action) emit(out, i, AltControl{Head::nonterminal(r.lhs, h.cache), delta}, b.chans, {}, BackStep{10, ri});
          else acts.insert(*r.action);
        }
        for (const auto& a : acts) prefix_action(out, i, a, AltControl{Head::action(a, h.cache), delta});

        if (h.cache.sort == CacheSort::NonTerm) {
          for (const auto& a : attributions(b, i))
            emit(out, i, AltControl{Head::delayed(Cache{CacheSort::Mixed, h.cache.items + a.items}), delta}, a.chans,
                 a.dropped, BackStep{17});
        }
        // The flag keeps only labels; an empty remainder normalizes to Term.
        const bool labels_only = (h.cache.sort == CacheSort::Term && h.cache.items.empty()) ||
                                 (h.cache.sort == CacheSort::NonTerm && !h.cache.items.empty() &&
                                  !h.cache.has_nonterminal());
        if (opt_.alt.dispatch_term_caches && delta.empty() && labels_only)
          for (const auto& a : attributions(b, i))
            if (!a.items.empty())
              emit(out, i, AltControl{Head::delayed(Cache::from(h.cache.items + a.items)), {}}, a.chans, a.dropped,
                   BackStep{17});
        break;
      }
    }
  }

  /// Backward (7) for process i = NT(B, M'')·delta and rule A -> B C.
  void rule7_preds(Preds& out, std::size_t i, std::size_t ri, const AltControl& q) {
    const Rule& r = spec_.rules[ri];
    const Cache& mq = q.head.cache;
    if (mq.sort == CacheSort::NonTerm) return;  // NT heads never carry such caches
    auto put = [&](Cache m, const std::optional<SymbolBag>& img) {
      if (!img) return;
      emit(out, i, AltControl{Head::nonterminal(r.lhs, std::move(m)), q.stack}, out.b.chans, {},
           BackStep{7, ri, *img});
    };
    for (const auto& t : mq.items.sub_multisets()) {
      const SymbolBag rest = mq.items - t;
      if (mq.sort == CacheSort::Term) {
        put(Cache::from(rest), oracle_.image_covering(r.second, t, CcfgOracle::Mode::Terminal));
        continue;
      }
      if (!rest.any_of([](const Symbol& s) { return s.is_nonterminal(); }))
        put(Cache::from(rest), oracle_.image_covering(r.second, t, CcfgOracle::Mode::WithNT));
      auto any = oracle_.image_covering(r.second, t, CcfgOracle::Mode::Any);
      put(Cache{CacheSort::Mixed, rest}, any);
    }
  }

  /// Actors that are not a process of b: their own successor is slack, so
  /// they only matter when they consume part of b.
  void fresh_preds(const AltConfig& b, Preds& out) {
    for (const auto& a : feas_.controls()) {
      const bool acting = a.kind == HeadKind::Act || a.kind == HeadKind::ActNT;
      if (acting && a.act.kind == SymbolKind::Send && b.chans.at(a.act.a).contains(a.act.b)) {
        Channels ch = b.chans;
        ch[a.act.a].remove(a.act.b);
        for (auto& g : feas_.concretize(a)) emit(out, kNone, std::move(g), ch, {}, BackStep{14});
      }
      if (acting && a.act.kind == SymbolKind::Spawn) {
        auto it = std::find(b.procs.begin(), b.procs.end(), fresh(a.act.a));
        if (it != b.procs.end()) {
          const std::size_t j = static_cast<std::size_t>(it - b.procs.begin());
          for (auto& g : feas_.concretize(a)) emit(out, kNone, std::move(g), b.chans, {j}, BackStep{13});
        }
      }
      if (a.kind != HeadKind::Delayed) continue;
      const bool r16 = a.sort == CacheSort::Term && !a.stack.empty();
      const bool r17 = a.sort == CacheSort::Mixed;
      const bool flag = a.sort == CacheSort::Term && a.stack.empty() && opt_.alt.dispatch_term_caches;
      if (!r16 && !r17 && !flag) continue;
      for (const auto& at : attributions(b, kNone)) {
        if (at.items.empty()) continue;
        std::vector<Cache> heads{Cache{r17 ? CacheSort::Mixed : CacheSort::Term, at.items}};
        for (auto& g : feas_.concretize(a, &heads)) emit(out, kNone, std::move(g), at.chans, at.dropped, BackStep{r17 || flag ? 17 : 16});
      }
    }
  }

  /// Walks the recorded chain forward from the initial configuration. Each
  /// recorded step is tried on every process; if none lands above the next
  /// element the full successor set is searched.
  std::vector<WitnessStep> replay(std::size_t from, const Query& q) const {
    std::vector<WitnessStep> out;
    AltConfig cur = sem_.initial();
    for (std::size_t id = from; recs_[id].next != kNone; id = recs_[id].next) {
      const Rec& e = recs_[id];
      const AltConfig& goal = recs_[e.next].cfg;
      std::optional<WitnessStep> found;
      for (std::size_t i = 0; i < cur.procs.size() && !found; ++i) {
        AltStep s{e.step.rule, i, e.step.rule_index, e.step.image};
        if (auto n = sem_.apply(cur, s); n && leq_config(goal, *n)) found = WitnessStep{s, std::move(*n)};
      }
      if (!found)
        for (auto& [s, n] : sem_.successors(cur))
          if (leq_config(goal, n)) {
            found = WitnessStep{s, std::move(n)};
            break;
          }
      if (!found) throw ModelError("witness replay failed");
      cur = found->config;
      out.push_back(std::move(*found));
    }
    if (!AltSemantics::covers(cur, q.labels)) throw ModelError("witness replay does not cover the query");
    return out;
  }

  const ApcpsSpec& spec_;
  const Classification& cl_;
  std::size_t k_;
  CoverOptions opt_;
  AltSemantics sem_;
  Feasibility feas_;
  SemiInvariants invariants_;
  CcfgOracle oracle_;
  std::vector<Rec> recs_;
  IndexedBasis basis_;
};

/// Refuses unshaped specs; k = 0 uses the derived bound.
inline Decision backward_cover(const ApcpsSpec& spec, const Classification& cl, std::size_t k, const Query& q,
                               CoverOptions opt = {}) {
  auto rep = check_shaped(spec, cl);
  if (!rep.shaped) throw NotShaped(rep);
  return BackwardCover(spec, cl, k ? k : rep.k, opt).run(q);
}

/// Bounded forward search; the returned trace is re-validated step by step.
inline std::optional<std::vector<WitnessStep>> forward_witness(const ApcpsSpec& spec, const Classification& cl,
                                                               std::size_t k, const Query& q,
                                                               const ExploreBounds& bounds, AltOptions opt = {}) {
  AltSemantics sem(spec, cl, k, opt);
  auto res = sem.explore(bounds, q.labels);
  if (!res.hit) return std::nullopt;
  std::vector<WitnessStep> out;
  for (std::size_t i = 0; i < res.trace.size(); ++i) {
    const auto succ = sem.successors(res.path[i]);
    auto it = std::find_if(succ.begin(), succ.end(), [&](const auto& sn) {
      return sn.first.rule == res.trace[i].rule && sn.second == res.path[i + 1];
    });
    if (it == succ.end()) throw ModelError("forward trace does not replay");
    out.push_back(WitnessStep{it->first, it->second});
  }
  return out;
}

}  // namespace apcps
