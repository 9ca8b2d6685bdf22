#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "apcps/alt_config.hpp"
#include "apcps/explore.hpp"
#include "apcps/matching.hpp"
#include "apcps/model.hpp"

namespace apcps {

struct AltOptions {
  bool dispatch_term_caches = false;
  std::size_t rule7_depth = 64;   // derivation steps per cache extension
  std::size_t rule7_forms = 256;  // sentential forms kept per commutative non-terminal
};

/// A concrete move. `image` is the Parikh image added by rule (7).
struct AltStep {
  int rule = 0;
  std::size_t process = 0;
  std::size_t rule_index = static_cast<std::size_t>(-1);
  SymbolBag image;
};

class AltSemantics {
 public:
  AltSemantics(const ApcpsSpec& spec, Classification cl, std::size_t k, AltOptions opt = {})
      : spec_(spec), cl_(std::move(cl)), k_(k), opt_(opt), by_lhs_(spec.rules_by_lhs()),
        forms_(spec.nonterminals.size()) {}

  const ApcpsSpec& spec() const { return spec_; }
  const Classification& classification() const { return cl_; }
  std::size_t k() const { return k_; }
  const AltOptions& options() const { return opt_; }
  const std::vector<std::vector<std::size_t>>& rules_by_lhs() const { return by_lhs_; }

  AltConfig initial() const {
    AltConfig c;
    c.procs.push_back(AltControl{Head::nonterminal(spec_.start_id()), {}});
    c.chans.assign(spec_.channels.size(), {});
    return c;
  }

  /// Parikh images of sentential forms C ->* w, breadth-first, truncated by
  /// the depth and form-count bounds.
  const std::vector<SymbolBag>& derivable_images(NtId c) const {
    auto& slot = forms_.at(c);
    if (slot) return *slot;
    std::vector<SymbolBag> out{SymbolBag{Symbol::nonterminal(c)}};
    std::set<SymbolBag> seen{out.front()};
    std::size_t layer_begin = 0;
    for (std::size_t d = 0; d < opt_.rule7_depth && layer_begin < out.size(); ++d) {
      const std::size_t layer_end = out.size();
      for (std::size_t i = layer_begin; i < layer_end && out.size() < opt_.rule7_forms; ++i) {
        for (const auto& [x, n] : out[i]) {
          if (!x.is_nonterminal()) continue;
          for (auto ri : by_lhs_[x.a]) {
            SymbolBag next = out[i];
            next.remove(x);
            for (const auto& s : spec_.rules[ri].rhs()) next.add(s);
            if (seen.insert(next).second) {
              out.push_back(std::move(next));
              if (out.size() >= opt_.rule7_forms) break;
            }
          }
          if (out.size() >= opt_.rule7_forms) break;
        }
      }
      layer_begin = layer_end;
    }
    slot = std::move(out);
    return *slot;
  }

  /// Every one-step successor of c, in deterministic order.
  std::vector<std::pair<AltStep, AltConfig>> successors(const AltConfig& c) const {
    std::vector<std::pair<AltStep, AltConfig>> out;
    for (std::size_t i = 0; i < c.procs.size(); ++i) {
      if (i > 0 && c.procs[i] == c.procs[i - 1]) continue;
      process_moves(c, i, std::nullopt, out);
    }
    return out;
  }

  std::vector<AltConfig> step(const AltConfig& c) const {
    std::vector<AltConfig> out;
    for (auto& [s, n] : successors(c)) out.push_back(std::move(n));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  /// Re-executes a recorded step. Rule (7) uses the recorded image even when
  /// it lies beyond the forward derivation bound; other rules force the empty
  /// image so no derivation enumeration happens.
  std::optional<AltConfig> apply(const AltConfig& c, const AltStep& s) const {
    if (s.process >= c.procs.size()) return std::nullopt;
    std::vector<std::pair<AltStep, AltConfig>> out;
    process_moves(c, s.process, s.rule == 7 ? s.image : SymbolBag{}, out);
    for (auto& [t, n] : out)
      if (t.rule == s.rule && t.rule_index == s.rule_index && (s.rule != 7 || t.image == s.image))
        return std::move(n);
    return std::nullopt;
  }

  /// VP2: each target occurrence realized by a distinct process whose head is
  /// that label or whose delayed cache contains it.
  static bool realizes(const AltControl& g, LabelId l) {
    const auto& h = g.head;
    const Symbol lab = Symbol::label(l);
    if (h.kind == HeadKind::Act || h.kind == HeadKind::ActNT) return h.act == lab;
    if (h.kind == HeadKind::Delayed) return h.cache.items.contains(lab);
    return false;
  }
  static bool covers(const AltConfig& c, const std::vector<LabelId>& targets) {
    return perfect_left_matching(targets.size(), c.procs.size(),
                                 [&](std::size_t t, std::size_t p) { return realizes(c.procs[p], targets[t]); });
  }

  ExploreResult<AltConfig> explore(const ExploreBounds& bounds, const std::vector<LabelId>& targets,
                                   const std::function<void(const AltConfig&)>& visit = {}) const {
    return explore_from(initial(), bounds, [&](const AltConfig& c) { return covers(c, targets); }, visit);
  }

  template <typename Hit>
  ExploreResult<AltConfig> explore_from(const AltConfig& init, const ExploreBounds& bounds, Hit&& hit,
                                        const std::function<void(const AltConfig&)>& visit = {}) const {
    return bfs_explore(
        init,
        [&](const AltConfig& c) {
          std::vector<std::pair<TraceStep, AltConfig>> out;
          for (auto& [s, n] : successors(c)) out.emplace_back(TraceStep{s.rule, s.process, 0}, std::move(n));
          return out;
        },
        hit, bounds, visit);
  }

 private:
  Cache extend(const Cache& m, const SymbolBag& img) const {
    if (m.sort == CacheSort::NonTerm) return Cache::nonterm(m.items + img);
    return Cache::from(m.items + img);
  }

  void check_depth(const AltControl& g) const {
    if (g.stack.size() > k_) throw ModelError("stack bound k exceeded");
  }

  /// Sends and spawns of m leave the process; returns the new processes.
  std::vector<AltControl> dispatch(const SymbolBag& m, Channels& ch) const {
    std::vector<AltControl> spawned;
    for (const auto& [x, n] : m) {
      if (x.kind == SymbolKind::Send) ch.at(x.a).add(x.b, n);
      if (x.kind == SymbolKind::Spawn)
        for (std::uint32_t j = 0; j < n; ++j) spawned.push_back(AltControl{Head::nonterminal(x.a), {}});
    }
    return spawned;
  }

  void process_moves(const AltConfig& c, std::size_t i, const std::optional<SymbolBag>& forced_image,
                     std::vector<std::pair<AltStep, AltConfig>>& out) const {
    const AltControl& g = c.procs[i];
    const Head& h = g.head;
    auto emit = [&](AltStep s, AltControl ng, Channels ch, std::vector<AltControl> extra) {
      check_depth(ng);
      AltConfig n;
      n.chans = std::move(ch);
      n.procs = c.procs;
      n.procs[i] = std::move(ng);
      for (auto& e : extra) n.procs.push_back(std::move(e));
      n.normalize();
      s.process = i;
      out.emplace_back(std::move(s), std::move(n));
    };

    switch (h.kind) {
      case HeadKind::NT:
        for (auto ri : by_lhs_[h.nt]) {
          const Rule& r = spec_.rules[ri];
          AltStep s;
          s.rule_index = ri;
          switch (r.kind) {
            case RuleKind::Call:
              if (cl_.is_com_nt(r.second)) {
                s.rule = 7;
                auto fire = [&](const SymbolBag& img) {
                  AltStep t = s;
                  t.image = img;
                  emit(std::move(t), AltControl{Head::nonterminal(r.first, extend(h.cache, img)), g.stack}, c.chans,
                       {});
                };
                if (forced_image) fire(*forced_image);
                else
                  for (const auto& img : derivable_images(r.second)) fire(img);
              } else {
                s.rule = 8;
                AltControl ng{Head::nonterminal(r.first), {}};
                ng.stack.reserve(g.stack.size() + 1);
                ng.stack.push_back(Frame{r.second, h.cache});
                ng.stack.insert(ng.stack.end(), g.stack.begin(), g.stack.end());
                emit(s, std::move(ng), c.chans, {});
              }
              break;
            case RuleKind::TailCall:
              s.rule = 9;
              emit(s, AltControl{Head::act_nt(*r.action, r.first, h.cache), g.stack}, c.chans, {});
              break;
            case RuleKind::Simple:
              s.rule = 10;
              if (r.action) emit(s, AltControl{Head::action(*r.action, h.cache), g.stack}, c.chans, {});
              else emit(s, AltControl{Head::delayed(h.cache), g.stack}, c.chans, {});
              break;
          }
        }
        break;

      case HeadKind::Act:
      case HeadKind::ActNT: {
        const Head next = h.kind == HeadKind::Act ? Head::delayed(h.cache) : Head::nonterminal(h.nt, h.cache);
        AltControl ng{next, g.stack};
        Channels ch = c.chans;
        std::vector<AltControl> extra;
        AltStep s;
        switch (h.act.kind) {
          case SymbolKind::Recv:
            if (!ch.at(h.act.a).remove(h.act.b)) return;
            s.rule = 12;
            break;
          case SymbolKind::Spawn:
            extra.push_back(AltControl{Head::nonterminal(h.act.a), {}});
            s.rule = 13;
            break;
          case SymbolKind::Send:
            ch.at(h.act.a).add(h.act.b);
            s.rule = 14;
            break;
          case SymbolKind::Label:
            s.rule = 15;
            break;
          case SymbolKind::NonTerminal:
            throw ModelError("action head holds a non-terminal");
        }
        emit(s, std::move(ng), std::move(ch), std::move(extra));
        break;
      }

      case HeadKind::Delayed: {
        const Cache& m = h.cache;
        if (m.sort == CacheSort::Term && !g.stack.empty()) {
          Channels ch = c.chans;
          auto extra = dispatch(m.items, ch);
          AltControl ng{Head::nonterminal(g.stack.front().nt, g.stack.front().cache),
                        std::vector<Frame>(g.stack.begin() + 1, g.stack.end())};
          emit(AltStep{16}, std::move(ng), std::move(ch), std::move(extra));
        } else if (m.sort == CacheSort::Mixed) {
          Channels ch = c.chans;
          auto extra = dispatch(m.items, ch);
          auto kept = m.items.restrict_to([](const Symbol& s) { return s.is_nonterminal() || s.is_label(); });
          emit(AltStep{17}, AltControl{Head::delayed(Cache::nonterm(std::move(kept))), g.stack}, std::move(ch),
               std::move(extra));
        } else if (m.sort == CacheSort::Term && g.stack.empty() && opt_.dispatch_term_caches &&
                   m.items.any_of([](const Symbol& s) {
                     return s.kind == SymbolKind::Send || s.kind == SymbolKind::Spawn;
                   })) {
          Channels ch = c.chans;
          auto extra = dispatch(m.items, ch);
          auto kept = m.items.restrict_to([](const Symbol& s) { return s.is_label(); });
          emit(AltStep{17}, AltControl{Head::delayed(Cache::nonterm(std::move(kept))), g.stack}, std::move(ch),
               std::move(extra));
        }
        break;
      }
    }
  }

  const ApcpsSpec& spec_;
  Classification cl_;
  std::size_t k_;
  AltOptions opt_;
  std::vector<std::vector<std::size_t>> by_lhs_;
  mutable std::vector<std::optional<std::vector<SymbolBag>>> forms_;
};

inline std::vector<AltConfig> alt_step(const ApcpsSpec& spec, const Classification& cl, std::size_t k,
                                       const AltConfig& c, AltOptions opt = {}) {
  return AltSemantics(spec, cl, k, opt).step(c);
}

inline ExploreResult<AltConfig> alt_explore(const ApcpsSpec& spec, const Classification& cl, std::size_t k,
                                            const ExploreBounds& bounds, const std::vector<LabelId>& targets,
                                            AltOptions opt = {}) {
  return AltSemantics(spec, cl, k, opt).explore(bounds, targets);
}

}  // namespace apcps
