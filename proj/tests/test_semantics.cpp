#include <gtest/gtest.h>

#include <map>
#include <random>
#include <set>

#include "support.hpp"

using namespace apcps;
using apcps::testing::load_corpus;
using apcps::testing::random_spec;

namespace {

// Alphabet for the congruence checks: two labels (commutative), two receives.
struct FourSymbols {
  ApcpsSpec spec = parse_spec("channels c\nmessages m n\nlabels a b\nstart S\nrule S -> eps");
  Classification cl = classify(spec);
  std::vector<Symbol> sigma{Symbol::label(0), Symbol::label(1), Symbol::recv(0, 0), Symbol::recv(0, 1)};
};

// Oracle: closure of w under swapping adjacent distinct commutative symbols.
std::set<std::vector<Symbol>> swap_closure(const Classification& cl, const std::vector<Symbol>& w) {
  std::set<std::vector<Symbol>> seen{w};
  std::vector<std::vector<Symbol>> todo{w};
  while (!todo.empty()) {
    auto u = todo.back();
    todo.pop_back();
    for (std::size_t i = 0; i + 1 < u.size(); ++i) {
      if (u[i] == u[i + 1] || !cl.is_commutative(u[i]) || !cl.is_commutative(u[i + 1])) continue;
      auto v = u;
      std::swap(v[i], v[i + 1]);
      if (seen.insert(v).second) todo.push_back(v);
    }
  }
  return seen;
}

std::vector<std::vector<Symbol>> all_words(const std::vector<Symbol>& sigma, std::size_t max_len) {
  std::vector<std::vector<Symbol>> out{{}};
  std::vector<std::vector<Symbol>> layer{{}};
  for (std::size_t n = 1; n <= max_len; ++n) {
    std::vector<std::vector<Symbol>> next;
    for (const auto& w : layer)
      for (const auto& s : sigma) {
        auto v = w;
        v.push_back(s);
        next.push_back(v);
      }
    out.insert(out.end(), next.begin(), next.end());
    layer = std::move(next);
  }
  return out;
}

AltConfig single(AltControl g, std::size_t channels) {
  AltConfig c;
  c.procs.push_back(std::move(g));
  c.chans.assign(channels, {});
  return c;
}

std::vector<LabelId> label_ids(const ApcpsSpec& s, std::initializer_list<const char*> names) {
  std::vector<LabelId> out;
  for (auto n : names) out.push_back(*s.label(n));
  return out;
}

}  // namespace

TEST(Canon, Examples) {
  FourSymbols f;
  std::vector<Symbol> w1{Symbol::label(0), Symbol::label(1)};
  auto c1 = canon(f.cl, w1);
  EXPECT_EQ(c1.lead, (SymbolBag{Symbol::label(0), Symbol::label(1)}));
  EXPECT_TRUE(c1.spine.empty());

  std::vector<Symbol> w2{Symbol::recv(0, 0)};
  auto c2 = canon(f.cl, w2);
  EXPECT_TRUE(c2.lead.empty());
  ASSERT_EQ(c2.spine.size(), 1u);
  EXPECT_EQ(c2.spine[0].first, Symbol::recv(0, 0));

  std::vector<Symbol> ab{Symbol::label(0), Symbol::label(1)}, ba{Symbol::label(1), Symbol::label(0)};
  EXPECT_EQ(canon(f.cl, ab), canon(f.cl, ba));
  std::vector<Symbol> ar{Symbol::label(0), Symbol::recv(0, 0)}, ra{Symbol::recv(0, 0), Symbol::label(0)};
  EXPECT_NE(canon(f.cl, ar), canon(f.cl, ra));

  std::vector<Symbol> bad{Symbol::label(9)};
  EXPECT_THROW(canon(f.cl, bad), ModelError);
}

TEST(Canon, AgreesWithSwapClosureUpToLength5) {
  FourSymbols f;
  auto words = all_words(f.sigma, 5);
  std::map<CanonicalWord, std::size_t> cls;
  for (const auto& w : words) {
    auto cw = canon(f.cl, w);
    for (const auto& v : swap_closure(f.cl, w)) ASSERT_EQ(canon(f.cl, v), cw);
    cls[cw]++;
  }
  // Each class size equals the size of its swap closure, so canon does not merge classes.
  for (const auto& w : words) ASSERT_EQ(cls[canon(f.cl, w)], swap_closure(f.cl, w).size());
}

TEST(Canon, ConcatMatchesCanonOfConcatenation) {
  FourSymbols f;
  std::mt19937 rng(3);
  std::uniform_int_distribution<std::size_t> sym(0, 3), len(0, 5);
  for (int i = 0; i < 500; ++i) {
    std::vector<Symbol> u(len(rng)), v(len(rng));
    for (auto& x : u) x = f.sigma[sym(rng)];
    for (auto& x : v) x = f.sigma[sym(rng)];
    auto uv = u;
    uv.insert(uv.end(), v.begin(), v.end());
    EXPECT_EQ(concat(canon(f.cl, u), canon(f.cl, v)), canon(f.cl, uv));
    EXPECT_EQ(canon(f.cl, canon(f.cl, u).linearize()), canon(f.cl, u));
  }
}

TEST(StdStep, Examples) {
  auto gs = load_corpus("G_send");
  auto cl = classify(gs);
  StdConfig c;
  std::vector<Symbol> w{Symbol::send(0, 0)};
  c.procs.push_back(canon(cl, w));
  c.chans.assign(1, {});
  auto next = std_step(gs, cl, c);
  ASSERT_EQ(next.size(), 1u);
  EXPECT_TRUE(next[0].procs[0].empty());
  EXPECT_EQ(next[0].chans[0], Multiset<MsgId>{0});

  auto gr = load_corpus("G_recv");
  auto clr = classify(gr);
  StdConfig r;
  std::vector<Symbol> wr{Symbol::recv(0, 0)};
  r.procs.push_back(canon(clr, wr));
  r.chans.assign(1, {});
  EXPECT_TRUE(std_step(gr, clr, r).empty());

  auto sp = parse_spec("start S\nrule S -> spawn X L\nrule X -> eps\nrule L -> eps");
  auto cls = classify(sp);
  StdConfig p;
  std::vector<Symbol> wp{Symbol::spawn(1), Symbol::nonterminal(2)};
  p.procs.push_back(canon(cls, wp));
  auto ns = std_successors(sp, cls, p);
  std::vector<StdConfig> spawned;
  for (auto& [st, n] : ns)
    if (st.rule == 6) spawned.push_back(n);
  ASSERT_EQ(spawned.size(), 1u);
  std::vector<Symbol> wl{Symbol::nonterminal(2)}, wx{Symbol::nonterminal(1)};
  StdConfig want;
  want.procs = {canon(cls, wl), canon(cls, wx)};
  want.normalize();
  EXPECT_EQ(spawned[0], want);
}

TEST(StdExplore, Corpus) {
  auto lab = load_corpus("G_lab");
  auto r1 = std_explore(lab, classify(lab), {}, label_ids(lab, {"l"}));
  EXPECT_TRUE(r1.hit);
  EXPECT_EQ(r1.trace.size(), 1u);

  auto dead = load_corpus("G_dead");
  auto r2 = std_explore(dead, classify(dead), {}, label_ids(dead, {"l"}));
  EXPECT_FALSE(r2.hit);
  EXPECT_FALSE(r2.truncated);

  // S => spawn(X) T, spawn, T => recv L, X => send, send, recv, L => label.
  auto sp = load_corpus("G_spawn");
  auto r3 = std_explore(sp, classify(sp), {}, label_ids(sp, {"l"}));
  EXPECT_TRUE(r3.hit);
  ASSERT_EQ(r3.trace.size(), 7u);
  std::vector<int> tags;
  for (const auto& s : r3.trace) tags.push_back(s.rule);
  EXPECT_EQ(tags, (std::vector<int>{2, 6, 2, 2, 4, 3, 2}));
}

TEST(StdExplore, TruncationFlag) {
  auto rw = load_corpus("replicated_workers");
  auto r = std_explore(rw, classify(rw), {3, 1000}, label_ids(rw, {"critical"}));
  EXPECT_FALSE(r.hit);
  EXPECT_TRUE(r.truncated);
}

TEST(AltStep, Rule16) {
  auto s = parse_spec("channels c\nmessages m\nstart X\nrule X -> recv c m");
  auto cl = classify(s);
  AltSemantics sem(s, cl, 2);
  auto c = single(AltControl{Head::delayed(Cache::from({Symbol::send(0, 0)})), {Frame{0, {}}}}, 1);
  auto next = sem.step(c);
  ASSERT_EQ(next.size(), 1u);
  auto want = single(AltControl{Head::nonterminal(0), {}}, 1);
  want.chans[0].add(0);
  EXPECT_EQ(next[0], want);
}

TEST(AltStep, Rule17) {
  auto s = parse_spec("start Y\nrule Y -> eps\nrule B -> eps");
  auto cl = classify(s);
  AltSemantics sem(s, cl, 1);
  auto c = single(AltControl{Head::delayed(Cache::from({Symbol::spawn(0), Symbol::nonterminal(1)})), {}}, 0);
  ASSERT_EQ(c.procs[0].head.cache.sort, CacheSort::Mixed);
  auto next = sem.step(c);
  ASSERT_EQ(next.size(), 1u);
  AltConfig want;
  want.procs = {AltControl{Head::delayed(Cache::nonterm({Symbol::nonterminal(1)})), {}},
                AltControl{Head::nonterminal(0), {}}};
  want.normalize();
  EXPECT_EQ(next[0], want);
  EXPECT_EQ(sem.step(next[0]).size(), 1u);  // only Y moves; the NonTerm cache is final
}

TEST(AltStep, Rule8InMix) {
  auto s = load_corpus("G_mix");
  auto cl = classify(s);
  AltSemantics sem(s, cl, check_shaped(s, cl).k);
  auto next = sem.step(sem.initial());
  ASSERT_EQ(next.size(), 1u);
  EXPECT_EQ(next[0], single(AltControl{Head::nonterminal(1), {Frame{2, {}}}}, 1));
}

TEST(AltStep, TermCacheWithEmptyStackIsStuckUnlessFlagged) {
  auto s = load_corpus("G_send");
  auto cl = classify(s);
  auto c = single(AltControl{Head::delayed(Cache::from({Symbol::send(0, 0)})), {}}, 1);
  EXPECT_TRUE(AltSemantics(s, cl, 1).step(c).empty());
  AltOptions opt;
  opt.dispatch_term_caches = true;
  auto next = AltSemantics(s, cl, 1, opt).step(c);
  ASSERT_EQ(next.size(), 1u);
  EXPECT_EQ(next[0].chans[0], Multiset<MsgId>{0});
  EXPECT_EQ(next[0].procs[0], (AltControl{Head::delayed(), {}}));
}

TEST(AltStep, GuardFires) {
  auto s = load_corpus("G_mix");
  auto cl = classify(s);
  AltSemantics sem(s, cl, 0);
  EXPECT_THROW(sem.step(sem.initial()), ModelError);
}

TEST(AltExplore, Corpus) {
  for (const char* name : {"G_lab", "G_cachedlab", "G_spawn"}) {
    auto s = load_corpus(name);
    auto cl = classify(s);
    auto r = alt_explore(s, cl, check_shaped(s, cl).k, {}, label_ids(s, {"l"}));
    EXPECT_TRUE(r.hit) << name;
  }
  auto dead = load_corpus("G_dead");
  auto cl = classify(dead);
  auto r = alt_explore(dead, cl, check_shaped(dead, cl).k, {}, label_ids(dead, {"l"}));
  EXPECT_FALSE(r.hit);
  EXPECT_FALSE(r.truncated);

  auto sp = load_corpus("G_spawn");
  auto cls = classify(sp);
  auto rs = alt_explore(sp, cls, 1, {}, label_ids(sp, {"l"}));
  std::vector<int> tags;
  for (const auto& st : rs.trace) tags.push_back(st.rule);
  EXPECT_EQ(tags, (std::vector<int>{9, 13, 9, 10, 14, 12, 10}));
}

TEST(AltExplore, CachedLabelOnlyViaCache) {
  auto s = load_corpus("G_cachedlab");
  auto cl = classify(s);
  auto r = alt_explore(s, cl, 1, {}, label_ids(s, {"l"}));
  ASSERT_TRUE(r.hit);
  const auto& last = r.path.back();
  bool in_cache = false;
  for (const auto& g : last.procs)
    in_cache |= g.head.kind == HeadKind::Delayed && g.head.cache.items.contains(Symbol::label(0));
  EXPECT_TRUE(in_cache);
}

TEST(AltStep, CachesStayWellSorted) {
  std::mt19937 rng(21);
  int checked = 0;
  for (int i = 0; i < 60; ++i) {
    auto s = random_spec(rng);
    auto cl = classify(s);
    auto rep = check_shaped(s, cl);
    if (!rep.shaped) continue;
    AltSemantics sem(s, cl, rep.k);
    sem.explore({12, 3000}, {}, [&](const AltConfig& c) {
      for (const auto& g : c.procs) {
        if (!g.head.cache.items.empty() || g.head.cache.sort != CacheSort::Term)
          ASSERT_TRUE(g.head.cache.well_sorted());
        for (const auto& f : g.stack) ASSERT_TRUE(f.cache.items.empty() || f.cache.well_sorted());
        for (const auto& f : g.stack) ASSERT_FALSE(cl.is_com_nt(f.nt));
        ASSERT_LE(g.stack.size() + 1, rep.k);
        ++checked;
      }
    });
  }
  EXPECT_GT(checked, 0);
}

TEST(Monotone, ChannelsOnly) {
  // Adding a message never removes a successor, in either semantics.
  std::mt19937 rng(22);
  for (int i = 0; i < 40; ++i) {
    auto s = random_spec(rng);
    auto cl = classify(s);
    auto rep = check_shaped(s, cl);
    if (!rep.shaped) continue;
    AltSemantics sem(s, cl, rep.k);
    std::vector<AltConfig> sample;
    sem.explore({6, 300}, {}, [&](const AltConfig& c) { sample.push_back(c); });
    for (const auto& c : sample) {
      auto more = c;
      more.chans[0].add(0);
      auto base = sem.step(c);
      auto bigger = sem.step(more);
      for (auto n : base) {
        n.chans[0].add(0);
        EXPECT_TRUE(std::binary_search(bigger.begin(), bigger.end(), n));
      }
    }
    std::vector<StdConfig> ssample;
    std_explore(s, cl, {5, 300}, {}, [&](const StdConfig& c) { ssample.push_back(c); });
    for (const auto& c : ssample) {
      auto more = c;
      more.chans[0].add(0);
      auto bigger = std_step(s, cl, more);
      for (auto n : std_step(s, cl, c)) {
        n.chans[0].add(0);
        EXPECT_TRUE(std::binary_search(bigger.begin(), bigger.end(), n));
      }
    }
  }
}

TEST(Agreement, CorpusExplorers) {
  for (const char* name : {"G_lab", "G_dead", "G_spawn", "G_cachedlab"}) {
    auto s = load_corpus(name);
    auto cl = classify(s);
    auto k = check_shaped(s, cl).k;
    auto q = label_ids(s, {"l"});
    auto a = std_explore(s, cl, {}, q);
    auto b = alt_explore(s, cl, k, {}, q);
    if (!a.truncated && !b.truncated) EXPECT_EQ(a.hit, b.hit) << name;
  }
}

TEST(Abstraction, Examples) {
  auto s = parse_spec(
      "channels c\nmessages m\nstart S\nrule S -> eps\nrule B -> eps\nrule B2 -> eps\n"
      "rule X -> recv c m\n");
  auto cl = classify(s);
  auto start = std_initial(s, cl);
  auto readings = abstract_config(cl, start);
  EXPECT_TRUE(std::count(readings.begin(), readings.end(), single(AltControl{Head::nonterminal(0), {}}, 1)));

  StdConfig c;
  std::vector<Symbol> w{Symbol::nonterminal(1), Symbol::nonterminal(2), Symbol::nonterminal(3)};
  c.procs.push_back(canon(cl, w));
  c.chans.assign(1, {});
  auto rs = abstract_config(cl, c);
  auto want = single(AltControl{Head::nonterminal(1, Cache::from({Symbol::nonterminal(2)})), {Frame{3, {}}}}, 1);
  EXPECT_TRUE(std::count(rs.begin(), rs.end(), want));
  EXPECT_TRUE(is_reading_of(cl, want, c));

  StdConfig bad;
  std::vector<Symbol> wb{Symbol::nonterminal(3), Symbol::recv(0, 0)};
  bad.procs.push_back(canon(cl, wb));
  bad.chans.assign(1, {});
  EXPECT_THROW(abstract_config(cl, bad), ModelError);
}
