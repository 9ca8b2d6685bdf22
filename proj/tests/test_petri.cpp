#include <gtest/gtest.h>

#include <random>
#include <set>

#include "support.hpp"

using namespace apcps;
using apcps::testing::forward_cover_bfs;
using apcps::testing::random_marking;
using apcps::testing::random_net;
using apcps::testing::random_spec;

namespace {

const char* kRGrammar = "channels c\nmessages m\nstart R\nrule R -> send c m R\nrule R -> eps\n";

Marking mk(const CcfgNet& n, std::initializer_list<std::pair<Symbol, std::uint32_t>> items) {
  Marking m;
  for (const auto& [s, k] : items) m.add(*n.place(s), k);
  return m;
}

std::set<Marking> reachable_within(const PetriNet& net, const Marking& init, std::size_t steps) {
  std::set<Marking> seen{init};
  std::vector<Marking> layer{init};
  for (std::size_t d = 0; d < steps; ++d) {
    std::vector<Marking> next;
    for (const auto& m : layer)
      for (std::size_t t = 0; t < net.transitions.size(); ++t)
        if (auto n = fire(net, m, t); n && seen.insert(*n).second) next.push_back(*n);
    layer = std::move(next);
  }
  return seen;
}

// Oracle on words: sentential forms reachable by rewriting one occurrence at a time.
std::set<SymbolBag> sentential_images(const ApcpsSpec& s, NtId c, std::size_t steps) {
  std::set<std::vector<Symbol>> seen{{Symbol::nonterminal(c)}};
  std::vector<std::vector<Symbol>> layer{{Symbol::nonterminal(c)}};
  for (std::size_t d = 0; d < steps; ++d) {
    std::vector<std::vector<Symbol>> next;
    for (const auto& w : layer)
      for (std::size_t i = 0; i < w.size(); ++i) {
        if (!w[i].is_nonterminal()) continue;
        for (const auto& r : s.rules) {
          if (r.lhs != w[i].a) continue;
          std::vector<Symbol> v(w.begin(), w.begin() + static_cast<long>(i));
          for (const auto& x : r.rhs()) v.push_back(x);
          v.insert(v.end(), w.begin() + static_cast<long>(i) + 1, w.end());
          std::vector<Symbol> key = v;
          std::sort(key.begin(), key.end());
          if (seen.insert(key).second) next.push_back(key);
        }
      }
    layer = std::move(next);
  }
  std::set<SymbolBag> out;
  for (const auto& w : seen) out.insert(SymbolBag::of(w));
  return out;
}

}  // namespace

TEST(Encode, RGrammar) {
  auto s = parse_spec(kRGrammar);
  auto cl = classify(s);
  auto n = encode_ccfg(s, cl);
  EXPECT_EQ(n.net.places.size(), 2u);
  EXPECT_EQ(n.net.transitions.size(), 2u);
  auto reach = reachable_within(n.net, n.initial(0), 6);
  const auto R = Symbol::nonterminal(0), send = Symbol::send(0, 0);
  EXPECT_TRUE(reach.count(mk(n, {{send, 3}, {R, 1}})));
  for (const auto& m : reach) EXPECT_LE(m.count(*n.place(R)), 1u);
  EXPECT_NE(n.net.dump().find("R -> send(c,m) R"), std::string::npos);
}

TEST(Encode, Bounded) {
  auto s = parse_spec(kRGrammar);
  auto cl = classify(s);
  auto n = encode_ccfg_bounded(s, cl, 1);
  EXPECT_EQ(n.initial(0), mk(n, {{Symbol::nonterminal(0), 1}}));
  Marking done{*n.done};
  EXPECT_TRUE(petri_coverable(n.net, n.initial(0), done).coverable);

  auto g = parse_spec("start A\nrule A -> B B2\nrule B -> eps\nrule B2 -> eps\n");
  auto clg = classify(g);
  auto n1 = encode_ccfg_bounded(g, clg, 1);
  EXPECT_FALSE(petri_coverable(n1.net, n1.initial(0), Marking{*n1.done}).coverable);
  EXPECT_FALSE(forward_cover_bfs(n1.net, n1.initial(0), Marking{*n1.done}));
  auto n2 = encode_ccfg_bounded(g, clg, 2);
  EXPECT_TRUE(petri_coverable(n2.net, n2.initial(0), Marking{*n2.done}).coverable);

  for (std::size_t k = 1; k <= 3; ++k) {
    auto nk = encode_ccfg_bounded(g, clg, k);
    for (const auto& m : reachable_within(nk.net, nk.initial(0), 8)) EXPECT_LE(m.count(*nk.budget), k);
  }
}

TEST(Pre, Examples) {
  PetriNet net;
  net.places = {"A", "a"};
  net.transitions.push_back(Transition{Marking{0}, Marking{1}, "t", 0});
  EXPECT_EQ(petri_pre(net, Marking{1}), std::vector<Marking>{Marking{0}});
  EXPECT_EQ(petri_pre(net, Marking{1, 1}), std::vector<Marking>{(Marking{0, 1})});
  EXPECT_EQ(petri_pre(net, Marking{}), std::vector<Marking>{Marking{0}});
}

TEST(Coverable, RNet) {
  auto s = parse_spec(kRGrammar);
  auto n = encode_ccfg(s, classify(s));
  const auto send = *n.place(Symbol::send(0, 0));
  auto r = petri_coverable(n.net, n.initial(0), Marking{send, send, send});
  ASSERT_TRUE(r.coverable);
  ASSERT_EQ(r.witness.size(), 3u);
  for (auto t : r.witness) EXPECT_EQ(n.net.transitions[t].tag, "R -> send(c,m) R");

  const auto R = *n.place(Symbol::nonterminal(0));
  EXPECT_FALSE(petri_coverable(n.net, n.initial(0), Marking{R, R}).coverable);

  auto e = petri_coverable(n.net, n.initial(0), Marking{});
  EXPECT_TRUE(e.coverable);
  EXPECT_TRUE(e.witness.empty());
}

TEST(Coverable, AgreesWithForwardSearch) {
  std::mt19937 rng(31);
  int positive = 0;
  for (int i = 0; i < 200; ++i) {
    auto net = random_net(rng);
    auto init = random_marking(rng, net.places.size(), 3);
    auto target = random_marking(rng, net.places.size(), 3);
    auto back = petri_coverable(net, init, target);
    EXPECT_EQ(back.coverable, forward_cover_bfs(net, init, target)) << net.dump();
    positive += back.coverable;
  }
  EXPECT_GT(positive, 20);
}

TEST(Encode, FiringsMatchDerivations) {
  std::mt19937 rng(32);
  int checked = 0;
  for (int i = 0; i < 80; ++i) {
    auto s = random_spec(rng, {4, 1, 1, 2, 2});
    auto cl = classify(s);
    auto n = encode_ccfg(s, cl);
    for (auto c : cl.com_nonterminals()) {
      std::set<SymbolBag> via_net;
      for (const auto& m : reachable_within(n.net, n.initial(c), 6)) via_net.insert(n.symbols_of(m));
      EXPECT_EQ(via_net, sentential_images(s, c, 6));
      ++checked;
    }
  }
  EXPECT_GT(checked, 30);
}

TEST(Oracle, Examples) {
  auto s = parse_spec(kRGrammar);
  auto cl = classify(s);
  const auto send = Symbol::send(0, 0);
  auto r = commutative_cover_oracle(s, cl, SymbolBag{send, send});
  EXPECT_EQ(r, (std::vector<std::pair<NtId, SymbolBag>>{{0, {}}}));

  auto g = parse_spec("labels x y\nstart C\nrule C -> label y\n");
  auto clg = classify(g);
  auto r2 = commutative_cover_oracle(g, clg, SymbolBag{Symbol::label(0)});
  EXPECT_EQ(r2, (std::vector<std::pair<NtId, SymbolBag>>{{0, SymbolBag{Symbol::label(0)}}}));

  auto r3 = commutative_cover_oracle(s, cl, SymbolBag{});
  EXPECT_EQ(r3, (std::vector<std::pair<NtId, SymbolBag>>{{0, {}}}));
}

TEST(Oracle, ResidualsAreJustifiedAndMinimal) {
  std::mt19937 rng(33);
  for (int i = 0; i < 60; ++i) {
    auto s = random_spec(rng, {4, 1, 2, 2, 2});
    auto cl = classify(s);
    auto coms = cl.com_nonterminals();
    if (coms.empty()) continue;
    auto net = encode_ccfg(s, cl);
    // Demand drawn from places of the net.
    SymbolBag demand;
    for (int j = 0; j < 3; ++j)
      demand.add(net.symbols[std::uniform_int_distribution<std::size_t>(0, net.symbols.size() - 1)(rng)]);
    auto res = commutative_cover_oracle(s, cl, demand);
    for (const auto& [c, resid] : res) {
      auto t = demand - resid;
      auto cov = petri_coverable(net.net, net.initial(c), *net.marking(t));
      ASSERT_TRUE(cov.coverable);
      Marking m = net.initial(c);
      for (auto tr : cov.witness) m = *fire(net.net, m, tr);
      EXPECT_TRUE(demand.included_in(resid + net.symbols_of(m)));
    }
    for (const auto& a : res)
      for (const auto& b : res)
        if (a != b && a.first == b.first) EXPECT_FALSE(a.second.included_in(b.second));
  }
}

TEST(Oracle, Modes) {
  auto g = parse_spec("labels x\nstart C\nrule C -> label x D\nrule D -> D D\nrule D -> eps\n");
  auto cl = classify(g);
  CcfgOracle o(g, cl);
  const SymbolBag t{Symbol::label(0)};
  auto any = o.image_covering(0, t, CcfgOracle::Mode::Any);
  ASSERT_TRUE(any);
  auto term = o.image_covering(0, t, CcfgOracle::Mode::Terminal);
  ASSERT_TRUE(term);
  EXPECT_EQ(*term, t);
  auto with = o.image_covering(0, t, CcfgOracle::Mode::WithNT);
  ASSERT_TRUE(with);
  EXPECT_TRUE(with->any_of([](const Symbol& s) { return s.is_nonterminal(); }));
  EXPECT_TRUE(o.productive(0));

  auto h = parse_spec("labels x\nstart C\nrule C -> label x C\n");
  CcfgOracle oh(h, classify(h));
  EXPECT_FALSE(oh.productive(0));
  EXPECT_TRUE(oh.image_covering(0, t, CcfgOracle::Mode::WithNT));
  EXPECT_FALSE(oh.image_covering(0, t, CcfgOracle::Mode::Terminal));
}
