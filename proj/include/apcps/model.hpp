#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "apcps/symbol.hpp"

namespace apcps {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) +
                           ": " + msg),
        line_(line),
        column_(column),
        message_(msg) {}
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }
  const std::string& message() const { return message_; }

 private:
  std::size_t line_;
  std::size_t column_;
  std::string message_;
};

/// Raised for ill-formed specs, undeclared symbols and broken internal invariants.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class RuleKind : std::uint8_t { Simple, TailCall, Call };

/// Simple: lhs -> action (or eps when action is empty).
/// TailCall: lhs -> action first.  Call: lhs -> first second.
struct Rule {
  RuleKind kind = RuleKind::Simple;
  NtId lhs = 0;
  std::optional<Action> action;
  NtId first = 0;
  NtId second = 0;

  static Rule simple(NtId lhs, std::optional<Action> a) { return {RuleKind::Simple, lhs, a, 0, 0}; }
  static Rule eps(NtId lhs) { return {RuleKind::Simple, lhs, std::nullopt, 0, 0}; }
  static Rule tail(NtId lhs, Action a, NtId next) { return {RuleKind::TailCall, lhs, a, next, 0}; }
  static Rule call(NtId lhs, NtId b, NtId c) { return {RuleKind::Call, lhs, std::nullopt, b, c}; }

  std::vector<Symbol> rhs() const {
    switch (kind) {
      case RuleKind::Simple:
        if (action) return {*action};
        return {};
      case RuleKind::TailCall:
        return {*action, Symbol::nonterminal(first)};
      case RuleKind::Call:
        return {Symbol::nonterminal(first), Symbol::nonterminal(second)};
    }
    return {};
  }

  friend bool operator==(const Rule&, const Rule&) = default;
};

struct ApcpsSpec {
  std::vector<std::string> channels;
  std::vector<std::string> messages;
  std::vector<std::string> labels;
  std::vector<std::string> nonterminals;
  std::string start_name;
  std::optional<NtId> start;
  std::vector<Rule> rules;

  static std::optional<std::uint32_t> find(const std::vector<std::string>& names, std::string_view n) {
    auto it = std::find(names.begin(), names.end(), n);
    if (it == names.end()) return std::nullopt;
    return static_cast<std::uint32_t>(it - names.begin());
  }
  std::optional<ChanId> channel(std::string_view n) const { return find(channels, n); }
  std::optional<MsgId> message(std::string_view n) const { return find(messages, n); }
  std::optional<LabelId> label(std::string_view n) const { return find(labels, n); }
  std::optional<NtId> nonterminal(std::string_view n) const { return find(nonterminals, n); }

  NtId start_id() const {
    if (!start) throw ModelError("start symbol not declared");
    return *start;
  }

  /// rules_by_lhs()[A] lists indices into `rules`.
  std::vector<std::vector<std::size_t>> rules_by_lhs() const {
    std::vector<std::vector<std::size_t>> out(nonterminals.size());
    for (std::size_t i = 0; i < rules.size(); ++i)
      if (rules[i].lhs < out.size()) out[rules[i].lhs].push_back(i);
    return out;
  }

  std::string show(const Symbol& s) const {
    auto nm = [](const std::vector<std::string>& v, std::uint32_t i) {
      return i < v.size() ? v[i] : "?" + std::to_string(i);
    };
    switch (s.kind) {
      case SymbolKind::NonTerminal:
        return nm(nonterminals, s.a);
      case SymbolKind::Send:
        return "send(" + nm(channels, s.a) + "," + nm(messages, s.b) + ")";
      case SymbolKind::Recv:
        return "recv(" + nm(channels, s.a) + "," + nm(messages, s.b) + ")";
      case SymbolKind::Spawn:
        return "spawn(" + nm(nonterminals, s.a) + ")";
      case SymbolKind::Label:
        return "label(" + nm(labels, s.a) + ")";
    }
    return "?";
  }

  std::string show(const Rule& r) const {
    std::string out = show(Symbol::nonterminal(r.lhs)) + " ->";
    auto rhs = r.rhs();
    if (rhs.empty()) out += " eps";
    for (const auto& s : rhs) out += " " + show(s);
    return out;
  }
};

namespace detail {

struct Token {
  std::string text;
  std::size_t column;
};

inline std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    unsigned char ch = static_cast<unsigned char>(line[i]);
    if (ch == '#') break;
    if (std::isspace(ch)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j])) && line[j] != '#') ++j;
    out.push_back(Token{std::string(line.substr(i, j - i)), i + 1});
    i = j;
  }
  return out;
}

inline bool is_reserved(std::string_view w) {
  return w == "eps" || w == "send" || w == "recv" || w == "spawn" || w == "label" || w == "->";
}

}  // namespace detail

/// Parses the line-oriented spec format. Non-terminals are declared by being
/// a rule LHS anywhere in the file, so rules may refer forward.
inline ApcpsSpec parse_spec(std::string_view text) {
  using detail::Token;
  std::vector<std::pair<std::size_t, std::vector<Token>>> lines;
  {
    std::size_t lineno = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      std::size_t nl = text.find('\n', pos);
      if (nl == std::string_view::npos) nl = text.size();
      ++lineno;
      auto line = text.substr(pos, nl - pos);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      auto toks = detail::tokenize(line);
      if (!toks.empty()) lines.emplace_back(lineno, std::move(toks));
      pos = nl + 1;
    }
  }

  ApcpsSpec spec;
  std::size_t start_line = 0;

  auto declare = [](std::vector<std::string>& names, const Token& t, std::size_t ln, const char* what) {
    if (detail::is_reserved(t.text)) throw ParseError(ln, t.column, std::string("reserved word '") + t.text + "' used as " + what + " name");
    if (std::find(names.begin(), names.end(), t.text) != names.end())
      throw ParseError(ln, t.column, std::string("duplicate ") + what + " " + t.text);
    names.push_back(t.text);
  };

  // Pass 1: declarations and rule heads.
  for (const auto& [ln, toks] : lines) {
    const auto& kw = toks[0].text;
    if (kw == "channels" || kw == "messages" || kw == "labels") {
      auto& names = kw == "channels" ? spec.channels : kw == "messages" ? spec.messages : spec.labels;
      const char* what = kw == "channels" ? "channel" : kw == "messages" ? "message" : "label";
      for (std::size_t i = 1; i < toks.size(); ++i) declare(names, toks[i], ln, what);
    } else if (kw == "start") {
      if (toks.size() != 2) throw ParseError(ln, toks[0].column, "expected 'start Name'");
      if (start_line) throw ParseError(ln, toks[0].column, "duplicate start declaration");
      spec.start_name = toks[1].text;
      start_line = ln;
    } else if (kw == "rule") {
      if (toks.size() < 4 || toks[2].text != "->")
        throw ParseError(ln, toks[0].column, "expected 'rule LHS -> body'");
      if (detail::is_reserved(toks[1].text))
        throw ParseError(ln, toks[1].column, "reserved word '" + toks[1].text + "' used as non-terminal name");
      if (!spec.nonterminal(toks[1].text)) spec.nonterminals.push_back(toks[1].text);
    } else {
      throw ParseError(ln, toks[0].column, "unknown directive '" + kw + "'");
    }
  }
  spec.start = spec.nonterminal(spec.start_name);

  // Pass 2: rule bodies.
  for (const auto& [ln, toks] : lines) {
    if (toks[0].text != "rule") continue;
    const NtId lhs = *spec.nonterminal(toks[1].text);
    std::size_t i = 3;
    const std::size_t n = toks.size();
    auto need = [&](std::size_t idx, const char* what) -> const Token& {
      if (idx >= n) {
        const auto& last = toks[n - 1];
        throw ParseError(ln, last.column + last.text.size(), std::string("expected ") + what);
      }
      return toks[idx];
    };
    auto lookup = [&](const std::vector<std::string>& names, const Token& t, const char* what) {
      auto id = ApcpsSpec::find(names, t.text);
      if (!id) throw ParseError(ln, t.column, std::string("unknown ") + what + " " + t.text);
      return *id;
    };

    const auto& head = toks[i];
    std::optional<Action> act;
    if (head.text == "eps") {
      if (n != i + 1) throw ParseError(ln, toks[i + 1].column, "unexpected token after eps");
      spec.rules.push_back(Rule::eps(lhs));
      continue;
    } else if (head.text == "send" || head.text == "recv") {
      auto c = lookup(spec.channels, need(i + 1, "channel"), "channel");
      auto m = lookup(spec.messages, need(i + 2, "message"), "message");
      act = head.text == "send" ? Symbol::send(c, m) : Symbol::recv(c, m);
      i += 3;
    } else if (head.text == "spawn") {
      act = Symbol::spawn(lookup(spec.nonterminals, need(i + 1, "non-terminal"), "non-terminal"));
      i += 2;
    } else if (head.text == "label") {
      act = Symbol::label(lookup(spec.labels, need(i + 1, "label"), "label"));
      i += 2;
    }

    if (act) {
      if (i == n) {
        spec.rules.push_back(Rule::simple(lhs, act));
      } else if (i + 1 == n) {
        spec.rules.push_back(Rule::tail(lhs, *act, lookup(spec.nonterminals, toks[i], "non-terminal")));
      } else {
        throw ParseError(ln, toks[i + 1].column, "unexpected token '" + toks[i + 1].text + "'");
      }
      continue;
    }

    // Name Name
    if (n != i + 2) {
      const auto& bad = n > i + 2 ? toks[i + 2] : toks[n - 1];
      throw ParseError(ln, bad.column, n > i + 2 ? "unexpected token '" + bad.text + "'"
                                                 : "expected 'Name Name' or an action");
    }
    auto b = lookup(spec.nonterminals, toks[i], "non-terminal");
    auto c = lookup(spec.nonterminals, toks[i + 1], "non-terminal");
    spec.rules.push_back(Rule::call(lhs, b, c));
  }
  return spec;
}

/// Every violated spec invariant, as human-readable diagnostics.
inline std::vector<std::string> validate(const ApcpsSpec& spec) {
  std::vector<std::string> out;
  const auto nN = spec.nonterminals.size();
  if (!spec.start || *spec.start >= nN || spec.nonterminals[*spec.start] != spec.start_name)
    out.push_back("start symbol not declared");

  auto nt_ok = [&](NtId x) { return x < nN; };
  auto act_ok = [&](const Action& a) {
    switch (a.kind) {
      case SymbolKind::Send:
      case SymbolKind::Recv:
        return a.a < spec.channels.size() && a.b < spec.messages.size();
      case SymbolKind::Spawn:
        return nt_ok(a.a);
      case SymbolKind::Label:
        return a.a < spec.labels.size();
      case SymbolKind::NonTerminal:
        return false;
    }
    return false;
  };

  std::vector<bool> has_rule(nN, false);
  std::set<NtId> referenced;
  for (std::size_t i = 0; i < spec.rules.size(); ++i) {
    const auto& r = spec.rules[i];
    const auto where = "rule " + std::to_string(i + 1);
    if (!nt_ok(r.lhs)) {
      out.push_back(where + ": undeclared left-hand side");
      continue;
    }
    has_rule[r.lhs] = true;
    if (r.kind != RuleKind::Call && r.action && !act_ok(*r.action))
      out.push_back(where + ": undeclared symbol in action");
    if (r.kind == RuleKind::TailCall && !r.action) out.push_back(where + ": tail call without action");
    if (r.kind != RuleKind::Simple) {
      if (!nt_ok(r.first)) out.push_back(where + ": undeclared non-terminal");
      else referenced.insert(r.first);
    }
    if (r.kind == RuleKind::Call) {
      if (!nt_ok(r.second)) out.push_back(where + ": undeclared non-terminal");
      else referenced.insert(r.second);
    }
    if (r.action && r.action->kind == SymbolKind::Spawn && nt_ok(r.action->a)) referenced.insert(r.action->a);
  }
  if (spec.start && *spec.start < nN) referenced.insert(*spec.start);
  for (NtId x : referenced)
    if (!has_rule[x]) out.push_back("non-terminal " + spec.nonterminals[x] + " has no rules");
  return out;
}

struct Classification {
  std::vector<bool> ncom;  // indexed by NtId
  std::size_t n_channels = 0;
  std::size_t n_messages = 0;
  std::size_t n_labels = 0;

  std::size_t n_nonterminals() const { return ncom.size(); }

  bool declared(const Symbol& s) const {
    switch (s.kind) {
      case SymbolKind::NonTerminal:
      case SymbolKind::Spawn:
        return s.a < ncom.size();
      case SymbolKind::Send:
      case SymbolKind::Recv:
        return s.a < n_channels && s.b < n_messages;
      case SymbolKind::Label:
        return s.a < n_labels;
    }
    return false;
  }

  bool is_commutative(const Symbol& s) const {
    if (s.kind == SymbolKind::NonTerminal) return !ncom.at(s.a);
    return s.kind != SymbolKind::Recv;
  }
  bool is_com_nt(NtId x) const { return !ncom.at(x); }

  std::vector<NtId> com_nonterminals() const { return nts(false); }
  std::vector<NtId> ncom_nonterminals() const { return nts(true); }

  /// Every declared commutative terminal.
  std::vector<Action> com_terminals() const {
    std::vector<Action> out;
    for (std::uint32_t c = 0; c < n_channels; ++c)
      for (std::uint32_t m = 0; m < n_messages; ++m) out.push_back(Symbol::send(c, m));
    for (std::uint32_t x = 0; x < ncom.size(); ++x) out.push_back(Symbol::spawn(x));
    for (std::uint32_t l = 0; l < n_labels; ++l) out.push_back(Symbol::label(l));
    std::sort(out.begin(), out.end());
    return out;
  }
  std::vector<Action> ncom_terminals() const {
    std::vector<Action> out;
    for (std::uint32_t c = 0; c < n_channels; ++c)
      for (std::uint32_t m = 0; m < n_messages; ++m) out.push_back(Symbol::recv(c, m));
    return out;
  }

 private:
  std::vector<NtId> nts(bool want) const {
    std::vector<NtId> out;
    for (NtId x = 0; x < ncom.size(); ++x)
      if (ncom[x] == want) out.push_back(x);
    return out;
  }
};

/// Least fixpoint: A is non-commutative iff some rule of A has a receive or a
/// non-commutative non-terminal on its right-hand side.
inline Classification classify(const ApcpsSpec& spec) {
  Classification cl;
  cl.ncom.assign(spec.nonterminals.size(), false);
  cl.n_channels = spec.channels.size();
  cl.n_messages = spec.messages.size();
  cl.n_labels = spec.labels.size();
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& r : spec.rules) {
      if (cl.ncom[r.lhs]) continue;
      for (const auto& s : r.rhs()) {
        if (s.is_recv() || (s.is_nonterminal() && cl.ncom[s.a])) {
          cl.ncom[r.lhs] = true;
          changed = true;
          break;
        }
      }
    }
  }
  return cl;
}

inline bool is_independent(const Classification& cl, const Symbol& x, const Symbol& y) {
  if (!cl.declared(x) || !cl.declared(y)) throw ModelError("unknown symbol");
  return x != y && cl.is_commutative(x) && cl.is_commutative(y);
}

struct ShapeReport {
  bool shaped = true;
  std::size_t k = 0;
  std::vector<std::size_t> violation;  // rule indices forming a cycle through a strict edge
};

namespace detail {

/// Tarjan SCC; returns component id per vertex (reverse topological numbering).
inline std::vector<std::size_t> tarjan(const std::vector<std::vector<std::size_t>>& adj) {
  const std::size_t n = adj.size();
  const std::size_t none = static_cast<std::size_t>(-1);
  std::vector<std::size_t> index(n, none), low(n, 0), comp(n, none);
  std::vector<bool> on(n, false);
  std::vector<std::size_t> stack;
  std::size_t counter = 0;
  std::size_t ncomp = 0;
  std::function<void(std::size_t)> visit = [&](std::size_t v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on[v] = true;
    for (auto w : adj[v]) {
      if (index[w] == none) {
        visit(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::size_t w;
      do {
        w = stack.back();
        stack.pop_back();
        on[w] = false;
        comp[w] = ncomp;
      } while (w != v);
      ++ncomp;
    }
  };
  for (std::size_t v = 0; v < n; ++v)
    if (index[v] == none) visit(v);
  return comp;
}

}  // namespace detail

/// Shape graph: edge A->B for each non-terminal B on a RHS of A, strict when
/// the rule is A -> B C with C non-commutative. Shaped iff no strict edge lies
/// inside a strongly connected component. Paths start at the start symbol and
/// at every spawn target, since spawned processes begin with a fresh stack.
inline ShapeReport check_shaped(const ApcpsSpec& spec, const Classification& cl) {
  const std::size_t n = spec.nonterminals.size();
  struct Edge {
    std::size_t to;
    bool strict;
    std::size_t rule;
  };
  std::vector<std::vector<Edge>> edges(n);
  std::vector<std::vector<std::size_t>> adj(n);
  std::vector<NtId> roots;
  if (spec.start) roots.push_back(*spec.start);
  for (std::size_t i = 0; i < spec.rules.size(); ++i) {
    const auto& r = spec.rules[i];
    if (r.kind == RuleKind::TailCall) edges[r.lhs].push_back({r.first, false, i});
    if (r.kind == RuleKind::Call) {
      edges[r.lhs].push_back({r.first, cl.ncom[r.second], i});
      edges[r.lhs].push_back({r.second, false, i});
    }
    if (r.action && r.action->kind == SymbolKind::Spawn) roots.push_back(r.action->a);
  }
  for (std::size_t v = 0; v < n; ++v)
    for (const auto& e : edges[v]) adj[v].push_back(e.to);
  const auto comp = detail::tarjan(adj);

  ShapeReport rep;
  for (std::size_t v = 0; v < n && rep.shaped; ++v) {
    for (const auto& e : edges[v]) {
      if (!e.strict || comp[e.to] != comp[v]) continue;
      // Close the cycle: BFS from e.to back to v inside the component.
      rep.shaped = false;
      rep.violation.push_back(e.rule);
      const std::size_t none = static_cast<std::size_t>(-1);
      std::vector<std::size_t> via_rule(n, none), parent(n, none);
      std::vector<bool> seen(n, false);
      std::vector<std::size_t> queue{e.to};
      seen[e.to] = true;
      for (std::size_t qi = 0; qi < queue.size() && !seen[v]; ++qi) {
        auto u = queue[qi];
        for (const auto& f : edges[u]) {
          if (comp[f.to] != comp[v] || seen[f.to]) continue;
          seen[f.to] = true;
          parent[f.to] = u;
          via_rule[f.to] = f.rule;
          queue.push_back(f.to);
        }
      }
      std::vector<std::size_t> path;
      for (std::size_t u = v; u != e.to; u = parent[u]) path.push_back(via_rule[u]);
      rep.violation.insert(rep.violation.end(), path.rbegin(), path.rend());
      break;
    }
  }
  if (!rep.shaped) return rep;

  // Longest strict-edge count over condensation paths.
  std::vector<std::vector<std::size_t>> members;
  {
    std::size_t ncomp = 0;
    for (auto c : comp) ncomp = std::max(ncomp, c + 1);
    members.assign(ncomp, {});
    for (std::size_t v = 0; v < n; ++v) members[comp[v]].push_back(v);
  }
  // Tarjan numbers components in reverse topological order: successors first.
  std::vector<std::size_t> cbest(members.size(), 0);
  for (std::size_t c = 0; c < members.size(); ++c) {
    std::size_t b = 0;
    for (auto v : members[c])
      for (const auto& e : edges[v])
        if (comp[e.to] != c) b = std::max(b, (e.strict ? 1 : 0) + cbest[comp[e.to]]);
    cbest[c] = b;
  }
  std::size_t m = 0;
  for (auto r : roots)
    if (r < n) m = std::max(m, cbest[comp[r]]);
  rep.k = 1 + m;
  return rep;
}

}  // namespace apcps
