#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "apcps/alt_config.hpp"
#include "apcps/model.hpp"
#include "apcps/shapes.hpp"

namespace apcps {

namespace detail {

/// max c.x subject to A x <= b, x >= 0, for b >= 0 (so the slack basis is a
/// feasible start). Dense tableau with Bland's rule. Returns nullopt when
/// unbounded or when the pivot budget runs out.
inline std::optional<std::vector<double>> simplex_max(const std::vector<std::vector<double>>& A,
                                                      const std::vector<double>& b, const std::vector<double>& c,
                                                      std::size_t max_pivots = 100000) {
  constexpr double eps = 1e-9;
  const std::size_t m = A.size(), n = c.size(), w = n + m + 1;
  std::vector<double> T((m + 1) * w, 0.0);
  auto at = [&](std::size_t i, std::size_t j) -> double& { return T[i * w + j]; };
  std::vector<std::size_t> basis(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) at(i, j) = A[i][j];
    at(i, n + i) = 1.0;
    at(i, w - 1) = b[i];
    basis[i] = n + i;
  }
  for (std::size_t j = 0; j < n; ++j) at(m, j) = -c[j];

  for (std::size_t pivots = 0;; ++pivots) {
    if (pivots == max_pivots) return std::nullopt;
    std::size_t e = w;
    for (std::size_t j = 0; j + 1 < w; ++j)
      if (at(m, j) < -eps) {
        e = j;
        break;
      }
    if (e == w) break;
    std::size_t leave = m;
    double best = 0;
    for (std::size_t i = 0; i < m; ++i) {
      if (at(i, e) <= eps) continue;
      const double ratio = at(i, w - 1) / at(i, e);
      if (leave == m || ratio < best - eps || (ratio <= best + eps && basis[i] < basis[leave])) {
        leave = i;
        best = ratio;
      }
    }
    if (leave == m) return std::nullopt;
    const double p = at(leave, e);
    for (std::size_t j = 0; j < w; ++j) at(leave, j) /= p;
    for (std::size_t i = 0; i <= m; ++i) {
      if (i == leave) continue;
      const double f = at(i, e);
      if (std::abs(f) <= 1e-12) continue;
      for (std::size_t j = 0; j < w; ++j) at(i, j) -= f * at(leave, j);
    }
    basis[leave] = e;
  }
  std::vector<double> x(n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    if (basis[i] < n) x[basis[i]] = at(i, w - 1);
  return x;
}

}  // namespace detail

/// Structural semi-invariants of the alternative semantics. A weighting gives
/// every control shape, every cacheable symbol sitting in some cache and every
/// pending message a non-negative integer; it is a semi-invariant when no
/// abstract move can raise the total. If such a weighting puts more on a
/// pattern than on the initial configuration, nothing above the pattern is
/// reachable. Weights are found by linear programming and then re-checked in
/// exact integer arithmetic, so rounding never makes a refutation unsound.
class SemiInvariants {
 public:
  SemiInvariants(const ApcpsSpec& spec, const Feasibility& feas) : spec_(spec) {
    for (const auto& s : feas.controls()) shape_var(s);
    for (const auto& x : feas.cacheable()) sym_[x] = nvars_++;
    msg0_ = nvars_;
    nvars_ += spec.channels.size() * spec.messages.size();
    nt0_ = nvars_;
    nvars_ += spec.nonterminals.size();
    start_ = shape_var(root_shape(spec.start.value()));

    // Moves of the control shapes.
    for (const auto& e : feas.edges()) {
      Row r{{shape_var(e.to), 1}, {shape_var(e.from), -1}};
      if (e.rule == 7) r.emplace_back(nt0_ + e.cached, 1);
      if (e.rule == 12) r.emplace_back(msg_var(e.act), -1);
      if (e.rule == 14) r.emplace_back(msg_var(e.act), 1);
      if (e.rule == 13) r.emplace_back(shape_var(root_shape(e.act.a)), 1);
      rows_.push_back(std::move(r));
    }
    // Dispatch: a cached send or spawn weighs at least what it turns into.
    for (const auto& [x, v] : sym_) {
      if (x.kind == SymbolKind::Send) rows_.push_back({{msg_var(x), 1}, {v, -1}});
      if (x.kind == SymbolKind::Spawn) rows_.push_back({{shape_var(root_shape(x.a)), 1}, {v, -1}});
    }
    // g[X] bounds the weight of every sentential form derivable from X.
    for (NtId x = 0; x < spec.nonterminals.size(); ++x)
      if (auto it = sym_.find(Symbol::nonterminal(x)); it != sym_.end())
        rows_.push_back({{it->second, 1}, {nt0_ + x, -1}});
    for (const auto& rule : spec.rules) {
      if (!sym_.count(Symbol::nonterminal(rule.lhs))) continue;  // never cached, unconstrained
      Row r{{nt0_ + rule.lhs, -1}};
      for (const auto& s : rule.rhs()) {
        if (s.is_nonterminal()) r.emplace_back(nt0_ + s.a, 1);
        else if (auto it = sym_.find(s); it != sym_.end()) r.emplace_back(it->second, 1);
      }
      rows_.push_back(std::move(r));
    }
  }

  std::size_t variables() const { return nvars_; }
  std::size_t constraints() const { return rows_.size(); }

  /// Integer weights separating b from the initial configuration, if the
  /// linear relaxation finds some.
  std::optional<std::vector<std::int64_t>> refute(const AltConfig& b) const {
    const auto count = demand(b);
    std::vector<double> c(nvars_, 0.0);
    for (const auto& [v, k] : count) c[v] += static_cast<double>(k);
    c[start_] -= 1.0;

    std::vector<std::vector<double>> A;
    A.reserve(rows_.size() + 1);
    for (const auto& r : rows_) {
      std::vector<double> a(nvars_, 0.0);
      for (const auto& [v, k] : r) a[v] += k;
      A.push_back(std::move(a));
    }
    A.emplace_back(nvars_, 1.0);  // bounds the otherwise homogeneous cone
    std::vector<double> rhs(A.size(), 0.0);
    rhs.back() = 1.0;

    auto x = detail::simplex_max(A, rhs, c);
    if (!x) return std::nullopt;
    const double top = *std::max_element(x->begin(), x->end());
    if (top <= 1e-9) return std::nullopt;
    for (std::int64_t scale = 1; scale <= 64; ++scale) {
      std::vector<std::int64_t> w(nvars_);
      for (std::size_t i = 0; i < nvars_; ++i) w[i] = std::llround((*x)[i] / top * static_cast<double>(scale));
      if (separates(w, count)) return w;
    }
    return std::nullopt;
  }

  bool refutes(const AltConfig& b) const { return refute(b).has_value(); }

  std::int64_t weigh(const std::vector<std::int64_t>& w, const AltConfig& c) const {
    std::int64_t total = 0;
    for (const auto& [v, k] : demand(c)) total += k * w[v];
    return total;
  }

  /// Exact check that w is a semi-invariant putting more on the pattern than
  /// on the initial configuration.
  bool separates(const std::vector<std::int64_t>& w, const std::map<std::size_t, std::int64_t>& count) const {
    for (auto v : w)
      if (v < 0) return false;
    for (const auto& r : rows_) {
      std::int64_t s = 0;
      for (const auto& [v, k] : r) s += k * w[v];
      if (s > 0) return false;
    }
    std::int64_t total = 0;
    for (const auto& [v, k] : count) total += k * w[v];
    return total > w[start_];
  }

  /// Lower bounds on the weighted places of any configuration above b.
  std::map<std::size_t, std::int64_t> demand(const AltConfig& b) const {
    std::map<std::size_t, std::int64_t> out;
    auto cache = [&](const Cache& m) {
      for (const auto& [s, k] : m.items)
        if (auto it = sym_.find(s); it != sym_.end()) out[it->second] += k;
    };
    for (const auto& g : b.procs) {
      if (auto it = shapes_.find(abstract_control(g)); it != shapes_.end()) ++out[it->second];
      cache(g.head.cache);
      for (const auto& f : g.stack) cache(f.cache);
    }
    for (std::size_t ch = 0; ch < b.chans.size(); ++ch)
      for (const auto& [m, k] : b.chans[ch]) out[msg0_ + ch * spec_.messages.size() + m] += k;
    return out;
  }

 private:
  using Row = std::vector<std::pair<std::size_t, std::int64_t>>;  // sum of coef * var <= 0

  static AbsControl root_shape(NtId y) { return AbsControl{HeadKind::NT, {}, y, CacheSort::Term, {}}; }

  std::size_t shape_var(const AbsControl& a) {
    auto [it, fresh] = shapes_.try_emplace(a, nvars_);
    if (fresh) ++nvars_;
    return it->second;
  }
  std::size_t msg_var(const Symbol& s) const { return msg0_ + s.a * spec_.messages.size() + s.b; }

  const ApcpsSpec& spec_;
  std::size_t nvars_ = 0, msg0_ = 0, nt0_ = 0, start_ = 0;
  std::map<AbsControl, std::size_t> shapes_;
  std::map<Symbol, std::size_t> sym_;
  std::vector<Row> rows_;
};

}  // namespace apcps
