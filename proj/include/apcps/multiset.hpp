#pragma once

/// \file
/// Finite multisets stored as sorted (element, count) vectors.

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

namespace apcps {

inline void hash_combine(std::size_t& seed, std::size_t v) {
  seed ^= v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2);
}

/// Multiset over a totally ordered element type. Entries are kept sorted by
/// element with strictly positive counts, so equal multisets are equal values.
template <typename T>
class Multiset {
 public:
  using Entry = std::pair<T, std::uint32_t>;

  Multiset() = default;
  Multiset(std::initializer_list<T> items) {
    for (const auto& x : items) add(x);
  }

  static Multiset of(std::span<const T> items) {
    Multiset m;
    for (const auto& x : items) m.add(x);
    return m;
  }

  void add(const T& x, std::uint32_t n = 1) {
    if (n == 0) return;
    auto it = lower(x);
    if (it != entries_.end() && it->first == x) {
      it->second += n;
    } else {
      entries_.insert(it, Entry{x, n});
    }
  }

  /// Removes up to n copies; returns false (and leaves the multiset untouched)
  /// when fewer than n copies are present.
  bool remove(const T& x, std::uint32_t n = 1) {
    if (n == 0) return true;
    auto it = lower(x);
    if (it == entries_.end() || !(it->first == x) || it->second < n) return false;
    it->second -= n;
    if (it->second == 0) entries_.erase(it);
    return true;
  }

  std::uint32_t count(const T& x) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), x,
                               [](const Entry& e, const T& v) { return e.first < v; });
    return (it != entries_.end() && it->first == x) ? it->second : 0;
  }

  bool contains(const T& x) const { return count(x) > 0; }
  bool empty() const { return entries_.empty(); }
  std::size_t distinct() const { return entries_.size(); }

  std::size_t size() const {
    std::size_t n = 0;
    for (const auto& e : entries_) n += e.second;
    return n;
  }

  const std::vector<Entry>& entries() const { return entries_; }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  /// Multiset union (sum of counts).
  Multiset& operator+=(const Multiset& o) {
    for (const auto& [x, n] : o.entries_) add(x, n);
    return *this;
  }
  friend Multiset operator+(Multiset a, const Multiset& b) { return a += b; }

  /// Truncated difference: counts never drop below zero.
  friend Multiset operator-(const Multiset& a, const Multiset& b) {
    Multiset r;
    for (const auto& [x, n] : a.entries_) {
      auto m = b.count(x);
      if (n > m) r.entries_.push_back(Entry{x, n - m});
    }
    return r;
  }

  /// Multiset inclusion.
  bool included_in(const Multiset& o) const {
    auto it = o.entries_.begin();
    for (const auto& [x, n] : entries_) {
      while (it != o.entries_.end() && it->first < x) ++it;
      if (it == o.entries_.end() || !(it->first == x) || it->second < n) return false;
    }
    return true;
  }

  template <typename Pred>
  Multiset restrict_to(Pred&& keep) const {
    Multiset r;
    for (const auto& e : entries_)
      if (keep(e.first)) r.entries_.push_back(e);
    return r;
  }

  template <typename Pred>
  bool any_of(Pred&& p) const {
    return std::any_of(entries_.begin(), entries_.end(),
                       [&](const Entry& e) { return p(e.first); });
  }

  /// Every sub-multiset, in no particular order. Callers keep inputs small.
  std::vector<Multiset> sub_multisets() const {
    std::vector<Multiset> out{Multiset{}};
    for (const auto& [x, n] : entries_) {
      std::vector<Multiset> next;
      next.reserve(out.size() * (n + 1));
      for (const auto& base : out) {
        for (std::uint32_t i = 0; i <= n; ++i) {
          Multiset m = base;
          if (i) m.entries_.push_back(Entry{x, i});
          next.push_back(std::move(m));
        }
      }
      out = std::move(next);
    }
    return out;
  }

  std::size_t hash() const {
    std::size_t h = entries_.size();
    for (const auto& [x, n] : entries_) {
      hash_combine(h, std::hash<T>{}(x));
      hash_combine(h, n);
    }
    return h;
  }

  friend bool operator==(const Multiset&, const Multiset&) = default;
  friend auto operator<=>(const Multiset&, const Multiset&) = default;

 private:
  typename std::vector<Entry>::iterator lower(const T& x) {
    return std::lower_bound(entries_.begin(), entries_.end(), x,
                            [](const Entry& e, const T& v) { return e.first < v; });
  }

  std::vector<Entry> entries_;
};

/// Parikh image: occurrence count of every symbol of a word.
template <typename T>
Multiset<T> parikh(std::span<const T> word) {
  return Multiset<T>::of(word);
}

}  // namespace apcps
