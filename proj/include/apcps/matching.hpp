#pragma once

#include <cstddef>
#include <vector>

namespace apcps {

/// Size of a maximum matching in the bipartite graph left x right where
/// `edge(i, j)` says left i may be matched to right j (augmenting paths).
template <typename Edge>
std::size_t max_bipartite_matching(std::size_t n_left, std::size_t n_right, Edge&& edge) {
  std::vector<std::vector<std::size_t>> adj(n_left);
  for (std::size_t i = 0; i < n_left; ++i)
    for (std::size_t j = 0; j < n_right; ++j)
      if (edge(i, j)) adj[i].push_back(j);

  constexpr std::size_t none = static_cast<std::size_t>(-1);
  std::vector<std::size_t> owner(n_right, none);
  std::vector<char> seen;
  auto augment = [&](auto&& self, std::size_t i) -> bool {
    for (auto j : adj[i]) {
      if (seen[j]) continue;
      seen[j] = 1;
      if (owner[j] == none || self(self, owner[j])) {
        owner[j] = i;
        return true;
      }
    }
    return false;
  };
  std::size_t matched = 0;
  for (std::size_t i = 0; i < n_left; ++i) {
    if (adj[i].empty()) continue;
    seen.assign(n_right, 0);
    if (augment(augment, i)) ++matched;
  }
  return matched;
}

/// True iff every left vertex can be matched.
template <typename Edge>
bool perfect_left_matching(std::size_t n_left, std::size_t n_right, Edge&& edge) {
  if (n_left > n_right) return false;
  return max_bipartite_matching(n_left, n_right, std::forward<Edge>(edge)) == n_left;
}

}  // namespace apcps
