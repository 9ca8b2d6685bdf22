#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace apcps {

/// 64-bit FNV-1a over a stream of integers; used for trace digests.
class Fnv64 {
 public:
  void add(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h_ ^= (v >> (8 * i)) & 0xffu;
      h_ *= 0x100000001b3ULL;
    }
  }
  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

struct ExploreBounds {
  std::size_t max_steps = 10000;     // BFS depth
  std::size_t max_configs = 200000;  // distinct configurations visited
};

/// One trace line: rule tag (2..17), acting process index in the source
/// configuration, digest of the resulting configuration.
struct TraceStep {
  int rule = 0;
  std::size_t process = 0;
  std::uint64_t digest = 0;
};

template <typename Config>
struct ExploreResult {
  bool hit = false;
  bool truncated = false;
  std::size_t visited = 0;
  std::size_t depth = 0;               // deepest BFS layer expanded
  std::vector<TraceStep> trace;        // present iff hit
  std::vector<Config> path;            // configurations init..hit, iff hit
};

template <typename Config>
struct ConfigHash {
  std::size_t operator()(const Config& c) const { return c.hash(); }
};

/// Breadth-first search. `succ(c)` returns (TraceStep-without-digest, config)
/// pairs; `is_hit(c)` is the goal test; `visit(c)` observes every new config.
template <typename Config, typename Succ, typename Hit>
ExploreResult<Config> bfs_explore(const Config& init, Succ&& succ, Hit&& is_hit, const ExploreBounds& bounds,
                                  const std::function<void(const Config&)>& visit = {}) {
  ExploreResult<Config> res;
  std::vector<Config> nodes{init};
  std::vector<std::size_t> parent{static_cast<std::size_t>(-1)};
  std::vector<TraceStep> via{TraceStep{}};
  std::vector<std::size_t> depth{0};
  std::unordered_map<Config, std::size_t, ConfigHash<Config>> seen{{init, 0}};

  auto finish = [&](std::size_t idx) {
    res.hit = true;
    std::vector<std::size_t> chain;
    for (std::size_t i = idx; i != 0; i = parent[i]) chain.push_back(i);
    res.path.push_back(nodes[0]);
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
      res.trace.push_back(via[*it]);
      res.path.push_back(nodes[*it]);
    }
  };

  if (visit) visit(init);
  if (is_hit(init)) {
    finish(0);
    res.visited = 1;
    return res;
  }
  for (std::size_t head = 0; head < nodes.size(); ++head) {
    if (depth[head] >= bounds.max_steps) {
      if (!succ(nodes[head]).empty()) res.truncated = true;
      continue;
    }
    res.depth = std::max(res.depth, depth[head] + 1);
    for (auto& [step, next] : succ(nodes[head])) {
      if (seen.count(next)) continue;
      if (nodes.size() >= bounds.max_configs) {
        res.truncated = true;
        res.visited = nodes.size();
        return res;
      }
      Fnv64 f;
      f.add(next.hash());
      step.digest = f.value();
      seen.emplace(next, nodes.size());
      nodes.push_back(std::move(next));
      parent.push_back(head);
      via.push_back(step);
      depth.push_back(depth[head] + 1);
      if (visit) visit(nodes.back());
      if (is_hit(nodes.back())) {
        finish(nodes.size() - 1);
        res.visited = nodes.size();
        return res;
      }
    }
  }
  res.visited = nodes.size();
  return res;
}

}  // namespace apcps
