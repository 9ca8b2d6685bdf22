#pragma once

// Subcommand bodies for apcps-cover. Each returns a RunReport; main() only
// parses flags and prints.

#include <chrono>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "apcps/apcps.hpp"

namespace apcps::cli {

using Json = nlohmann::ordered_json;

enum Exit : int { kOk = 0, kNegative = 1, kError = 2, kUnshaped = 3 };

/// Ordered fields kept twice: a typed JSON value for --json-like and the
/// human rendering for the key: value lines.
struct RunReport {
  int exit_code = kOk;
  Json doc = Json::object();
  std::vector<std::pair<std::string, std::string>> lines;

  void put(const std::string& key, Json value, std::string text) {
    doc[key] = std::move(value);
    lines.emplace_back(key, std::move(text));
  }
  void put(const std::string& key, const Json& value) { put(key, value, render(value)); }
  /// Arrays of records print one line per entry.
  void put_records(const std::string& key, Json rows, const std::vector<std::string>& text) {
    doc[key] = std::move(rows);
    for (std::size_t i = 0; i < text.size(); ++i) lines.emplace_back(key + "[" + std::to_string(i) + "]", text[i]);
  }

  std::string text() const {
    std::string out;
    for (const auto& [k, v] : lines) out += k + ": " + v + "\n";
    return out;
  }

  static std::string render(const Json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "yes" : "no";
    if (v.is_null()) return "none";
    if (v.is_array()) {
      std::string out;
      for (const auto& x : v) out += (out.empty() ? "" : ", ") + render(x);
      return out;
    }
    return v.dump();
  }
};

struct Flags {
  std::optional<std::size_t> k;
  bool dispatch_term_caches = false;
  std::size_t max_steps = 10000;
  std::size_t max_configs = 200000;
  bool witness = false;
  std::string semantics = "alt";
};

struct Loaded {
  ApcpsSpec spec;
  Classification cl;
  ShapeReport shape;
};

inline Loaded load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  Loaded l{parse_spec(ss.str()), {}, {}};
  l.cl = classify(l.spec);
  l.shape = check_shaped(l.spec, l.cl);
  return l;
}

inline double millis_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

inline std::string show_std(const ApcpsSpec& spec, const StdConfig& c) {
  std::string out;
  for (std::size_t i = 0; i < c.procs.size(); ++i) {
    std::string w;
    for (const auto& s : c.procs[i].linearize()) w += (w.empty() ? "" : " ") + spec.show(s);
    out += (i ? " || " : "") + ("[" + w + "]");
  }
  if (c.procs.empty()) out = "[]";
  return out + " <| " + show(spec, c.chans);
}

inline void put_shape(RunReport& r, const Loaded& l, std::size_t k) {
  Json v = Json::array();
  std::vector<std::string> rules;
  for (auto ri : l.shape.violation) {
    rules.push_back(l.spec.show(l.spec.rules.at(ri)));
    v.push_back(rules.back());
  }
  r.put("shaped", l.shape.shaped, l.shape.shaped ? "yes, k=" + std::to_string(k) : "no");
  r.doc["k"] = l.shape.shaped ? Json(k) : Json(nullptr);
  r.put("cycle", v);
}

inline Query labels_query(const ApcpsSpec& spec, const std::vector<std::string>& labels, RunReport& r) {
  auto q = make_query(spec, labels);
  r.put("labels", Json(labels));
  return q;
}

inline RunReport run_check(const std::string& path) {
  const auto t0 = std::chrono::steady_clock::now();
  auto l = load(path);
  RunReport r;
  r.put("command", "check");
  r.put("file", path);
  Json classes = Json::object(), com = Json::array(), ncom = Json::array();
  for (NtId x = 0; x < l.spec.nonterminals.size(); ++x) {
    const auto& n = l.spec.nonterminals[x];
    classes[n] = l.cl.is_com_nt(x) ? "ComN" : "NComN";
    (l.cl.is_com_nt(x) ? com : ncom).push_back(n);
  }
  r.put("ComN", com);
  r.put("NComN", ncom);
  r.doc["classes"] = classes;
  put_shape(r, l, l.shape.k);
  r.put("time_ms", millis_since(t0));
  r.exit_code = l.shape.shaped ? kOk : kUnshaped;
  return r;
}

inline RunReport run_cover(const std::string& path, const std::vector<std::string>& labels, const Flags& f) {
  const auto t0 = std::chrono::steady_clock::now();
  auto l = load(path);
  RunReport r;
  r.put("command", "cover");
  r.put("file", path);
  auto q = labels_query(l.spec, labels, r);
  const std::size_t k = f.k.value_or(l.shape.k);
  put_shape(r, l, k);
  if (!l.shape.shaped) {
    r.exit_code = kUnshaped;
    return r;
  }
  CoverOptions opt;
  opt.alt.dispatch_term_caches = f.dispatch_term_caches;
  opt.witness = f.witness;
  BackwardCover bc(l.spec, l.cl, k, opt);
  const auto d = bc.run(q);
  r.put("verdict", d.covered ? "COVERED" : "NOT_COVERED");
  r.put("complete", d.complete);
  r.put("iterations", d.iterations);
  r.put("basis_size", d.basis_size);
  r.put("preds_emitted", d.preds_emitted);
  r.put("pred_failures", d.pred_failures);
  r.put("targets_refuted", d.targets_refuted);
  Json rows = Json::array();
  std::vector<std::string> text;
  if (d.witness) {
    for (const auto& w : *d.witness) {
      const auto cfg = show(l.spec, w.config);
      rows.push_back(Json{{"rule", w.step.rule}, {"process", w.step.process}, {"config", cfg}});
      text.push_back("rule " + std::to_string(w.step.rule) + ", process " + std::to_string(w.step.process) + ", " +
                     cfg);
    }
  }
  if (d.witness) r.put_records("witness", rows, text);
  else r.doc["witness"] = nullptr;
  r.put("time_ms", millis_since(t0));
  r.exit_code = d.covered ? kOk : kNegative;
  return r;
}

template <typename Config, typename Show>
void put_explore(RunReport& r, const ExploreResult<Config>& res, Show&& show_config) {
  r.put("hit", res.hit);
  r.put("truncated", res.truncated);
  r.put("visited", res.visited);
  r.put("depth", res.depth);
  Json rows = Json::array();
  std::vector<std::string> text;
  for (std::size_t i = 0; i < res.trace.size(); ++i) {
    const auto cfg = show_config(res.path[i + 1]);
    rows.push_back(Json{{"rule", res.trace[i].rule}, {"process", res.trace[i].process}, {"config", cfg}});
    text.push_back("rule " + std::to_string(res.trace[i].rule) + ", process " +
                   std::to_string(res.trace[i].process) + ", " + cfg);
  }
  r.put_records("trace", rows, text);
  r.exit_code = res.hit ? kOk : kNegative;
}

inline RunReport run_explore(const std::string& path, const std::vector<std::string>& labels, const Flags& f) {
  if (f.max_steps == 0 || f.max_configs == 0) throw ModelError("bounds must be positive");
  if (f.semantics != "std" && f.semantics != "alt") throw ModelError("semantics must be std or alt");
  const auto t0 = std::chrono::steady_clock::now();
  auto l = load(path);
  RunReport r;
  r.put("command", "explore");
  r.put("file", path);
  auto q = labels_query(l.spec, labels, r);
  r.put("semantics", f.semantics);
  r.put("max_steps", f.max_steps);
  r.put("max_configs", f.max_configs);
  const ExploreBounds bounds{f.max_steps, f.max_configs};
  if (f.semantics == "std") {
    auto res = std_explore(l.spec, l.cl, bounds, q.labels);
    put_explore(r, res, [&](const StdConfig& c) { return show_std(l.spec, c); });
  } else {
    const std::size_t k = f.k.value_or(l.shape.k);
    put_shape(r, l, k);
    if (!l.shape.shaped) {
      r.exit_code = kUnshaped;
      return r;
    }
    AltOptions opt;
    opt.dispatch_term_caches = f.dispatch_term_caches;
    auto res = alt_explore(l.spec, l.cl, k, bounds, q.labels, opt);
    put_explore(r, res, [&](const AltConfig& c) { return show(l.spec, c); });
  }
  r.put("time_ms", millis_since(t0));
  return r;
}

/// A random spec that passes the shape check, in the input format.
inline std::string run_generate(std::uint64_t seed, const RandomSpecParams& p = {}) {
  std::mt19937 rng(static_cast<std::mt19937::result_type>(seed));
  for (;;) {
    auto s = random_spec(rng, p);
    auto cl = classify(s);
    if (check_shaped(s, cl).shaped) return to_source(s);
  }
}

}  // namespace apcps::cli
