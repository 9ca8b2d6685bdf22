#include <iostream>

#include <CLI11.hpp>

#include "cli.hpp"

using namespace apcps;

int main(int argc, char** argv) {
  CLI::App app{"Program-point coverability for asynchronous partially commutative pushdown systems"};
  app.require_subcommand(1);

  cli::Flags f;
  std::string file;
  std::vector<std::string> labels;
  bool json = false;
  std::size_t k = 0;
  std::uint64_t seed = 0;

  auto common = [&](CLI::App* c) {
    c->add_option("file", file, "specification file")->required();
    c->add_flag("--json-like", json, "print one JSON document instead of key: value lines");
  };
  auto bounded = [&](CLI::App* c) {
    c->add_option("labels", labels, "queried labels, repeats allowed")->required();
    c->add_option("--k", k, "stack bound override (the guard still applies)")->check(CLI::PositiveNumber);
    c->add_flag("--dispatch-term-caches", f.dispatch_term_caches,
                "let a stuck Term cache with an empty stack dispatch its sends and spawns");
  };

  auto* check = app.add_subcommand("check", "classify non-terminals and check stack shape");
  common(check);
  auto* cover = app.add_subcommand("cover", "decide coverability of the labels by backward search");
  common(cover);
  bounded(cover);
  cover->add_flag("--witness", f.witness, "print a validated forward trace when covered");
  auto* explore = app.add_subcommand("explore", "bounded forward search");
  common(explore);
  bounded(explore);
  explore->add_option("--semantics", f.semantics, "std or alt")->check(CLI::IsMember({"std", "alt"}));
  explore->add_option("--max-steps", f.max_steps, "search depth bound")->check(CLI::PositiveNumber);
  explore->add_option("--max-configs", f.max_configs, "visited configuration bound")->check(CLI::PositiveNumber);
  auto* generate = app.add_subcommand("generate", "print a random shaped specification");
  generate->add_option("--seed", seed, "generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kError;
  }
  if (k) f.k = k;

  try {
    if (*generate) {
      std::cout << cli::run_generate(seed);
      return cli::kOk;
    }
    cli::RunReport r;
    if (*check) r = cli::run_check(file);
    else if (*cover) r = cli::run_cover(file, labels, f);
    else r = cli::run_explore(file, labels, f);
    std::cout << (json ? r.doc.dump(2) + "\n" : r.text());
    return r.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kError;
  }
}
