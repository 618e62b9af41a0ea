// cqe: command-line front end for the query-index engine.
//
// Subcommands:
//   run      preprocess a query and stream its answers (constant-delay cursor)
//   analyze  report decompositions, refinements and chosen plans
//   test     membership tests against the preprocessed index
//   oracle   naive exhaustive evaluation (ground truth)
//   bench    preprocessing/enumeration timings on the built-in 4-cycle family
//
// Exit codes: 0 ok, 1 parse/IO error, 2 width budget exceeded, 3 too many
// variables for decomposition enumeration.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cqe/fixtures.hpp"
#include "cqe/oracle.hpp"
#include "cqe/pipeline.hpp"

namespace {

using namespace cqe;
using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

struct Config {
  std::string query;     // file path or inline query text
  std::string data;      // directory of relation files
  std::string manifest;  // defaults to <data>/manifest.txt
  double w = 1.5;
  double delta = 0.5;
  uint64_t limit = UINT64_MAX;
  bool has_limit = false;
  bool sentinel = false;
  bool stable = false;
  bool profile = false;
  uint64_t seed = 0;  // reserved: fixes randomized choices (none are live yet)
};

void add_common(CLI::App* cmd, Config& cfg, bool needs_data) {
  cmd->add_option("-q,--query", cfg.query,
                  "query file, or the query text itself if no such file exists")
      ->required();
  auto* d = cmd->add_option("-d,--data", cfg.data,
                            "directory with one TSV file per relation "
                            "(default: $CQE_DATA_ROOT)");
  cmd->add_option("-m,--manifest", cfg.manifest,
                  "manifest of 'Name/arity' lines (default: <data>/manifest.txt)");
  cmd->add_option("--seed", cfg.seed, "seed for randomized choices");
  if (needs_data && !std::getenv("CQE_DATA_ROOT")) d->required();
}

CQ load_query(const Config& cfg) {
  std::string text = cfg.query;
  if (std::filesystem::exists(cfg.query)) {
    std::ifstream in(cfg.query);
    if (!in) throw IoError("cannot open query file: " + cfg.query);
    std::stringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  return parse_cq(text);
}

std::shared_ptr<Structure> load_data(Config& cfg) {
  if (cfg.data.empty()) {
    const char* env = std::getenv("CQE_DATA_ROOT");
    if (!env) throw IoError("no data directory given and CQE_DATA_ROOT unset");
    cfg.data = env;
  }
  if (cfg.manifest.empty())
    cfg.manifest = (std::filesystem::path(cfg.data) / "manifest.txt").string();
  return std::make_shared<Structure>(load_structure(cfg.data, cfg.manifest));
}

std::string tuple_text(const Domain& dom, std::span<const Value> t) {
  std::string out;
  for (size_t i = 0; i < t.size(); ++i) {
    if (i) out += '\t';
    out += dom.name(t[i]);
  }
  return out;
}

void print_delay_report(const std::vector<uint64_t>& gaps,
                        const std::vector<double>& gap_ms, double total_ms) {
  auto median = [](auto v) -> double {
    if (v.empty()) return 0;
    std::sort(v.begin(), v.end());
    return static_cast<double>(v[v.size() / 2]);
  };
  uint64_t max_steps = gaps.empty() ? 0 : *std::max_element(gaps.begin(), gaps.end());
  double max_ms = gap_ms.empty() ? 0 : *std::max_element(gap_ms.begin(), gap_ms.end());
  std::cerr << "delay-profile: emissions=" << gaps.size()
            << " max-steps=" << max_steps << " median-steps=" << median(gaps)
            << " max-ms=" << max_ms << " median-ms=" << median(gap_ms)
            << " total-ms=" << total_ms << "\n";
}

int cmd_run(Config& cfg) {
  const CQ q = load_query(cfg);
  auto a = load_data(cfg);
  const auto t0 = Clock::now();
  QueryIndex qi = preprocess(q, a, cfg.w, cfg.delta);
  const double prep_ms = ms_since(t0);

  UnionCursor cur = qi.open();
  Tuple t;
  std::vector<std::string> buffered;
  std::vector<uint64_t> gaps;
  std::vector<double> gap_ms;
  uint64_t emitted = 0, last_steps = 0;
  auto last_t = Clock::now();
  const auto e0 = Clock::now();
  while (emitted < cfg.limit && cur.next(t)) {
    ++emitted;
    if (cfg.profile) {
      const uint64_t s = cur.total_steps();
      gaps.push_back(s - last_steps);
      last_steps = s;
      gap_ms.push_back(ms_since(last_t));
      last_t = Clock::now();
    }
    std::string line = tuple_text(a->domain, t);
    if (cfg.stable)
      buffered.push_back(std::move(line));
    else
      std::cout << line << "\n";
  }
  if (cfg.stable) {
    std::sort(buffered.begin(), buffered.end());
    for (const auto& line : buffered) std::cout << line << "\n";
  }
  if (cfg.sentinel) std::cout << "EOE\n";
  if (cfg.profile) {
    std::cerr << "preprocess-ms=" << prep_ms << "\n";
    print_delay_report(gaps, gap_ms, ms_since(e0));
  }
  return 0;
}

int cmd_analyze(Config& cfg) {
  const CQ q = load_query(cfg);
  auto a = load_data(cfg);
  std::cout << "query: " << to_text(q) << "\n";
  std::cout << "vars: " << q.var_list(q.all_vars()) << "\n";
  std::cout << "free: " << q.var_list(q.free_vars()) << "\n";
  std::cout << "quantified: " << q.var_list(q.quantified) << "\n";
  const auto tds = enumerate_fc_tds(q);
  std::cout << "free-connex decompositions: " << tds.size() << "\n";
  QueryIndex qi = preprocess(q, a, cfg.w, cfg.delta);
  std::cout << "refinements: " << qi.parts.size() << "\n";
  for (size_t i = 0; i < qi.parts.size(); ++i) {
    const Part& p = qi.parts[i];
    std::cout << "part " << i << ": tables " << p.refinement.dump() << "\n";
    std::cout << "part " << i << ": decomposition";
    for (VarSet b : p.td.bags) std::cout << " {" << q.var_list(b) << "}";
    std::cout << "  max-bag-cost " << p.max_bag_cost << "\n";
  }
  return 0;
}

int cmd_test(Config& cfg, const std::vector<std::string>& tuple_args) {
  const CQ q = load_query(cfg);
  auto a = load_data(cfg);
  QueryIndex qi = preprocess(q, a, cfg.w, cfg.delta);
  const size_t ar = qi.free_vars.size();
  auto run_one = [&](const std::vector<std::string>& toks) {
    Tuple t;
    bool ok = toks.size() == ar;
    for (const auto& s : toks) {
      auto v = a->domain.find(s);
      if (!v) ok = false;  // out-of-domain constant: cannot be an answer
      else t.push_back(*v);
    }
    std::cout << ((ok && qi.test(t)) ? "true" : "false") << "\n";
  };
  if (!tuple_args.empty()) {
    run_one(tuple_args);
  } else {  // batch mode: one whitespace/comma separated tuple per stdin line
    std::string line;
    while (std::getline(std::cin, line)) {
      for (char& ch : line)
        if (ch == ',' || ch == '\t') ch = ' ';
      std::istringstream ss(line);
      std::vector<std::string> toks;
      std::string tok;
      while (ss >> tok) toks.push_back(tok);
      if (!toks.empty()) run_one(toks);
    }
  }
  return 0;
}

int cmd_oracle(Config& cfg) {
  const CQ q = load_query(cfg);
  auto a = load_data(cfg);
  const auto ans = oracle::brute_eval(q, *a);
  for (const Tuple& t : ans.rows) std::cout << tuple_text(a->domain, t) << "\n";
  if (cfg.sentinel) std::cout << "EOE\n";
  return 0;
}

int cmd_bench(Config& cfg, uint32_t ell) {
  auto a = fixtures::four_cycle_structure(ell);
  const CQ q = fixtures::four_cycle_query();
  const auto t0 = Clock::now();
  QueryIndex qi = preprocess(q, a, cfg.w, cfg.delta);
  const double prep_ms = ms_since(t0);
  UnionCursor cur = qi.open();
  Tuple t;
  uint64_t emitted = 0, last = 0, max_gap = 0;
  const auto e0 = Clock::now();
  while (emitted < cfg.limit && cur.next(t)) {
    ++emitted;
    const uint64_t s = cur.total_steps();
    max_gap = std::max(max_gap, s - last);
    last = s;
  }
  std::cout << "ell=" << ell << " parts=" << qi.parts.size()
            << " preprocess-ms=" << prep_ms << " answers=" << emitted
            << " enumerate-ms=" << ms_since(e0) << " max-gap-steps=" << max_gap
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"conjunctive-query index: preprocess once, enumerate with "
               "constant delay, test membership in constant time"};
  app.require_subcommand(1);
  Config cfg;

  auto* run = app.add_subcommand("run", "preprocess and stream answers");
  add_common(run, cfg, true);
  run->add_option("-w", cfg.w, "width budget (>= 1)");
  run->add_option("--delta", cfg.delta, "slack exponent (> 0)");
  run->add_option("--limit", cfg.limit, "stop after this many tuples")
      ->check(CLI::NonNegativeNumber);
  run->add_flag("--sentinel", cfg.sentinel, "print EOE after the stream");
  run->add_flag("--stable", cfg.stable, "buffer and sort the output");
  run->add_flag("--profile-delay", cfg.profile,
                "report inter-emission step counts and wall times to stderr");

  auto* an = app.add_subcommand("analyze", "report plans without enumerating");
  add_common(an, cfg, true);
  an->add_option("-w", cfg.w, "width budget (>= 1)");
  an->add_option("--delta", cfg.delta, "slack exponent (> 0)");

  std::vector<std::string> tuple_args;
  auto* te = app.add_subcommand("test", "membership tests (args or stdin batch)");
  add_common(te, cfg, true);
  te->add_option("-w", cfg.w, "width budget (>= 1)");
  te->add_option("--delta", cfg.delta, "slack exponent (> 0)");
  te->add_option("tuple", tuple_args, "constants of one tuple to test");

  auto* orc = app.add_subcommand("oracle", "naive exhaustive evaluation");
  add_common(orc, cfg, true);
  orc->add_flag("--sentinel", cfg.sentinel, "print EOE after the stream");

  uint32_t ell = 64;
  auto* be = app.add_subcommand("bench", "time the built-in 4-cycle family");
  be->add_option("--ell", ell, "half the domain size of the instance");
  be->add_option("-w", cfg.w, "width budget (>= 1)");
  be->add_option("--delta", cfg.delta, "slack exponent (> 0)");
  be->add_option("--limit", cfg.limit, "stop after this many tuples");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(cfg);
    if (an->parsed()) return cmd_analyze(cfg);
    if (te->parsed()) return cmd_test(cfg, tuple_args);
    if (orc->parsed()) return cmd_oracle(cfg);
    if (be->parsed()) return cmd_bench(cfg, ell);
  } catch (const cqe::WidthExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const cqe::TooManyVariables& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const cqe::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
