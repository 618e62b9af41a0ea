// Acceptance suite: one pass/fail line per criterion, exit 0 iff all pass.
//
// The slow criteria (delay flatness and the testing contract) share one set
// of preprocessed indexes over the hard 4-cycle family.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>

#include "cqe/fixtures.hpp"
#include "cqe/pipeline.hpp"
#include "helpers.hpp"

using namespace cqe;
using namespace cqe::test;
using Clock = std::chrono::steady_clock;

namespace {

double secs_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

VarSet vs(std::initializer_list<int> vars) {
  VarSet s;
  for (int v : vars) s = s.with(v);
  return s;
}

std::vector<Tuple> drain_sorted(const QueryIndex& qi, bool* dup = nullptr) {
  UnionCursor uc = qi.open();
  std::vector<Tuple> out;
  Tuple t;
  while (uc.next(t)) out.push_back(t);
  std::sort(out.begin(), out.end());
  auto it = std::unique(out.begin(), out.end());
  if (dup) *dup = it != out.end();
  out.erase(it, out.end());
  return out;
}

// ---------------------------------------------------------------- criterion 1
// Engine evaluation of the triangle projected onto {x,z} equals direct
// evaluation of E(x,z) on 50 random structures, in under one second total.
bool criterion1(std::string& note) {
  const auto t0 = Clock::now();
  std::mt19937 rng(20240801);
  CQ tri = parse_cq("E(x,y), E(y,z), E(x,z)");
  CQ direct = parse_cq("E(x,z)");
  for (int rep = 0; rep < 50; ++rep) {
    auto a = fixtures::random_structure_for(tri, rng, 1 + rng() % 10, 40);
    TupleSet lhs = eval_projected(project_query(tri, vs({0, 2})), *a);
    TupleSet rhs = eval_projected(project_query(direct, vs({0, 1})), *a);
    if (sorted_rows(lhs) != sorted_rows(rhs)) {
      note = "mismatch at instance " + std::to_string(rep);
      return false;
    }
  }
  const double el = secs_since(t0);
  note = "50 instances in " + std::to_string(el) + " s";
  return el < 1.0;
}

// ---------------------------------------------------------------- criterion 2
bool criterion2(std::string& note) {
  const auto t0 = Clock::now();
  const uint32_t l = 64;
  auto a = fixtures::four_cycle_structure(l);
  CQ q = fixtures::four_cycle_query();
  QueryIndex qi = preprocess(q, a, 1.5, 0.5);
  bool dup = false;
  auto got = drain_sorted(qi, &dup);
  auto want = oracle::brute_eval(q, *a, /*guard=*/2'000'000'000ull);
  const double el = secs_since(t0);
  note = std::to_string(got.size()) + " answers in " + std::to_string(el) + " s";
  if (dup) {
    note += " (duplicates!)";
    return false;
  }
  return got == want.rows && got == fixtures::four_cycle_answers(l) && el < 5.0;
}

// ---------------------------------------------------------------- criterion 3
// After splitting, every bag table of every part is linear in l; without
// splitting, the projection onto {x1,x2,x3} is quadratic.
bool criterion3(std::string& note) {
  for (uint32_t l : {16u, 64u}) {
    auto a = fixtures::four_cycle_structure(l);
    CQ q = fixtures::four_cycle_query();
    QueryIndex qi = preprocess(q, a, 1.5, 0.5);
    for (const auto& part : qi.parts)
      for (const auto& ts : part.instance->relations)
        if (ts.size() > 4ull * l) {
          note = "a bag table has " + std::to_string(ts.size()) + " rows at l=" +
                 std::to_string(l);
          return false;
        }
    // unsplit projection of the plain query onto {x1,x2,x3}
    std::vector<AtomView> views;
    for (const Atom& at : q.atoms)
      views.push_back(build_atom_view(at, a->relation(at.rel)));
    Evaluator ev(std::move(views));
    TupleSet proj(3);
    ev.all_mappings(vs({0, 1, 2}), 1ull << 40, proj);
    if (proj.size() < static_cast<size_t>(l) * l) {
      note = "unsplit projection too small at l=" + std::to_string(l);
      return false;
    }
    if (l == 16) {  // cross-check the engine count against the oracle once
      auto want = oracle::brute_eval_projected(q, *a, vs({0, 1, 2}));
      if (want.size() != proj.size()) {
        note = "engine/oracle disagreement on the unsplit projection";
        return false;
      }
    }
  }
  note = "bag tables <= 4l, unsplit projection >= l^2 at l in {16,64}";
  return true;
}

// ---------------------------------------------------------------- criterion 4
bool criterion4(std::string& note) {
  std::mt19937 rng(20240804);
  fixtures::RandomQueryOpts opts;
  opts.max_vars = 6;
  opts.max_atoms = 5;
  int refinements = 0;
  for (int rep = 0; rep < 100; ++rep) {
    CQ q = fixtures::random_cq(rng, opts);
    auto a = fixtures::random_structure_for(q, rng, 5, 12);
    if (a->m() < 2) continue;
    const int k = q.var_count();
    const double delta = 0.5, w = 1.0;
    const double c = (1 + delta) * w;
    const double eps =
        std::min(std::pow(1 - 1 / (1 + delta), 4.0), std::pow(double(k), -4.0));
    for (const auto& part : split_to_uniform(q, a, c, eps)) {
      ++refinements;
      CostFunction g{&part, c, eps, a->m(), false};
      if (std::abs(g(VarSet())) > 1e-9) {
        note = "g(empty) != 0";
        return false;
      }
      for (const Atom& at : q.atoms)
        if (g(at.vars) > 1 + 1e-9) {
          note = "edge domination violated";
          return false;
        }
      const uint32_t full = q.all_vars().bits;
      for (uint32_t ub = 0; ub <= full; ++ub) {
        if (ub & ~full) continue;
        for (uint32_t vb = 0; vb <= full; ++vb) {
          if (vb & ~full) continue;
          VarSet U(ub), V(vb);
          if (U.subset_of(V) && g(U) > g(V) + 1e-9) {
            note = "monotonicity violated";
            return false;
          }
          if (g(U) + g(V) + 1e-9 < g(U & V) + g(U | V)) {
            note = "submodularity violated";
            return false;
          }
        }
      }
    }
  }
  note = "0 violations over " + std::to_string(refinements) + " refinements";
  return true;
}

// ---------------------------------------------------------------- criterion 5
bool criterion5(std::string& note) {
  std::mt19937 rng(20240805);
  fixtures::RandomQueryOpts opts;
  opts.max_vars = 4;
  opts.max_atoms = 4;
  for (int rep = 0; rep < 100; ++rep) {
    CQ q = fixtures::random_cq(rng, opts);
    auto a = fixtures::random_structure_for(q, rng, 4, 8);
    Refinement r = make_strongly_m_consistent(q, a, 4096);
    for (auto& [S, ts] : r.tables) {  // random thinning
      if (S.empty()) continue;
      TupleSet thin(ts.arity());
      for (size_t i = 0; i < ts.size(); ++i)
        if (rng() % 4 != 0) thin.push_row(ts.row(i));
      ts = std::move(thin);
    }
    ++r.state_version;
    std::map<VarSet, TupleSet> before(r.tables.begin(), r.tables.end());
    auto answers_before = oracle::brute_eval_refined(r.query, *r.base, before);
    make_consistent(r);
    if (r.trivial()) {
      if (answers_before.size() != 0) {
        note = "emptied a refinement with answers";
        return false;
      }
      continue;
    }
    std::string why;
    if (!check_consistent(r, &why)) {
      note = why;
      return false;
    }
    std::map<VarSet, TupleSet> after(r.tables.begin(), r.tables.end());
    if (!(oracle::brute_eval_refined(r.query, *r.base, after) == answers_before)) {
      note = "answer set changed";
      return false;
    }
    auto snapshot = [&] {
      std::vector<std::pair<VarSet, std::vector<Tuple>>> s;
      for (auto& [S, ts] : r.tables) s.emplace_back(S, sorted_rows(ts));
      return s;
    };
    auto one = snapshot();
    make_consistent(r);
    if (one != snapshot()) {
      note = "not idempotent";
      return false;
    }
  }
  note = "100 refinements: conditions, preservation, idempotence";
  return true;
}

// ---------------------------------------------------------------- criterion 6
bool criterion6(std::string& note) {
  std::mt19937 rng(20240806);
  fixtures::RandomQueryOpts opts;
  opts.max_vars = 4;
  opts.max_atoms = 4;
  for (int rep = 0; rep < 50; ++rep) {
    CQ q = fixtures::random_cq(rng, opts);
    auto a = fixtures::random_structure_for(q, rng, 6, 200);  // m <= 200
    const uint64_t M = std::max<uint64_t>(a->m(), 1 + rng() % 300);
    Refinement r = make_strongly_m_consistent(q, a, M);
    std::string why;
    if (!check_strongly_m_consistent(r, M, &why)) {
      note = why + " (instance " + std::to_string(rep) + ")";
      return false;
    }
    std::map<VarSet, TupleSet> tables(r.tables.begin(), r.tables.end());
    if (!(oracle::brute_eval_refined(r.query, *r.base, tables) ==
          oracle::brute_eval(q, *a))) {
      note = "answers not preserved";
      return false;
    }
  }
  note = "50 instances: conditions (4)-(7), answers preserved, tables <= M";
  return true;
}

// ---------------------------------------------------------------- criterion 7
bool criterion7(std::string& note) {
  std::mt19937 rng(20240807);
  fixtures::RandomQueryOpts opts;
  opts.max_vars = 4;
  opts.max_atoms = 4;
  for (int rep = 0; rep < 100; ++rep) {
    CQ q = fixtures::random_cq(rng, opts);
    auto a = fixtures::random_structure_for(q, rng, 4, 12);
    size_t total = 0;
    for (const auto& part : split_to_uniform(q, a, 1.25, 0.05)) {
      std::map<VarSet, TupleSet> tables(part.tables.begin(), part.tables.end());
      total += oracle::brute_eval_refined(part.query, *part.base, tables).size();
    }
    if (total != oracle::brute_eval(q, *a).size()) {
      note = "partition sizes disagree at instance " + std::to_string(rep);
      return false;
    }
  }
  note = "100 instances: sum of part answer counts equals the total";
  return true;
}

// ---------------------------------------------------------------- criterion 8
bool criterion8(std::string& note) {
  // the documented two-set walkthrough: exactly 3 emissions
  {
    auto s = make_structure(3, {{"A", 1, {{0}, {1}}}, {"B", 1, {{1}, {2}}}});
    EnumIndex ia = EnumIndex::preprocess_acyclic(parse_cq("A(x)"), *s);
    EnumIndex ib = EnumIndex::preprocess_acyclic(parse_cq("B(x)"), *s);
    UnionCursor uc({&ia, &ib});
    std::vector<Tuple> out;
    Tuple t;
    while (uc.next(t)) out.push_back(t);
    std::sort(out.begin(), out.end());
    if (out != std::vector<Tuple>{{0}, {1}, {2}}) {
      note = "two-set walkthrough emitted " + std::to_string(out.size()) + " tuples";
      return false;
    }
  }
  std::mt19937 rng(20240808);
  for (int rep = 0; rep < 120; ++rep) {
    const int k = 1 + rng() % 5;
    const uint32_t n = 1 + rng() % 12;
    const int overlap_pct = static_cast<int>(rng() % 101);  // 0..100
    auto s = std::make_shared<Structure>();
    for (uint32_t i = 0; i < n; ++i) s->domain.intern(std::to_string(i));
    std::set<Tuple> want;
    std::vector<Tuple> shared;
    for (uint32_t v = 0; v < n; ++v)
      if (static_cast<int>(rng() % 100) < overlap_pct) shared.push_back({v});
    for (int i = 0; i < k; ++i) {
      TupleSet ts(1);
      for (const Tuple& t : shared) ts.insert(t);
      for (uint32_t v = 0; v < n; ++v)
        if (rng() % 2 == 0) ts.insert(Tuple{v});
      for (const Tuple& t : sorted_rows(ts)) want.insert(t);
      s->signature.symbols.emplace_back("U" + std::to_string(i), 1);
      s->relations.push_back(std::move(ts));
    }
    std::vector<EnumIndex> idxs;
    idxs.reserve(k);
    std::vector<const EnumIndex*> ptrs;
    for (int i = 0; i < k; ++i)
      idxs.push_back(
          EnumIndex::preprocess_acyclic(parse_cq("U" + std::to_string(i) + "(x)"), *s));
    for (auto& idx : idxs) ptrs.push_back(&idx);
    UnionCursor uc(ptrs);
    std::vector<Tuple> out;
    Tuple t;
    while (uc.next(t)) out.push_back(t);
    if (out.size() != want.size()) {
      note = "emission count != union size";
      return false;
    }
    std::sort(out.begin(), out.end());
    if (std::adjacent_find(out.begin(), out.end()) != out.end()) {
      note = "duplicate emission";
      return false;
    }
    if (out != std::vector<Tuple>(want.begin(), want.end())) {
      note = "wrong union";
      return false;
    }
  }
  note = "walkthrough exact; 120 random families up to 5 indexes, 0 duplicates";
  return true;
}

// -------------------------------------------------------- criteria 9 and 10
struct FamilyRun {
  uint32_t l = 0;
  double prep_s = 0;
  uint64_t answers = 0;
  uint64_t max_gap = 0;       // max inter-emission steps, including before EOE
  uint64_t max_test_steps = 0;
  bool tests_ok = true;
};

FamilyRun run_family(uint32_t l) {
  FamilyRun fr;
  fr.l = l;
  auto a = fixtures::four_cycle_structure(l);
  CQ q = fixtures::four_cycle_query();
  const auto t0 = Clock::now();
  QueryIndex qi = preprocess(q, a, 1.5, 0.02);
  fr.prep_s = secs_since(t0);

  UnionCursor uc = qi.open();
  Tuple t;
  uint64_t last = 0;
  while (uc.next(t)) {
    ++fr.answers;
    const uint64_t s = uc.total_steps();
    fr.max_gap = std::max(fr.max_gap, s - last);
    last = s;
  }
  fr.max_gap = std::max(fr.max_gap, uc.total_steps() - last);  // before EOE

  // testing contract: 500 positives from the closed form, 500 negatives
  std::mt19937 rng(0x9E3779B9u ^ l);
  const Value va = l, vb = l + 1;
  Tuple probe(4);
  for (int i = 0; i < 500; ++i) {
    const Value u = static_cast<Value>(rng() % l), v = static_cast<Value>(rng() % l);
    if (rng() % 2 == 0)
      probe = {u, va, v, va};
    else
      probe = {vb, u, vb, v};
    uint64_t steps = 0;
    if (!qi.test(probe, &steps)) fr.tests_ok = false;
    fr.max_test_steps = std::max(fr.max_test_steps, steps);
  }
  for (int i = 0; i < 500; ++i) {
    do {
      for (auto& x : probe) x = static_cast<Value>(rng() % (l + 2));
    } while (fixtures::four_cycle_member(l, probe));
    uint64_t steps = 0;
    if (qi.test(probe, &steps)) fr.tests_ok = false;
    fr.max_test_steps = std::max(fr.max_test_steps, steps);
  }
  return fr;
}

bool criterion9(const std::vector<FamilyRun>& runs, std::string& note) {
  uint64_t lo = ~0ull, hi = 0;
  for (const auto& fr : runs) {
    if (fr.answers != 2ull * fr.l * fr.l) {
      note = "wrong answer count at l=" + std::to_string(fr.l);
      return false;
    }
    lo = std::min(lo, fr.max_gap);
    hi = std::max(hi, fr.max_gap);
  }
  const double prep14 = runs.back().prep_s;
  note = "max gaps " + std::to_string(lo) + ".." + std::to_string(hi) +
         " steps; preprocessing at l=2^14: " + std::to_string(prep14) + " s";
  return hi <= 2 * lo && prep14 < 60.0;
}

bool criterion10(const std::vector<FamilyRun>& runs, std::string& note) {
  uint64_t lo = ~0ull, hi = 0;
  for (const auto& fr : runs) {
    if (!fr.tests_ok) {
      note = "wrong test verdict at l=" + std::to_string(fr.l);
      return false;
    }
    lo = std::min(lo, fr.max_test_steps);
    hi = std::max(hi, fr.max_test_steps);
  }
  note = "1000 probes per instance correct; per-test steps " +
         std::to_string(lo) + ".." + std::to_string(hi);
  return hi <= 2 * lo;
}

// --------------------------------------------------------------- criterion 11
bool criterion11(std::string& note) {
  auto half = [](VarSet u) { return u.count() / 2.0; };
  auto w4 = width_under_g(enumerate_fc_tds(fixtures::four_cycle_query()), half).second;
  auto wq =
      width_under_g(enumerate_fc_tds(fixtures::four_cycle_quantified()), half).second;
  note = "quantifier-free width " + std::to_string(w4) + ", quantified width " +
         std::to_string(wq);
  return w4 == 1.5 && wq == 2.0;
}

// --------------------------------------------------------------- criterion 12
bool criterion12(std::string& note) {
  auto a = fixtures::four_cycle_structure(64);
  try {
    preprocess(fixtures::four_cycle_quantified(), a, 1.2, 0.5);
  } catch (const WidthExceeded& e) {
    note = e.what();
    return e.best_cost > 1.2 && e.part_index >= 0;
  }
  note = "no error raised";
  return false;
}

}  // namespace

int main() {
  int failed = 0;
  auto report = [&](int num, const char* title, bool ok, const std::string& note) {
    std::printf("criterion %2d %-4s %s%s%s\n", num, ok ? "PASS" : "FAIL", title,
                note.empty() ? "" : " — ", note.c_str());
    std::fflush(stdout);
    if (!ok) ++failed;
  };
  std::string note;

  note.clear(); report(1, "projection identity", criterion1(note), note);
  note.clear(); report(2, "worst-case 4-cycle correctness", criterion2(note), note);
  note.clear(); report(3, "split effectiveness", criterion3(note), note);
  note.clear(); report(4, "cost-function property suite", criterion4(note), note);
  note.clear(); report(5, "consistency contract", criterion5(note), note);
  note.clear(); report(6, "strong M-consistency contract", criterion6(note), note);
  note.clear(); report(7, "disjoint partition", criterion7(note), note);
  note.clear(); report(8, "union trick", criterion8(note), note);

  std::vector<FamilyRun> runs;
  for (uint32_t l : {1u << 8, 1u << 11, 1u << 14}) runs.push_back(run_family(l));
  note.clear(); report(9, "delay flatness", criterion9(runs, note), note);
  note.clear(); report(10, "testing contract", criterion10(runs, note), note);

  note.clear(); report(11, "width facts", criterion11(note), note);
  note.clear(); report(12, "width-budget error", criterion12(note), note);

  if (failed) std::printf("%d criterion(s) FAILED\n", failed);
  else std::printf("all 12 criteria passed\n");
  return failed ? 1 : 0;
}
