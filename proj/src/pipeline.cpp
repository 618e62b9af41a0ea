#include "cqe/pipeline.hpp"

#include <algorithm>
#include <cmath>

namespace cqe {

PipelineParams PipelineParams::derive(double w, double delta, int var_count) {
  if (w < 1) throw Error("width budget must be at least 1");
  if (delta <= 0) throw Error("delta must be positive");
  PipelineParams p;
  p.w = w;
  p.delta = delta;
  p.c = (1 + delta) * w;
  double a = std::pow(1 - 1 / (1 + delta), 4.0);
  double b = var_count > 0 ? std::pow(static_cast<double>(var_count), -4.0) : 1.0;
  p.eps = std::min(a, b);
  return p;
}

namespace {

std::string bag_rel_name(const CQ& q, VarSet bag) {
  return "B_" + q.var_list(bag, "_");
}

}  // namespace

QueryIndex preprocess(const CQ& q, std::shared_ptr<const Structure> base, double w,
                      double delta) {
  for (const Atom& a : q.atoms) {
    int ar = base->signature.arity(a.rel);  // UnknownRelation if absent
    if (ar != static_cast<int>(a.args.size()))
      throw ArityMismatch("atom " + a.rel + " has " + std::to_string(a.args.size()) +
                          " arguments but the relation has arity " + std::to_string(ar));
  }

  QueryIndex qi;
  qi.query = q;
  qi.params = PipelineParams::derive(w, delta, q.var_count());
  qi.free_vars = q.free_vars().to_vector();

  auto tds = enumerate_fc_tds(q);

  CQ stripped = q.stripped();
  auto refinements =
      split_to_uniform(stripped, base, qi.params.c, qi.params.eps);

  // Integer table bound and the exactly matching log base, so that the cost
  // of a full member table never exceeds the cost charged to non-members.
  size_t m = std::max<size_t>(base->m(), 2);
  uint64_t M = static_cast<uint64_t>(
      std::ceil(std::pow(static_cast<double>(base->m()), qi.params.c)));
  if (M < base->m()) M = base->m();
  double c_eff = std::log(static_cast<double>(std::max<uint64_t>(M, 1))) /
                 std::log(static_cast<double>(m));

  for (size_t pi = 0; pi < refinements.size(); ++pi) {
    Refinement& r = refinements[pi];
    CostFunction g{&r, c_eff, qi.params.eps, m};

    const TreeDecomposition* best = nullptr;
    double best_cost = 0;
    size_t best_rows = 0;
    double overall_best = 0;
    bool first = true;
    for (const auto& td : tds) {
      double worst = 0;
      size_t rows = 0;
      for (VarSet bag : td.bags) {
        worst = std::max(worst, g(bag));
        if (r.has(bag)) rows += r.table(bag).size();
      }
      if (first || worst < overall_best) overall_best = worst;
      first = false;
      if (worst > w + 1e-9) continue;
      if (!best || worst < best_cost - 1e-12 ||
          (std::abs(worst - best_cost) <= 1e-12 && rows < best_rows)) {
        best = &td;
        best_cost = worst;
        best_rows = rows;
      }
    }
    if (!best)
      throw WidthExceeded("no decomposition fits the width budget " +
                              std::to_string(w) + " (best achievable " +
                              std::to_string(overall_best) + ")",
                          overall_best, static_cast<int>(pi));

    Part part;
    part.td = *best;
    part.max_bag_cost = best_cost;

    // The acyclic query: one atom per decomposition node over its bag table.
    CQ psi;
    psi.var_names = q.var_names;
    psi.quantified = q.quantified;
    auto instance = std::make_shared<Structure>();
    instance->domain = base->domain;
    Evaluator ev = r.make_evaluator();
    for (VarSet bag : part.td.bags) {
      Atom a;
      a.rel = bag_rel_name(q, bag);
      a.args = bag.to_vector();
      a.vars = bag;
      psi.atoms.push_back(a);
      if (instance->signature.has(a.rel)) continue;  // equal bags share a table
      instance->signature.symbols.push_back({a.rel, bag.count()});
      if (r.has(bag)) {
        instance->relations.push_back(r.table(bag));
      } else {
        // A bag outside the family fit the budget anyway (possible with a
        // generous w): materialize its projected evaluation directly.
        TupleSet rows(bag.count());
        ev.all_mappings(bag, ~0ull, rows);
        instance->relations.push_back(std::move(rows));
      }
    }

    JoinTree jt{part.td.bags, part.td.edges};
    std::vector<int> F = part.td.connex ? *part.td.connex : std::vector<int>{};
    part.psi = psi;
    part.instance = instance;
    part.index = EnumIndex::preprocess_acyclic(psi, *instance, &jt, &F);
    part.refinement = std::move(r);
    qi.parts.push_back(std::move(part));
  }
  return qi;
}

UnionCursor QueryIndex::open() const {
  std::vector<const EnumIndex*> idxs;
  idxs.reserve(parts.size());
  for (const Part& p : parts) idxs.push_back(&p.index);
  return UnionCursor(std::move(idxs));
}

bool QueryIndex::test(std::span<const Value> b, uint64_t* steps) const {
  if (b.size() != free_vars.size())
    throw DomainMismatch("mapping arity does not match the free variables");
  for (const Part& p : parts)
    if (p.index.test(b, steps)) return true;
  return false;
}

}  // namespace cqe
