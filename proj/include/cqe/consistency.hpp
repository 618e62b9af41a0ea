#pragma once

#include <map>
#include <memory>

#include "cqe/eval.hpp"

namespace cqe {

struct CanonLess {
  bool operator()(VarSet a, VarSet b) const { return canonical_less(a, b); }
};

// A refinement pairs a quantifier-free query with a family of variable sets
// and one table of partial mappings per member. Mappings over S are tuples
// aligned with S.to_vector(). The family is the key set of `tables`; it is
// subset-closed in every finished (consistent) refinement, but may be
// temporarily non-closed while the strong-consistency loop is growing it.
struct Refinement {
  CQ query;  // quantifier-free
  std::shared_ptr<const Structure> base;
  std::map<VarSet, TupleSet, CanonLess> tables;
  uint64_t state_version = 0;  // bumped on any family or table change

  std::vector<VarSet> family() const;
  bool has(VarSet S) const { return tables.count(S) != 0; }
  const TupleSet& table(VarSet S) const;
  TupleSet& table(VarSet S);
  // some table empty (refinements with no tables count as non-trivial)
  bool trivial() const;
  void empty_all_tables();

  RefinedQuery refined_query() const;  // requires a subset-closed family
  // Views over the base atoms followed by one view per table, in family order.
  Evaluator make_evaluator() const;
  std::string dump() const;  // family + table sizes, one line per member
};

struct ConsistencyStats {
  uint64_t clauses = 0;        // Horn clauses built (units + both families)
  uint64_t clause_size = 0;    // total body literals
  uint64_t deletions = 0;      // mappings removed across all tables
  uint64_t iterations = 0;     // outer repeats of the strong-consistency loop
};

// Enforce the two table-coherence conditions by unit propagation:
//   (a) every mapping of every table satisfies the projected query, and
//   (b) nested tables are exact projections of one another.
// Deletion-only; the removed set is the minimal one (least Horn model). If a
// table empties, every table empties. Idempotent. Answers are preserved.
ConsistencyStats make_consistent(Refinement& r);

// Fig-style fixpoint: grow the family with every set whose projected-query
// result stays within M (bottom-up, then pairwise unions with an early break
// past M), re-running make_consistent, until neither family nor tables move.
// Requires M >= max relation size (BadM otherwise).
Refinement make_strongly_m_consistent(const CQ& q,
                                      std::shared_ptr<const Structure> base,
                                      uint64_t M, ConsistencyStats* stats = nullptr);

// Same loop, warm-started from an existing refinement (used after a split:
// the family is kept, tables were filtered, consistency must be rebuilt and
// newly small sets may join the family).
void restore_strong_consistency(Refinement& r, uint64_t M,
                                ConsistencyStats* stats = nullptr);

}  // namespace cqe
