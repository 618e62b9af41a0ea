#pragma once

#include <map>

#include "cqe/cq.hpp"
#include "cqe/relmodel.hpp"

namespace cqe {
namespace oracle {

// Reference answers, kept deliberately independent of the engine: plain
// backtracking over explicit valuations plus hash-set membership per relation.
struct AnswerSet {
  std::vector<int> vars;       // ascending variable ids the rows range over
  std::vector<Tuple> rows;     // sorted lexicographically, duplicate-free

  bool contains(const Tuple& t) const;
  size_t size() const { return rows.size(); }
  friend bool operator==(const AnswerSet&, const AnswerSet&) = default;
};

// A query atom bound directly to a tuple set (base relation or table).
struct BoundAtom {
  std::vector<int> args;
  const TupleSet* rel;
};

// Core evaluator: all valuations of `vars(q)` over the given domain size,
// filtered by every bound atom, projected to the free variables.
AnswerSet eval_bound(int var_count, VarSet free, const std::vector<BoundAtom>& atoms,
                     size_t domain_size, uint64_t guard = 100000000ull);

AnswerSet brute_eval(const CQ& q, const Structure& a, uint64_t guard = 100000000ull);

// phi_s over tables: the base atoms of q plus one table atom per family member.
AnswerSet brute_eval_refined(const CQ& q, const Structure& a,
                             const std::map<VarSet, TupleSet>& tables,
                             uint64_t guard = 100000000ull);

// [[phi<S>]] (projected-atom semantics, not a projection of the answers):
// mappings g over S such that for every atom, g restricted to S /\ vars(atom)
// extends to a satisfying assignment of that atom alone.
AnswerSet brute_eval_projected(const CQ& q, const Structure& a, VarSet scope,
                               const std::map<VarSet, TupleSet>* tables = nullptr,
                               uint64_t guard = 100000000ull);

}  // namespace oracle
}  // namespace cqe
