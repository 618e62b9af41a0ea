#pragma once

#include "cqe/enumerate.hpp"
#include "cqe/splitting.hpp"

namespace cqe {

struct PipelineParams {
  double w = 1;
  double delta = 0.5;
  double c = 0;    // (1 + delta) * w
  double eps = 0;  // min((1 - 1/(1+delta))^4, k^-4)

  static PipelineParams derive(double w, double delta, int var_count);
};

// One uniform part: its refinement, the chosen decomposition (max bag cost
// <= w), the acyclic query over the bag tables, the materialized instance,
// and the ready-to-run enumeration index.
struct Part {
  Refinement refinement;
  TreeDecomposition td;
  double max_bag_cost = 0;
  CQ psi;
  std::shared_ptr<Structure> instance;
  EnumIndex index;
};

class QueryIndex {
 public:
  CQ query;
  PipelineParams params;
  std::vector<Part> parts;  // answers(query) = union of the parts' answers
  std::vector<int> free_vars;

  UnionCursor open() const;  // duplicate-free stream over all parts
  // b aligned to free_vars (ascending ids); OR over the per-part testers.
  bool test(std::span<const Value> b, uint64_t* steps = nullptr) const;
};

// End to end: strip quantifiers, split into uniform strongly-consistent
// refinements, pick a free-connex decomposition within the cost budget w for
// each, materialize the bag tables, and preprocess each acyclic instance.
// WidthExceeded reports the part with no decomposition under budget and the
// best max-bag cost it could reach.
QueryIndex preprocess(const CQ& q, std::shared_ptr<const Structure> base, double w,
                      double delta);

}  // namespace cqe
