#pragma once

#include <functional>

#include "cqe/consistency.hpp"
#include "cqe/decomp.hpp"

namespace cqe {

// Extension statistics for a nested pair of family members: how many rows of
// the larger table sit above each row of the smaller one.
struct DegreeReport {
  VarSet S, T;
  size_t rs = 0, rt = 0;  // table sizes
  uint64_t maxdeg = 0;
  double avgdeg() const { return static_cast<double>(rt) / static_cast<double>(rs); }
};

DegreeReport degrees(const Refinement& r, VarSet S, VarSet T);

struct UniformityReport {
  bool uniform = true;
  VarSet S, T;  // first violating pair (ordered by |S|, |T|, set masks)
};

// Uniform iff maxdeg <= m^eps * avgdeg for every nested pair of the family.
UniformityReport is_uniform(const Refinement& r, double eps, size_t m);

// Partition the rows of R_S by their extension count in R_T: at most
// m^{eps/2} * avgdeg goes left, the rest right. All other tables are copied;
// the two parts' answer sets partition the original's.
std::pair<Refinement, Refinement> split_refinement(const Refinement& r, VarSet S,
                                                   VarSet T, double eps, size_t m);

// Repeatedly: make the refinement strongly ceil(m^c)-consistent, find the
// first uniformity violation, split on it, recurse (left part first). Parts
// with an empty table are dropped. The answer sets of the output partition
// answers(q, a).
std::vector<Refinement> split_to_uniform(const CQ& q,
                                         std::shared_ptr<const Structure> base,
                                         double c, double eps,
                                         ConsistencyStats* stats = nullptr);

// Bag cost derived from a refinement's table sizes:
//   U in family: (1 - eps^{1/3}) * log_m |R_U| + h(U)
//   otherwise:   (1 - eps^{1/3}) * c        + h(U)
// with h(U) = 2 eps^{2/3} |U| - eps |U|^2. Monotone, edge-dominated and
// submodular for small enough eps; the empty set costs 0.
struct CostFunction {
  const Refinement* ref = nullptr;
  double c = 1;
  double eps = 0;
  size_t m = 2;
  mutable bool warned_empty = false;  // saw log of an empty table

  double operator()(VarSet U) const;
};

double cost_eval(const CostFunction& cf, VarSet U);

// The decomposition minimizing the maximum bag cost, with that cost.
std::pair<TreeDecomposition, double> width_under_g(
    const std::vector<TreeDecomposition>& tds,
    const std::function<double(VarSet)>& g);

}  // namespace cqe
