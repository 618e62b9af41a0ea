#pragma once

#include <memory>
#include <random>

#include "cqe/cq.hpp"
#include "cqe/relmodel.hpp"

namespace cqe::fixtures {

// Hard 4-cycle instance: four binary relations over [l] plus two extra
// constants a, b, arranged so that every pairwise join of adjacent edges has
// a quadratic core unless the data is split by degree first.
//   E12 = E34 = [l] x {a}  u  {b} x [l]
//   E23 = E41 = [l] x {b}  u  {a} x [l]
// Domain ids: "1".."l" get ids 0..l-1, then "a" = l and "b" = l + 1.
std::shared_ptr<Structure> four_cycle_structure(uint32_t l);

// E12(x1,x2), E23(x2,x3), E34(x3,x4), E41(x4,x1)  (var ids 0..3)
CQ four_cycle_query();
// Same body with x1, x3 existentially quantified (free: x2, x4).
CQ four_cycle_quantified();

// Closed form of the 4-cycle answers: [l] x {a} x [l] x {a}  u
// {b} x [l] x {b} x [l], 2 l^2 tuples. Membership test avoids materializing.
bool four_cycle_member(uint32_t l, std::span<const Value> t);
std::vector<Tuple> four_cycle_answers(uint32_t l);  // sorted, duplicate-free

struct RandomQueryOpts {
  int max_vars = 5;
  int max_atoms = 5;
  int max_arity = 3;
  bool allow_quantifiers = false;
};

// Random conjunctive query: relation symbols may repeat across atoms (self
// joins) and arguments may repeat within an atom. Every variable id in the
// result occurs in some atom.
CQ random_cq(std::mt19937& rng, const RandomQueryOpts& opts = {});

// Random structure matching the query's signature: domain {"0".."n-1"},
// each relation filled with up to max_rows distinct uniform rows.
std::shared_ptr<Structure> random_structure_for(const CQ& q, std::mt19937& rng,
                                                uint32_t n, size_t max_rows);

}  // namespace cqe::fixtures
