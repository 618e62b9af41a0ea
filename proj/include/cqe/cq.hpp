#pragma once

#include <bit>
#include <compare>
#include <cstdint>
#include <string>
#include <vector>

#include "cqe/errors.hpp"
#include "cqe/relmodel.hpp"

namespace cqe {

// Set of query variables as a bitmask over variable ids (at most 32 per query).
struct VarSet {
  uint32_t bits = 0;

  constexpr VarSet() = default;
  constexpr explicit VarSet(uint32_t b) : bits(b) {}
  static constexpr VarSet single(int v) { return VarSet(1u << v); }
  static constexpr VarSet first_n(int k) {
    return VarSet(k >= 32 ? ~0u : ((1u << k) - 1));
  }

  bool test(int v) const { return bits >> v & 1; }
  VarSet with(int v) const { return VarSet(bits | (1u << v)); }
  VarSet without(int v) const { return VarSet(bits & ~(1u << v)); }
  bool subset_of(VarSet o) const { return (bits & ~o.bits) == 0; }
  int count() const { return std::popcount(bits); }
  bool empty() const { return bits == 0; }
  int min_var() const { return std::countr_zero(bits); }
  VarSet operator&(VarSet o) const { return VarSet(bits & o.bits); }
  VarSet operator|(VarSet o) const { return VarSet(bits | o.bits); }
  VarSet operator-(VarSet o) const { return VarSet(bits & ~o.bits); }
  auto operator<=>(const VarSet&) const = default;

  std::vector<int> to_vector() const {
    std::vector<int> v;
    for (uint32_t b = bits; b; b &= b - 1) v.push_back(std::countr_zero(b));
    return v;
  }
};

// Order sets by (cardinality, numeric mask): a fixed total order used wherever
// a deterministic sweep over subsets is required.
inline bool canonical_less(VarSet a, VarSet b) {
  if (a.count() != b.count()) return a.count() < b.count();
  return a.bits < b.bits;
}

struct Atom {
  std::string rel;
  std::vector<int> args;  // variable ids, repetitions allowed
  VarSet vars;
};

struct CQ {
  std::vector<Atom> atoms;
  std::vector<std::string> var_names;  // indexed by variable id (first occurrence order)
  VarSet quantified;

  int var_count() const { return static_cast<int>(var_names.size()); }
  VarSet all_vars() const { return VarSet::first_n(var_count()); }
  VarSet free_vars() const { return all_vars() - quantified; }
  bool quantifier_free() const { return quantified.empty(); }
  std::vector<int> free_order() const { return free_vars().to_vector(); }
  CQ stripped() const {
    CQ q = *this;
    q.quantified = VarSet();
    return q;
  }
  std::string var_list(VarSet s, const char* sep = ",") const;
};

// Grammar:  [ "exists" var+ "." ] atom ("," atom)*   with atom = Name(v,...).
CQ parse_cq(std::string_view text);
std::string to_text(const CQ& q);

// phi<S>: every atom constrains only the projection of its variables onto S.
// Kept as the base query plus the scope; never rewritten into a plain CQ.
struct ProjectedQuery {
  CQ base;
  VarSet scope;
};
ProjectedQuery project_query(const CQ& q, VarSet scope);

// phi_s: base query conjoined with one table atom per member of the family.
struct RefinedQuery {
  CQ base;
  std::vector<VarSet> family;  // subset-closed, canonically sorted
  std::string table_name(VarSet s) const;
};
RefinedQuery refine_query(const CQ& q, std::vector<VarSet> family);

}  // namespace cqe
