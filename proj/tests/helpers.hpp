#pragma once

#include <algorithm>
#include <memory>
#include <vector>

#include "cqe/consistency.hpp"
#include "cqe/oracle.hpp"
#include "cqe/relmodel.hpp"

namespace cqe::test {

inline std::vector<Tuple> sorted_rows(const TupleSet& ts) {
  std::vector<Tuple> out;
  out.reserve(ts.size());
  for (size_t i = 0; i < ts.size(); ++i) {
    auto r = ts.row(i);
    out.emplace_back(r.begin(), r.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline TupleSet make_tuples(int arity, const std::vector<Tuple>& rows) {
  TupleSet ts(arity);
  for (const auto& r : rows) ts.insert(r);
  return ts;
}

// Structure with one relation per (name, arity, rows) entry over domain
// {"0".."n-1"} (ids equal to values).
inline std::shared_ptr<Structure> make_structure(
    uint32_t n,
    const std::vector<std::tuple<std::string, int, std::vector<Tuple>>>& rels) {
  auto s = std::make_shared<Structure>();
  for (uint32_t i = 0; i < n; ++i) s->domain.intern(std::to_string(i));
  for (const auto& [name, ar, rows] : rels) {
    s->signature.symbols.emplace_back(name, ar);
    s->relations.push_back(make_tuples(ar, rows));
  }
  return s;
}

// Definitional check of the two coherence conditions of a consistent
// refinement, via the oracle: every table equals the projected-query result,
// and nested tables are projections of one another.
inline bool check_consistent(const Refinement& r, std::string* why = nullptr) {
  std::map<VarSet, TupleSet> plain(r.tables.begin(), r.tables.end());
  for (const auto& [S, ts] : r.tables) {
    auto want = oracle::brute_eval_projected(r.query, *r.base, S, &plain);
    if (sorted_rows(ts) != want.rows) {
      if (why) *why = "table {" + r.query.var_list(S) + "} != projected result";
      return false;
    }
  }
  for (const auto& [S, ss] : r.tables)
    for (const auto& [T, tt] : r.tables) {
      if (!(S.subset_of(T) && S != T)) continue;
      std::vector<Tuple> proj;
      for (size_t i = 0; i < tt.size(); ++i)
        proj.push_back(project_mapping(T, tt.row(i), S));
      std::sort(proj.begin(), proj.end());
      proj.erase(std::unique(proj.begin(), proj.end()), proj.end());
      if (proj != sorted_rows(ss)) {
        if (why)
          *why = "{" + r.query.var_list(S) + "} is not the projection of {" +
                 r.query.var_list(T) + "}";
        return false;
      }
    }
  return true;
}

// Definitional check of strong M-consistency on top of check_consistent:
// every table is small, every subset of a member is a member, and the union
// of two members that is not a member has a large projected result.
inline bool check_strongly_m_consistent(const Refinement& r, uint64_t M,
                                        std::string* why = nullptr) {
  if (!check_consistent(r, why)) return false;
  std::map<VarSet, TupleSet> plain(r.tables.begin(), r.tables.end());
  for (const auto& [S, ts] : r.tables) {
    if (ts.size() > M) {
      if (why) *why = "table {" + r.query.var_list(S) + "} exceeds M";
      return false;
    }
    for (uint32_t sub = S.bits; ; sub = (sub - 1) & S.bits) {
      if (!r.has(VarSet(sub))) {
        if (why) *why = "family not subset-closed";
        return false;
      }
      if (sub == 0) break;
    }
  }
  for (const auto& [S, ss] : r.tables)
    for (const auto& [T, tt] : r.tables) {
      VarSet U = S | T;
      if (r.has(U)) continue;
      auto big = oracle::brute_eval_projected(r.query, *r.base, U, &plain);
      if (big.size() <= M) {
        if (why)
          *why = "union {" + r.query.var_list(U) + "} is M-small but not in s";
        return false;
      }
    }
  return true;
}

}  // namespace cqe::test
