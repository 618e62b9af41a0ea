#include "cqe/oracle.hpp"

#include <algorithm>
#include <cmath>

namespace cqe {
namespace oracle {

bool AnswerSet::contains(const Tuple& t) const {
  return std::binary_search(rows.begin(), rows.end(), t);
}

namespace {

void finish(AnswerSet& s) {
  std::sort(s.rows.begin(), s.rows.end());
  s.rows.erase(std::unique(s.rows.begin(), s.rows.end()), s.rows.end());
}

// Does any row of `rel` agree with the partial valuation on the atom's args?
// val[v] < 0 means unassigned.
bool atom_extendable(const std::vector<int>& args, const TupleSet& rel,
                     const std::vector<int64_t>& val) {
  for (size_t r = 0; r < rel.size(); ++r) {
    auto row = rel.row(r);
    bool ok = true;
    // repeated variables must agree with each other even when unassigned
    for (size_t p = 0; p < args.size() && ok; ++p) {
      if (val[args[p]] >= 0) {
        if (row[p] != static_cast<Value>(val[args[p]])) ok = false;
      } else {
        for (size_t q = p + 1; q < args.size(); ++q)
          if (args[q] == args[p] && row[q] != row[p]) {
            ok = false;
            break;
          }
      }
    }
    if (ok) return true;
  }
  return false;
}

}  // namespace

AnswerSet eval_bound(int var_count, VarSet free, const std::vector<BoundAtom>& atoms,
                     size_t domain_size, uint64_t guard) {
  double total = std::pow(static_cast<double>(std::max<size_t>(domain_size, 1)),
                          static_cast<double>(var_count));
  if (total > static_cast<double>(guard))
    throw TooLarge("oracle search space exceeds guard");

  AnswerSet out;
  out.vars = free.to_vector();
  std::vector<int64_t> val(std::max(var_count, 1), -1);
  Tuple proj(out.vars.size());

  // check atoms whose variables are all assigned after assigning v
  auto consistent = [&](int just_assigned) {
    Tuple t;
    for (const BoundAtom& a : atoms) {
      bool involves = false, complete = true;
      for (int arg : a.args) {
        if (arg == just_assigned) involves = true;
        if (val[arg] < 0) complete = false;
      }
      if (!involves || !complete) continue;
      t.clear();
      for (int arg : a.args) t.push_back(static_cast<Value>(val[arg]));
      if (!a.rel->contains(t)) return false;
    }
    return true;
  };

  // Nullary atoms take part in no assignment step; settle them upfront.
  for (const BoundAtom& a : atoms)
    if (a.args.empty() && a.rel->empty()) return out;

  // Queries with zero variables: every atom is nullary and already checked.
  if (var_count == 0) {
    out.rows.push_back({});
    return out;
  }

  std::vector<size_t> stack(var_count, 0);
  int depth = 0;
  while (depth >= 0) {
    if (stack[depth] == domain_size) {
      val[depth] = -1;
      stack[depth] = 0;
      --depth;
      if (depth >= 0) ++stack[depth];
      continue;
    }
    val[depth] = static_cast<int64_t>(stack[depth]);
    if (!consistent(depth)) {
      ++stack[depth];
      continue;
    }
    if (depth + 1 == var_count) {
      for (size_t i = 0; i < out.vars.size(); ++i)
        proj[i] = static_cast<Value>(val[out.vars[i]]);
      out.rows.push_back(proj);
      ++stack[depth];
    } else {
      ++depth;
    }
  }
  finish(out);
  return out;
}

namespace {

std::vector<BoundAtom> bind(const CQ& q, const Structure& a,
                            const std::map<VarSet, TupleSet>* tables) {
  std::vector<BoundAtom> out;
  for (const Atom& atom : q.atoms) out.push_back({atom.args, &a.relation(atom.rel)});
  if (tables) {
    for (auto& [s, ts] : *tables) out.push_back({s.to_vector(), &ts});
  }
  return out;
}

}  // namespace

AnswerSet brute_eval(const CQ& q, const Structure& a, uint64_t guard) {
  return eval_bound(q.var_count(), q.free_vars(), bind(q, a, nullptr), a.n(), guard);
}

AnswerSet brute_eval_refined(const CQ& q, const Structure& a,
                             const std::map<VarSet, TupleSet>& tables, uint64_t guard) {
  return eval_bound(q.var_count(), q.free_vars(), bind(q, a, &tables), a.n(), guard);
}

AnswerSet brute_eval_projected(const CQ& q, const Structure& a, VarSet scope,
                               const std::map<VarSet, TupleSet>* tables,
                               uint64_t guard) {
  auto atoms = bind(q, a, tables);
  std::vector<int> svars = scope.to_vector();
  double total = std::pow(static_cast<double>(std::max<size_t>(a.n(), 1)),
                          static_cast<double>(svars.size()));
  if (total > static_cast<double>(guard)) throw TooLarge("oracle search space exceeds guard");

  AnswerSet out;
  out.vars = svars;
  std::vector<int64_t> val(std::max(q.var_count(), 1), -1);

  size_t count = svars.empty() ? 1 : 0;
  std::vector<size_t> stack(svars.size(), 0);
  auto all_atoms_extendable = [&]() {
    for (const BoundAtom& at : atoms)
      if (!atom_extendable(at.args, *at.rel, val)) return false;
    return true;
  };
  if (svars.empty()) {
    if (all_atoms_extendable()) out.rows.push_back({});
    return out;
  }
  (void)count;
  int depth = 0;
  Tuple g(svars.size());
  while (depth >= 0) {
    if (stack[depth] == a.n()) {
      val[svars[depth]] = -1;
      stack[depth] = 0;
      --depth;
      if (depth >= 0) ++stack[depth];
      continue;
    }
    val[svars[depth]] = static_cast<int64_t>(stack[depth]);
    if (depth + 1 == static_cast<int>(svars.size())) {
      if (all_atoms_extendable()) {
        for (size_t i = 0; i < svars.size(); ++i)
          g[i] = static_cast<Value>(val[svars[i]]);
        out.rows.push_back(g);
      }
      ++stack[depth];
    } else {
      ++depth;
    }
  }
  finish(out);
  return out;
}

}  // namespace oracle
}  // namespace cqe
