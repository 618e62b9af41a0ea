#include "cqe/consistency.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_map>

namespace cqe {

std::vector<VarSet> Refinement::family() const {
  std::vector<VarSet> f;
  f.reserve(tables.size());
  for (auto& [s, _] : tables) f.push_back(s);
  return f;
}

const TupleSet& Refinement::table(VarSet S) const {
  auto it = tables.find(S);
  if (it == tables.end()) throw ScopeError("no table for {" + query.var_list(S) + "}");
  return it->second;
}

TupleSet& Refinement::table(VarSet S) {
  auto it = tables.find(S);
  if (it == tables.end()) throw ScopeError("no table for {" + query.var_list(S) + "}");
  return it->second;
}

bool Refinement::trivial() const {
  for (auto& [_, t] : tables)
    if (t.empty()) return true;
  return false;
}

void Refinement::empty_all_tables() {
  for (auto& [_, t] : tables) t.clear();
  ++state_version;
}

RefinedQuery Refinement::refined_query() const { return refine_query(query, family()); }

Evaluator Refinement::make_evaluator() const {
  std::vector<AtomView> views;
  views.reserve(query.atoms.size() + tables.size());
  for (const Atom& a : query.atoms)
    views.push_back(build_atom_view(a, base->relation(a.rel)));
  for (auto& [s, t] : tables) views.push_back(table_atom_view(s, t));
  return Evaluator(std::move(views));
}

std::string Refinement::dump() const {
  std::ostringstream os;
  bool first = true;
  for (auto& [s, t] : tables) {
    if (!first) os << "  ";
    first = false;
    os << "{" << query.var_list(s) << "}:" << t.size();
  }
  return os.str();
}

namespace {

// Column positions of S's variables inside the row layout of a table over T.
std::vector<int> sub_cols(VarSet S, VarSet T) {
  std::vector<int> cols;
  int i = 0;
  for (int v : T.to_vector()) {
    if (S.test(v)) cols.push_back(i);
    ++i;
  }
  return cols;
}

}  // namespace

ConsistencyStats make_consistent(Refinement& r) {
  ConsistencyStats st;
  if (r.tables.empty()) return st;

  size_t total_rows = 0;
  for (auto& [_, t] : r.tables) total_rows += t.size();

  // If any atom of the refined query is already empty, no mapping can satisfy
  // the projected query for any scope: the minimal model deletes everything.
  bool doomed = r.trivial();
  std::vector<AtomView> aviews;
  aviews.reserve(r.query.atoms.size());
  for (const Atom& a : r.query.atoms) {
    aviews.push_back(build_atom_view(a, r.base->relation(a.rel)));
    if (aviews.back().tuples->empty()) doomed = true;
  }
  if (doomed) {
    if (total_rows) {
      r.empty_all_tables();
      st.deletions = total_rows;
      st.clauses = total_rows;  // one unit per deleted mapping
      st.clause_size = total_rows;
    }
    return st;
  }

  std::vector<VarSet> fam = r.family();
  int nt = static_cast<int>(fam.size());
  std::vector<TupleSet*> tabs(nt);
  {
    int i = 0;
    for (auto& [_, t] : r.tables) tabs[i++] = &t;
  }

  std::vector<std::vector<char>> del(nt);
  for (int i = 0; i < nt; ++i) del[i].assign(tabs[i]->size(), 0);
  std::vector<std::pair<int, uint32_t>> queue;
  auto push_del = [&](int ti, uint32_t row) {
    if (del[ti][row]) return;
    del[ti][row] = 1;
    queue.push_back({ti, row});
    ++st.deletions;
  };

  // Unit clauses: mappings violating some base atom's projected constraint.
  std::vector<ViewCache> acache(aviews.size());
  thread_local Tuple key;
  for (int ti = 0; ti < nt; ++ti) {
    VarSet S = fam[ti];
    auto svars = S.to_vector();
    for (size_t ai = 0; ai < aviews.size(); ++ai) {
      const AtomView& v = aviews[ai];
      VarSet k = S & v.vars;
      if (k.empty()) continue;  // nonempty checked above
      const KeySet& ks = acache[ai].key_set(v, k);
      for (size_t row = 0; row < tabs[ti]->size(); ++row) {
        auto h = tabs[ti]->row(row);
        key.clear();
        for (size_t j = 0; j < svars.size(); ++j)
          if (k.test(svars[j])) key.push_back(h[j]);
        ++st.clauses;
        ++st.clause_size;
        if (!ks.contains(key)) push_del(ti, static_cast<uint32_t>(row));
      }
    }
  }

  // Projection clauses for every nested pair in the family, both directions:
  // deleting a mapping kills its extensions; a mapping with no surviving
  // extension dies too.
  struct PairLinks {
    int si, ti;
    std::vector<int32_t> parent;             // row of R_T -> row of R_S
    std::vector<uint32_t> support;           // row of R_S -> surviving extension count
    std::vector<std::vector<uint32_t>> children;
  };
  std::vector<PairLinks> pairs;
  std::vector<std::vector<int>> as_small(nt), as_big(nt);  // table -> pair ids
  for (int si = 0; si < nt; ++si)
    for (int ti = 0; ti < nt; ++ti) {
      if (si == ti || !fam[si].subset_of(fam[ti])) continue;
      PairLinks p;
      p.si = si;
      p.ti = ti;
      auto cols = sub_cols(fam[si], fam[ti]);
      const TupleSet& RT = *tabs[ti];
      const TupleSet& RS = *tabs[si];
      p.parent.assign(RT.size(), -1);
      p.support.assign(RS.size(), 0);
      p.children.assign(RS.size(), {});
      for (size_t row = 0; row < RT.size(); ++row) {
        auto h = RT.row(row);
        key.clear();
        for (int c : cols) key.push_back(h[c]);
        int64_t g = RS.find(key);
        if (g < 0) {
          push_del(ti, static_cast<uint32_t>(row));
          ++st.clauses;
          ++st.clause_size;
          continue;
        }
        p.parent[row] = static_cast<int32_t>(g);
        ++p.support[g];
        p.children[g].push_back(static_cast<uint32_t>(row));
      }
      st.clauses += RT.size() + RS.size();
      st.clause_size += 2 * RT.size();
      for (size_t g = 0; g < RS.size(); ++g)
        if (p.support[g] == 0) push_del(si, static_cast<uint32_t>(g));
      as_small[si].push_back(static_cast<int>(pairs.size()));
      as_big[ti].push_back(static_cast<int>(pairs.size()));
      pairs.push_back(std::move(p));
    }

  // Unit propagation to the least model.
  while (!queue.empty()) {
    auto [ti, row] = queue.back();
    queue.pop_back();
    for (int pi : as_big[ti]) {
      PairLinks& p = pairs[pi];
      int32_t g = p.parent[row];
      if (g >= 0 && !del[p.si][g] && --p.support[g] == 0)
        push_del(p.si, static_cast<uint32_t>(g));
    }
    for (int pi : as_small[ti]) {
      PairLinks& p = pairs[pi];
      for (uint32_t child : p.children[row]) push_del(p.ti, child);
    }
  }

  if (st.deletions == 0) return st;

  for (int ti = 0; ti < nt; ++ti) {
    size_t alive = 0;
    for (char d : del[ti])
      if (!d) ++alive;
    if (alive == 0) {
      // An emptied table is an unsatisfiable atom: everything goes.
      st.deletions = total_rows;
      r.empty_all_tables();
      return st;
    }
  }
  for (int ti = 0; ti < nt; ++ti) {
    bool any = std::find(del[ti].begin(), del[ti].end(), 1) != del[ti].end();
    if (!any) continue;
    TupleSet next(tabs[ti]->arity());
    for (size_t row = 0; row < tabs[ti]->size(); ++row)
      if (!del[ti][row]) next.push_row(tabs[ti]->row(row));
    *tabs[ti] = std::move(next);
  }
  ++r.state_version;
  return st;
}

namespace {

// The shared fixpoint loop: grow the family with every set whose projected
// evaluation stays within M, then re-enforce consistency; repeat until
// nothing moves. Assumes the refinement is consistent on entry.
void strong_loop(Refinement& r, uint64_t M, ConsistencyStats* stats) {
  int k = r.query.var_count();
  if (k > 20)
    throw TooManyVariables("family growth is exponential; refusing " +
                           std::to_string(k) + " variables");
  ConsistencyStats local;
  ConsistencyStats& st = stats ? *stats : local;

  // Seed: the empty set is always small. Its table holds the empty mapping
  // iff every atom is satisfiable at all.
  if (!r.has(VarSet())) {
    Evaluator ev = r.make_evaluator();
    TupleSet t0(0);
    if (ev.member(VarSet(), {})) t0.push_row({});
    r.tables.emplace(VarSet(), std::move(t0));
    ++r.state_version;
  }

  std::vector<std::vector<uint32_t>> by_card(k + 1);
  for (uint32_t m = 1; m < (1u << k); ++m)
    by_card[std::popcount(m)].push_back(m);

  // Result size of a rejected set only changes when the refinement changes;
  // remember the version each verdict was computed at.
  std::unordered_map<uint32_t, uint64_t> rejected;

  std::vector<Value> cand;
  Tuple ext, joined;
  uint64_t guard = (1ull << k) + 4;
  for (uint64_t iter = 0;; ++iter) {
    if (iter > guard) throw Error("internal: family growth failed to stabilize");
    ++st.iterations;
    bool changed = false;
    Evaluator ev = r.make_evaluator();

    // Step 1: candidate sets all of whose one-smaller subsets are present,
    // by ascending cardinality.
    for (int card = 1; card <= k; ++card) {
      for (uint32_t mask : by_card[card]) {
        VarSet S(mask);
        if (r.has(S)) continue;
        bool ready = true;
        for (int x : S.to_vector())
          if (!r.has(S.without(x))) {
            ready = false;
            break;
          }
        if (!ready) continue;
        auto rej = rejected.find(mask);
        if (rej != rejected.end() && rej->second == r.state_version) continue;

        int x = S.min_var();
        VarSet Sm = S.without(x);
        const TupleSet& base_rows = r.table(Sm);
        int xpos = 0;  // x is the smallest variable of S
        TupleSet grown(card);
        bool small = true;
        for (size_t row = 0; row < base_rows.size() && small; ++row) {
          auto h = base_rows.row(row);
          ev.candidates(S, x, h, cand);
          for (Value c : cand) {
            ext.assign(h.begin(), h.end());
            ext.insert(ext.begin() + xpos, c);
            if (!ev.member_incremental(S, x, ext)) continue;
            grown.push_row(ext);
            if (grown.size() > M) {
              small = false;
              break;
            }
          }
        }
        if (small) {
          r.tables.emplace(S, std::move(grown));
          ++r.state_version;
          changed = true;
          ev = r.make_evaluator();
        } else {
          rejected[mask] = r.state_version;
        }
      }
    }

    // Step 2: unions of present sets. For each union pick the generating
    // pair with the largest overlap (cheapest join), verify each joined
    // mapping against the atoms that straddle the two sides, break past M.
    {
      std::vector<VarSet> fam = r.family();
      std::map<VarSet, std::pair<VarSet, VarSet>, CanonLess> unions;
      for (size_t i = 0; i < fam.size(); ++i)
        for (size_t j = i; j < fam.size(); ++j) {
          VarSet U = fam[i] | fam[j];
          if (r.has(U)) continue;
          auto [it, fresh] = unions.try_emplace(U, fam[i], fam[j]);
          if (!fresh) {
            auto& [cs, ct] = it->second;
            if ((fam[i] & fam[j]).count() > (cs & ct).count())
              it->second = {fam[i], fam[j]};
          }
        }
      for (auto& [U, pr] : unions) {
        if (r.has(U)) continue;
        auto rej = rejected.find(U.bits);
        if (rej != rejected.end() && rej->second == r.state_version) continue;
        auto [S, T] = pr;
        const TupleSet& RS = r.table(S);
        const TupleSet& RT = r.table(T);
        VarSet I = S & T;
        KeyIndex idx(RT, sub_cols(I, T));

        // Views whose variables straddle S\T and T\S: the only constraints a
        // joined pair of verified mappings can still violate.
        std::vector<int> straddle;
        {
          const auto& views = ev.views();
          for (size_t vi = 0; vi < views.size(); ++vi) {
            VarSet vv = views[vi].vars & U;
            if (!(vv - T).empty() && !(vv - S).empty())
              straddle.push_back(static_cast<int>(vi));
          }
        }
        // Position of each U-variable in (source, column) form.
        auto uvars = U.to_vector();
        auto svars = S.to_vector();
        auto tvars = T.to_vector();
        std::vector<std::pair<int, int>> src(uvars.size());
        for (size_t u = 0; u < uvars.size(); ++u) {
          for (size_t i2 = 0; i2 < svars.size(); ++i2)
            if (svars[i2] == uvars[u]) src[u] = {0, static_cast<int>(i2)};
          for (size_t i2 = 0; i2 < tvars.size(); ++i2)
            if (tvars[i2] == uvars[u]) src[u] = {1, static_cast<int>(i2)};
        }

        TupleSet grown(static_cast<int>(uvars.size()));
        bool small = true;
        Tuple ikey;
        for (size_t gr = 0; gr < RS.size() && small; ++gr) {
          auto g = RS.row(gr);
          ikey.clear();
          int j = 0;
          for (int v : svars) {
            if (I.test(v)) ikey.push_back(g[j]);
            ++j;
          }
          const auto* bucket = idx.lookup(ikey);
          if (!bucket) continue;
          for (uint32_t hr : *bucket) {
            auto h = RT.row(hr);
            joined.clear();
            for (auto [side, col] : src) joined.push_back(side == 0 ? g[col] : h[col]);
            if (!ev.member_some(U, joined, straddle)) continue;
            grown.push_row(joined);
            if (grown.size() > M) {
              small = false;
              break;
            }
          }
        }
        if (small) {
          r.tables.emplace(U, std::move(grown));
          ++r.state_version;
          changed = true;
          ev = r.make_evaluator();
        } else {
          rejected[U.bits] = r.state_version;
        }
      }
    }

    // Step 3: restore consistency; deletions may make new sets small.
    ConsistencyStats cst = make_consistent(r);
    st.clauses += cst.clauses;
    st.clause_size += cst.clause_size;
    st.deletions += cst.deletions;
    if (cst.deletions) changed = true;

    if (!changed) break;
  }
}

}  // namespace

Refinement make_strongly_m_consistent(const CQ& q,
                                      std::shared_ptr<const Structure> base,
                                      uint64_t M, ConsistencyStats* stats) {
  if (!q.quantifier_free()) throw ScopeError("refinements require a quantifier-free query");
  Refinement r;
  r.query = q;
  r.base = std::move(base);
  size_t m = r.base->m();
  if (M < m)
    throw BadM("M = " + std::to_string(M) + " is below the largest relation (" +
               std::to_string(m) + ")");
  strong_loop(r, M, stats);
  return r;
}

void restore_strong_consistency(Refinement& r, uint64_t M, ConsistencyStats* stats) {
  if (M < r.base->m()) throw BadM("M below the largest relation");
  ConsistencyStats cst = make_consistent(r);
  if (stats) {
    stats->clauses += cst.clauses;
    stats->clause_size += cst.clause_size;
    stats->deletions += cst.deletions;
  }
  strong_loop(r, M, stats);
}

}  // namespace cqe
