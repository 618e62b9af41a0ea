#include "cqe/eval.hpp"

#include <algorithm>

namespace cqe {

AtomView build_atom_view(const Atom& atom, const TupleSet& rel) {
  AtomView v;
  v.vars = atom.vars;
  v.cols = atom.vars.to_vector();

  // First argument position of each distinct variable.
  std::vector<int> first_pos(v.cols.size());
  for (size_t i = 0; i < v.cols.size(); ++i) {
    for (size_t p = 0; p < atom.args.size(); ++p) {
      if (atom.args[p] == v.cols[i]) {
        first_pos[i] = static_cast<int>(p);
        break;
      }
    }
  }
  bool has_repeats = atom.args.size() != v.cols.size();
  bool identity = !has_repeats;
  if (identity)
    for (size_t i = 0; i < v.cols.size(); ++i)
      if (first_pos[i] != static_cast<int>(i)) identity = false;

  if (identity) {
    v.tuples = &rel;
    return v;
  }
  auto owned = std::make_shared<TupleSet>(static_cast<int>(v.cols.size()));
  Tuple t(v.cols.size());
  for (size_t r = 0; r < rel.size(); ++r) {
    auto row = rel.row(r);
    bool ok = true;
    if (has_repeats) {
      for (size_t p = 0; p < atom.args.size() && ok; ++p) {
        for (size_t i = 0; i < v.cols.size(); ++i) {
          if (atom.args[p] == v.cols[i] && row[p] != row[first_pos[i]]) {
            ok = false;
            break;
          }
        }
      }
    }
    if (!ok) continue;
    for (size_t i = 0; i < v.cols.size(); ++i) t[i] = row[first_pos[i]];
    owned->insert(t);
  }
  v.owned = owned;
  v.tuples = owned.get();
  return v;
}

AtomView table_atom_view(VarSet vars, const TupleSet& table) {
  AtomView v;
  v.vars = vars;
  v.cols = vars.to_vector();
  v.tuples = &table;
  return v;
}

Tuple project_mapping(VarSet from, std::span<const Value> mapping, VarSet onto) {
  Tuple out;
  out.reserve(onto.count());
  int i = 0;
  for (int v : from.to_vector()) {
    if (onto.test(v)) out.push_back(mapping[i]);
    ++i;
  }
  return out;
}

namespace {

// Positions (within the view's row layout) of the key variables.
std::vector<int> key_cols_for(const AtomView& v, VarSet key) {
  std::vector<int> cols;
  for (size_t i = 0; i < v.cols.size(); ++i)
    if (key.test(v.cols[i])) cols.push_back(static_cast<int>(i));
  return cols;
}

}  // namespace

void ViewCache::refresh(const AtomView& v) {
  if (version_ == v.tuples->version()) return;
  keysets_.clear();
  keyindexes_.clear();
  columns_.clear();
  version_ = v.tuples->version();
}

const KeySet& ViewCache::key_set(const AtomView& v, VarSet key) {
  refresh(v);
  auto it = keysets_.find(key.bits);
  if (it != keysets_.end()) return it->second;
  return keysets_.emplace(key.bits, KeySet(*v.tuples, key_cols_for(v, key))).first->second;
}

const KeyIndex& ViewCache::key_index(const AtomView& v, VarSet key) {
  refresh(v);
  auto it = keyindexes_.find(key.bits);
  if (it != keyindexes_.end()) return it->second;
  return keyindexes_.emplace(key.bits, KeyIndex(*v.tuples, key_cols_for(v, key)))
      .first->second;
}

const std::vector<Value>& ViewCache::distinct_col(const AtomView& v, int var) {
  refresh(v);
  auto it = columns_.find(var);
  if (it != columns_.end()) return it->second;
  int col = -1;
  for (size_t i = 0; i < v.cols.size(); ++i)
    if (v.cols[i] == var) col = static_cast<int>(i);
  std::vector<Value> vals;
  vals.reserve(v.tuples->size());
  for (size_t r = 0; r < v.tuples->size(); ++r) vals.push_back(v.tuples->row(r)[col]);
  std::sort(vals.begin(), vals.end());
  vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
  return columns_.emplace(var, std::move(vals)).first->second;
}

Evaluator::Evaluator(std::vector<AtomView> views)
    : views_(std::move(views)), caches_(views_.size()) {}

bool Evaluator::member(VarSet S, std::span<const Value> h) {
  thread_local Tuple key;
  for (size_t i = 0; i < views_.size(); ++i) {
    const AtomView& v = views_[i];
    VarSet k = S & v.vars;
    ++probes;
    if (k.empty()) {
      if (v.tuples->empty()) return false;
      continue;
    }
    key.clear();
    int j = 0;
    for (int var : S.to_vector()) {
      if (k.test(var)) key.push_back(h[j]);
      ++j;
    }
    if (!caches_[i].key_set(v, k).contains(key)) return false;
  }
  return true;
}

bool Evaluator::member_incremental(VarSet S, int x, std::span<const Value> h_ext) {
  thread_local Tuple key;
  for (size_t i = 0; i < views_.size(); ++i) {
    const AtomView& v = views_[i];
    if (!v.vars.test(x)) continue;
    VarSet k = S & v.vars;
    ++probes;
    key.clear();
    int j = 0;
    for (int var : S.to_vector()) {
      if (k.test(var)) key.push_back(h_ext[j]);
      ++j;
    }
    if (!caches_[i].key_set(v, k).contains(key)) return false;
  }
  return true;
}

bool Evaluator::member_some(VarSet S, std::span<const Value> h,
                            std::span<const int> view_ids) {
  thread_local Tuple key;
  for (int i : view_ids) {
    const AtomView& v = views_[i];
    VarSet k = S & v.vars;
    ++probes;
    if (k.empty()) {
      if (v.tuples->empty()) return false;
      continue;
    }
    key.clear();
    int j = 0;
    for (int var : S.to_vector()) {
      if (k.test(var)) key.push_back(h[j]);
      ++j;
    }
    if (!caches_[i].key_set(v, k).contains(key)) return false;
  }
  return true;
}

void Evaluator::candidates(VarSet S, int x, std::span<const Value> h,
                           std::vector<Value>& out) {
  out.clear();
  VarSet Sm = S.without(x);
  // Pick the generator atom: must contain x; prefer the largest key overlap
  // with the already-assigned variables, then the smallest view, then the
  // first in atom order.
  int best = -1;
  int best_key = -1;
  size_t best_size = 0;
  for (size_t i = 0; i < views_.size(); ++i) {
    const AtomView& v = views_[i];
    if (!v.vars.test(x)) continue;
    int ks = (Sm & v.vars).count();
    size_t sz = v.tuples->size();
    if (best < 0 || ks > best_key || (ks == best_key && sz < best_size)) {
      best = static_cast<int>(i);
      best_key = ks;
      best_size = sz;
    }
  }
  if (best < 0) return;  // x occurs in no atom: cannot happen for parsed queries

  const AtomView& v = views_[best];
  if (best_key == 0) {
    const auto& col = caches_[best].distinct_col(v, x);
    out.assign(col.begin(), col.end());
    return;
  }
  VarSet k = Sm & v.vars;
  const KeyIndex& idx = caches_[best].key_index(v, k);
  thread_local Tuple key;
  key.clear();
  int j = 0;
  for (int var : Sm.to_vector()) {
    if (k.test(var)) key.push_back(h[j]);
    ++j;
  }
  ++probes;
  const auto* bucket = idx.lookup(key);
  if (!bucket) return;
  int xcol = -1;
  for (size_t i = 0; i < v.cols.size(); ++i)
    if (v.cols[i] == x) xcol = static_cast<int>(i);
  for (uint32_t r : *bucket) out.push_back(v.tuples->row(r)[xcol]);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
}

bool Evaluator::all_mappings(VarSet S, uint64_t limit, TupleSet& out) {
  out = TupleSet(S.count());
  // Empty scope: the unique empty mapping qualifies iff every view with an
  // empty key is nonempty.
  if (S.empty()) {
    Tuple empty;
    if (member(S, empty)) out.push_row(empty);
    return out.size() <= limit;
  }
  if (!member(VarSet(), {})) return true;  // some view is empty: no mappings

  std::vector<int> order = S.to_vector();  // ascending variable id
  // Iterative extension, one variable at a time.
  TupleSet cur(0);
  cur.push_row({});
  VarSet assigned;
  std::vector<Value> cand;
  Tuple ext;
  for (size_t step = 0; step < order.size(); ++step) {
    int x = order[step];
    VarSet next_set = assigned.with(x);
    TupleSet next(next_set.count());
    // Position of x within the ascending layout of next_set.
    int xpos = 0;
    for (int v : next_set.to_vector()) {
      if (v == x) break;
      ++xpos;
    }
    bool last = step + 1 == order.size();
    for (size_t r = 0; r < cur.size(); ++r) {
      auto h = cur.row(r);
      candidates(next_set, x, h, cand);
      for (Value c : cand) {
        ext.assign(h.begin(), h.end());
        ext.insert(ext.begin() + xpos, c);
        if (!member_incremental(next_set, x, ext)) continue;
        next.push_row(ext);
        if (last && next.size() > limit) {
          out = std::move(next);
          return false;
        }
      }
    }
    if (!last && next.size() > limit * 64) {
      // Intermediate layers are not bounded by the final count; keep a hard
      // guard so callers with small limits cannot blow up memory.
      out = std::move(next);
      return false;
    }
    cur = std::move(next);
    assigned = next_set;
  }
  out = std::move(cur);
  return out.size() <= limit;
}

TupleSet eval_projected(const ProjectedQuery& pq, const Structure& a) {
  std::vector<AtomView> views;
  views.reserve(pq.base.atoms.size());
  for (const Atom& atom : pq.base.atoms)
    views.push_back(build_atom_view(atom, a.relation(atom.rel)));
  Evaluator ev(std::move(views));
  TupleSet out(pq.scope.count());
  ev.all_mappings(pq.scope, ~0ull, out);
  return out;
}

}  // namespace cqe
