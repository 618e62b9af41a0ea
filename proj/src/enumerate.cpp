#include "cqe/enumerate.hpp"

#include <algorithm>

namespace cqe {

namespace {

std::vector<int> shared_cols(const std::vector<int>& cols, VarSet with) {
  std::vector<int> out;
  for (size_t i = 0; i < cols.size(); ++i)
    if (with.test(cols[i])) out.push_back(static_cast<int>(i));
  return out;
}

}  // namespace

EnumIndex EnumIndex::preprocess_acyclic(const CQ& psi, const Structure& c,
                                        const JoinTree* tree,
                                        const std::vector<int>* connex) {
  JoinTree local;
  if (!tree) {
    local = build_join_tree(psi);
    tree = &local;
  }
  VarSet free = psi.free_vars();
  std::vector<int> F;
  if (connex) {
    F = *connex;
  } else {
    auto found = find_connex_nodes(tree->bags, tree->edges, free);
    if (!found)
      throw NotFreeConnex("join tree has no connected cover of the free variables");
    F = *found;
  }
  {
    VarSet u;
    for (int f : F) u = u | tree->bags[f];
    if (u != free) throw NotFreeConnex("witness bags do not cover the free variables");
  }

  EnumIndex idx;
  idx.free_vars_ = free.to_vector();
  int n = static_cast<int>(tree->bags.size());
  idx.nodes_.resize(n);
  for (int i = 0; i < n; ++i) {
    Node& nd = idx.nodes_[i];
    nd.vars = psi.atoms[i].vars;
    nd.cols = nd.vars.to_vector();
    AtomView v = build_atom_view(psi.atoms[i], c.relation(psi.atoms[i].rel));
    nd.rel = *v.tuples;  // reduced in place below; always an owned copy
  }

  // Root inside F (anywhere if Boolean); parents + top-down order by BFS.
  std::vector<std::vector<int>> adj(n);
  for (auto [a, b] : tree->edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  int root = F.empty() ? 0 : F.front();
  std::vector<int> order{root};
  idx.nodes_[root].parent = -1;
  for (size_t q = 0; q < order.size(); ++q) {
    int u = order[q];
    for (int v : adj[u]) {
      if (v == idx.nodes_[u].parent) continue;
      idx.nodes_[v].parent = u;
      order.push_back(v);
    }
  }

  // Full reduction: children filter parents bottom-up, then parents filter
  // children top-down; afterwards every surviving row extends to an answer.
  auto semijoin = [&](Node& target, const Node& with) {
    VarSet shared = target.vars & with.vars;
    if (shared.empty()) {
      if (with.rel.empty() && !target.rel.empty()) target.rel = TupleSet(target.rel.arity());
      return;
    }
    KeySet ks(with.rel, shared_cols(with.cols, shared));
    auto cols = shared_cols(target.cols, shared);
    TupleSet next(target.rel.arity());
    Tuple key;
    for (size_t row = 0; row < target.rel.size(); ++row) {
      auto t = target.rel.row(row);
      key.clear();
      for (int ccol : cols) key.push_back(t[ccol]);
      if (ks.contains(key)) next.push_row(t);
    }
    target.rel = std::move(next);
  };
  for (size_t q = order.size(); q-- > 1;) {
    int u = order[q];
    semijoin(idx.nodes_[idx.nodes_[u].parent], idx.nodes_[u]);
  }
  for (size_t q = 1; q < order.size(); ++q) {
    int u = order[q];
    semijoin(idx.nodes_[u], idx.nodes_[idx.nodes_[u].parent]);
  }
  for (auto& nd : idx.nodes_)
    if (nd.rel.empty()) idx.empty_ = true;
  if (idx.empty_)
    for (auto& nd : idx.nodes_) nd.rel = TupleSet(nd.rel.arity());

  // Preorder the connex nodes along the tree so each one's F-parent precedes
  // it; the witness is connected, so walking from its root suffices.
  std::vector<char> inF(n, 0);
  for (int f : F) inF[f] = 1;
  std::vector<int> fpos(n, -1);
  if (!F.empty()) {
    std::vector<int> stack{root};
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      fpos[u] = static_cast<int>(idx.fnodes_.size());
      idx.fnodes_.push_back(u);
      int p = idx.nodes_[u].parent;
      idx.fparent_.push_back(p >= 0 && inF[p] ? fpos[p] : -1);
      for (int v : adj[u])
        if (v != p && inF[v]) stack.push_back(v);
    }
  }
  idx.findex_.reserve(idx.fnodes_.size());
  for (size_t i = 0; i < idx.fnodes_.size(); ++i) {
    const Node& nd = idx.nodes_[idx.fnodes_[i]];
    VarSet pkey;
    if (idx.fparent_[i] >= 0) pkey = nd.vars & idx.nodes_[idx.fnodes_[idx.fparent_[i]]].vars;
    idx.findex_.emplace_back(nd.rel, shared_cols(nd.cols, pkey));
  }
  // First F node carrying each free variable.
  for (int v : idx.free_vars_) {
    for (size_t i = 0; i < idx.fnodes_.size(); ++i) {
      const Node& nd = idx.nodes_[idx.fnodes_[i]];
      if (!nd.vars.test(v)) continue;
      int col = static_cast<int>(std::find(nd.cols.begin(), nd.cols.end(), v) -
                                 nd.cols.begin());
      idx.out_src_.push_back({static_cast<int>(i), col});
      break;
    }
  }
  return idx;
}

size_t EnumIndex::reduced_size() const {
  size_t s = 0;
  for (const auto& nd : nodes_) s += nd.rel.size();
  return s;
}

bool EnumIndex::test(std::span<const Value> b, uint64_t* steps) const {
  if (b.size() != free_vars_.size())
    throw DomainMismatch("mapping arity does not match the free variables");
  if (empty_) return false;
  thread_local Tuple key;
  for (int f : fnodes_) {
    const Node& nd = nodes_[f];
    key.clear();
    for (int v : nd.cols) {
      size_t j = std::lower_bound(free_vars_.begin(), free_vars_.end(), v) -
                 free_vars_.begin();
      key.push_back(b[j]);
    }
    if (steps) ++*steps;
    if (!nd.rel.contains(key)) return false;
  }
  return true;
}

Cursor EnumIndex::open() const { return Cursor(this); }

void Cursor::emit(Tuple& out) {
  out.clear();
  for (auto [fi, col] : idx_->out_src_) {
    const auto& nd = idx_->nodes_[idx_->fnodes_[fi]];
    uint32_t row = (*bucket_[fi])[pos_[fi]];
    out.push_back(nd.rel.row(row)[col]);
  }
}

bool Cursor::fill_from(size_t level) {
  thread_local Tuple key;
  for (size_t i = level; i < idx_->fnodes_.size(); ++i) {
    const auto& nd = idx_->nodes_[idx_->fnodes_[i]];
    key.clear();
    int fp = idx_->fparent_[i];
    if (fp >= 0) {
      const auto& pn = idx_->nodes_[idx_->fnodes_[fp]];
      auto prow = pn.rel.row((*bucket_[fp])[pos_[fp]]);
      VarSet shared = nd.vars & pn.vars;
      for (size_t c2 = 0; c2 < pn.cols.size(); ++c2)
        if (shared.test(pn.cols[c2])) key.push_back(prow[c2]);
    }
    ++steps;
    bucket_[i] = idx_->findex_[i].lookup(key);
    // Reduction keeps only rows that extend to answers, so a surviving
    // parent assignment always has at least one child row.
    if (!bucket_[i] || bucket_[i]->empty()) return false;
    pos_[i] = 0;
  }
  return true;
}

bool Cursor::next(Tuple& out) {
  if (done_) return false;
  size_t f = idx_->fnodes_.size();
  if (!started_) {
    started_ = true;
    if (idx_->empty_) {
      done_ = true;
      return false;
    }
    if (f == 0) {  // Boolean: the empty mapping, once
      out.clear();
      done_ = true;
      return true;
    }
    bucket_.assign(f, nullptr);
    pos_.assign(f, 0);
    if (!fill_from(0)) {
      done_ = true;
      return false;
    }
    emit(out);
    return true;
  }
  if (f == 0) return false;
  size_t i = f - 1;
  while (true) {
    ++steps;
    if (pos_[i] + 1 < bucket_[i]->size()) {
      ++pos_[i];
      if (fill_from(i + 1)) {
        emit(out);
        return true;
      }
      continue;  // unreachable after reduction; keep advancing this level
    }
    if (i == 0) break;
    --i;
  }
  done_ = true;
  return false;
}

UnionCursor::UnionCursor(std::vector<const EnumIndex*> idxs) : idxs_(std::move(idxs)) {
  for (const EnumIndex* i : idxs_)
    if (i->free_vars() != idxs_.front()->free_vars())
      throw SchemaMismatch("union indexes disagree on the free variables");
  cursors_.reserve(idxs_.size());
  for (const EnumIndex* i : idxs_) cursors_.push_back(i->open());
}

bool UnionCursor::next_level(size_t level, Tuple& out) {
  if (level == 0) {
    bool got = cursors_[0].next(out);
    steps += 1;
    return got;
  }
  Tuple t;
  while (true) {
    if (!next_level(level - 1, t)) {
      // Prefix exhausted: everything of this index flows from its cursor.
      steps += 1;
      return cursors_[level].next(out);
    }
    ++steps;
    if (!idxs_[level]->test(t, &steps)) {
      out = std::move(t);
      return true;
    }
    // t belongs to this index: its cursor will emit it in due course.
    // Substitute one fresh tuple so the delay stays bounded; if the cursor
    // is spent, every tuple of this index (t included) is already out.
    steps += 1;
    if (cursors_[level].next(out)) return true;
  }
}

bool UnionCursor::next(Tuple& out) {
  if (idxs_.empty()) return false;
  return next_level(idxs_.size() - 1, out);
}

uint64_t UnionCursor::total_steps() const {
  uint64_t s = steps;
  for (const Cursor& c : cursors_) s += c.steps;
  return s;
}

}  // namespace cqe
