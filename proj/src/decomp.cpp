#include "cqe/decomp.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

namespace cqe {

namespace {

std::vector<std::vector<int>> adjacency(const TreeDecomposition& td) {
  std::vector<std::vector<int>> adj(td.bags.size());
  for (auto [a, b] : td.edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  return adj;
}

bool connected_subset(const std::vector<std::vector<int>>& adj, uint32_t mask) {
  if (mask == 0) return true;
  int start = std::countr_zero(mask);
  uint32_t seen = 1u << start;
  std::vector<int> stack{start};
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int v : adj[u])
      if ((mask >> v & 1) && !(seen >> v & 1)) {
        seen |= 1u << v;
        stack.push_back(v);
      }
  }
  return seen == mask;
}

std::string encode_rooted(const std::vector<std::vector<int>>& adj,
                          const std::vector<VarSet>& bags, int u, int parent) {
  std::vector<std::string> child;
  for (int v : adj[u])
    if (v != parent) child.push_back(encode_rooted(adj, bags, v, u));
  std::sort(child.begin(), child.end());
  std::string out = "(" + std::to_string(bags[u].bits);
  for (auto& c : child) out += c;
  out += ")";
  return out;
}

}  // namespace

std::string TreeDecomposition::canonical_key() const {
  if (bags.empty()) return "()";
  auto adj = adjacency(*this);
  std::string best;
  for (size_t r = 0; r < bags.size(); ++r) {
    std::string e = encode_rooted(adj, bags, static_cast<int>(r), -1);
    if (best.empty() || e < best) best = e;
  }
  return best;
}

TdCheck validate_td(const CQ& q, const TreeDecomposition& td) {
  size_t n = td.bags.size();
  if (n == 0) return {false, "decomposition has no nodes"};
  if (td.edges.size() != n - 1) return {false, "edge count does not form a tree"};
  for (auto [a, b] : td.edges)
    if (a < 0 || b < 0 || a >= static_cast<int>(n) || b >= static_cast<int>(n) || a == b)
      return {false, "edge endpoint out of range"};
  auto adj = adjacency(td);
  if (!connected_subset(adj, n >= 32 ? ~0u : ((1u << n) - 1)))
    return {false, "decomposition tree is disconnected"};
  for (VarSet b : td.bags)
    if (!b.subset_of(q.all_vars())) return {false, "bag mentions unknown variable"};
  for (const Atom& a : q.atoms) {
    bool covered = false;
    for (VarSet b : td.bags)
      if (a.vars.subset_of(b)) covered = true;
    if (!covered) return {false, "atom " + a.rel + " covered by no bag"};
  }
  for (int v = 0; v < q.var_count(); ++v) {
    uint32_t mask = 0;
    for (size_t i = 0; i < n; ++i)
      if (td.bags[i].test(v)) mask |= 1u << i;
    if (mask && !connected_subset(adj, mask))
      return {false, "occurrences of " + q.var_names[v] + " are disconnected"};
  }
  return {};
}

std::optional<std::vector<int>> find_connex_nodes(
    const std::vector<VarSet>& bags, const std::vector<std::pair<int, int>>& edges,
    VarSet free) {
  if (free.empty()) return std::vector<int>{};
  std::vector<std::vector<int>> adj(bags.size());
  for (auto [a, b] : edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  int n = static_cast<int>(bags.size());
  // Only nodes whose bag sits inside the free set can take part.
  std::vector<int> eligible;
  for (int i = 0; i < n; ++i)
    if (bags[i].subset_of(free)) eligible.push_back(i);
  int e = static_cast<int>(eligible.size());
  if (e > 20) e = 20;  // defensive cap; never hit at the supported variable cap
  std::optional<std::vector<int>> best;
  for (uint32_t m = 1; m < (1u << e); ++m) {
    if (best && std::popcount(m) >= static_cast<int>(best->size())) continue;
    VarSet u;
    uint32_t node_mask = 0;
    for (int j = 0; j < e; ++j)
      if (m >> j & 1) {
        u = u | bags[eligible[j]];
        node_mask |= 1u << eligible[j];
      }
    if (u != free) continue;
    if (!connected_subset(adj, node_mask)) continue;
    std::vector<int> w;
    for (int j = 0; j < e; ++j)
      if (m >> j & 1) w.push_back(eligible[j]);
    best = std::move(w);
  }
  return best;
}

std::optional<std::vector<int>> find_connex_witness(const CQ& q,
                                                    const TreeDecomposition& td) {
  return find_connex_nodes(td.bags, td.edges, q.free_vars());
}

bool is_free_connex(const CQ& q, const TreeDecomposition& td) {
  return find_connex_witness(q, td).has_value();
}

namespace {

struct EliminationResult {
  TreeDecomposition td;
};

// Clique tree induced by a vertex elimination order, pruned so no bag lies
// inside a neighboring bag.
TreeDecomposition clique_tree(const CQ& q, const std::vector<int>& order) {
  int k = q.var_count();
  std::vector<VarSet> adj(k);
  for (const Atom& a : q.atoms)
    for (int v : a.vars.to_vector()) adj[v] = adj[v] | a.vars.without(v);

  std::vector<int> pos(k);
  for (int i = 0; i < k; ++i) pos[order[i]] = i;

  std::vector<VarSet> cliques(k);
  std::vector<VarSet> work = adj;
  VarSet eliminated;
  for (int i = 0; i < k; ++i) {
    int v = order[i];
    VarSet nb = work[v] - eliminated;
    cliques[v] = nb.with(v);
    // connect the remaining neighbors
    for (int u : nb.to_vector()) work[u] = work[u] | nb.without(u);
    eliminated = eliminated.with(v);
  }

  // Parent of C_v: clique of the earliest-eliminated vertex in C_v minus v.
  std::vector<int> parent(k, -1);
  for (int v = 0; v < k; ++v) {
    VarSet rest = cliques[v].without(v);
    int bestu = -1;
    for (int u : rest.to_vector())
      if (bestu < 0 || pos[u] < pos[bestu]) bestu = u;
    parent[v] = bestu;  // -1 for component roots
  }
  // Stitch the components together (bags are disjoint across components).
  int root0 = -1;
  for (int i = k - 1; i >= 0; --i) {
    int v = order[i];
    if (parent[v] >= 0) continue;
    if (root0 < 0)
      root0 = v;
    else
      parent[v] = root0;
  }

  // Contract every edge whose endpoints' bags are nested, to fixpoint, so no
  // surviving bag lies inside a neighbor bag.
  std::vector<int> repr(k);
  std::iota(repr.begin(), repr.end(), 0);
  auto find = [&](int v) {
    while (repr[v] != v) v = repr[v] = repr[repr[v]];
    return v;
  };
  std::set<std::pair<int, int>> eset;
  for (int v = 0; v < k; ++v)
    if (parent[v] >= 0)
      eset.insert({std::min(v, parent[v]), std::max(v, parent[v])});
  bool changed = true;
  while (changed) {
    changed = false;
    std::set<std::pair<int, int>> next;
    for (auto [a, b] : eset) {
      a = find(a);
      b = find(b);
      if (a == b) continue;
      if (cliques[a].subset_of(cliques[b])) {
        repr[a] = b;
        changed = true;
      } else if (cliques[b].subset_of(cliques[a])) {
        repr[b] = a;
        changed = true;
      } else {
        next.insert({std::min(a, b), std::max(a, b)});
      }
    }
    eset = std::move(next);
  }

  TreeDecomposition td;
  std::vector<int> index(k, -1);
  for (int v = 0; v < k; ++v)
    if (find(v) == v) {
      index[v] = static_cast<int>(td.bags.size());
      td.bags.push_back(cliques[v]);
    }
  for (auto [a, b] : eset) td.edges.push_back({index[find(a)], index[find(b)]});
  if (td.bags.empty()) td.bags.push_back(VarSet());
  return td;
}

// Contract the minimal subtree spanning `keep` into a single node; attach a
// fresh node with bag `extra` to it.
TreeDecomposition connex_complete(const TreeDecomposition& td, uint32_t keep,
                                  VarSet extra) {
  auto adj = adjacency(td);
  int n = static_cast<int>(td.bags.size());
  // Trim leaves outside `keep` until only the Steiner subtree remains.
  std::vector<int> deg(n);
  std::vector<bool> alive(n, true);
  for (int i = 0; i < n; ++i) deg[i] = static_cast<int>(adj[i].size());
  bool changed = true;
  while (changed) {
    changed = false;
    for (int i = 0; i < n; ++i) {
      if (!alive[i] || (keep >> i & 1) || deg[i] > 1) continue;
      alive[i] = false;
      changed = true;
      for (int j : adj[i])
        if (alive[j]) --deg[j];
    }
  }
  uint32_t span = 0;
  for (int i = 0; i < n; ++i)
    if (alive[i]) span |= 1u << i;
  if (span == 0) span = keep;  // single isolated node case

  TreeDecomposition out;
  std::vector<int> index(n, -1);
  VarSet merged;
  for (int i = 0; i < n; ++i)
    if (span >> i & 1) merged = merged | td.bags[i];
  int cnode = 0;
  out.bags.push_back(merged);
  for (int i = 0; i < n; ++i) {
    if (span >> i & 1) continue;
    index[i] = static_cast<int>(out.bags.size());
    out.bags.push_back(td.bags[i]);
  }
  std::set<std::pair<int, int>> eset;
  for (auto [a, b] : td.edges) {
    int ia = (span >> a & 1) ? cnode : index[a];
    int ib = (span >> b & 1) ? cnode : index[b];
    if (ia == ib) continue;
    eset.insert({std::min(ia, ib), std::max(ia, ib)});
  }
  // Absorb untouched nodes whose bag ended up inside the merged bag.
  // (Simple one-pass variant: only direct neighbors of the contracted node.)
  bool again = true;
  while (again) {
    again = false;
    for (auto it = eset.begin(); it != eset.end(); ++it) {
      auto [a, b] = *it;
      int inner = -1, outer = -1;
      if (a == cnode && out.bags[b].subset_of(out.bags[cnode])) inner = b, outer = a;
      if (b == cnode && out.bags[a].subset_of(out.bags[cnode])) inner = a, outer = b;
      if (inner < 0) continue;
      // reroute inner's edges to the contracted node and drop it
      std::set<std::pair<int, int>> next;
      for (auto [x, y] : eset) {
        if (x == inner) x = outer;
        if (y == inner) y = outer;
        if (x == y) continue;
        next.insert({std::min(x, y), std::max(x, y)});
      }
      eset = std::move(next);
      out.bags[inner] = VarSet(~0u);  // tombstone
      again = true;
      break;
    }
  }
  // Compact tombstones.
  std::vector<int> remap(out.bags.size(), -1);
  TreeDecomposition fin;
  for (size_t i = 0; i < out.bags.size(); ++i) {
    if (out.bags[i].bits == ~0u) continue;
    remap[i] = static_cast<int>(fin.bags.size());
    fin.bags.push_back(out.bags[i]);
  }
  for (auto [a, b] : eset) fin.edges.push_back({remap[a], remap[b]});
  // Attach the witness node.
  int fnode = static_cast<int>(fin.bags.size());
  fin.bags.push_back(extra);
  fin.edges.push_back({remap[cnode], fnode});
  fin.connex = std::vector<int>{fnode};
  return fin;
}

std::vector<std::vector<int>> elimination_orders(const CQ& q) {
  int k = q.var_count();
  std::vector<std::vector<int>> orders;
  if (k <= 8) {
    std::vector<int> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    do {
      orders.push_back(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return orders;
  }
  // Beyond 8 variables a full sweep is too large; fall back to a fixed set of
  // deterministic heuristic and pseudo-random orders.
  std::vector<int> natural(k);
  std::iota(natural.begin(), natural.end(), 0);
  orders.push_back(natural);
  std::reverse(natural.begin(), natural.end());
  orders.push_back(natural);
  std::mt19937 rng(0xC0FFEEu);
  std::vector<int> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  for (int i = 0; i < 2000; ++i) {
    std::shuffle(perm.begin(), perm.end(), rng);
    orders.push_back(perm);
  }
  return orders;
}

}  // namespace

std::vector<TreeDecomposition> enumerate_fc_tds(const CQ& q, int var_cap) {
  int k = q.var_count();
  if (k > var_cap)
    throw TooManyVariables("query has " + std::to_string(k) +
                           " variables, cap is " + std::to_string(var_cap));
  VarSet free = q.free_vars();

  std::set<std::string> seen;
  std::vector<TreeDecomposition> base;
  if (k == 0) {
    TreeDecomposition td;
    td.bags.push_back(VarSet());
    base.push_back(td);
  } else {
    for (const auto& order : elimination_orders(q)) {
      TreeDecomposition td = clique_tree(q, order);
      auto key = td.canonical_key();
      if (seen.insert(key).second) base.push_back(std::move(td));
    }
  }

  std::vector<TreeDecomposition> out;
  std::set<std::string> emitted;
  for (auto& td : base) {
    auto w = find_connex_witness(q, td);
    TreeDecomposition cand;
    if (w) {
      cand = td;
      cand.connex = *w;
    } else {
      uint32_t touching = 0;
      for (size_t i = 0; i < td.bags.size(); ++i)
        if (!(td.bags[i] & free).empty()) touching |= 1u << i;
      if (touching == 0) continue;  // cannot happen: free vars occur in atoms
      cand = connex_complete(td, touching, free);
    }
    auto check = validate_td(q, cand);
    if (!check.ok) throw InvalidTD("internal: produced invalid decomposition: " + check.violation);
    if (emitted.insert(cand.canonical_key()).second) out.push_back(std::move(cand));
  }
  std::sort(out.begin(), out.end(), [](const TreeDecomposition& a, const TreeDecomposition& b) {
    return a.canonical_key() < b.canonical_key();
  });
  return out;
}

JoinTree build_join_tree(const CQ& q) {
  int n = static_cast<int>(q.atoms.size());
  JoinTree jt;
  jt.bags.reserve(n);
  for (const Atom& a : q.atoms) jt.bags.push_back(a.vars);
  if (n == 0) throw NotAcyclic("query has no atoms");
  if (n == 1) return jt;

  std::vector<bool> alive(n, true);
  int remaining = n;
  while (remaining > 1) {
    int ear = -1, witness = -1;
    for (int i = 0; i < n && ear < 0; ++i) {
      if (!alive[i]) continue;
      VarSet others;
      for (int t = 0; t < n; ++t)
        if (alive[t] && t != i) others = others | jt.bags[t];
      VarSet connector = jt.bags[i] & others;
      for (int j = 0; j < n; ++j) {
        if (!alive[j] || j == i) continue;
        if (connector.subset_of(jt.bags[j])) {
          ear = i;
          witness = j;
          break;
        }
      }
    }
    if (ear < 0) throw NotAcyclic("no ear: query hypergraph is cyclic");
    jt.edges.push_back({ear, witness});
    alive[ear] = false;
    --remaining;
  }
  return jt;
}

}  // namespace cqe
