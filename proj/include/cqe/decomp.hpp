#pragma once

#include <optional>
#include <string>

#include "cqe/cq.hpp"

namespace cqe {

struct TreeDecomposition {
  std::vector<VarSet> bags;
  std::vector<std::pair<int, int>> edges;        // |bags| - 1 undirected edges
  std::optional<std::vector<int>> connex;        // witness F, if known

  size_t size() const { return bags.size(); }
  std::string canonical_key() const;
};

struct TdCheck {
  bool ok = true;
  std::string violation;  // empty when ok
};

// Conditions: tree shape, atom coverage, per-variable connectedness.
TdCheck validate_td(const CQ& q, const TreeDecomposition& td);

// Connected node set F with the union of its bags equal to free(q), exactly.
// Boolean queries admit the empty witness. Returns the smallest witness found.
std::optional<std::vector<int>> find_connex_witness(const CQ& q,
                                                    const TreeDecomposition& td);
// Same search over a bare tree (also used for join trees over atoms).
std::optional<std::vector<int>> find_connex_nodes(
    const std::vector<VarSet>& bags, const std::vector<std::pair<int, int>>& edges,
    VarSet free);
bool is_free_connex(const CQ& q, const TreeDecomposition& td);

// Canonical family of free-connex tree decompositions of q:
//  - clique trees induced by vertex elimination orders of the primal graph,
//    deduplicated up to labeled tree isomorphism (no bag inside a neighbor bag);
//  - when a decomposition has no exact connex witness, a connex-completed
//    variant: the subtree spanning all nodes that touch a free variable is
//    contracted into one node and a node with bag free(q) is attached to it.
// Every returned decomposition carries a witness.
std::vector<TreeDecomposition> enumerate_fc_tds(const CQ& q, int var_cap = 12);

// Join tree over the atoms of an acyclic query (GYO ear removal). Nodes are
// atom indices; redundant atoms stay as pendant nodes.
struct JoinTree {
  std::vector<VarSet> bags;                // per node (= per atom)
  std::vector<std::pair<int, int>> edges;  // undirected
};
JoinTree build_join_tree(const CQ& q);  // throws NotAcyclic

}  // namespace cqe
