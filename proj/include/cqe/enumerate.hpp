#pragma once

#include "cqe/decomp.hpp"
#include "cqe/eval.hpp"

namespace cqe {

class Cursor;

// Preprocessed free-connex acyclic instance: a semijoin-reduced join tree
// whose connex node set F covers the free variables exactly. Enumeration
// walks F only; everything below F contributes existence, which the
// reduction already guarantees. Immutable once built.
class EnumIndex {
 public:
  // Builds the join tree by ear removal and searches it for a connex node
  // set; callers that already hold a suitable tree (e.g. one derived from a
  // tree decomposition) pass it explicitly together with its witness.
  static EnumIndex preprocess_acyclic(const CQ& psi, const Structure& c,
                                      const JoinTree* tree = nullptr,
                                      const std::vector<int>* connex = nullptr);

  const std::vector<int>& free_vars() const { return free_vars_; }
  int answer_arity() const { return static_cast<int>(free_vars_.size()); }
  bool empty() const { return empty_; }
  size_t reduced_size() const;  // total rows over all node relations

  // b is aligned to free_vars() (ascending variable ids). One indexed lookup
  // per connex node; `steps` (if given) accumulates the lookup count.
  bool test(std::span<const Value> b, uint64_t* steps = nullptr) const;

  Cursor open() const;

 private:
  friend class Cursor;
  struct Node {
    VarSet vars;
    std::vector<int> cols;  // ascending variable ids (row layout)
    TupleSet rel;           // reduced copy
    int parent = -1;        // toward the root
  };
  std::vector<Node> nodes_;
  std::vector<int> fnodes_;             // connex nodes, preorder within F
  std::vector<int> fparent_;            // position of the F-parent in fnodes_
  std::vector<KeyIndex> findex_;        // per F node, keyed by parent-shared cols
  std::vector<std::pair<int, int>> out_src_;  // free var -> (F position, column)
  std::vector<int> free_vars_;
  bool empty_ = false;
};

// Depth-first odometer over the connex nodes. Delay per emission is bounded
// by the number of connex nodes: buckets of surviving prefixes are never
// empty thanks to global consistency.
class Cursor {
 public:
  explicit Cursor(const EnumIndex* idx) : idx_(idx) {}
  // Fills `out` (aligned to the index's free order); false at end of stream.
  bool next(Tuple& out);
  uint64_t steps = 0;  // elementary advances/lookups, for delay audits

 private:
  const EnumIndex* idx_;
  bool started_ = false, done_ = false;
  std::vector<const std::vector<uint32_t>*> bucket_;
  std::vector<size_t> pos_;

  bool fill_from(size_t level);
  void emit(Tuple& out);
};

// Duplicate-free union of several indexes over the same free variables:
// a tuple of the first i indexes that also belongs to index i+1 is not
// emitted; instead one fresh tuple is pulled from index i+1's own cursor,
// which also supplies the remainder once the prefix runs dry. Every answer
// of index i+1 is emitted by its cursor exactly once, everything else by the
// prefix, so no tuple repeats and no buffering is needed.
class UnionCursor {
 public:
  explicit UnionCursor(std::vector<const EnumIndex*> idxs);
  bool next(Tuple& out);
  uint64_t steps = 0;       // pulls plus membership tests at the union layer
  uint64_t total_steps() const;  // including the per-index cursors' own steps

 private:
  bool next_level(size_t level, Tuple& out);
  std::vector<const EnumIndex*> idxs_;
  std::vector<Cursor> cursors_;
};

}  // namespace cqe
