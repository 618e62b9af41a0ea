#pragma once

#include <memory>
#include <unordered_map>

#include "cqe/cq.hpp"
#include "cqe/relmodel.hpp"

namespace cqe {

// An atom reduced to one column per distinct variable (ascending variable id),
// with rows violating repeated-variable equalities filtered out. All engine
// lookups run against views, so self-joins and repeated arguments cost nothing
// downstream.
struct AtomView {
  VarSet vars;
  std::vector<int> cols;        // variable ids, ascending; parallel to row layout
  const TupleSet* tuples = nullptr;
  std::shared_ptr<TupleSet> owned;  // set when the view had to materialize rows
};

AtomView build_atom_view(const Atom& atom, const TupleSet& rel);
AtomView table_atom_view(VarSet vars, const TupleSet& table);

// Mappings over a set S are tuples aligned with S.to_vector() (ascending ids).
Tuple project_mapping(VarSet from, std::span<const Value> mapping, VarSet onto);

// Cached per-view lookup structures, invalidated when the view's tuple set
// changes version.
class ViewCache {
 public:
  const KeySet& key_set(const AtomView& v, VarSet key);
  const KeyIndex& key_index(const AtomView& v, VarSet key);
  const std::vector<Value>& distinct_col(const AtomView& v, int var);

 private:
  void refresh(const AtomView& v);
  uint64_t version_ = ~0ull;
  std::unordered_map<uint32_t, KeySet> keysets_;
  std::unordered_map<uint32_t, KeyIndex> keyindexes_;
  std::unordered_map<int, std::vector<Value>> columns_;
};

// Evaluates projected membership against a fixed list of atom views.
class Evaluator {
 public:
  explicit Evaluator(std::vector<AtomView> views);

  const std::vector<AtomView>& views() const { return views_; }
  AtomView& view(size_t i) { return views_[i]; }

  // h is a mapping over S. True iff for every atom, the restriction of h to
  // S /\ vars(atom) extends to a row of the atom's view.
  bool member(VarSet S, std::span<const Value> h);

  // Assumes h (over S minus x) already satisfies the member conditions; checks
  // only atoms whose variables contain x for the extension by (x -> c).
  bool member_incremental(VarSet S, int x, std::span<const Value> h_ext);

  // Member conditions restricted to the listed views (callers that know the
  // others are already satisfied, e.g. when joining two verified mappings).
  bool member_some(VarSet S, std::span<const Value> h, std::span<const int> view_ids);

  // Distinct candidate values for x compatible with at least the generator
  // atom, given h over S minus x. Complete: any c passing member_incremental
  // appears. Deterministic generator choice.
  void candidates(VarSet S, int x, std::span<const Value> h, std::vector<Value>& out);

  // [[phi<S>]]: all mappings over S satisfying per-atom extendability. Stops
  // early (returns false) once more than `limit` mappings exist.
  bool all_mappings(VarSet S, uint64_t limit, TupleSet& out);

  uint64_t probes = 0;  // elementary lookup counter

 private:
  std::vector<AtomView> views_;
  std::vector<ViewCache> caches_;
};

// Engine-side evaluation of phi<S> over a structure (used by tools and tests;
// the oracle module provides the independent naive counterpart).
TupleSet eval_projected(const ProjectedQuery& pq, const Structure& a);

}  // namespace cqe
