#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "cqe/errors.hpp"

namespace cqe {

using Value = uint32_t;
using Tuple = std::vector<Value>;

uint64_t hash_span(std::span<const Value> t);

struct TupleHash {
  size_t operator()(const Tuple& t) const { return static_cast<size_t>(hash_span(t)); }
};

// Interned constant pool. Ids are dense and assigned in first-seen order.
class Domain {
 public:
  Value intern(std::string_view s);
  std::optional<Value> find(std::string_view s) const;
  const std::string& name(Value v) const { return names_.at(v); }
  size_t size() const { return names_.size(); }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, Value> ids_;
};

struct Signature {
  // symbol name -> arity, in declaration order
  std::vector<std::pair<std::string, int>> symbols;

  int arity(std::string_view name) const;
  bool has(std::string_view name) const;
  int index_of(std::string_view name) const;  // -1 if absent
  // ||sigma|| = |sigma| + sum of arities
  size_t norm() const;
};

// Set of tuples of fixed arity, stored row-major in one flat vector.
// A hash index over full rows is built lazily for membership queries.
class TupleSet {
 public:
  explicit TupleSet(int arity = 0) : arity_(arity) {}
  TupleSet(const TupleSet& o);
  TupleSet& operator=(const TupleSet& o);
  TupleSet(TupleSet&& o) noexcept;
  TupleSet& operator=(TupleSet&& o);

  int arity() const { return arity_; }
  size_t size() const { return rows_; }
  bool empty() const { return rows_ == 0; }
  std::span<const Value> row(size_t i) const {
    return {flat_.data() + i * arity_, static_cast<size_t>(arity_)};
  }

  void push_row(std::span<const Value> r);      // no duplicate check
  bool insert(std::span<const Value> r);        // true if newly added
  bool contains(std::span<const Value> r) const;
  int64_t find(std::span<const Value> r) const;  // row id or -1
  void clear();
  void sort_rows();  // lexicographic; drops the hash index

  // Versions come from a global monotone counter, so no version number is
  // ever reused — even across copy/move assignment. Caches key on them.
  uint64_t version() const { return version_; }
  void bump_version();

 private:
  struct Index;
  void ensure_index() const;

  int arity_;
  size_t rows_ = 0;
  std::vector<Value> flat_;
  uint64_t version_ = 0;
  mutable std::shared_ptr<Index> index_;
};

struct Structure {
  Signature signature;
  Domain domain;
  std::vector<TupleSet> relations;  // parallel to signature.symbols

  const TupleSet& relation(std::string_view name) const;
  TupleSet& relation(std::string_view name);

  // stats
  size_t n() const { return domain.size(); }
  size_t m() const;  // max relation cardinality
  size_t total_tuples() const;
  size_t encoding_size() const;  // ||sigma|| + n + sum ar(R)*|R|
};

// Directory of tab-separated files, one per declared relation (file stem =
// relation name, optional .tsv suffix). Manifest lines look like "Name/arity".
Structure load_structure(const std::filesystem::path& data_dir,
                         const std::filesystem::path& manifest,
                         char delimiter = '\t');
void write_structure(const Structure& a, const std::filesystem::path& data_dir,
                     const std::filesystem::path& manifest, char delimiter = '\t');

// Bucketed lookup structure: groups rows of a tuple set by their projection
// onto key_cols. Enumerating a bucket costs O(1) per element.
class KeyIndex {
 public:
  KeyIndex() = default;
  KeyIndex(const TupleSet& ts, std::vector<int> key_cols);
  const std::vector<uint32_t>* lookup(std::span<const Value> key) const;
  size_t bucket_count() const { return buckets_.size(); }
  size_t max_bucket() const;
  const std::unordered_map<Tuple, std::vector<uint32_t>, TupleHash>& buckets() const {
    return buckets_;
  }

 private:
  std::vector<int> key_cols_;
  std::unordered_map<Tuple, std::vector<uint32_t>, TupleHash> buckets_;
};

// Existence-only variant: the set of key projections.
class KeySet {
 public:
  KeySet() = default;
  KeySet(const TupleSet& ts, const std::vector<int>& key_cols);
  bool contains(std::span<const Value> key) const;
  size_t size() const { return keys_.size(); }

 private:
  std::unordered_set<Tuple, TupleHash> keys_;
};

// Public selection-index facade over a named relation of a structure.
struct SelectionIndex {
  std::string relation;
  std::vector<int> key_positions;  // 0-based, strictly increasing
  KeyIndex index;
  const TupleSet* rel = nullptr;
};

SelectionIndex build_selection_index(const Structure& a, std::string_view relation,
                                     std::vector<int> key_positions);

}  // namespace cqe
