#include "cqe/relmodel.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace cqe {

uint64_t hash_span(std::span<const Value> t) {
  // FNV-1a over the raw values, mixed once at the end.
  uint64_t h = 1469598103934665603ull;
  for (Value v : t) {
    h ^= v;
    h *= 1099511628211ull;
  }
  h ^= h >> 33;
  h *= 0xff51afd7ed558ccdull;
  h ^= h >> 33;
  return h;
}

Value Domain::intern(std::string_view s) {
  auto it = ids_.find(std::string(s));
  if (it != ids_.end()) return it->second;
  Value id = static_cast<Value>(names_.size());
  names_.emplace_back(s);
  ids_.emplace(names_.back(), id);
  return id;
}

std::optional<Value> Domain::find(std::string_view s) const {
  auto it = ids_.find(std::string(s));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

int Signature::arity(std::string_view name) const {
  int i = index_of(name);
  if (i < 0) throw UnknownRelation("unknown relation: " + std::string(name));
  return symbols[i].second;
}

bool Signature::has(std::string_view name) const { return index_of(name) >= 0; }

int Signature::index_of(std::string_view name) const {
  for (size_t i = 0; i < symbols.size(); ++i)
    if (symbols[i].first == name) return static_cast<int>(i);
  return -1;
}

size_t Signature::norm() const {
  size_t s = symbols.size();
  for (auto& [_, ar] : symbols) s += static_cast<size_t>(ar);
  return s;
}

struct TupleSet::Index {
  struct Hash {
    const TupleSet* ts;
    size_t operator()(uint32_t row) const { return hash_span(ts->row(row)); }
  };
  struct Eq {
    const TupleSet* ts;
    bool operator()(uint32_t a, uint32_t b) const {
      auto ra = ts->row(a), rb = ts->row(b);
      return std::equal(ra.begin(), ra.end(), rb.begin(), rb.end());
    }
  };
  std::unordered_set<uint32_t, Hash, Eq> rows;
  explicit Index(const TupleSet* ts) : rows(16, Hash{ts}, Eq{ts}) {}
};

namespace {
uint64_t next_version() {
  static uint64_t v = 0;
  return ++v;
}
}  // namespace

void TupleSet::bump_version() { version_ = next_version(); }

TupleSet::TupleSet(const TupleSet& o)
    : arity_(o.arity_), rows_(o.rows_), flat_(o.flat_), version_(next_version()) {}

TupleSet& TupleSet::operator=(const TupleSet& o) {
  arity_ = o.arity_;
  rows_ = o.rows_;
  flat_ = o.flat_;
  version_ = next_version();
  index_.reset();
  return *this;
}

// The lazy index's hash/eq functors hold a pointer to their owning set, so an
// index must never migrate to another object: moves drop it and it is rebuilt
// on the next membership query.
TupleSet::TupleSet(TupleSet&& o) noexcept
    : arity_(o.arity_), rows_(o.rows_), flat_(std::move(o.flat_)),
      version_(o.version_) {
  o.rows_ = 0;
  o.index_.reset();
}

TupleSet& TupleSet::operator=(TupleSet&& o) {
  arity_ = o.arity_;
  rows_ = o.rows_;
  flat_ = std::move(o.flat_);
  index_.reset();
  o.rows_ = 0;
  o.index_.reset();
  version_ = next_version();
  return *this;
}

void TupleSet::push_row(std::span<const Value> r) {
  flat_.insert(flat_.end(), r.begin(), r.end());
  if (index_) index_->rows.insert(static_cast<uint32_t>(rows_));
  ++rows_;
  version_ = next_version();
}

void TupleSet::ensure_index() const {
  if (index_) return;
  index_ = std::make_shared<Index>(this);
  index_->rows.reserve(rows_ * 2);
  for (size_t i = 0; i < rows_; ++i) index_->rows.insert(static_cast<uint32_t>(i));
}

bool TupleSet::insert(std::span<const Value> r) {
  if (contains(r)) return false;
  push_row(r);
  return true;
}

bool TupleSet::contains(std::span<const Value> r) const { return find(r) >= 0; }

int64_t TupleSet::find(std::span<const Value> r) const {
  if (rows_ == 0) return -1;
  if (arity_ == 0) return 0;  // the empty tuple, present iff rows_ > 0
  ensure_index();
  // Probe by temporarily appending the row so the set's hash/eq can see it.
  auto* self = const_cast<TupleSet*>(this);
  self->flat_.insert(self->flat_.end(), r.begin(), r.end());
  auto it = index_->rows.find(static_cast<uint32_t>(rows_));
  self->flat_.resize(rows_ * arity_);
  if (it == index_->rows.end()) return -1;
  return static_cast<int64_t>(*it);
}

void TupleSet::clear() {
  flat_.clear();
  rows_ = 0;
  index_.reset();
  version_ = next_version();
}

void TupleSet::sort_rows() {
  if (arity_ == 0 || rows_ < 2) return;
  std::vector<uint32_t> order(rows_);
  for (size_t i = 0; i < rows_; ++i) order[i] = static_cast<uint32_t>(i);
  std::sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
    auto ra = row(a), rb = row(b);
    return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
  });
  std::vector<Value> nf;
  nf.reserve(flat_.size());
  for (uint32_t i : order) {
    auto r = row(i);
    nf.insert(nf.end(), r.begin(), r.end());
  }
  flat_ = std::move(nf);
  index_.reset();
  version_ = next_version();
}

const TupleSet& Structure::relation(std::string_view name) const {
  int i = signature.index_of(name);
  if (i < 0) throw UnknownRelation("unknown relation: " + std::string(name));
  return relations[i];
}

TupleSet& Structure::relation(std::string_view name) {
  int i = signature.index_of(name);
  if (i < 0) throw UnknownRelation("unknown relation: " + std::string(name));
  return relations[i];
}

size_t Structure::m() const {
  size_t best = 0;
  for (auto& r : relations) best = std::max(best, r.size());
  return best;
}

size_t Structure::total_tuples() const {
  size_t s = 0;
  for (auto& r : relations) s += r.size();
  return s;
}

size_t Structure::encoding_size() const {
  size_t s = signature.norm() + n();
  for (size_t i = 0; i < relations.size(); ++i)
    s += static_cast<size_t>(signature.symbols[i].second) * relations[i].size();
  return s;
}

namespace {

std::vector<std::pair<std::string, int>> read_manifest(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw IoError("cannot open manifest: " + manifest.string());
  std::vector<std::pair<std::string, int>> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto slash = line.rfind('/');
    if (slash == std::string::npos)
      throw IoError("bad manifest line (want Name/arity): " + line);
    std::string name = line.substr(0, slash);
    int ar = 0;
    try {
      ar = std::stoi(line.substr(slash + 1));
    } catch (...) {
      throw IoError("bad arity in manifest line: " + line);
    }
    if (name.empty() || ar < 0) throw IoError("bad manifest line: " + line);
    for (auto& [n, _] : out)
      if (n == name) throw IoError("duplicate relation in manifest: " + name);
    out.emplace_back(std::move(name), ar);
  }
  return out;
}

std::filesystem::path data_file_for(const std::filesystem::path& dir, const std::string& name) {
  auto p = dir / (name + ".tsv");
  if (std::filesystem::exists(p)) return p;
  auto q = dir / name;
  if (std::filesystem::exists(q)) return q;
  throw IoError("missing data file for relation " + name + " in " + dir.string());
}

}  // namespace

Structure load_structure(const std::filesystem::path& data_dir,
                         const std::filesystem::path& manifest, char delimiter) {
  Structure a;
  a.signature.symbols = read_manifest(manifest);

  // Every .tsv file in the directory must be declared.
  if (std::filesystem::is_directory(data_dir)) {
    for (auto& e : std::filesystem::directory_iterator(data_dir)) {
      if (!e.is_regular_file()) continue;
      auto p = e.path();
      if (p.extension() != ".tsv") continue;
      if (!a.signature.has(p.stem().string()))
        throw UnknownRelation("data file without manifest entry: " + p.string());
    }
  } else {
    throw IoError("not a directory: " + data_dir.string());
  }

  for (auto& [name, ar] : a.signature.symbols) {
    TupleSet ts(ar);
    auto path = data_file_for(data_dir, name);
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    size_t lineno = 0;
    Tuple t;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      t.clear();
      size_t start = 0;
      while (true) {
        size_t pos = line.find(delimiter, start);
        std::string_view field(line.data() + start,
                               (pos == std::string::npos ? line.size() : pos) - start);
        t.push_back(a.domain.intern(field));
        if (pos == std::string::npos) break;
        start = pos + 1;
      }
      if (static_cast<int>(t.size()) != ar)
        throw ArityMismatch(name + ":" + std::to_string(lineno) + ": got " +
                            std::to_string(t.size()) + " fields, want " + std::to_string(ar));
      ts.insert(t);
    }
    a.relations.push_back(std::move(ts));
  }
  return a;
}

void write_structure(const Structure& a, const std::filesystem::path& data_dir,
                     const std::filesystem::path& manifest, char delimiter) {
  std::filesystem::create_directories(data_dir);
  {
    std::ofstream out(manifest);
    if (!out) throw IoError("cannot write " + manifest.string());
    for (auto& [name, ar] : a.signature.symbols) out << name << '/' << ar << '\n';
  }
  for (size_t i = 0; i < a.relations.size(); ++i) {
    auto path = data_dir / (a.signature.symbols[i].first + ".tsv");
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    const TupleSet& ts = a.relations[i];
    for (size_t r = 0; r < ts.size(); ++r) {
      auto row = ts.row(r);
      for (size_t j = 0; j < row.size(); ++j) {
        if (j) out << delimiter;
        out << a.domain.name(row[j]);
      }
      out << '\n';
    }
  }
}

KeyIndex::KeyIndex(const TupleSet& ts, std::vector<int> key_cols)
    : key_cols_(std::move(key_cols)) {
  Tuple key(key_cols_.size());
  buckets_.reserve(ts.size());
  for (size_t i = 0; i < ts.size(); ++i) {
    auto r = ts.row(i);
    for (size_t j = 0; j < key_cols_.size(); ++j) key[j] = r[key_cols_[j]];
    buckets_[key].push_back(static_cast<uint32_t>(i));
  }
}

const std::vector<uint32_t>* KeyIndex::lookup(std::span<const Value> key) const {
  thread_local Tuple probe;
  probe.assign(key.begin(), key.end());
  auto it = buckets_.find(probe);
  if (it == buckets_.end()) return nullptr;
  return &it->second;
}

size_t KeyIndex::max_bucket() const {
  size_t best = 0;
  for (auto& [_, v] : buckets_) best = std::max(best, v.size());
  return best;
}

KeySet::KeySet(const TupleSet& ts, const std::vector<int>& key_cols) {
  Tuple key(key_cols.size());
  keys_.reserve(ts.size());
  for (size_t i = 0; i < ts.size(); ++i) {
    auto r = ts.row(i);
    for (size_t j = 0; j < key_cols.size(); ++j) key[j] = r[key_cols[j]];
    keys_.insert(key);
  }
}

bool KeySet::contains(std::span<const Value> key) const {
  thread_local Tuple probe;
  probe.assign(key.begin(), key.end());
  return keys_.count(probe) > 0;
}

SelectionIndex build_selection_index(const Structure& a, std::string_view relation,
                                     std::vector<int> key_positions) {
  int ri = a.signature.index_of(relation);
  if (ri < 0) throw UnknownRelation("unknown relation: " + std::string(relation));
  int ar = a.signature.symbols[ri].second;
  for (size_t i = 0; i < key_positions.size(); ++i) {
    if (key_positions[i] < 0 || key_positions[i] >= ar)
      throw BadPositions("key position out of range");
    if (i > 0 && key_positions[i] <= key_positions[i - 1])
      throw BadPositions("key positions must be strictly increasing");
  }
  SelectionIndex si;
  si.relation = std::string(relation);
  si.key_positions = key_positions;
  si.rel = &a.relations[ri];
  si.index = KeyIndex(a.relations[ri], std::move(key_positions));
  return si;
}

}  // namespace cqe
