#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "helpers.hpp"

using namespace cqe;
using namespace cqe::test;

TEST_CASE("domain interning is dense and first-seen ordered") {
  Domain d;
  CHECK(d.intern("a") == 0);
  CHECK(d.intern("b") == 1);
  CHECK(d.intern("a") == 0);
  CHECK(d.size() == 2);
  CHECK(d.name(1) == "b");
  CHECK(d.find("b") == Value{1});
  CHECK(!d.find("zzz").has_value());
}

TEST_CASE("tuple set membership, insertion, sorting") {
  TupleSet ts(2);
  CHECK(ts.insert(Tuple{3, 1}));
  CHECK(ts.insert(Tuple{1, 2}));
  CHECK(!ts.insert(Tuple{3, 1}));
  CHECK(ts.size() == 2);
  CHECK(ts.contains(Tuple{1, 2}));
  CHECK(!ts.contains(Tuple{2, 1}));
  CHECK(ts.find(Tuple{3, 1}) == 0);
  CHECK(ts.find(Tuple{9, 9}) == -1);
  ts.sort_rows();
  CHECK(ts.row(0)[0] == 1);
  CHECK(ts.contains(Tuple{3, 1}));
}

TEST_CASE("nullary tuple set: empty tuple present iff nonempty") {
  TupleSet ts(0);
  CHECK(!ts.contains(Tuple{}));
  ts.push_row(Tuple{});
  CHECK(ts.contains(Tuple{}));
  CHECK(ts.size() == 1);
}

TEST_CASE("versions are globally unique across copies, moves and mutation") {
  TupleSet a(1);
  a.push_row(Tuple{1});
  uint64_t v1 = a.version();
  TupleSet b = a;             // copy: fresh version
  CHECK(b.version() != v1);
  TupleSet c(1);
  c.push_row(Tuple{2});
  uint64_t vc = c.version();
  c = std::move(b);           // move assign: fresh version
  CHECK(c.version() != vc);
  CHECK(c.version() != v1);
  a.clear();
  CHECK(a.version() != v1);
}

TEST_CASE("membership index survives container moves") {
  // Regression: the lazy row index holds a pointer to its owning set; it must
  // not migrate when the set is moved (e.g. into a vector).
  std::vector<TupleSet> v;
  TupleSet ts(2);
  ts.insert(Tuple{1, 2});
  CHECK(ts.contains(Tuple{1, 2}));  // forces the index to exist
  v.push_back(std::move(ts));
  for (int i = 0; i < 40; ++i) {
    TupleSet extra(1);
    extra.insert(Tuple{static_cast<Value>(i)});
    CHECK(extra.contains(Tuple{static_cast<Value>(i)}));
    v.push_back(std::move(extra));  // forces reallocations
  }
  CHECK(v[0].contains(Tuple{1, 2}));
  CHECK(!v[0].contains(Tuple{2, 1}));
}

TEST_CASE("structure statistics") {
  auto s = make_structure(4, {{"E", 2, {{0, 1}, {1, 2}, {2, 3}}}, {"P", 1, {{0}}}});
  CHECK(s->n() == 4);
  CHECK(s->m() == 3);
  CHECK(s->total_tuples() == 4);
  // ||sigma|| = 2 + (2+1) = 5; + n 4 + 2*3 + 1*1 = 16
  CHECK(s->encoding_size() == 16);
  CHECK(s->relation("E").size() == 3);
  CHECK_THROWS_AS(s->relation("Q"), UnknownRelation);
}

TEST_CASE("load/write round trip preserves contents independent of row order") {
  auto s = make_structure(5, {{"E", 2, {{4, 1}, {0, 3}, {2, 2}}}, {"U", 1, {{1}, {0}}}});
  auto dir = std::filesystem::temp_directory_path() / "cqe_rm_test";
  std::filesystem::remove_all(dir);
  write_structure(*s, dir, dir / "manifest.txt");
  Structure t = load_structure(dir, dir / "manifest.txt");
  REQUIRE(t.signature.symbols == s->signature.symbols);
  // compare as sets of name-tuples (domain ids may be assigned differently)
  for (auto& [name, ar] : s->signature.symbols) {
    auto named = [&](const Structure& st) {
      std::vector<std::vector<std::string>> rows;
      const TupleSet& ts = st.relation(name);
      for (size_t i = 0; i < ts.size(); ++i) {
        std::vector<std::string> r;
        for (Value v : ts.row(i)) r.push_back(st.domain.name(v));
        rows.push_back(r);
      }
      std::sort(rows.begin(), rows.end());
      return rows;
    };
    CHECK(named(*s) == named(t));
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("load rejects undeclared files, bad manifests, ragged rows") {
  auto dir = std::filesystem::temp_directory_path() / "cqe_rm_bad";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  auto put = [&](const std::string& name, const std::string& body) {
    std::ofstream(dir / name) << body;
  };
  put("manifest.txt", "E/2\n");
  put("E.tsv", "1\t2\n3\n");
  CHECK_THROWS_AS(load_structure(dir, dir / "manifest.txt"), ArityMismatch);
  put("E.tsv", "1\t2\n");
  put("X.tsv", "1\n");
  CHECK_THROWS_AS(load_structure(dir, dir / "manifest.txt"), UnknownRelation);
  std::filesystem::remove(dir / "X.tsv");
  put("manifest.txt", "E2\n");
  CHECK_THROWS_AS(load_structure(dir, dir / "manifest.txt"), IoError);
  put("manifest.txt", "E/2\nE/2\n");
  CHECK_THROWS_AS(load_structure(dir, dir / "manifest.txt"), IoError);
  CHECK_THROWS_AS(load_structure(dir, dir / "nope.txt"), IoError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("key index buckets rows by projection") {
  TupleSet ts = make_tuples(2, {{0, 1}, {0, 2}, {1, 1}});
  KeyIndex ki(ts, {0});
  CHECK(ki.bucket_count() == 2);
  CHECK(ki.max_bucket() == 2);
  auto* b = ki.lookup(Tuple{0});
  REQUIRE(b != nullptr);
  CHECK(b->size() == 2);
  CHECK(ki.lookup(Tuple{7}) == nullptr);
  KeySet ks(ts, {1});
  CHECK(ks.size() == 2);
  CHECK(ks.contains(Tuple{2}));
  CHECK(!ks.contains(Tuple{0}));
}

TEST_CASE("selection index facade validates positions") {
  auto s = make_structure(3, {{"E", 2, {{0, 1}}}});
  auto si = build_selection_index(*s, "E", {1});
  CHECK(si.index.lookup(Tuple{1}) != nullptr);
  CHECK_THROWS_AS(build_selection_index(*s, "Q", {0}), UnknownRelation);
  CHECK_THROWS_AS(build_selection_index(*s, "E", {2}), BadPositions);
  CHECK_THROWS_AS(build_selection_index(*s, "E", {1, 0}), BadPositions);
}
