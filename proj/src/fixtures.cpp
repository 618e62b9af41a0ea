#include "cqe/fixtures.hpp"

#include <algorithm>
#include <string>

namespace cqe::fixtures {

std::shared_ptr<Structure> four_cycle_structure(uint32_t l) {
  auto s = std::make_shared<Structure>();
  s->signature.symbols = {{"E12", 2}, {"E23", 2}, {"E34", 2}, {"E41", 2}};
  for (uint32_t i = 1; i <= l; ++i) s->domain.intern(std::to_string(i));
  const Value a = s->domain.intern("a");
  const Value b = s->domain.intern("b");
  TupleSet star_a(2), star_b(2);
  for (Value i = 0; i < l; ++i) {
    Value row1[2] = {i, a};
    Value row2[2] = {b, i};
    star_a.push_row(row1);
    star_a.push_row(row2);
    Value row3[2] = {i, b};
    Value row4[2] = {a, i};
    star_b.push_row(row3);
    star_b.push_row(row4);
  }
  s->relations.push_back(star_a);  // E12
  s->relations.push_back(star_b);  // E23
  s->relations.push_back(std::move(star_a));  // E34
  s->relations.push_back(std::move(star_b));  // E41
  return s;
}

CQ four_cycle_query() {
  return parse_cq("E12(x1,x2), E23(x2,x3), E34(x3,x4), E41(x4,x1)");
}

CQ four_cycle_quantified() {
  return parse_cq("exists x1 x3 . E12(x1,x2), E23(x2,x3), E34(x3,x4), E41(x4,x1)");
}

bool four_cycle_member(uint32_t l, std::span<const Value> t) {
  if (t.size() != 4) return false;
  const Value a = l, b = l + 1;
  if (t[1] == a && t[3] == a) return t[0] < l && t[2] < l;
  if (t[0] == b && t[2] == b) return t[1] < l && t[3] < l;
  return false;
}

std::vector<Tuple> four_cycle_answers(uint32_t l) {
  const Value a = l, b = l + 1;
  std::vector<Tuple> out;
  out.reserve(2ull * l * l);
  for (Value i = 0; i < l; ++i)
    for (Value j = 0; j < l; ++j) out.push_back({i, a, j, a});
  for (Value i = 0; i < l; ++i)
    for (Value j = 0; j < l; ++j) out.push_back({b, i, b, j});
  std::sort(out.begin(), out.end());
  return out;
}

CQ random_cq(std::mt19937& rng, const RandomQueryOpts& opts) {
  auto rint = [&rng](int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  };
  const int nvars = rint(1, opts.max_vars);
  const int natoms = rint(1, opts.max_atoms);
  const int nsyms = rint(1, natoms);
  std::vector<int> sym_arity(nsyms);
  for (int& ar : sym_arity) ar = rint(1, opts.max_arity);

  CQ q;
  std::vector<int> compact(nvars, -1);  // raw var id -> dense id
  for (int i = 0; i < natoms; ++i) {
    const int sy = rint(0, nsyms - 1);
    Atom at;
    at.rel = "R" + std::to_string(sy);
    for (int p = 0; p < sym_arity[sy]; ++p) {
      const int raw = rint(0, nvars - 1);
      if (compact[raw] < 0) {
        compact[raw] = static_cast<int>(q.var_names.size());
        q.var_names.push_back("x" + std::to_string(q.var_names.size()));
      }
      at.args.push_back(compact[raw]);
      at.vars = at.vars.with(compact[raw]);
    }
    q.atoms.push_back(std::move(at));
  }
  if (opts.allow_quantifiers && q.var_count() > 1) {
    for (int v = 0; v < q.var_count(); ++v)
      if (rint(0, 2) == 0) q.quantified = q.quantified.with(v);
    if (q.quantified == q.all_vars())  // keep at least one free variable
      q.quantified = q.quantified.without(q.quantified.min_var());
  }
  return q;
}

std::shared_ptr<Structure> random_structure_for(const CQ& q, std::mt19937& rng,
                                                uint32_t n, size_t max_rows) {
  auto rint = [&rng](uint32_t lo, uint32_t hi) {
    return std::uniform_int_distribution<uint32_t>(lo, hi)(rng);
  };
  auto s = std::make_shared<Structure>();
  for (uint32_t i = 0; i < n; ++i) s->domain.intern(std::to_string(i));
  for (const Atom& at : q.atoms) {
    if (s->signature.has(at.rel)) continue;
    const int ar = static_cast<int>(at.args.size());
    s->signature.symbols.emplace_back(at.rel, ar);
    TupleSet ts(ar);
    const size_t rows = rint(0, static_cast<uint32_t>(max_rows));
    Tuple row(ar);
    for (size_t r = 0; r < rows; ++r) {
      for (int p = 0; p < ar; ++p) row[p] = rint(0, n - 1);
      ts.insert(row);
    }
    s->relations.push_back(std::move(ts));
  }
  return s;
}

}  // namespace cqe::fixtures
