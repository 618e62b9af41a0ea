#include "cqe/splitting.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace cqe {

namespace {

constexpr double kLogGuard = 1e-12;

std::vector<int> proj_cols(VarSet S, VarSet T) {
  std::vector<int> cols;
  int i = 0;
  for (int v : T.to_vector()) {
    if (S.test(v)) cols.push_back(i);
    ++i;
  }
  return cols;
}

// Extension counts of R_T grouped by the projection onto S.
std::unordered_map<Tuple, uint64_t, TupleHash> count_extensions(const TupleSet& rt,
                                                                VarSet S, VarSet T) {
  auto cols = proj_cols(S, T);
  std::unordered_map<Tuple, uint64_t, TupleHash> counts;
  Tuple key;
  for (size_t row = 0; row < rt.size(); ++row) {
    auto h = rt.row(row);
    key.clear();
    for (int c : cols) key.push_back(h[c]);
    ++counts[key];
  }
  return counts;
}

}  // namespace

DegreeReport degrees(const Refinement& r, VarSet S, VarSet T) {
  if (!S.subset_of(T)) throw NotNested("degree pair is not nested");
  const TupleSet& rs = r.table(S);
  const TupleSet& rt = r.table(T);
  if (r.trivial()) throw TrivialRefinement("degrees need nonempty tables");
  DegreeReport rep;
  rep.S = S;
  rep.T = T;
  rep.rs = rs.size();
  rep.rt = rt.size();
  for (auto& [_, c] : count_extensions(rt, S, T)) rep.maxdeg = std::max(rep.maxdeg, c);
  return rep;
}

namespace {

bool pair_violates(const DegreeReport& rep, double eps, size_t m) {
  // maxdeg > m^eps * avgdeg, compared in logs with a guard band.
  return std::log(static_cast<double>(rep.maxdeg)) >
         eps * std::log(static_cast<double>(m)) +
             std::log(static_cast<double>(rep.rt)) -
             std::log(static_cast<double>(rep.rs)) + kLogGuard;
}

}  // namespace

UniformityReport is_uniform(const Refinement& r, double eps, size_t m) {
  if (r.trivial()) throw TrivialRefinement("uniformity needs nonempty tables");
  auto fam = r.family();  // already ordered by (cardinality, mask)
  for (VarSet S : fam)
    for (VarSet T : fam) {
      if (S == T || !S.subset_of(T)) continue;
      if (pair_violates(degrees(r, S, T), eps, m)) return {false, S, T};
    }
  return {};
}

std::pair<Refinement, Refinement> split_refinement(const Refinement& r, VarSet S,
                                                   VarSet T, double eps, size_t m) {
  DegreeReport rep = degrees(r, S, T);
  if (!pair_violates(rep, eps, m)) throw NotViolating("pair is within the degree bound");

  // Row of R_S goes left iff its extension count is at most
  // m^{eps/2} * avgdeg (ties left).
  double cutoff = (eps / 2) * std::log(static_cast<double>(m)) +
                  std::log(static_cast<double>(rep.rt)) -
                  std::log(static_cast<double>(rep.rs)) + kLogGuard;
  auto counts = count_extensions(r.table(T), S, T);

  Refinement lo = r, hi = r;
  const TupleSet& rs = r.table(S);
  TupleSet ls(rs.arity()), hs(rs.arity());
  Tuple key;
  for (size_t row = 0; row < rs.size(); ++row) {
    auto g = rs.row(row);
    key.assign(g.begin(), g.end());
    auto it = counts.find(key);
    uint64_t deg = it == counts.end() ? 0 : it->second;
    bool left = deg == 0 || std::log(static_cast<double>(deg)) <= cutoff;
    (left ? ls : hs).push_row(g);
  }
  lo.table(S) = std::move(ls);
  hi.table(S) = std::move(hs);
  ++lo.state_version;
  ++hi.state_version;
  return {std::move(lo), std::move(hi)};
}

namespace {

void split_rec(Refinement r, uint64_t M, double eps, size_t m, uint64_t depth,
               uint64_t depth_limit, std::vector<Refinement>& out,
               ConsistencyStats* stats) {
  if (depth > depth_limit)
    throw DepthExceeded("splitting recursion exceeded its proven bound");
  restore_strong_consistency(r, M, stats);
  if (r.trivial()) return;
  UniformityReport u = is_uniform(r, eps, m);
  if (u.uniform) {
    out.push_back(std::move(r));
    return;
  }
  auto [lo, hi] = split_refinement(r, u.S, u.T, eps, m);
  split_rec(std::move(lo), M, eps, m, depth + 1, depth_limit, out, stats);
  split_rec(std::move(hi), M, eps, m, depth + 1, depth_limit, out, stats);
}

}  // namespace

std::vector<Refinement> split_to_uniform(const CQ& q,
                                         std::shared_ptr<const Structure> base,
                                         double c, double eps,
                                         ConsistencyStats* stats) {
  if (c < 1) throw BadM("exponent c must be at least 1");
  if (eps <= 0) throw BadM("epsilon must be positive");
  size_t m = base->m();
  if (m == 0) return {};  // some relation is empty on any instance with m = 0
  uint64_t M = static_cast<uint64_t>(std::ceil(std::pow(static_cast<double>(m), c)));
  if (M < m) M = m;
  int k = q.var_count();
  uint64_t depth_limit =
      (k >= 40 ? ~0ull : (1ull << k) * static_cast<uint64_t>(std::ceil(c / eps)));

  std::vector<Refinement> out;
  Refinement root = make_strongly_m_consistent(q, std::move(base), M, stats);
  if (root.trivial()) return out;
  UniformityReport u = is_uniform(root, eps, m);
  if (u.uniform) {
    out.push_back(std::move(root));
    return out;
  }
  auto [lo, hi] = split_refinement(root, u.S, u.T, eps, m);
  split_rec(std::move(lo), M, eps, m, 1, depth_limit, out, stats);
  split_rec(std::move(hi), M, eps, m, 1, depth_limit, out, stats);
  return out;
}

double cost_eval(const CostFunction& cf, VarSet U) {
  if (cf.m < 2) throw BadBase("cost function needs a log base of at least 2");
  double k = static_cast<double>(U.count());
  double h = 2 * std::pow(cf.eps, 2.0 / 3.0) * k - cf.eps * k * k;
  double scale = 1 - std::cbrt(cf.eps);
  if (cf.ref && cf.ref->has(U)) {
    size_t sz = cf.ref->table(U).size();
    if (sz == 0) {
      cf.warned_empty = true;
      return h;
    }
    return scale * (std::log(static_cast<double>(sz)) /
                    std::log(static_cast<double>(cf.m))) +
           h;
  }
  return scale * cf.c + h;
}

double CostFunction::operator()(VarSet U) const { return cost_eval(*this, U); }

std::pair<TreeDecomposition, double> width_under_g(
    const std::vector<TreeDecomposition>& tds,
    const std::function<double(VarSet)>& g) {
  if (tds.empty()) throw EmptyTDList("no decompositions to choose from");
  const TreeDecomposition* best = nullptr;
  double best_cost = 0;
  for (const auto& td : tds) {
    double worst = 0;
    for (VarSet b : td.bags) worst = std::max(worst, g(b));
    if (!best || worst < best_cost) {
      best = &td;
      best_cost = worst;
    }
  }
  return {*best, best_cost};
}

}  // namespace cqe
