#include "cqe/cq.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace cqe {

namespace {

struct Lexer {
  std::string_view s;
  size_t pos = 0;

  void skip_ws() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }
  bool eof() {
    skip_ws();
    return pos >= s.size();
  }
  char peek() {
    skip_ws();
    return pos < s.size() ? s[pos] : '\0';
  }
  bool consume(char c) {
    skip_ws();
    if (pos < s.size() && s[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }
  std::string ident() {
    skip_ws();
    size_t start = pos;
    while (pos < s.size() &&
           (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
      ++pos;
    if (pos == start)
      throw SyntaxError("expected identifier at offset " + std::to_string(start));
    if (std::isdigit(static_cast<unsigned char>(s[start])))
      throw SyntaxError("identifier cannot start with a digit: " +
                        std::string(s.substr(start, pos - start)));
    return std::string(s.substr(start, pos - start));
  }
};

}  // namespace

std::string CQ::var_list(VarSet s, const char* sep) const {
  std::string out;
  bool first = true;
  for (int v : s.to_vector()) {
    if (!first) out += sep;
    first = false;
    out += var_names[v];
  }
  return out;
}

CQ parse_cq(std::string_view text) {
  Lexer lx{text};
  CQ q;
  std::vector<std::string> quant_names;

  // Optional quantifier prefix.
  {
    size_t save = lx.pos;
    lx.skip_ws();
    if (!lx.eof()) {
      size_t start = lx.pos;
      bool word = true;
      static constexpr std::string_view kw = "exists";
      for (size_t i = 0; i < kw.size(); ++i) {
        if (start + i >= text.size() || text[start + i] != kw[i]) {
          word = false;
          break;
        }
      }
      bool prefix = word && (start + kw.size() >= text.size() ||
                             !(std::isalnum(static_cast<unsigned char>(
                                   text[start + kw.size()])) ||
                               text[start + kw.size()] == '_'));
      if (prefix) {
        lx.pos = start + kw.size();
        if (lx.peek() == '(') prefix = false;  // a relation named "exists"
      }
      if (prefix) {
        while (lx.peek() != '.' && !lx.eof()) {
          std::string v = lx.ident();
          for (auto& u : quant_names)
            if (u == v) throw DuplicateQuantifier("variable quantified twice: " + v);
          quant_names.push_back(v);
        }
        if (!lx.consume('.')) throw SyntaxError("expected '.' after quantifier prefix");
        if (quant_names.empty()) throw SyntaxError("empty quantifier prefix");
      } else {
        lx.pos = save;
      }
    }
  }

  auto var_id = [&](const std::string& name) {
    for (size_t i = 0; i < q.var_names.size(); ++i)
      if (q.var_names[i] == name) return static_cast<int>(i);
    if (q.var_names.size() >= 32)
      throw TooManyVariables("queries are limited to 32 variables");
    q.var_names.push_back(name);
    return static_cast<int>(q.var_names.size() - 1);
  };

  while (true) {
    Atom a;
    a.rel = lx.ident();
    if (!lx.consume('(')) throw SyntaxError("expected '(' after relation name " + a.rel);
    if (!lx.consume(')')) {
      while (true) {
        int v = var_id(lx.ident());
        a.args.push_back(v);
        a.vars = a.vars.with(v);
        if (lx.consume(')')) break;
        if (!lx.consume(',')) throw SyntaxError("expected ',' or ')' in atom " + a.rel);
      }
    }
    q.atoms.push_back(std::move(a));
    if (lx.eof()) break;
    if (!lx.consume(',')) throw SyntaxError("expected ',' between atoms");
  }

  for (auto& v : quant_names) {
    int id = -1;
    for (size_t i = 0; i < q.var_names.size(); ++i)
      if (q.var_names[i] == v) id = static_cast<int>(i);
    if (id < 0) throw QuantifiedVarUnused("quantified variable never used: " + v);
    q.quantified = q.quantified.with(id);
  }
  return q;
}

std::string to_text(const CQ& q) {
  std::ostringstream out;
  if (!q.quantified.empty()) {
    out << "exists";
    for (int v : q.quantified.to_vector()) out << ' ' << q.var_names[v];
    out << " . ";
  }
  for (size_t i = 0; i < q.atoms.size(); ++i) {
    if (i) out << ", ";
    const Atom& a = q.atoms[i];
    out << a.rel << '(';
    for (size_t j = 0; j < a.args.size(); ++j) {
      if (j) out << ',';
      out << q.var_names[a.args[j]];
    }
    out << ')';
  }
  return out.str();
}

ProjectedQuery project_query(const CQ& q, VarSet scope) {
  if (!scope.subset_of(q.all_vars()))
    throw ScopeError("projection scope mentions unknown variables");
  return ProjectedQuery{q, scope};
}

std::string RefinedQuery::table_name(VarSet s) const {
  std::string name = "R";
  for (int v : s.to_vector()) name += "_" + base.var_names[v];
  return name;
}

RefinedQuery refine_query(const CQ& q, std::vector<VarSet> family) {
  VarSet vars = q.all_vars();
  for (VarSet s : family)
    if (!s.subset_of(vars)) throw ScopeError("family member mentions unknown variables");
  std::sort(family.begin(), family.end(), canonical_less);
  family.erase(std::unique(family.begin(), family.end()), family.end());
  // Subset closure holds iff it holds under removal of single elements.
  auto member = [&](VarSet s) {
    return std::binary_search(family.begin(), family.end(), s, canonical_less);
  };
  for (VarSet s : family)
    for (int v : s.to_vector())
      if (!member(s.without(v)))
        throw NotSubsetClosed("family not closed under subsets at {" +
                              q.var_list(s) + "} minus " + q.var_names[v]);
  return RefinedQuery{q, std::move(family)};
}

}  // namespace cqe
