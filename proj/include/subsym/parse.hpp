#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "subsym/expr.hpp"

namespace subsym {

/// Names the parser may resolve. Jets are only recognized for `deps`.
struct SymbolTable {
  std::vector<std::string> indep;
  std::vector<std::string> deps;
  std::vector<std::string> params;
  std::map<std::string, int> opaque;  // name -> arity
  std::set<std::string> extra;        // further plain symbols
  std::map<std::string, Expr> defs;   // names expanded to a stored expression

  bool is_symbol(const std::string& n) const;
  bool is_dep(const std::string& n) const;
  bool is_indep(const std::string& n) const;
};

/// Grammar: + - * / ^ (right-assoc, binds tighter than unary minus), calls f(a, b),
/// jets u, u_x, u_{xt}, Diff(u, x, t), formal derivatives F'[1,2](a, b),
/// Int(body, s, upper), Int(F, u) for a unary opaque F, and diff(e, s), the partial
/// derivative evaluated while parsing.
Expr parse(std::string_view text, const SymbolTable& table);

/// Splits a jet suffix such as "xxt" into direction names; empty result on failure.
std::vector<std::string> split_dirs(const std::string& suffix, const std::vector<std::string>& indep);

}  // namespace subsym
