#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "subsym/expr.hpp"
#include "subsym/parse.hpp"

namespace subsym {

/// Unordered multi-index, stored as sorted 0-based direction indices.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> dirs);

  const std::vector<int>& dirs() const { return d_; }
  int order() const { return static_cast<int>(d_.size()); }
  bool empty() const { return d_.empty(); }

  MultiIndex plus(int j) const;
  MultiIndex plus(const MultiIndex& o) const;
  /// Multiset difference; only meaningful when `o` is contained in *this.
  MultiIndex minus(const MultiIndex& o) const;
  bool contains(const MultiIndex& o) const;
  int count(int j) const;

  auto operator<=>(const MultiIndex& o) const = default;

 private:
  std::vector<int> d_;
};

/// Independent/dependent variables, parameters, opaque functions and the truncation order.
struct JetContext {
  std::vector<std::string> indep;
  std::vector<std::string> deps;
  std::vector<std::string> params;
  std::map<std::string, int> opaque;
  std::set<std::string> positive;
  std::map<std::string, Expr> defs;
  mutable int max_order = 6;
  bool pinned = false;

  SymbolTable table() const;
  Expr parse(std::string_view text) const;

  int indep_index(const std::string& n) const;  // -1 if absent
  int dep_index(const std::string& n) const;

  Expr x(int i) const { return Expr::symbol(indep.at(static_cast<std::size_t>(i))); }
  Expr u(int a, const MultiIndex& J = {}) const;
  /// Multi-index of a jet node in this context.
  MultiIndex index_of(const Expr& jet) const;
  std::string describe(const MultiIndex& J) const;
};

/// Sets max_order to (highest order appearing) + 4, or SUBSYM_MAX_ORDER when set.
void fit_max_order(JetContext& ctx, const std::vector<Expr>& exprs);

int jet_order(const Expr& jet);
/// Highest jet order appearing in e (0 when no jets).
int max_jet_order(const Expr& e);

/// D_j e (normalized).
Expr total_derivative(const Expr& e, int j, const JetContext& ctx);
/// D_J e.
Expr total_derivative(const Expr& e, const MultiIndex& J, const JetContext& ctx);

/// Coefficients of an operator sum over (equation, multi-index).
using OperatorCoeffs = std::map<std::pair<int, MultiIndex>, Expr>;

/// Per equation i: sum over I of (-D)_I Gamma^{iI}.
std::vector<Expr> adjoint_apply(const OperatorCoeffs& gamma, int n_equations, const JetContext& ctx);

}  // namespace subsym
