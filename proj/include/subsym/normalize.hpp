#pragma once

#include <functional>
#include <set>
#include <string>
#include <vector>

#include "subsym/expr.hpp"

namespace subsym {

/// Canonical rational normal form. Idempotent; canonical inputs are returned unchanged.
Expr normalize(const Expr& e);

/// Decides e == 0 on the numerator of the normal form.
bool is_zero(const Expr& e);

/// Numerator and denominator of the normal form (denominator 1 when absent).
Expr numerator(const Expr& e);
Expr denominator(const Expr& e);

/// Non-constant denominator factors of the normal form, i.e. the side conditions
/// under which a zero verdict is valid.
std::vector<Expr> side_conditions(const Expr& e);

/// While alive, the named symbols are treated as positive reals: sqrt(r^2) -> r,
/// arctan(r*cos(t), r*sin(t)) -> t. Scopes nest; per thread.
class PositiveScope {
 public:
  explicit PositiveScope(const std::set<std::string>& names);
  ~PositiveScope();
  PositiveScope(const PositiveScope&) = delete;
  PositiveScope& operator=(const PositiveScope&) = delete;

 private:
  std::set<std::string> saved_;
};

// ---------------------------------------------------------------- differentiation

/// Chain-rule derivation driven by the derivative of leaves (symbols and jets).
/// Integration variables are masked inside integral bodies. Result is not normalized.
Expr derive(const Expr& e, const std::function<Expr(const Expr& leaf)>& leaf);

/// Formal partial derivative with respect to a symbol or jet coordinate; normalized.
Expr diff_partial(const Expr& e, const Expr& wrt);

// ---------------------------------------------------------------- coefficient extraction

using PowerProduct = std::vector<std::pair<Expr, int>>;

struct PowerProductLess {
  bool operator()(const PowerProduct& a, const PowerProduct& b) const;
};

using CoefficientMap = std::map<PowerProduct, Expr, PowerProductLess>;

/// Writes e as a polynomial in the kernels selected by `is_var`, with coefficients
/// free of them. With `numerator_only` the denominator is dropped (it is a nonzero
/// side condition); otherwise a selected kernel in the denominator is an error.
/// Throws UnsupportedForm when a selected kernel is nested inside another kernel.
CoefficientMap split_coefficients(const Expr& e, const std::function<bool(const Expr&)>& is_var,
                                  bool numerator_only = false);

/// Coefficients c_k with e = sum c_k * x^k, x a kernel.
std::vector<Expr> poly_coefficients(const Expr& e, const Expr& x);

/// Kernels (symbols, jets, function applications) occurring in the normal form.
ExprSet kernels(const Expr& e);

}  // namespace subsym
