#pragma once

#include <map>
#include <string>
#include <vector>

#include "subsym/jet.hpp"

namespace subsym {

/// Evolutionary field sum_a alpha^a d/du^a, prolonged by D_J alpha^a.
struct EvoField {
  std::vector<Expr> alpha;  // one per dependent variable, context order

  static EvoField zero(const JetContext& ctx);
};

/// xi^i d/dx_i + eta^a d/du^a with coefficients depending on (x, u) only.
struct PointField {
  std::vector<Expr> xi;
  std::vector<Expr> eta;

  static PointField zero(const JetContext& ctx);
};

/// alpha^a = eta^a - xi^i u^a_i.
EvoField canonicalize(const PointField& f, const JetContext& ctx);

/// Prolonged action on e (normalized).
Expr apply(const EvoField& f, const Expr& e, const JetContext& ctx);

/// Characteristic of [f, g]: f(beta) - g(alpha).
EvoField commutator(const EvoField& f, const EvoField& g, const JetContext& ctx);

/// Pointwise scaled field lambda * f.
EvoField scale(const EvoField& f, const Expr& lambda);

/// Difference of characteristics is zero.
bool same_field(const EvoField& f, const EvoField& g);

/// Point-field action on a function of (x, u): xi^i d/dx_i + eta^a d/du^a.
Expr point_apply(const PointField& f, const Expr& e, const JetContext& ctx);

/// Taylor polynomial of exp(eps X) u, evaluated on a given solution u0(x).
struct Flow {
  Expr eps;
  int order = 0;
  std::vector<std::vector<Expr>> coeffs;  // [a][k]: coefficient of eps^k
  std::vector<Expr> series;               // [a]: sum_k coeffs[a][k] eps^k
};

Flow flow_truncated(const EvoField& f, const std::vector<Expr>& u0, int order, const JetContext& ctx);

/// Delta evaluated on the truncated flow, expanded in eps and cut above `order`.
/// Entry k is the coefficient of eps^k.
std::vector<Expr> flow_residual(const Flow& flow, const Expr& delta, const JetContext& ctx);

/// Replaces every jet u^a_J by D_J of the given explicit expression.
Expr substitute_solution(const Expr& e, const std::vector<Expr>& u, const JetContext& ctx);

}  // namespace subsym
