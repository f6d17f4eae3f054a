#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "subsym/fields.hpp"
#include "subsym/jet.hpp"

namespace subsym {

struct Equation {
  Expr expr;
  std::optional<Expr> lead;  // leading jet u^a_J
  Expr coeff;                // d expr / d lead
  Expr rhs;                  // solved form: lead = rhs
};

/// Equations Delta_i = 0 with designated leading derivatives.
class DiffSystem {
 public:
  DiffSystem() = default;
  /// `leads[i]` may be empty to use the default heuristic.
  DiffSystem(JetContext ctx, std::vector<Expr> equations, std::vector<std::optional<Expr>> leads = {});

  const JetContext& ctx() const { return ctx_; }
  JetContext& ctx() { return ctx_; }
  const std::vector<Equation>& equations() const { return eqs_; }
  std::size_t size() const { return eqs_.size(); }
  const Expr& operator[](std::size_t i) const { return eqs_.at(i).expr; }
  std::vector<Expr> exprs() const;

  bool maximal_rank = true;

  /// D_M rhs_i (cached).
  Expr prolonged_rhs(int i, const MultiIndex& M) const;
  /// Equation whose leading jet is a prefix of `jet`, with the remaining multi-index.
  std::optional<std::pair<int, MultiIndex>> principal(const Expr& jet) const;

 private:
  JetContext ctx_;
  std::vector<Equation> eqs_;
  struct Cache {
    std::mutex mu;
    std::map<std::pair<int, MultiIndex>, Expr> rhs;
  };
  std::shared_ptr<Cache> cache_ = std::make_shared<Cache>();
};

/// Default leading jet for equation i: highest-order jet of dependent variable i.
Expr default_lead(const Expr& eq, int i, const JetContext& ctx);

/// Operator-valued multipliers Xi^{ib} = sum_J Xi^{ibJ} D_J.
struct SubSystem {
  std::shared_ptr<const DiffSystem> parent;
  std::vector<std::vector<std::map<MultiIndex, Expr>>> xi;  // [row][equation][J]

  static SubSystem from_beta(std::shared_ptr<const DiffSystem> parent, const std::vector<Expr>& beta);
  std::size_t rows() const { return xi.size(); }
};

/// Substitutes leading jets and their prolongations until none remain.
Expr restrict(const Expr& e, const DiffSystem& sys);

std::vector<Expr> eval_subsystem(const SubSystem& ss);

/// Solved form of the sub-system itself, as a system in the parent's context.
DiffSystem subsystem_as_system(const SubSystem& ss);

struct Decomposition {
  OperatorCoeffs gamma;  // (equation, I) -> Gamma^{iI}
  Expr residual;
};

/// e = sum Gamma^{iI} D_I Delta_i + residual, residual free of principal jets.
Decomposition decompose_on_ideal(const Expr& e, const DiffSystem& sys);

/// Rebuilds sum Gamma^{iI} D_I Delta_i + residual.
Expr reassemble(const Decomposition& d, const DiffSystem& sys);

/// x = X(xb, ub), u = U(xb, ub) and the forward components.
struct PointMap {
  std::string name;
  JetContext target;                 // barred variables
  std::vector<Expr> forward_x;       // Xbar^i(x, u), in source context
  std::vector<Expr> forward_u;       // Ubar^a(x, u)
  std::vector<Expr> inverse_x;       // X^i(xb, ub), in target context
  std::vector<Expr> inverse_u;       // U^a(xb, ub)
};

/// forward(inverse(.)) and inverse(forward(.)) reduce to the identity.
bool check_inverse(const PointMap& T, const JetContext& source);

/// Rewrites every equation of sys in barred variables (unnormalized rows).
std::vector<Expr> transform_exprs(const std::vector<Expr>& exprs, const PointMap& T, const JetContext& source);
DiffSystem transform_system(const DiffSystem& sys, const PointMap& T);

/// Jacobian determinant d(Xbar, Ubar)/d(x, u) of the forward map.
Expr jacobian_det(const PointMap& T, const JetContext& source);

/// Determinant of a square matrix of expressions (normalized).
Expr determinant(const std::vector<std::vector<Expr>>& m);
/// Inverse of a square matrix; throws SingularJacobian when the determinant is zero.
std::vector<std::vector<Expr>> inverse(const std::vector<std::vector<Expr>>& m);

}  // namespace subsym
