#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "subsym/invariance.hpp"

namespace subsym {

struct DecoupledCheck {
  bool decoupled = false;
  std::vector<Expr> offending;  // jets of other variables with a nonzero partial
};

/// Every partial of F*e with respect to jets of variables other than `free_var` vanishes.
DecoupledCheck is_decoupled(const std::vector<Expr>& rows, const JetContext& ctx, const std::string& free_var,
                            const std::optional<Expr>& factor = std::nullopt);
DecoupledCheck is_decoupled(const SubSystem& ss, const std::string& free_var,
                            const std::optional<Expr>& factor = std::nullopt);

/// lambda(x, u) * f with lambda an opaque function of every independent and dependent variable.
EvoField lambda_field(const PointField& f, const JetContext& ctx, const std::string& lambda = "lambda");

/// Sub-system symmetry for arbitrary lambda: the lambda-split determining system is empty.
bool arbitrary_lambda_symmetry(const PointField& f, const SubSystem& ss, const std::string& lambda = "lambda");

struct DecouplingCertificate {
  std::string branch;       // "beta2=0", "beta2=1" or "candidate"
  std::string status;       // "verified", "pruned", "open", "nonlinear"
  std::vector<Expr> beta;
  PointField field;
  std::optional<std::string> free_var;
  std::optional<PointMap> map;
  std::vector<Expr> certificate;  // unsatisfiable equations for a pruned branch
  std::vector<Expr> remaining;    // determining equations left open
  ExprMap values;                 // solved constants
};

struct DecouplingAnsatz {
  PointField field;                    // template; lambda is applied on top
  Expr beta1;                          // beta^1 template in the beta^2 = 1 case
  std::vector<Expr> constants;         // unknown constants for the linear solver
  std::set<std::string> unknowns;      // unknown functions appearing in the template
  std::string lambda = "lambda";
  bool run_branches = true;
  std::vector<std::pair<std::vector<Expr>, PointField>> candidates;
};

std::vector<DecouplingCertificate> detect_decouplable(std::shared_ptr<const DiffSystem> sys, const DecouplingAnsatz& a);

/// X1 Xbar^i = 0, X1 Ubar^a = delta(a, last) and a nonzero Jacobian.
bool verify_straightening(const PointMap& T, const PointField& f, const JetContext& source);

/// identity, polar (two dependent variables), shear (parameter k: ubar = u2 - k u1, vbar = u1).
PointMap catalog_map(const std::string& name, const JetContext& source, const std::vector<Expr>& params = {});

struct PipelineResult {
  std::vector<Expr> rows;     // transformed rows divided by their leading coefficients
  std::vector<Expr> factors;  // the divisors
  std::optional<DiffSystem> system;
  std::string free_var;
  DecoupledCheck check;
};

/// Transforms (beta . Delta, complement . Delta) and re-checks decoupling of the first row.
/// The default complement is (-beta2, beta1).
PipelineResult decouple_pipeline(const DiffSystem& sys, const std::vector<Expr>& beta, const PointMap& T,
                                 const std::optional<std::vector<Expr>>& complement = std::nullopt);

}  // namespace subsym
