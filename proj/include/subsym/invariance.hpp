#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "subsym/fields.hpp"
#include "subsym/system.hpp"

namespace subsym {

enum class Classification { Symmetry, SubsystemSymmetry, OtherSubsymmetry, NotSubsymmetry };

std::string classification_name(Classification c);

struct InvarianceReport {
  bool holds = false;
  std::vector<Expr> residuals;              // restricted, one per row
  std::vector<Decomposition> decompositions;  // empty entry when the form was unsupported
  std::optional<Classification> tag;
  std::vector<Expr> side_conditions;
  std::string note;
};

/// X(Delta_i) vanishes on solutions of the whole system.
InvarianceReport check_symmetry(const EvoField& f, const DiffSystem& sys);
/// X(Xi Delta) vanishes on solutions of the parent system.
InvarianceReport check_subsymmetry(const EvoField& f, const SubSystem& ss);
/// X(Xi Delta) vanishes on solutions of the sub-system itself.
InvarianceReport check_subsystem_symmetry(const EvoField& f, const SubSystem& ss);

Classification classify(const EvoField& f, const SubSystem& ss);

enum class Condition { Subsymmetry, SubsystemSymmetry };

struct DeterminingSystem {
  std::vector<Expr> equations;
  std::vector<Expr> split;  // coordinates whose coefficients were separated
};

struct DeterminingOptions {
  std::set<std::string> unknowns;   // opaque functions to be determined
  std::set<std::string> arbitrary;  // arbitrary functions: their jets are split coordinates
  Condition condition = Condition::SubsystemSymmetry;
  /// First stage of the two-stage mode: arbitrary functions keep only independent arguments.
  bool arbitrary_on_base = false;
};

/// Coefficients of the invariance condition with respect to jets that are not arguments
/// of the unknowns and to every jet of the arbitrary functions.
DeterminingSystem determining_equations(const EvoField& f, const SubSystem& ss, const DeterminingOptions& opt);

/// Splits a single expression the same way.
DeterminingSystem split_condition(const Expr& residual, const DeterminingOptions& opt);

/// Drops arguments that are not independent variables from the named opaque functions.
Expr restrict_arguments(const Expr& e, const std::set<std::string>& names, const JetContext& ctx);

/// Replaces name(args) and its formal derivatives by body with params := args.
Expr substitute_function(const Expr& e, const std::string& name, const std::vector<Expr>& params, const Expr& body);

struct LinearSolution {
  bool consistent = true;
  ExprMap values;                 // unknown -> value
  std::vector<Expr> certificate;  // reduced equations with no unknowns and nonzero value
  std::vector<Expr> remaining;    // equations left free of unknowns that vanish
};

/// Solves equations affine in the unknowns (symbols or opaque nodes) over the field of
/// rational functions in everything else. Throws NonlinearParameter when stuck on a
/// nonlinear occurrence.
LinearSolution solve_linear_params(const std::vector<Expr>& equations, const std::vector<Expr>& unknowns);

}  // namespace subsym
