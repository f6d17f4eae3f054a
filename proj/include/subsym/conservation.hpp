#pragma once

#include <memory>
#include <string>
#include <vector>

#include "subsym/invariance.hpp"

namespace subsym {

struct ConsLaw {
  std::vector<Expr> fluxes;          // one per independent variable
  std::vector<Expr> characteristic;  // one per equation, (-D)_I Gamma^{iI}
  Decomposition decomposition;       // divergence = sum Gamma^{iI} D_I Delta_i
  std::shared_ptr<const DiffSystem> parent;

  /// The law's own sub-system, with the decomposition as operator multipliers.
  SubSystem subsystem() const;
};

Expr divergence(const std::vector<Expr>& fluxes, const JetContext& ctx);

/// Throws NotAConservationLaw with the restricted divergence when it does not vanish.
ConsLaw verify_cl(const std::vector<Expr>& fluxes, std::shared_ptr<const DiffSystem> sys);

/// Every characteristic component vanishes on solutions.
bool is_trivial(const ConsLaw& cl);

/// Same characteristic on solutions.
bool same_characteristic(const ConsLaw& a, const ConsLaw& b);

/// Fluxes X F^i; the field must be a sub-symmetry of the law's sub-system.
ConsLaw deform(const EvoField& f, const ConsLaw& cl);
ConsLaw deform(const EvoField& f, const ConsLaw& cl, const SubSystem& ss);

/// Sub-symmetry of D_i A^i = 0 deforming it to the target fluxes, for A = A(x, u).
/// Throws NonFunctionFluxes or RankDeficient.
EvoField inverse_deform(const std::vector<Expr>& source, const std::vector<Expr>& target, const JetContext& ctx);

/// Gauge field X_R turning A into the trivial fluxes (-D_2 R, D_1 R); two independent variables.
EvoField gauge_field(const std::vector<Expr>& source, const Expr& R, const JetContext& ctx);

struct FrechetSystem {
  std::vector<Expr> equations;  // left - right, one per flux component
  std::vector<Expr> conditions;  // solvability conditions for a degenerate Jacobian
  std::vector<Expr> unknowns;    // the opaque nodes alpha^a and R
};

/// Frechet-derivative deformation equations in unknown functions alpha^a(x, u) and R(x, u).
FrechetSystem frechet_system(const std::vector<Expr>& source, const std::vector<Expr>& target, const JetContext& ctx);

struct TelegraphCase {
  std::string name;
  std::string F, G;  // as text in the telegraph context
  std::vector<Expr> fluxes;
  EvoField field;
  std::shared_ptr<const DiffSystem> system;
  bool law_verified = false;
  bool field_deforms = false;  // X Delta_1 has the law's characteristic
  std::string note;
};

/// Telegraph context: independent (t, x), dependent (u, v), F, G opaque, parameter alpha.
JetContext telegraph_context();
std::shared_ptr<const DiffSystem> telegraph_system(const std::string& F, const std::string& G);

/// Checks one (F, G, P, Q, X) entry: D_t P + D_x Q vanishes on solutions, and X deforms
/// Delta_1 into a law with the same characteristic.
TelegraphCase check_telegraph(const std::string& name, const std::string& F, const std::string& G,
                              const std::string& P, const std::string& Q, const std::string& Xu, const std::string& Xv);

/// The laws and fields listed for the telegraph system, each checked.
std::vector<TelegraphCase> telegraph_catalog();

}  // namespace subsym
