#include "subsym/conservation.hpp"

#include "subsym/errors.hpp"
#include "subsym/normalize.hpp"

namespace subsym {

SubSystem ConsLaw::subsystem() const {
  SubSystem ss;
  ss.parent = parent;
  std::vector<std::map<MultiIndex, Expr>> row(parent->size());
  for (const auto& [key, g] : decomposition.gamma) row.at(static_cast<std::size_t>(key.first))[key.second] = g;
  ss.xi.push_back(std::move(row));
  return ss;
}

Expr divergence(const std::vector<Expr>& fluxes, const JetContext& ctx) {
  if (fluxes.size() != ctx.indep.size())
    throw Error("expected " + std::to_string(ctx.indep.size()) + " fluxes, got " + std::to_string(fluxes.size()));
  Expr acc;
  for (std::size_t i = 0; i < fluxes.size(); ++i) acc = acc + total_derivative(fluxes[i], static_cast<int>(i), ctx);
  return normalize(acc);
}

ConsLaw verify_cl(const std::vector<Expr>& fluxes, std::shared_ptr<const DiffSystem> sys) {
  ConsLaw cl;
  cl.parent = sys;
  for (const auto& f : fluxes) cl.fluxes.push_back(normalize(f));
  Expr div = divergence(cl.fluxes, sys->ctx());
  try {
    cl.decomposition = decompose_on_ideal(div, *sys);
  } catch (const UnsupportedForm&) {
    Expr r = restrict(div, *sys);
    if (!is_zero(r)) throw NotAConservationLaw("divergence does not vanish on solutions", to_string(r));
    throw;
  }
  if (!is_zero(cl.decomposition.residual))
    throw NotAConservationLaw("divergence does not vanish on solutions", to_string(cl.decomposition.residual));
  cl.characteristic = adjoint_apply(cl.decomposition.gamma, static_cast<int>(sys->size()), sys->ctx());
  return cl;
}

bool is_trivial(const ConsLaw& cl) {
  for (const auto& c : cl.characteristic)
    if (!is_zero(restrict(c, *cl.parent))) return false;
  return true;
}

bool same_characteristic(const ConsLaw& a, const ConsLaw& b) {
  for (std::size_t i = 0; i < a.characteristic.size(); ++i)
    if (!is_zero(restrict(a.characteristic[i] - b.characteristic.at(i), *a.parent))) return false;
  return true;
}

ConsLaw deform(const EvoField& f, const ConsLaw& cl) { return deform(f, cl, cl.subsystem()); }

ConsLaw deform(const EvoField& f, const ConsLaw& cl, const SubSystem& ss) {
  const JetContext& ctx = cl.parent->ctx();
  Expr div = divergence(cl.fluxes, ctx);
  auto rows = eval_subsystem(ss);
  if (rows.size() != 1 || !is_zero(rows[0] - div))
    throw PreconditionViolation("sub-system does not evaluate to the divergence of the law");
  auto rep = check_subsymmetry(f, ss);
  if (!rep.holds)
    throw PreconditionViolation("field is not a sub-symmetry of the law's sub-system; residual " +
                                to_string(rep.residuals.at(0)));
  std::vector<Expr> out;
  for (const auto& F : cl.fluxes) out.push_back(apply(f, F, ctx));
  return verify_cl(out, cl.parent);
}

namespace {

void require_point_fluxes(const std::vector<Expr>& A) {
  for (const auto& a : A)
    for (const auto& j : collect_jets(a))
      if (jet_order(j) > 0) throw NonFunctionFluxes("flux " + to_string(a) + " depends on " + to_string(j));
}

std::vector<std::vector<Expr>> flux_jacobian(const std::vector<Expr>& A, const JetContext& ctx) {
  std::vector<std::vector<Expr>> J;
  for (const auto& a : A) {
    std::vector<Expr> row;
    for (std::size_t b = 0; b < ctx.deps.size(); ++b) row.push_back(diff_partial(a, ctx.u(static_cast<int>(b))));
    J.push_back(row);
  }
  return J;
}

// Column subsets of size k.
void choose(std::size_t n, std::size_t k, std::size_t from, std::vector<std::size_t>& cur,
            std::vector<std::vector<std::size_t>>& out) {
  if (cur.size() == k) {
    out.push_back(cur);
    return;
  }
  for (std::size_t i = from; i < n; ++i) {
    cur.push_back(i);
    choose(n, k, i + 1, cur, out);
    cur.pop_back();
  }
}

}  // namespace

EvoField inverse_deform(const std::vector<Expr>& source, const std::vector<Expr>& target, const JetContext& ctx) {
  std::size_t p = ctx.indep.size(), q = ctx.deps.size();
  if (source.size() != p || target.size() != p) throw Error("flux count must equal the number of independent variables");
  require_point_fluxes(source);
  auto J = flux_jacobian(source, ctx);
  EvoField X = EvoField::zero(ctx);
  if (p == 2 && q == 2) {
    Expr det = normalize(J[0][0] * J[1][1] - J[0][1] * J[1][0]);
    if (is_zero(det)) throw RankDeficient("flux Jacobian determinant vanishes");
    X.alpha[0] = normalize((J[1][1] * target[0] - J[0][1] * target[1]) / det);
    X.alpha[1] = normalize((J[0][0] * target[1] - J[1][0] * target[0]) / det);
  } else {
    if (q < p) throw RankDeficient("flux Jacobian has rank at most " + std::to_string(q) + " < " + std::to_string(p));
    std::vector<std::vector<std::size_t>> subsets;
    std::vector<std::size_t> cur;
    choose(q, p, 0, cur, subsets);
    bool found = false;
    for (const auto& cols : subsets) {
      std::vector<std::vector<Expr>> m;
      for (std::size_t i = 0; i < p; ++i) {
        std::vector<Expr> row;
        for (auto c : cols) row.push_back(J[i][c]);
        m.push_back(row);
      }
      if (is_zero(determinant(m))) continue;
      auto inv = inverse(m);
      for (std::size_t r = 0; r < p; ++r) {
        Expr acc;
        for (std::size_t i = 0; i < p; ++i) acc = acc + inv[r][i] * target[i];
        X.alpha[cols[r]] = normalize(acc);
      }
      found = true;
      break;
    }
    if (!found) throw RankDeficient("flux Jacobian has rank below " + std::to_string(p));
  }
  for (std::size_t i = 0; i < p; ++i)
    if (!is_zero(apply(X, source[i], ctx) - target[i])) throw Error("inverse deformation failed to reproduce the target");
  return X;
}

EvoField gauge_field(const std::vector<Expr>& source, const Expr& R, const JetContext& ctx) {
  if (ctx.indep.size() != 2) throw Error("gauge fields are defined for two independent variables");
  Expr D1 = total_derivative(R, 0, ctx), D2 = total_derivative(R, 1, ctx);
  return inverse_deform(source, {normalize(-D2), D1}, ctx);
}

FrechetSystem frechet_system(const std::vector<Expr>& source, const std::vector<Expr>& target, const JetContext& ctx) {
  if (ctx.indep.size() != 2 || source.size() != 2 || target.size() != 2)
    throw Error("the Frechet deformation system is formed for two independent variables");
  FrechetSystem fs;
  std::vector<Expr> args;
  for (std::size_t i = 0; i < ctx.indep.size(); ++i) args.push_back(ctx.x(static_cast<int>(i)));
  for (std::size_t a = 0; a < ctx.deps.size(); ++a) args.push_back(ctx.u(static_cast<int>(a)));
  std::vector<Expr> alpha;
  for (std::size_t a = 0; a < ctx.deps.size(); ++a) {
    alpha.push_back(Expr::opaque("alpha" + std::to_string(a + 1), {}, args));
    fs.unknowns.push_back(alpha.back());
  }
  std::string rname = ctx.opaque.count("R") ? "R0" : "R";
  Expr R = Expr::opaque(rname, {}, args);
  fs.unknowns.push_back(R);
  Expr D1R = total_derivative(R, 0, ctx), D2R = total_derivative(R, 1, ctx);
  std::vector<Expr> rhs{target[0] - D2R, target[1] + D1R};
  for (std::size_t i = 0; i < 2; ++i) {
    Expr lhs;
    for (const auto& j : collect_jets(source[i])) {
      int a = ctx.dep_index(j.name());
      if (a < 0) continue;
      lhs = lhs + diff_partial(source[i], j) * total_derivative(alpha[static_cast<std::size_t>(a)], ctx.index_of(j), ctx);
    }
    fs.equations.push_back(normalize(lhs - rhs[i]));
  }
  bool point = true;
  for (const auto& a : source)
    for (const auto& j : collect_jets(a))
      if (jet_order(j) > 0) point = false;
  if (point && ctx.deps.size() <= 2) {
    auto J = flux_jacobian(source, ctx);
    if (ctx.deps.size() == 1 || is_zero(J[0][0] * J[1][1] - J[0][1] * J[1][0])) {
      for (std::size_t k = 0; k < ctx.deps.size(); ++k) {
        if (is_zero(J[0][k]) && is_zero(J[1][k])) continue;
        fs.conditions.push_back(normalize(J[1][k] * rhs[0] - J[0][k] * rhs[1]));
        break;
      }
    }
  }
  return fs;
}

// ---------------------------------------------------------------- telegraph

JetContext telegraph_context() {
  JetContext ctx;
  ctx.indep = {"t", "x"};
  ctx.deps = {"u", "v"};
  ctx.params = {"alpha"};
  ctx.opaque = {{"F", 1}, {"G", 1}};
  return ctx;
}

std::shared_ptr<const DiffSystem> telegraph_system(const std::string& F, const std::string& G) {
  JetContext ctx = telegraph_context();
  std::vector<Expr> eqs{ctx.parse("u_t - v_x"), ctx.parse("v_t - (" + F + ")*u_x - (" + G + ")")};
  fit_max_order(ctx, eqs);
  return std::make_shared<DiffSystem>(ctx, eqs);
}

TelegraphCase check_telegraph(const std::string& name, const std::string& F, const std::string& G,
                              const std::string& P, const std::string& Q, const std::string& Xu, const std::string& Xv) {
  TelegraphCase c;
  c.name = name;
  c.F = F;
  c.G = G;
  c.system = telegraph_system(F, G);
  const JetContext& ctx = c.system->ctx();
  c.fluxes = {normalize(ctx.parse(P)), normalize(ctx.parse(Q))};
  c.field = EvoField{{normalize(ctx.parse(Xu)), normalize(ctx.parse(Xv))}};
  std::optional<ConsLaw> law;
  try {
    law = verify_cl(c.fluxes, c.system);
    c.law_verified = true;
  } catch (const NotAConservationLaw& ex) {
    c.note = "not a conservation law: residual " + ex.residual();
  }
  ConsLaw d1 = verify_cl({ctx.parse("u"), ctx.parse("-v")}, c.system);
  try {
    ConsLaw moved = deform(c.field, d1);
    if (law) {
      c.field_deforms = same_characteristic(moved, *law);
      if (!c.field_deforms) c.note = "deformed law has a different characteristic";
    }
  } catch (const PreconditionViolation& ex) {
    if (c.note.empty()) c.note = ex.what();
  }
  return c;
}

std::vector<TelegraphCase> telegraph_catalog() {
  std::vector<TelegraphCase> out;
  const std::string tan_e1p = "exp(u + 2*x + sqrt(2)*(v - t))", tan_e1m = "exp(u - 2*x + sqrt(2)*(v + t))";
  const std::string tan_e2p = "exp(u + 2*x - sqrt(2)*(v - t))", tan_e2m = "exp(u - 2*x - sqrt(2)*(v + t))";
  struct Row {
    std::string name, e, pw, sgn;
  };
  for (const Row& r : {Row{"tanu-1+", tan_e1p, "cos(u)", "1"}, Row{"tanu-1-", tan_e1m, "1/cos(u)", "-1"},
                       Row{"tanu-2+", tan_e2p, "cos(u)", "1"}, Row{"tanu-2-", tan_e2m, "1/cos(u)", "-1"}}) {
    std::string base = r.pw + "*" + r.e;
    std::string P = "(1/sqrt(2))*" + base;
    std::string Q = "(" + r.sgn + ")*(1/2)*(tan(u) - (" + r.sgn + "))*" + base;
    std::string Xu = "(1/2)*" + base;
    std::string Xv = "(1/2)*" + base + "*sqrt(2)*(1 - (" + r.sgn + ")*tan(u))";
    out.push_back(check_telegraph(r.name, "tan(u)", "tan(u)", P, Q, Xu, Xv));
  }
  out.push_back(check_telegraph("G=u", "F(u)", "u", "(x - t^2/2)*u + t*v", "(t^2/2 - x)*v - t*Int(F, u)",
                                "(x - t^2/2)*u + t*v", "(x - t^2/2)*v + t*Int(F, u)"));
  const std::string A = "(2*alpha*(x + alpha*t) + (v + alpha*u - alpha))";
  const std::string E = "exp(x + alpha*t)";
  out.push_back(check_telegraph("exp", "exp(u) + alpha^2", "exp(u)", E + "*(exp(u) + " + A + "^2/2)",
                                "-" + E + "*((" + A + " - alpha)*exp(u) + alpha*" + A + "^2/2)",
                                E + "*(exp(u) + " + A + "^2/2)", E + "*((" + A + " - alpha)*exp(u) + alpha*" + A + "^2/2)"));
  out.push_back(check_telegraph("G=1/u", "F(u)", "1/u", "(x + v^2/2)*u + Int(Int(z*F(z), z, s), s, u)",
                                "-x*v - v^3/6 - v*Int(s*F(s), s, u)", "(x + v^2/2)*u + Int(Int(z*F(z), z, s), s, u)",
                                "x*v + v^3/6 + v*Int(s*F(s), s, u)"));
  for (const std::string sg : {"1", "-1"}) {
    std::string P = "cos(u)*exp(-u - 2*x + (" + sg + ")*sqrt(2)*(v + t))";
    std::string Q = "(" + sg + ")*(sqrt(2)/2)*(tan(u) + 1)*" + P;
    out.push_back(check_telegraph(sg == "1" ? "tanu-derived+" : "tanu-derived-", "tan(u)", "tan(u)", P, Q, P, "-" + Q));
  }
  return out;
}

}  // namespace subsym
