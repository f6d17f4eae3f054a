#include "subsym/decoupling.hpp"

#include "subsym/errors.hpp"
#include "subsym/normalize.hpp"

namespace subsym {

DecoupledCheck is_decoupled(const std::vector<Expr>& rows, const JetContext& ctx, const std::string& free_var,
                            const std::optional<Expr>& factor) {
  if (factor && is_zero(*factor)) throw PreconditionViolation("decoupling factor is zero");
  if (ctx.dep_index(free_var) < 0) throw Error("unknown dependent variable " + free_var);
  DecoupledCheck out;
  out.decoupled = true;
  for (const auto& row : rows) {
    Expr e = normalize(factor ? *factor * row : row);
    for (const auto& j : collect_jets(e)) {
      if (j.name() == free_var || ctx.dep_index(j.name()) < 0) continue;
      if (!is_zero(diff_partial(e, j))) {
        out.decoupled = false;
        out.offending.push_back(j);
      }
    }
  }
  return out;
}

DecoupledCheck is_decoupled(const SubSystem& ss, const std::string& free_var, const std::optional<Expr>& factor) {
  return is_decoupled(eval_subsystem(ss), ss.parent->ctx(), free_var, factor);
}

EvoField lambda_field(const PointField& f, const JetContext& ctx, const std::string& lambda) {
  std::vector<Expr> args;
  for (std::size_t i = 0; i < ctx.indep.size(); ++i) args.push_back(ctx.x(static_cast<int>(i)));
  for (std::size_t a = 0; a < ctx.deps.size(); ++a) args.push_back(ctx.u(static_cast<int>(a)));
  Expr lam = Expr::opaque(lambda, {}, args);
  PointField g;
  for (const auto& x : f.xi) g.xi.push_back(lam * x);
  for (const auto& e : f.eta) g.eta.push_back(lam * e);
  return canonicalize(g, ctx);
}

bool arbitrary_lambda_symmetry(const PointField& f, const SubSystem& ss, const std::string& lambda) {
  DeterminingOptions opt;
  opt.arbitrary = {lambda};
  return determining_equations(lambda_field(f, ss.parent->ctx(), lambda), ss, opt).equations.empty();
}

namespace {

bool zero_field(const PointField& f) {
  for (const auto& x : f.xi)
    if (!is_zero(x)) return false;
  for (const auto& e : f.eta)
    if (!is_zero(e)) return false;
  return true;
}

std::optional<std::string> translation_free_var(const PointField& f, const JetContext& ctx) {
  for (const auto& x : f.xi)
    if (!is_zero(x)) return std::nullopt;
  int moved = -1;
  for (std::size_t a = 0; a < f.eta.size(); ++a) {
    if (is_zero(f.eta[a])) continue;
    if (moved >= 0) return std::nullopt;
    moved = static_cast<int>(a);
  }
  if (moved < 0 || ctx.deps.size() != 2) return std::nullopt;
  return ctx.deps[moved == 0 ? 1 : 0];
}

PointField subst_field(const PointField& f, const ExprMap& v) {
  PointField g;
  for (const auto& x : f.xi) g.xi.push_back(normalize(substitute(x, v)));
  for (const auto& e : f.eta) g.eta.push_back(normalize(substitute(e, v)));
  return g;
}

DecouplingCertificate run_branch(std::shared_ptr<const DiffSystem> sys, const DecouplingAnsatz& a,
                                 std::vector<Expr> beta, const std::string& label) {
  DecouplingCertificate c;
  c.branch = label;
  c.beta = beta;
  c.field = a.field;
  SubSystem ss = SubSystem::from_beta(sys, beta);
  DeterminingOptions opt;
  opt.unknowns = a.unknowns;
  opt.arbitrary = {a.lambda};
  DeterminingSystem ds;
  try {
    ds = determining_equations(lambda_field(a.field, sys->ctx(), a.lambda), ss, opt);
  } catch (const UnsupportedForm&) {
    c.status = "open";
    return c;
  }
  ExprMap values;
  if (!a.constants.empty()) {
    LinearSolution sol;
    try {
      sol = solve_linear_params(ds.equations, a.constants);
    } catch (const NonlinearParameter&) {
      c.status = "nonlinear";
      c.remaining = ds.equations;
      return c;
    }
    if (!sol.consistent) {
      c.status = "pruned";
      c.certificate = sol.certificate;
      return c;
    }
    values = sol.values;
    c.values = sol.values;
  }
  for (auto& b : c.beta) b = normalize(substitute(b, values));
  c.field = subst_field(a.field, values);
  for (const auto& q : ds.equations) {
    Expr r = normalize(substitute(q, values));
    if (!is_zero(r)) c.remaining.push_back(r);
  }
  if (zero_field(c.field)) {
    c.status = "pruned";
    return c;
  }
  c.status = c.remaining.empty() ? "verified" : "open";
  if (c.status == "verified") c.free_var = translation_free_var(c.field, sys->ctx());
  return c;
}

}  // namespace

std::vector<DecouplingCertificate> detect_decouplable(std::shared_ptr<const DiffSystem> sys, const DecouplingAnsatz& a) {
  std::vector<DecouplingCertificate> out;
  if (a.run_branches && sys->size() == 2) {
    out.push_back(run_branch(sys, a, {Expr(1), Expr(0)}, "beta2=0"));
    out.push_back(run_branch(sys, a, {a.beta1, Expr(1)}, "beta2=1"));
  }
  for (const auto& [beta, f] : a.candidates) {
    DecouplingCertificate c;
    c.branch = "candidate";
    c.beta = beta;
    c.field = f;
    SubSystem ss = SubSystem::from_beta(sys, beta);
    c.status = arbitrary_lambda_symmetry(f, ss, a.lambda) ? "verified" : "rejected";
    if (c.status == "verified") c.free_var = translation_free_var(f, sys->ctx());
    out.push_back(std::move(c));
  }
  return out;
}

bool verify_straightening(const PointMap& T, const PointField& f, const JetContext& source) {
  for (const auto& X : T.forward_x)
    if (!is_zero(point_apply(f, X, source))) return false;
  for (std::size_t a = 0; a < T.forward_u.size(); ++a) {
    Expr want = a + 1 == T.forward_u.size() ? Expr(1) : Expr(0);
    if (!is_zero(point_apply(f, T.forward_u[a], source) - want)) return false;
  }
  return !is_zero(jacobian_det(T, source));
}

PointMap catalog_map(const std::string& name, const JetContext& source, const std::vector<Expr>& params) {
  PointMap T;
  T.name = name;
  T.target = source;
  T.target.defs.clear();
  for (std::size_t i = 0; i < source.indep.size(); ++i) {
    T.forward_x.push_back(source.x(static_cast<int>(i)));
    T.inverse_x.push_back(source.x(static_cast<int>(i)));
  }
  if (name == "identity") {
    for (std::size_t a = 0; a < source.deps.size(); ++a) {
      T.forward_u.push_back(source.u(static_cast<int>(a)));
      T.inverse_u.push_back(source.u(static_cast<int>(a)));
    }
    return T;
  }
  if (source.deps.size() != 2) throw Error("catalog map " + name + " needs two dependent variables");
  Expr u1 = source.u(0), u2 = source.u(1);
  if (name == "polar") {
    T.target.deps = {"r", "th"};
    T.target.positive.insert("r");
    Expr r = Expr::jet("r"), th = Expr::jet("th");
    T.forward_u = {sqrt(u1 * u1 + u2 * u2), arctan(u1, u2)};
    T.inverse_u = {r * cos(th), r * sin(th)};
    return T;
  }
  if (name == "shear") {
    if (params.size() != 1) throw Error("shear map takes one parameter k");
    const Expr& k = params[0];
    T.target.deps = {source.deps[0] + "b", source.deps[1] + "b"};
    Expr ub = Expr::jet(T.target.deps[0]), vb = Expr::jet(T.target.deps[1]);
    T.forward_u = {normalize(u2 - k * u1), u1};
    T.inverse_u = {vb, normalize(ub + k * vb)};
    return T;
  }
  throw Error("unknown catalog map " + name);
}

PipelineResult decouple_pipeline(const DiffSystem& sys, const std::vector<Expr>& beta, const PointMap& T,
                                 const std::optional<std::vector<Expr>>& complement) {
  if (sys.size() != 2 || beta.size() != 2) throw Error("the pipeline handles two equations");
  std::vector<Expr> comp = complement ? *complement : std::vector<Expr>{-beta[1], beta[0]};
  Expr row0 = beta[0] * sys[0] + beta[1] * sys[1];
  Expr row1 = comp.at(0) * sys[0] + comp.at(1) * sys[1];
  std::vector<Expr> rows = transform_exprs({row0, row1}, T, sys.ctx());
  PipelineResult out;
  const JetContext& tgt = T.target;
  std::vector<std::optional<Expr>> leads;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::optional<Expr> low;
    for (const auto& j : collect_jets(rows[i])) {
      if (j.name() != tgt.deps.at(i) || jet_order(j) == 0) continue;
      if (is_zero(diff_partial(rows[i], j))) continue;
      if (!low || jet_order(j) < jet_order(*low) || (jet_order(j) == jet_order(*low) && compare(j, *low) < 0)) low = j;
    }
    Expr c = low ? diff_partial(rows[i], *low) : Expr(1);
    if (low && contains(c, *low)) c = Expr(1);
    out.factors.push_back(c);
    out.rows.push_back(normalize(rows[i] / c));
    leads.push_back(std::nullopt);
  }
  out.free_var = tgt.deps.at(0);
  out.check = is_decoupled({out.rows[0]}, tgt, out.free_var);
  JetContext t2 = tgt;
  fit_max_order(t2, out.rows);
  try {
    out.system = DiffSystem(t2, out.rows, leads);
  } catch (const UnsupportedForm&) {
    out.system.reset();
  }
  return out;
}

}  // namespace subsym
