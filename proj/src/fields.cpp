#include "subsym/fields.hpp"

#include "subsym/errors.hpp"
#include "subsym/normalize.hpp"

namespace subsym {

EvoField EvoField::zero(const JetContext& ctx) { return EvoField{std::vector<Expr>(ctx.deps.size())}; }

PointField PointField::zero(const JetContext& ctx) {
  return PointField{std::vector<Expr>(ctx.indep.size()), std::vector<Expr>(ctx.deps.size())};
}

EvoField canonicalize(const PointField& f, const JetContext& ctx) {
  EvoField out;
  for (std::size_t a = 0; a < ctx.deps.size(); ++a) {
    Expr al = f.eta.at(a);
    for (std::size_t i = 0; i < ctx.indep.size(); ++i)
      al = al - f.xi.at(i) * ctx.u(static_cast<int>(a), MultiIndex({static_cast<int>(i)}));
    out.alpha.push_back(normalize(al));
  }
  return out;
}

namespace {

// D_J alpha^a, built incrementally and memoized per call.
struct Prolonger {
  const EvoField& f;
  const JetContext& ctx;
  std::map<std::pair<int, MultiIndex>, Expr> memo;

  Expr get(int a, const MultiIndex& J) {
    auto key = std::make_pair(a, J);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    Expr r;
    if (J.empty()) {
      r = normalize(f.alpha.at(static_cast<std::size_t>(a)));
    } else {
      int last = J.dirs().back();
      std::vector<int> rest(J.dirs().begin(), J.dirs().end() - 1);
      r = total_derivative(get(a, MultiIndex(rest)), last, ctx);
    }
    memo.emplace(key, r);
    return r;
  }
};

}  // namespace

Expr apply(const EvoField& f, const Expr& e, const JetContext& ctx) {
  Prolonger pr{f, ctx, {}};
  Expr raw = derive(e, [&](const Expr& leaf) -> Expr {
    if (leaf.kind() != Kind::Jet) return Expr();
    int a = ctx.dep_index(leaf.name());
    if (a < 0) throw Error("jet of undeclared variable " + leaf.name());
    MultiIndex J = ctx.index_of(leaf);
    if (J.order() > ctx.max_order) {
      if (ctx.pinned) throw TruncationOverflow("prolongation exceeds pinned order");
      ctx.max_order = J.order();
    }
    return pr.get(a, J);
  });
  return normalize(raw);
}

EvoField commutator(const EvoField& f, const EvoField& g, const JetContext& ctx) {
  EvoField out;
  for (std::size_t a = 0; a < f.alpha.size(); ++a)
    out.alpha.push_back(normalize(apply(f, g.alpha.at(a), ctx) - apply(g, f.alpha[a], ctx)));
  return out;
}

EvoField scale(const EvoField& f, const Expr& lambda) {
  EvoField out;
  for (const auto& a : f.alpha) out.alpha.push_back(normalize(lambda * a));
  return out;
}

bool same_field(const EvoField& f, const EvoField& g) {
  if (f.alpha.size() != g.alpha.size()) return false;
  for (std::size_t a = 0; a < f.alpha.size(); ++a)
    if (!is_zero(f.alpha[a] - g.alpha[a])) return false;
  return true;
}

Expr point_apply(const PointField& f, const Expr& e, const JetContext& ctx) {
  Expr out;
  for (std::size_t i = 0; i < ctx.indep.size(); ++i)
    if (!f.xi.at(i).is_zero_number()) out = out + f.xi[i] * diff_partial(e, ctx.x(static_cast<int>(i)));
  for (std::size_t a = 0; a < ctx.deps.size(); ++a)
    if (!f.eta.at(a).is_zero_number()) out = out + f.eta[a] * diff_partial(e, ctx.u(static_cast<int>(a)));
  return normalize(out);
}

Expr substitute_solution(const Expr& e, const std::vector<Expr>& u, const JetContext& ctx) {
  ExprMap rules;
  for (const auto& j : collect_jets(e)) {
    int a = ctx.dep_index(j.name());
    if (a < 0) continue;
    rules.emplace(j, total_derivative(u.at(static_cast<std::size_t>(a)), ctx.index_of(j), ctx));
  }
  return normalize(substitute(e, rules));
}

Flow flow_truncated(const EvoField& f, const std::vector<Expr>& u0, int order, const JetContext& ctx) {
  if (order > ctx.max_order && ctx.pinned) throw TruncationOverflow("flow order exceeds pinned maximum");
  Flow fl;
  fl.eps = Expr::symbol("epsilon");
  fl.order = order;
  for (std::size_t a = 0; a < ctx.deps.size(); ++a) {
    std::vector<Expr> cs;
    Expr power = ctx.u(static_cast<int>(a));
    Rational fact = 1;
    Expr series;
    for (int k = 0; k <= order; ++k) {
      if (k > 0) {
        power = apply(f, power, ctx);
        fact *= k;
      }
      Expr c = normalize(substitute_solution(power, u0, ctx) / Expr(fact));
      cs.push_back(c);
      series = series + c * Expr::pow(fl.eps, k);
    }
    fl.coeffs.push_back(cs);
    fl.series.push_back(normalize(series));
  }
  return fl;
}

std::vector<Expr> flow_residual(const Flow& flow, const Expr& delta, const JetContext& ctx) {
  Expr r = substitute_solution(delta, flow.series, ctx);
  std::vector<Expr> c = poly_coefficients(r, flow.eps);
  c.resize(static_cast<std::size_t>(flow.order) + 1);
  return c;
}

}  // namespace subsym
