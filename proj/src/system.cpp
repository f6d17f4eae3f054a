#include "subsym/system.hpp"

#include <algorithm>

#include "subsym/errors.hpp"
#include "subsym/normalize.hpp"

namespace subsym {

Expr default_lead(const Expr& eq, int i, const JetContext& ctx) {
  ExprSet jets = collect_jets(eq);
  auto pick = [&](const std::string& var) -> std::optional<Expr> {
    std::optional<Expr> best;
    MultiIndex bj;
    for (const auto& j : jets) {
      if (j.name() != var) continue;
      MultiIndex J = ctx.index_of(j);
      if (!best || J.order() > bj.order() || (J.order() == bj.order() && J < bj)) {
        best = j;
        bj = J;
      }
    }
    return best;
  };
  if (i >= 0 && i < static_cast<int>(ctx.deps.size()))
    if (auto l = pick(ctx.deps[static_cast<std::size_t>(i)])) return *l;
  std::optional<Expr> best;
  for (const auto& d : ctx.deps) {
    auto l = pick(d);
    if (l && (!best || jet_order(*l) > jet_order(*best))) best = l;
  }
  if (!best) throw UnsupportedForm("equation has no jets to solve for: " + to_string(eq));
  return *best;
}

DiffSystem::DiffSystem(JetContext ctx, std::vector<Expr> equations, std::vector<std::optional<Expr>> leads)
    : ctx_(std::move(ctx)) {
  leads.resize(equations.size());
  for (std::size_t i = 0; i < equations.size(); ++i) {
    Equation q;
    q.expr = normalize(equations[i]);
    Expr lead = leads[i] ? *leads[i] : default_lead(q.expr, static_cast<int>(i), ctx_);
    if (lead.kind() != Kind::Jet) throw UnsupportedForm("leading derivative must be a jet: " + to_string(lead));
    q.coeff = diff_partial(q.expr, lead);
    if (is_zero(q.coeff))
      throw UnsupportedForm("equation " + std::to_string(i + 1) + " does not contain " + to_string(lead));
    if (contains(q.coeff, lead))
      throw UnsupportedForm("equation " + std::to_string(i + 1) + " is not linear in " + to_string(lead));
    q.rhs = normalize(lead - q.expr / q.coeff);
    q.lead = lead;
    for (const auto& prev : eqs_)
      if (prev.lead && *prev.lead == lead) throw UnsupportedForm("repeated leading derivative " + to_string(lead));
    eqs_.push_back(std::move(q));
  }
}

std::vector<Expr> DiffSystem::exprs() const {
  std::vector<Expr> out;
  for (const auto& q : eqs_) out.push_back(q.expr);
  return out;
}

Expr DiffSystem::prolonged_rhs(int i, const MultiIndex& M) const {
  {
    std::lock_guard<std::mutex> lock(cache_->mu);
    auto it = cache_->rhs.find({i, M});
    if (it != cache_->rhs.end()) return it->second;
  }
  Expr r;
  if (M.empty()) {
    r = eqs_.at(static_cast<std::size_t>(i)).rhs;
  } else {
    int last = M.dirs().back();
    std::vector<int> rest(M.dirs().begin(), M.dirs().end() - 1);
    r = total_derivative(prolonged_rhs(i, MultiIndex(rest)), last, ctx_);
  }
  std::lock_guard<std::mutex> lock(cache_->mu);
  cache_->rhs.emplace(std::make_pair(i, M), r);
  return r;
}

std::optional<std::pair<int, MultiIndex>> DiffSystem::principal(const Expr& jet) const {
  if (jet.kind() != Kind::Jet) return std::nullopt;
  MultiIndex K;
  bool have_k = false;
  for (std::size_t i = 0; i < eqs_.size(); ++i) {
    const auto& l = eqs_[i].lead;
    if (!l || l->name() != jet.name()) continue;
    if (!have_k) {
      K = ctx_.index_of(jet);
      have_k = true;
    }
    MultiIndex J = ctx_.index_of(*l);
    if (K.contains(J)) return std::make_pair(static_cast<int>(i), K.minus(J));
  }
  return std::nullopt;
}

Expr restrict(const Expr& e, const DiffSystem& sys) {
  Expr cur = normalize(e);
  int limit = 4 * (sys.ctx().max_order + 2) + 16;
  for (int pass = 0; pass < limit; ++pass) {
    ExprMap rules;
    for (const auto& j : collect_jets(cur)) {
      if (auto p = sys.principal(j)) rules.emplace(j, sys.prolonged_rhs(p->first, p->second));
    }
    if (rules.empty()) return cur;
    cur = normalize(substitute(cur, rules));
  }
  throw Error("restriction did not reach a fixpoint after " + std::to_string(limit) + " passes");
}

SubSystem SubSystem::from_beta(std::shared_ptr<const DiffSystem> parent, const std::vector<Expr>& beta) {
  SubSystem ss;
  std::vector<std::map<MultiIndex, Expr>> row(parent->size());
  for (std::size_t b = 0; b < beta.size() && b < parent->size(); ++b)
    if (!is_zero(beta[b])) row[b][MultiIndex()] = normalize(beta[b]);
  ss.parent = std::move(parent);
  ss.xi.push_back(std::move(row));
  return ss;
}

std::vector<Expr> eval_subsystem(const SubSystem& ss) {
  const DiffSystem& sys = *ss.parent;
  std::vector<Expr> out;
  for (const auto& row : ss.xi) {
    Expr acc;
    for (std::size_t b = 0; b < row.size(); ++b)
      for (const auto& [J, c] : row[b]) acc = acc + c * total_derivative(sys[b], J, sys.ctx());
    out.push_back(normalize(acc));
  }
  return out;
}

DiffSystem subsystem_as_system(const SubSystem& ss) {
  const DiffSystem& sys = *ss.parent;
  std::vector<Expr> rows = eval_subsystem(ss);
  std::vector<std::optional<Expr>> leads;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::optional<Expr> constant, any;
    for (std::size_t b = 0; b < ss.xi[i].size(); ++b) {
      const auto& lead = sys.equations()[b].lead;
      if (!lead) continue;
      for (const auto& [J, c] : ss.xi[i][b]) {
        MultiIndex L = sys.ctx().index_of(*lead);
        Expr cand = sys.ctx().u(sys.ctx().dep_index(lead->name()), L.plus(J));
        bool taken = false;
        for (const auto& l : leads)
          if (l && *l == cand) taken = true;
        if (taken) continue;
        Expr co = diff_partial(rows[i], cand);
        if (is_zero(co) || contains(co, cand)) continue;
        if (co.is_number()) {
          if (!constant) constant = cand;
        } else if (!any) {
          any = cand;
        }
      }
    }
    if (constant)
      leads.push_back(constant);
    else if (any)
      leads.push_back(any);
    else
      leads.push_back(std::nullopt);
  }
  return DiffSystem(sys.ctx(), rows, leads);
}

namespace {

long binom(long n, long k) {
  long r = 1;
  for (long i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Sub-multisets N of M with multiplicity C(M, N).
std::vector<std::pair<MultiIndex, long>> sub_multisets(const MultiIndex& M) {
  std::map<int, int> counts;
  for (int j : M.dirs()) ++counts[j];
  std::vector<std::pair<MultiIndex, long>> out{{MultiIndex(), 1}};
  for (const auto& [j, m] : counts) {
    std::vector<std::pair<MultiIndex, long>> next;
    for (const auto& [N, c] : out)
      for (int k = 0; k <= m; ++k) {
        std::vector<int> d = N.dirs();
        d.insert(d.end(), static_cast<std::size_t>(k), j);
        next.emplace_back(MultiIndex(d), c * binom(m, k));
      }
    out = std::move(next);
  }
  return out;
}

}  // namespace

Decomposition decompose_on_ideal(const Expr& e, const DiffSystem& sys) {
  const JetContext& ctx = sys.ctx();
  Decomposition d;
  Expr cur = normalize(e);
  int guard = 0;
  for (;;) {
    std::optional<Expr> P;
    std::pair<int, MultiIndex> where;
    for (const auto& j : collect_jets(cur)) {
      auto p = sys.principal(j);
      if (!p) continue;
      if (!P || jet_order(j) > jet_order(*P) || (jet_order(j) == jet_order(*P) && compare(j, *P) > 0)) {
        P = j;
        where = *p;
      }
    }
    if (!P) break;
    if (++guard > 400) throw Error("decomposition did not terminate");
    const auto& [i, M] = where;
    Expr A = sys.prolonged_rhs(i, M);
    std::vector<Expr> ek;
    try {
      ek = poly_coefficients(cur, *P);
    } catch (const UnsupportedForm&) {
      throw UnsupportedForm("non-polynomial dependence on " + to_string(*P));
    }
    Expr next, H;
    for (std::size_t k = 0; k < ek.size(); ++k) {
      if (ek[k].is_zero_number()) continue;
      next = next + ek[k] * Expr::pow(A, static_cast<long>(k));
      if (k == 0) continue;
      Expr inner;
      for (std::size_t j = 0; j < k; ++j)
        inner = inner + Expr::pow(*P, static_cast<long>(k - 1 - j)) * Expr::pow(A, static_cast<long>(j));
      H = H + ek[k] * inner;
    }
    H = normalize(H);
    Expr inv_c = normalize(Expr(1) / sys.equations()[static_cast<std::size_t>(i)].coeff);
    for (const auto& [N, mult] : sub_multisets(M)) {
      Expr dc = total_derivative(inv_c, M.minus(N), ctx);
      if (is_zero(dc)) continue;
      auto key = std::make_pair(i, N);
      Expr add = H * dc * Expr(mult);
      auto it = d.gamma.find(key);
      if (it == d.gamma.end())
        d.gamma.emplace(key, normalize(add));
      else
        it->second = normalize(it->second + add);
    }
    cur = normalize(next);
  }
  std::erase_if(d.gamma, [](const auto& kv) { return is_zero(kv.second); });
  d.residual = cur;
  return d;
}

Expr reassemble(const Decomposition& d, const DiffSystem& sys) {
  Expr acc = d.residual;
  for (const auto& [key, g] : d.gamma)
    acc = acc + g * total_derivative(sys[static_cast<std::size_t>(key.first)], key.second, sys.ctx());
  return normalize(acc);
}

// ---------------------------------------------------------------- matrices

Expr determinant(const std::vector<std::vector<Expr>>& m) {
  std::size_t n = m.size();
  if (n == 0) return Expr(1);
  if (n == 1) return normalize(m[0][0]);
  if (n == 2) return normalize(m[0][0] * m[1][1] - m[0][1] * m[1][0]);
  Expr acc;
  for (std::size_t c = 0; c < n; ++c) {
    if (is_zero(m[0][c])) continue;
    std::vector<std::vector<Expr>> minor;
    for (std::size_t r = 1; r < n; ++r) {
      std::vector<Expr> row;
      for (std::size_t k = 0; k < n; ++k)
        if (k != c) row.push_back(m[r][k]);
      minor.push_back(row);
    }
    Expr t = m[0][c] * determinant(minor);
    acc = c % 2 ? acc - t : acc + t;
  }
  return normalize(acc);
}

std::vector<std::vector<Expr>> inverse(const std::vector<std::vector<Expr>>& m) {
  std::size_t n = m.size();
  std::vector<std::vector<Expr>> a = m;
  std::vector<std::vector<Expr>> inv(n, std::vector<Expr>(n));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = Expr(1);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    while (p < n && is_zero(a[p][c])) ++p;
    if (p == n) throw SingularJacobian("matrix is singular");
    std::swap(a[p], a[c]);
    std::swap(inv[p], inv[c]);
    Expr piv = a[c][c];
    for (std::size_t k = 0; k < n; ++k) {
      a[c][k] = normalize(a[c][k] / piv);
      inv[c][k] = normalize(inv[c][k] / piv);
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || is_zero(a[r][c])) continue;
      Expr f = a[r][c];
      for (std::size_t k = 0; k < n; ++k) {
        a[r][k] = normalize(a[r][k] - f * a[c][k]);
        inv[r][k] = normalize(inv[r][k] - f * inv[c][k]);
      }
    }
  }
  return inv;
}

// ---------------------------------------------------------------- point maps

namespace {

ExprMap source_to_target(const PointMap& T, const JetContext& source) {
  ExprMap rules;
  for (std::size_t i = 0; i < source.indep.size(); ++i) rules.emplace(source.x(static_cast<int>(i)), T.inverse_x.at(i));
  for (std::size_t a = 0; a < source.deps.size(); ++a) rules.emplace(source.u(static_cast<int>(a)), T.inverse_u.at(a));
  return rules;
}

ExprMap target_to_source(const PointMap& T) {
  ExprMap rules;
  for (std::size_t i = 0; i < T.target.indep.size(); ++i)
    rules.emplace(T.target.x(static_cast<int>(i)), T.forward_x.at(i));
  for (std::size_t a = 0; a < T.target.deps.size(); ++a)
    rules.emplace(T.target.u(static_cast<int>(a)), T.forward_u.at(a));
  return rules;
}

}  // namespace

bool check_inverse(const PointMap& T, const JetContext& source) {
  std::set<std::string> pos = source.positive;
  pos.insert(T.target.positive.begin(), T.target.positive.end());
  PositiveScope scope(pos);
  ExprMap s2t = source_to_target(T, source);
  for (std::size_t i = 0; i < T.target.indep.size(); ++i)
    if (!is_zero(substitute(T.forward_x[i], s2t) - T.target.x(static_cast<int>(i)))) return false;
  for (std::size_t a = 0; a < T.target.deps.size(); ++a)
    if (!is_zero(substitute(T.forward_u[a], s2t) - T.target.u(static_cast<int>(a)))) return false;
  ExprMap t2s = target_to_source(T);
  for (std::size_t i = 0; i < source.indep.size(); ++i)
    if (!is_zero(substitute(T.inverse_x[i], t2s) - source.x(static_cast<int>(i)))) return false;
  for (std::size_t a = 0; a < source.deps.size(); ++a)
    if (!is_zero(substitute(T.inverse_u[a], t2s) - source.u(static_cast<int>(a)))) return false;
  return true;
}

Expr jacobian_det(const PointMap& T, const JetContext& source) {
  std::vector<Expr> comps = T.forward_x;
  comps.insert(comps.end(), T.forward_u.begin(), T.forward_u.end());
  std::vector<Expr> vars;
  for (std::size_t i = 0; i < source.indep.size(); ++i) vars.push_back(source.x(static_cast<int>(i)));
  for (std::size_t a = 0; a < source.deps.size(); ++a) vars.push_back(source.u(static_cast<int>(a)));
  std::vector<std::vector<Expr>> m;
  for (const auto& c : comps) {
    std::vector<Expr> row;
    for (const auto& v : vars) row.push_back(diff_partial(c, v));
    m.push_back(row);
  }
  return determinant(m);
}

std::vector<Expr> transform_exprs(const std::vector<Expr>& exprs, const PointMap& T, const JetContext& source) {
  const JetContext& tgt = T.target;
  std::size_t p = source.indep.size();
  std::vector<std::vector<Expr>> M(tgt.indep.size(), std::vector<Expr>(p));
  for (std::size_t j = 0; j < tgt.indep.size(); ++j)
    for (std::size_t i = 0; i < p; ++i) M[j][i] = total_derivative(T.inverse_x.at(i), static_cast<int>(j), tgt);
  if (is_zero(determinant(M))) throw SingularJacobian("total Jacobian of the independent variables vanishes");
  auto Minv = inverse(M);
  std::map<std::pair<int, MultiIndex>, Expr> memo;
  std::function<Expr(int, const MultiIndex&)> E = [&](int a, const MultiIndex& J) -> Expr {
    auto key = std::make_pair(a, J);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    Expr r;
    if (J.empty()) {
      r = normalize(T.inverse_u.at(static_cast<std::size_t>(a)));
    } else {
      int i = J.dirs().back();
      std::vector<int> rest(J.dirs().begin(), J.dirs().end() - 1);
      Expr prev = E(a, MultiIndex(rest));
      Expr acc;
      for (std::size_t j = 0; j < tgt.indep.size(); ++j)
        acc = acc + Minv[static_cast<std::size_t>(i)][j] * total_derivative(prev, static_cast<int>(j), tgt);
      r = normalize(acc);
    }
    memo.emplace(key, r);
    return r;
  };
  std::set<std::string> pos = source.positive;
  pos.insert(tgt.positive.begin(), tgt.positive.end());
  std::vector<Expr> out;
  for (const auto& e : exprs) {
    ExprMap rules;
    for (std::size_t i = 0; i < p; ++i) rules.emplace(source.x(static_cast<int>(i)), T.inverse_x[i]);
    for (const auto& j : collect_jets(e)) {
      int a = source.dep_index(j.name());
      if (a >= 0) rules.emplace(j, E(a, source.index_of(j)));
    }
    Expr sub = substitute(e, rules);
    PositiveScope scope(pos);
    out.push_back(normalize(sub));
  }
  return out;
}

DiffSystem transform_system(const DiffSystem& sys, const PointMap& T) {
  std::vector<Expr> rows = transform_exprs(sys.exprs(), T, sys.ctx());
  JetContext tgt = T.target;
  fit_max_order(tgt, rows);
  return DiffSystem(tgt, rows);
}

}  // namespace subsym
