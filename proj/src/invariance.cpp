#include "subsym/invariance.hpp"

#include <algorithm>

#include "subsym/errors.hpp"
#include "subsym/normalize.hpp"

namespace subsym {

std::string classification_name(Classification c) {
  switch (c) {
    case Classification::Symmetry: return "Symmetry";
    case Classification::SubsystemSymmetry: return "SubsystemSymmetry";
    case Classification::OtherSubsymmetry: return "OtherSubsymmetry";
    case Classification::NotSubsymmetry: return "NotSubsymmetry";
  }
  return "?";
}

namespace {

void add_condition(std::vector<Expr>& out, const Expr& c) {
  if (c.is_number()) return;
  for (const auto& o : out)
    if (o == c) return;
  out.push_back(c);
}

InvarianceReport run_rows(const EvoField& f, const std::vector<Expr>& rows, const DiffSystem& sys) {
  InvarianceReport r;
  r.holds = true;
  for (const auto& q : sys.equations()) add_condition(r.side_conditions, normalize(q.coeff));
  for (const auto& row : rows) {
    Expr applied = apply(f, row, sys.ctx());
    Decomposition d;
    try {
      d = decompose_on_ideal(applied, sys);
    } catch (const UnsupportedForm& ex) {
      d.gamma.clear();
      d.residual = restrict(applied, sys);
      r.note = ex.what();
    }
    for (const auto& c : side_conditions(applied)) add_condition(r.side_conditions, c);
    if (!is_zero(d.residual)) r.holds = false;
    r.residuals.push_back(d.residual);
    r.decompositions.push_back(std::move(d));
  }
  return r;
}

}  // namespace

InvarianceReport check_symmetry(const EvoField& f, const DiffSystem& sys) {
  auto r = run_rows(f, sys.exprs(), sys);
  if (r.holds) r.tag = Classification::Symmetry;
  return r;
}

InvarianceReport check_subsymmetry(const EvoField& f, const SubSystem& ss) {
  return run_rows(f, eval_subsystem(ss), *ss.parent);
}

InvarianceReport check_subsystem_symmetry(const EvoField& f, const SubSystem& ss) {
  DiffSystem sub = subsystem_as_system(ss);
  auto r = run_rows(f, sub.exprs(), sub);
  if (r.holds) r.tag = Classification::SubsystemSymmetry;
  return r;
}

Classification classify(const EvoField& f, const SubSystem& ss) {
  if (check_symmetry(f, *ss.parent).holds) return Classification::Symmetry;
  if (check_subsystem_symmetry(f, ss).holds) return Classification::SubsystemSymmetry;
  if (check_subsymmetry(f, ss).holds) return Classification::OtherSubsymmetry;
  return Classification::NotSubsymmetry;
}

// ---------------------------------------------------------------- determining equations

DeterminingSystem split_condition(const Expr& residual, const DeterminingOptions& opt) {
  DeterminingSystem ds;
  Expr r = numerator(normalize(residual));
  if (r.is_zero_number()) return ds;
  ExprSet keep;
  visit(r, [&](const Expr& k) {
    if (k.kind() != Kind::Opaque) return;
    if (!opt.unknowns.count(k.name()) && !opt.arbitrary.count(k.name())) return;
    for (const auto& a : k.args()) keep.insert(a);
  });
  auto is_var = [&](const Expr& k) {
    if (k.kind() == Kind::Jet) return !keep.count(k);
    if (k.kind() == Kind::Opaque) return opt.arbitrary.count(k.name()) > 0;
    return false;
  };
  CoefficientMap cm = split_coefficients(r, is_var, true);
  ExprSet seen;
  for (const auto& [pp, c] : cm) {
    for (const auto& [k, e] : pp) {
      (void)e;
      if (seen.insert(k).second) ds.split.push_back(k);
    }
    Expr n = normalize(c);
    if (n.is_zero_number()) continue;
    bool dup = false;
    for (const auto& q : ds.equations)
      if (is_zero(q - n) || is_zero(q + n)) dup = true;
    if (!dup) ds.equations.push_back(n);
  }
  return ds;
}

Expr restrict_arguments(const Expr& e, const std::set<std::string>& names, const JetContext& ctx) {
  ExprMap rules;
  for (const auto& name : names) {
    for (const auto& node : collect_opaque(e, name)) {
      std::vector<int> keep_idx;
      std::vector<Expr> args;
      for (std::size_t i = 0; i < node.args().size(); ++i) {
        const Expr& a = node.args()[i];
        if (a.kind() == Kind::Symbol && ctx.indep_index(a.name()) >= 0) {
          keep_idx.push_back(static_cast<int>(i));
          args.push_back(a);
        }
      }
      std::vector<int> slots;
      bool dropped = false;
      for (int s : node.slots()) {
        auto it = std::find(keep_idx.begin(), keep_idx.end(), s);
        if (it == keep_idx.end()) {
          dropped = true;
          break;
        }
        slots.push_back(static_cast<int>(it - keep_idx.begin()));
      }
      rules.emplace(node, dropped ? Expr() : Expr::opaque(name, slots, args));
    }
  }
  return normalize(substitute(e, rules));
}

Expr substitute_function(const Expr& e, const std::string& name, const std::vector<Expr>& params, const Expr& body) {
  Expr cur = e;
  for (int round = 0; round < 8; ++round) {
    ExprSet nodes = collect_opaque(cur, name);
    if (nodes.empty()) return normalize(cur);
    ExprMap rules;
    for (const auto& node : nodes) {
      if (node.args().size() != params.size())
        throw Error("function " + name + " applied to " + std::to_string(node.args().size()) + " arguments, expected " +
                    std::to_string(params.size()));
      Expr d = body;
      for (int s : node.slots()) d = diff_partial(d, params.at(static_cast<std::size_t>(s)));
      ExprMap at;
      for (std::size_t i = 0; i < params.size(); ++i) at.emplace(params[i], node.args()[i]);
      rules.emplace(node, substitute(d, at));
    }
    cur = substitute(cur, rules);
  }
  throw Error("nested substitution of " + name + " did not terminate");
}

// ---------------------------------------------------------------- linear solving

LinearSolution solve_linear_params(const std::vector<Expr>& equations, const std::vector<Expr>& unknowns) {
  LinearSolution sol;
  ExprSet unk(unknowns.begin(), unknowns.end());
  auto has_unknown = [&](const Expr& e) {
    for (const auto& u : unknowns)
      if (contains(e, u)) return true;
    return false;
  };
  std::vector<Expr> pending;
  for (const auto& q : equations) pending.push_back(normalize(q));
  bool progress = true;
  while (progress) {
    progress = false;
    std::vector<Expr> next;
    for (std::size_t idx = 0; idx < pending.size(); ++idx) {
      Expr e = normalize(substitute(pending[idx], sol.values));
      if (is_zero(e)) continue;
      if (!has_unknown(e)) {
        sol.consistent = false;
        sol.certificate.push_back(e);
        continue;
      }
      if (progress) {
        next.push_back(e);
        continue;
      }
      CoefficientMap cm;
      try {
        cm = split_coefficients(e, [&](const Expr& k) { return unk.count(k) > 0; }, true);
      } catch (const UnsupportedForm&) {
        next.push_back(e);
        continue;
      }
      bool linear = true;
      for (const auto& [pp, c] : cm) {
        int deg = 0;
        for (const auto& [k, p] : pp) deg += p;
        if (deg > 1) linear = false;
      }
      if (!linear) {
        next.push_back(e);
        continue;
      }
      Expr constant;
      std::optional<Expr> pivot;
      Expr pivot_coeff;
      Expr rest;
      for (const auto& [pp, c] : cm) {
        if (pp.empty()) {
          constant = constant + c;
        } else if (!pivot && !is_zero(c)) {
          pivot = pp[0].first;
          pivot_coeff = c;
        } else {
          rest = rest + c * pp[0].first;
        }
      }
      if (!pivot) {
        next.push_back(e);
        continue;
      }
      Expr value = normalize(-(constant + rest) / pivot_coeff);
      ExprMap one{{*pivot, value}};
      for (auto& [k, v] : sol.values) v = normalize(substitute(v, one));
      sol.values.emplace(*pivot, value);
      progress = true;
    }
    pending = std::move(next);
  }
  for (const auto& e : pending) {
    Expr r = normalize(substitute(e, sol.values));
    if (is_zero(r)) continue;
    if (has_unknown(r)) throw NonlinearParameter("nonlinear occurrence of an unknown in " + to_string(r));
    sol.consistent = false;
    sol.certificate.push_back(r);
  }
  return sol;
}

// ---------------------------------------------------------------- determining system

DeterminingSystem determining_equations(const EvoField& f, const SubSystem& ss, const DeterminingOptions& opt) {
  const JetContext& ctx = ss.parent->ctx();
  EvoField g = f;
  if (opt.arbitrary_on_base)
    for (auto& a : g.alpha) a = restrict_arguments(a, opt.arbitrary, ctx);
  std::optional<DiffSystem> own;
  if (opt.condition == Condition::SubsystemSymmetry) own = subsystem_as_system(ss);
  const DiffSystem& sys = own ? *own : *ss.parent;
  DeterminingSystem ds;
  ExprSet seen;
  for (const auto& row : eval_subsystem(ss)) {
    Expr res = restrict(apply(g, row, sys.ctx()), sys);
    DeterminingSystem part = split_condition(res, opt);
    for (const auto& k : part.split)
      if (seen.insert(k).second) ds.split.push_back(k);
    for (const auto& q : part.equations) {
      bool dup = false;
      for (const auto& o : ds.equations)
        if (is_zero(o - q) || is_zero(o + q)) dup = true;
      if (!dup) ds.equations.push_back(q);
    }
  }
  return ds;
}

}  // namespace subsym
