#include "subsym/jet.hpp"

#include <algorithm>
#include <cstdlib>

#include "subsym/errors.hpp"
#include "subsym/normalize.hpp"

namespace subsym {

MultiIndex::MultiIndex(std::vector<int> dirs) : d_(std::move(dirs)) {
  std::sort(d_.begin(), d_.end());
}

MultiIndex MultiIndex::plus(int j) const {
  std::vector<int> d = d_;
  d.insert(std::upper_bound(d.begin(), d.end(), j), j);
  MultiIndex m;
  m.d_ = std::move(d);
  return m;
}

MultiIndex MultiIndex::plus(const MultiIndex& o) const {
  std::vector<int> d = d_;
  d.insert(d.end(), o.d_.begin(), o.d_.end());
  return MultiIndex(std::move(d));
}

MultiIndex MultiIndex::minus(const MultiIndex& o) const {
  std::vector<int> out;
  std::set_difference(d_.begin(), d_.end(), o.d_.begin(), o.d_.end(), std::back_inserter(out));
  MultiIndex m;
  m.d_ = std::move(out);
  return m;
}

bool MultiIndex::contains(const MultiIndex& o) const {
  return std::includes(d_.begin(), d_.end(), o.d_.begin(), o.d_.end());
}

int MultiIndex::count(int j) const {
  return static_cast<int>(std::count(d_.begin(), d_.end(), j));
}

SymbolTable JetContext::table() const {
  SymbolTable t;
  t.indep = indep;
  t.deps = deps;
  t.params = params;
  t.opaque = opaque;
  t.extra = positive;
  t.defs = defs;
  return t;
}

Expr JetContext::parse(std::string_view text) const { return subsym::parse(text, table()); }

int JetContext::indep_index(const std::string& n) const {
  auto it = std::find(indep.begin(), indep.end(), n);
  return it == indep.end() ? -1 : static_cast<int>(it - indep.begin());
}

int JetContext::dep_index(const std::string& n) const {
  auto it = std::find(deps.begin(), deps.end(), n);
  return it == deps.end() ? -1 : static_cast<int>(it - deps.begin());
}

Expr JetContext::u(int a, const MultiIndex& J) const {
  std::vector<std::string> d;
  for (int j : J.dirs()) d.push_back(indep.at(static_cast<std::size_t>(j)));
  return Expr::jet(deps.at(static_cast<std::size_t>(a)), d);
}

MultiIndex JetContext::index_of(const Expr& jet) const {
  std::vector<int> d;
  for (const auto& n : jet.dirs()) {
    int j = indep_index(n);
    if (j < 0) throw Error("jet direction '" + n + "' is not an independent variable");
    d.push_back(j);
  }
  return MultiIndex(std::move(d));
}

std::string JetContext::describe(const MultiIndex& J) const {
  std::string s;
  for (int j : J.dirs()) s += indep.at(static_cast<std::size_t>(j));
  return s;
}

int jet_order(const Expr& jet) { return static_cast<int>(jet.dirs().size()); }

int max_jet_order(const Expr& e) {
  int m = 0;
  visit(e, [&](const Expr& x) {
    if (x.kind() == Kind::Jet) m = std::max(m, jet_order(x));
  });
  return m;
}

void fit_max_order(JetContext& ctx, const std::vector<Expr>& exprs) {
  if (const char* env = std::getenv("SUBSYM_MAX_ORDER")) {
    ctx.max_order = std::atoi(env);
    return;
  }
  int m = 0;
  for (const auto& e : exprs) m = std::max(m, max_jet_order(e));
  ctx.max_order = m + 4;
}

Expr total_derivative(const Expr& e, int j, const JetContext& ctx) {
  const std::string& xj = ctx.indep.at(static_cast<std::size_t>(j));
  Expr raw = derive(e, [&](const Expr& leaf) -> Expr {
    if (leaf.kind() == Kind::Symbol) return leaf.name() == xj ? Expr(1) : Expr();
    std::vector<std::string> d = leaf.dirs();
    d.push_back(xj);
    if (static_cast<int>(d.size()) > ctx.max_order) {
      if (ctx.pinned)
        throw TruncationOverflow("jet order " + std::to_string(d.size()) + " exceeds pinned maximum " +
                                 std::to_string(ctx.max_order));
      ctx.max_order = static_cast<int>(d.size());
    }
    return Expr::jet(leaf.name(), d);
  });
  return normalize(raw);
}

Expr total_derivative(const Expr& e, const MultiIndex& J, const JetContext& ctx) {
  Expr out = e;
  for (int j : J.dirs()) out = total_derivative(out, j, ctx);
  return out;
}

std::vector<Expr> adjoint_apply(const OperatorCoeffs& gamma, int n_equations, const JetContext& ctx) {
  std::vector<Expr> out(static_cast<std::size_t>(n_equations));
  for (const auto& [key, g] : gamma) {
    const auto& [i, I] = key;
    Expr t = total_derivative(g, I, ctx);
    if (I.order() % 2) t = -t;
    out.at(static_cast<std::size_t>(i)) = out[static_cast<std::size_t>(i)] + t;
  }
  for (auto& e : out) e = normalize(e);
  return out;
}

}  // namespace subsym
