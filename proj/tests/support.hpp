#pragma once

#include <cmath>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "subsym/expr.hpp"
#include "subsym/jet.hpp"
#include "subsym/normalize.hpp"

namespace testkit {

using subsym::Expr;
using subsym::Kind;

// Floating-point evaluation, kept independent of the normalizer.
struct Point {
  std::map<std::string, double> at;  // symbols and printed jets

  double operator()(const Expr& e) const { return eval(e); }

  double eval(const Expr& e) const {
    switch (e.kind()) {
      case Kind::Number:
        return e.value().get_d();
      case Kind::Symbol:
      case Kind::Jet: {
        auto it = at.find(subsym::to_string(e));
        if (it == at.end()) throw std::runtime_error("no value for " + subsym::to_string(e));
        return it->second;
      }
      case Kind::Add: {
        double s = 0;
        for (const Expr& a : e.args()) s += eval(a);
        return s;
      }
      case Kind::Mul: {
        double p = 1;
        for (const Expr& a : e.args()) p *= eval(a);
        return p;
      }
      case Kind::Pow:
        return std::pow(eval(e.args()[0]), e.value().get_d());
      case Kind::Func: {
        double a = eval(e.args()[0]);
        switch (e.fn()) {
          case subsym::Fn::Sin: return std::sin(a);
          case subsym::Fn::Cos: return std::cos(a);
          case subsym::Fn::Tan: return std::tan(a);
          case subsym::Fn::Cot: return 1.0 / std::tan(a);
          case subsym::Fn::Exp: return std::exp(a);
          case subsym::Fn::Ln: return std::log(a);
          case subsym::Fn::Root: return std::pow(a, 1.0 / e.degree());
          case subsym::Fn::Arctan: return std::atan2(eval(e.args()[1]), a);
        }
        break;
      }
      default:
        break;
    }
    throw std::runtime_error("cannot evaluate " + subsym::to_string(e));
  }
};

inline bool close(double a, double b, double tol = 1e-7) {
  return std::fabs(a - b) <= tol * (1.0 + std::fabs(a) + std::fabs(b));
}

class Gen {
 public:
  explicit Gen(unsigned seed) : rng_(seed) {}

  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng_); }
  template <class T>
  const T& pick(const std::vector<T>& v) { return v[static_cast<std::size_t>(integer(0, static_cast<int>(v.size()) - 1))]; }

  subsym::Rational rational() {
    int n = integer(-5, 5);
    int d = integer(1, 4);
    subsym::Rational q(n, d);
    q.canonicalize();
    return q;
  }

  // Jets of order up to max_order in the given context.
  Expr jet(const subsym::JetContext& ctx, int max_order) {
    int a = integer(0, static_cast<int>(ctx.deps.size()) - 1);
    int k = integer(0, max_order);
    std::vector<int> d;
    for (int i = 0; i < k; ++i) d.push_back(integer(0, static_cast<int>(ctx.indep.size()) - 1));
    return ctx.u(a, subsym::MultiIndex(d));
  }

  Expr leaf(const subsym::JetContext& ctx, int max_order) {
    switch (integer(0, 3)) {
      case 0: return Expr(rational());
      case 1: return ctx.x(integer(0, static_cast<int>(ctx.indep.size()) - 1));
      default: return jet(ctx, max_order);
    }
  }

  // Polynomial-ish differential function with occasional sin/cos/exp kernels.
  Expr expr(const subsym::JetContext& ctx, int depth, int max_order = 2, bool transcendental = true) {
    if (depth <= 0) return leaf(ctx, max_order);
    switch (integer(0, transcendental ? 5 : 3)) {
      case 0:
      case 1:
        return expr(ctx, depth - 1, max_order, transcendental) + expr(ctx, depth - 1, max_order, transcendental);
      case 2:
        return expr(ctx, depth - 1, max_order, transcendental) * expr(ctx, depth - 1, max_order, transcendental);
      case 3:
        return subsym::pow(expr(ctx, depth - 1, max_order, transcendental), integer(2, 3));
      case 4:
        return coin() ? subsym::sin(leaf(ctx, max_order)) : subsym::cos(leaf(ctx, max_order));
      default:
        return subsym::exp(leaf(ctx, 1) * Expr(subsym::Rational(1, 2)));
    }
  }

  // Random values for every symbol and jet of the context up to `order`.
  Point point(const subsym::JetContext& ctx, int order) {
    Point p;
    for (const auto& x : ctx.indep) p.at[x] = real(0.3, 1.7);
    for (const auto& c : ctx.params) p.at[c] = real(0.3, 1.7);
    std::vector<subsym::MultiIndex> level{subsym::MultiIndex{}}, all{subsym::MultiIndex{}};
    for (int k = 0; k < order; ++k) {
      std::vector<subsym::MultiIndex> next;
      for (const auto& J : level)
        for (int j = 0; j < static_cast<int>(ctx.indep.size()); ++j)
          if (J.empty() || j >= J.dirs().back()) next.push_back(J.plus(j));
      all.insert(all.end(), next.begin(), next.end());
      level = next;
    }
    for (int a = 0; a < static_cast<int>(ctx.deps.size()); ++a)
      for (const auto& J : all) p.at[subsym::to_string(ctx.u(a, J))] = real(-1.2, 1.2);
    return p;
  }

  std::mt19937& engine() { return rng_; }

 private:
  std::mt19937 rng_;
};

inline subsym::JetContext plane_context() {
  subsym::JetContext c;
  c.indep = {"x", "y"};
  c.deps = {"u", "v"};
  return c;
}

}  // namespace testkit
