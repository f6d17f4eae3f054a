#include "subsym/expr.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>

namespace subsym {

namespace {

constexpr std::size_t kFnvOffset = 1469598103934665603ULL;
constexpr std::size_t kFnvPrime = 1099511628211ULL;

std::size_t mix(std::size_t h, std::size_t v) {
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (8 * i)) & 0xff;
    h *= kFnvPrime;
  }
  return h;
}

std::size_t mix_str(std::size_t h, const std::string& s) {
  for (unsigned char c : s) {
    h ^= c;
    h *= kFnvPrime;
  }
  return mix(h, s.size());
}

void rehash(Node& n) {
  std::size_t h = mix(kFnvOffset, static_cast<std::size_t>(n.kind));
  switch (n.kind) {
    case Kind::Number:
    case Kind::Pow:
      h = mix_str(h, n.value.get_str());
      break;
    case Kind::Func:
      h = mix(h, static_cast<std::size_t>(n.fn));
      h = mix(h, static_cast<std::size_t>(n.degree));
      break;
    default:
      break;
  }
  h = mix_str(h, n.name);
  for (const auto& d : n.dirs) h = mix_str(h, d);
  for (int s : n.slots) h = mix(h, static_cast<std::size_t>(s) + 7);
  for (const auto& a : n.args) h = mix(h, a.hash());
  n.hash = h;
}

}  // namespace

const char* fn_name(Fn fn) {
  switch (fn) {
    case Fn::Sin: return "sin";
    case Fn::Cos: return "cos";
    case Fn::Tan: return "tan";
    case Fn::Cot: return "cot";
    case Fn::Exp: return "exp";
    case Fn::Ln: return "ln";
    case Fn::Root: return "root";
    case Fn::Arctan: return "arctan";
  }
  return "?";
}

static std::shared_ptr<const Node> finish(Node n) {
  rehash(n);
  return std::make_shared<const Node>(std::move(n));
}

static const std::shared_ptr<const Node>& zero_node() {
  static const std::shared_ptr<const Node> z = [] {
    Node n;
    n.kind = Kind::Number;
    n.value = 0;
    n.canonical = true;
    return finish(std::move(n));
  }();
  return z;
}

Expr::Expr() : p_(zero_node()) {}
Expr::Expr(int v) : Expr(number(Rational(v))) {}
Expr::Expr(long v) : Expr(number(Rational(v))) {}
Expr::Expr(const Rational& q) : Expr(number(q)) {}

Expr Expr::number(const Rational& q) {
  if (q == 0) return Expr(zero_node());
  Node n;
  n.kind = Kind::Number;
  n.value = q;
  n.value.canonicalize();
  n.canonical = true;
  return Expr(finish(std::move(n)));
}

Expr Expr::symbol(std::string name) {
  Node n;
  n.kind = Kind::Symbol;
  n.name = std::move(name);
  n.canonical = true;
  return Expr(finish(std::move(n)));
}

Expr Expr::jet(std::string var, std::vector<std::string> dirs) {
  Node n;
  n.kind = Kind::Jet;
  n.name = std::move(var);
  std::sort(dirs.begin(), dirs.end());
  n.dirs = std::move(dirs);
  n.canonical = true;
  return Expr(finish(std::move(n)));
}

Expr Expr::add(std::vector<Expr> terms) {
  std::vector<Expr> out;
  Rational c = 0;
  std::vector<Expr> stack(terms.rbegin(), terms.rend());
  while (!stack.empty()) {
    Expr t = std::move(stack.back());
    stack.pop_back();
    if (t.kind() == Kind::Add) {
      for (auto it = t.args().rbegin(); it != t.args().rend(); ++it) stack.push_back(*it);
    } else if (t.is_number()) {
      c += t.value();
    } else {
      out.push_back(std::move(t));
    }
  }
  if (c != 0) out.push_back(number(c));
  if (out.empty()) return Expr();
  if (out.size() == 1) return out[0];
  std::sort(out.begin(), out.end(), ExprLess{});
  Node n;
  n.kind = Kind::Add;
  n.args = std::move(out);
  return Expr(finish(std::move(n)));
}

Expr Expr::mul(std::vector<Expr> factors) {
  std::vector<Expr> out;
  Rational c = 1;
  std::vector<Expr> stack(factors.rbegin(), factors.rend());
  while (!stack.empty()) {
    Expr t = std::move(stack.back());
    stack.pop_back();
    if (t.kind() == Kind::Mul) {
      for (auto it = t.args().rbegin(); it != t.args().rend(); ++it) stack.push_back(*it);
    } else if (t.is_number()) {
      c *= t.value();
    } else {
      out.push_back(std::move(t));
    }
  }
  if (c == 0) return Expr();
  if (c != 1) out.push_back(number(c));
  if (out.empty()) return number(c);
  if (out.size() == 1) return out[0];
  std::sort(out.begin(), out.end(), ExprLess{});
  Node n;
  n.kind = Kind::Mul;
  n.args = std::move(out);
  return Expr(finish(std::move(n)));
}

static Rational rational_pow(const Rational& b, long e) {
  mpz_class num, den;
  unsigned long k = static_cast<unsigned long>(e < 0 ? -e : e);
  mpz_pow_ui(num.get_mpz_t(), b.get_num_mpz_t(), k);
  mpz_pow_ui(den.get_mpz_t(), b.get_den_mpz_t(), k);
  Rational r(num, den);
  r.canonicalize();
  if (e < 0) r = 1 / r;
  return r;
}

Expr Expr::pow(Expr base, const Rational& exponent) {
  if (exponent == 0) return Expr(1);
  if (exponent == 1) return base;
  if (base.is_number()) {
    if (exponent.get_den() == 1 && exponent.get_num().fits_slong_p() &&
        !(base.is_zero_number() && exponent < 0)) {
      return number(rational_pow(base.value(), exponent.get_num().get_si()));
    }
    if (base.is_one_number()) return Expr(1);
  }
  if (base.kind() == Kind::Pow && exponent.get_den() == 1) {
    return pow(base.args()[0], base.value() * exponent);
  }
  Node n;
  n.kind = Kind::Pow;
  n.value = exponent;
  n.args = {std::move(base)};
  return Expr(finish(std::move(n)));
}

Expr Expr::func(Fn fn, std::vector<Expr> args, int degree) {
  Node n;
  n.kind = Kind::Func;
  n.fn = fn;
  n.degree = fn == Fn::Root ? degree : 0;
  n.args = std::move(args);
  return Expr(finish(std::move(n)));
}

Expr Expr::opaque(std::string name, std::vector<int> slots, std::vector<Expr> args) {
  Node n;
  n.kind = Kind::Opaque;
  n.name = std::move(name);
  std::sort(slots.begin(), slots.end());
  n.slots = std::move(slots);
  n.args = std::move(args);
  return Expr(finish(std::move(n)));
}

Expr Expr::integral(Expr body, std::string var, Expr upper) {
  Node n;
  n.kind = Kind::Integral;
  n.name = std::move(var);
  n.args = {std::move(body), std::move(upper)};
  return Expr(finish(std::move(n)));
}

Kind Expr::kind() const { return p_->kind; }
std::size_t Expr::hash() const { return p_->hash; }
bool Expr::is_zero_number() const { return p_->kind == Kind::Number && p_->value == 0; }
bool Expr::is_one_number() const { return p_->kind == Kind::Number && p_->value == 1; }
const Rational& Expr::value() const { return p_->value; }
const std::string& Expr::name() const { return p_->name; }
const std::vector<std::string>& Expr::dirs() const { return p_->dirs; }
const std::vector<int>& Expr::slots() const { return p_->slots; }
const std::vector<Expr>& Expr::args() const { return p_->args; }
Fn Expr::fn() const { return p_->fn; }
int Expr::degree() const { return p_->degree; }
bool Expr::canonical() const { return p_->canonical; }

Expr make_canonical(Expr e) {
  if (e.p_->canonical) return e;
  Node n = *e.p_;
  n.canonical = true;
  return Expr(std::make_shared<const Node>(std::move(n)));
}

int compare(const Expr& a, const Expr& b) {
  if (a.same(b)) return 0;
  const Node& x = a.node();
  const Node& y = b.node();
  if (x.kind != y.kind) return x.kind < y.kind ? -1 : 1;
  switch (x.kind) {
    case Kind::Number: {
      int c = cmp(x.value, y.value);
      return c < 0 ? -1 : (c > 0 ? 1 : 0);
    }
    case Kind::Pow: {
      int c = compare(x.args[0], y.args[0]);
      if (c) return c;
      int d = cmp(x.value, y.value);
      return d < 0 ? -1 : (d > 0 ? 1 : 0);
    }
    case Kind::Func:
      if (x.fn != y.fn) return x.fn < y.fn ? -1 : 1;
      if (x.degree != y.degree) return x.degree < y.degree ? -1 : 1;
      break;
    default:
      break;
  }
  if (int c = x.name.compare(y.name)) return c < 0 ? -1 : 1;
  if (x.dirs.size() != y.dirs.size()) return x.dirs.size() < y.dirs.size() ? -1 : 1;
  for (std::size_t i = 0; i < x.dirs.size(); ++i)
    if (int c = x.dirs[i].compare(y.dirs[i])) return c < 0 ? -1 : 1;
  if (x.slots != y.slots) return x.slots < y.slots ? -1 : 1;
  if (x.args.size() != y.args.size()) return x.args.size() < y.args.size() ? -1 : 1;
  for (std::size_t i = 0; i < x.args.size(); ++i)
    if (int c = compare(x.args[i], y.args[i])) return c;
  return 0;
}

bool operator==(const Expr& a, const Expr& b) {
  if (a.same(b)) return true;
  if (a.hash() != b.hash()) return false;
  return compare(a, b) == 0;
}

bool ExprFastLess::operator()(const Expr& a, const Expr& b) const {
  if (a.hash() != b.hash()) return a.hash() < b.hash();
  return compare(a, b) < 0;
}

Expr operator+(const Expr& a, const Expr& b) { return Expr::add({a, b}); }
Expr operator-(const Expr& a, const Expr& b) { return Expr::add({a, -b}); }
Expr operator-(const Expr& a) { return Expr::mul({Expr(-1), a}); }
Expr operator*(const Expr& a, const Expr& b) { return Expr::mul({a, b}); }
Expr operator/(const Expr& a, const Expr& b) { return Expr::mul({a, Expr::pow(b, -1)}); }
Expr pow(const Expr& base, const Rational& exponent) { return Expr::pow(base, exponent); }

Expr sin(const Expr& a) { return Expr::func(Fn::Sin, {a}); }
Expr cos(const Expr& a) { return Expr::func(Fn::Cos, {a}); }
Expr tan(const Expr& a) { return Expr::func(Fn::Tan, {a}); }
Expr cot(const Expr& a) { return Expr::func(Fn::Cot, {a}); }
Expr exp(const Expr& a) { return Expr::func(Fn::Exp, {a}); }
Expr ln(const Expr& a) { return Expr::func(Fn::Ln, {a}); }
Expr sqrt(const Expr& a) { return Expr::func(Fn::Root, {a}, 2); }
Expr arctan(const Expr& x, const Expr& y) { return Expr::func(Fn::Arctan, {x, y}); }

// ---------------------------------------------------------------- printing

namespace {

enum Prec { kSum = 1, kProd = 2, kUnary = 3, kPow = 4, kAtom = 5 };

std::string rat_str(const Rational& q) {
  if (q.get_den() == 1) return q.get_num().get_str();
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

struct Printer {
  std::string jet(const Node& n) {
    if (n.dirs.empty()) return n.name;
    bool short_dirs = std::all_of(n.dirs.begin(), n.dirs.end(),
                                  [](const std::string& d) { return d.size() == 1; });
    if (short_dirs) {
      std::string s = n.name + "_";
      if (n.dirs.size() > 1) s += "{";
      for (const auto& d : n.dirs) s += d;
      if (n.dirs.size() > 1) s += "}";
      return s;
    }
    std::string s = "Diff(" + n.name;
    for (const auto& d : n.dirs) s += "," + d;
    return s + ")";
  }

  std::string args(const std::vector<Expr>& a) {
    std::string s;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (i) s += ", ";
      s += print(a[i], 0);
    }
    return s;
  }

  // Text of e, parenthesized if its precedence is below `ctx`.
  std::string print(const Expr& e, int ctx) {
    int p = kAtom;
    std::string s = body(e, p);
    if (p < ctx) return "(" + s + ")";
    return s;
  }

  std::string body(const Expr& e, int& p) {
    const Node& n = e.node();
    switch (n.kind) {
      case Kind::Number:
        if (n.value < 0) {
          p = kUnary;
          return "-" + print(Expr::number(-n.value), kPow);
        }
        if (n.value.get_den() != 1) {
          p = kProd;
          return rat_str(n.value);
        }
        return rat_str(n.value);
      case Kind::Symbol:
        return n.name;
      case Kind::Jet:
        return jet(n);
      case Kind::Add: {
        p = kSum;
        std::string s;
        for (std::size_t i = 0; i < n.args.size(); ++i) {
          auto [neg, mag] = split_sign(n.args[i]);
          if (i == 0) {
            s += neg ? "-" + print(mag, kProd) : print(mag, kSum);
          } else {
            s += neg ? " - " : " + ";
            s += print(mag, kProd);
          }
        }
        return s;
      }
      case Kind::Mul:
        return product(e, p);
      case Kind::Pow: {
        p = kPow;
        std::string b = print(n.args[0], kAtom);
        if (n.value.get_den() == 1 && n.value > 0) return b + "^" + rat_str(n.value);
        return b + "^(" + rat_str(n.value) + ")";
      }
      case Kind::Func:
        if (n.fn == Fn::Root) {
          if (n.degree == 2) return "sqrt(" + print(n.args[0], 0) + ")";
          p = kPow;
          return "(" + print(n.args[0], 0) + ")^(1/" + std::to_string(n.degree) + ")";
        }
        return std::string(fn_name(n.fn)) + "(" + args(n.args) + ")";
      case Kind::Opaque: {
        std::string s = n.name;
        if (!n.slots.empty()) {
          s += "'[";
          for (std::size_t i = 0; i < n.slots.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(n.slots[i] + 1);
          }
          s += "]";
        }
        return s + "(" + args(n.args) + ")";
      }
      case Kind::Integral:
        return "Int(" + print(n.args[0], 0) + ", " + n.name + ", " + print(n.args[1], 0) + ")";
    }
    return "?";
  }

  static std::pair<bool, Expr> split_sign(const Expr& t) {
    if (t.is_number() && t.value() < 0) return {true, Expr::number(-t.value())};
    if (t.kind() == Kind::Mul) {
      for (std::size_t i = 0; i < t.args().size(); ++i) {
        const Expr& f = t.args()[i];
        if (f.is_number() && f.value() < 0) {
          std::vector<Expr> rest = t.args();
          rest[i] = Expr::number(-f.value());
          return {true, Expr::mul(rest)};
        }
      }
    }
    return {false, t};
  }

  std::string product(const Expr& e, int& p) {
    p = kProd;
    Rational c = 1;
    std::vector<Expr> num, den;
    for (const auto& f : e.args()) {
      if (f.is_number()) {
        c *= f.value();
      } else if (f.kind() == Kind::Pow && f.value() < 0) {
        den.push_back(Expr::pow(f.args()[0], -f.value()));
      } else {
        num.push_back(f);
      }
    }
    std::string s;
    bool neg = c < 0;
    if (neg) c = -c;
    if (c.get_num() != 1 || num.empty()) s = c.get_num().get_str();
    for (const auto& f : num) {
      if (!s.empty()) s += "*";
      s += print(f, kPow);
    }
    mpz_class cd = c.get_den();
    if (cd != 1 || !den.empty()) {
      std::vector<std::string> parts;
      if (cd != 1) parts.push_back(cd.get_str());
      for (const auto& f : den) parts.push_back(print(f, kPow));
      for (const auto& d : parts) s += "/" + d;
    }
    if (neg) {
      p = kUnary;
      return "-" + s;
    }
    return s;
  }
};

}  // namespace

std::string to_string(const Expr& e) {
  Printer pr;
  return pr.print(e, 0);
}

std::ostream& operator<<(std::ostream& os, const Expr& e) { return os << to_string(e); }

// ---------------------------------------------------------------- traversal

void visit(const Expr& e, const std::function<void(const Expr&)>& fn) {
  fn(e);
  for (const auto& a : e.args()) visit(a, fn);
}

bool contains(const Expr& e, const Expr& needle) {
  if (e == needle) return true;
  for (const auto& a : e.args())
    if (contains(a, needle)) return true;
  return false;
}

bool contains_symbol(const Expr& e, const std::string& name) {
  if ((e.kind() == Kind::Symbol || e.kind() == Kind::Jet) && e.name() == name) return true;
  if (e.kind() == Kind::Integral && e.name() == name) return contains_symbol(e.args()[1], name);
  for (const auto& a : e.args())
    if (contains_symbol(a, name)) return true;
  return false;
}

ExprSet collect_jets(const Expr& e) {
  ExprSet out;
  visit(e, [&](const Expr& x) {
    if (x.kind() == Kind::Jet) out.insert(x);
  });
  return out;
}

ExprSet collect_opaque(const Expr& e, const std::string& name) {
  ExprSet out;
  visit(e, [&](const Expr& x) {
    if (x.kind() == Kind::Opaque && x.name() == name) out.insert(x);
  });
  return out;
}

namespace {

Expr rebuild(const Expr& e, std::vector<Expr> args) {
  const Node& n = e.node();
  switch (n.kind) {
    case Kind::Add: return Expr::add(std::move(args));
    case Kind::Mul: return Expr::mul(std::move(args));
    case Kind::Pow: return Expr::pow(args[0], n.value);
    case Kind::Func: return Expr::func(n.fn, std::move(args), n.degree);
    case Kind::Opaque: return Expr::opaque(n.name, n.slots, std::move(args));
    case Kind::Integral: return Expr::integral(args[0], n.name, args[1]);
    default: return e;
  }
}

struct Substituter {
  const ExprMap& rules;
  std::vector<std::string> bound;
  std::map<const Node*, Expr> memo;

  Expr run(const Expr& e) {
    if (bound.empty()) {
      auto m = memo.find(&e.node());
      if (m != memo.end()) return m->second;
    }
    Expr r = go(e);
    if (bound.empty()) memo.emplace(&e.node(), r);
    return r;
  }

  bool is_bound(const Expr& e) const {
    return (e.kind() == Kind::Symbol) &&
           std::find(bound.begin(), bound.end(), e.name()) != bound.end();
  }

  Expr go(const Expr& e) {
    if (!is_bound(e)) {
      auto it = rules.find(e);
      if (it != rules.end()) return it->second;
    }
    if (e.args().empty()) return e;
    if (e.kind() == Kind::Integral) {
      Expr upper = run(e.args()[1]);
      bound.push_back(e.name());
      Expr body = go(e.args()[0]);
      bound.pop_back();
      if (body.same(e.args()[0]) && upper.same(e.args()[1])) return e;
      return Expr::integral(body, e.name(), upper);
    }
    std::vector<Expr> args;
    args.reserve(e.args().size());
    bool changed = false;
    for (const auto& a : e.args()) {
      args.push_back(bound.empty() ? run(a) : go(a));
      changed = changed || !args.back().same(a);
    }
    if (!changed) return e;
    return rebuild(e, std::move(args));
  }
};

}  // namespace

Expr substitute(const Expr& e, const ExprMap& rules) {
  if (rules.empty()) return e;
  Substituter s{rules, {}, {}};
  return s.run(e);
}

}  // namespace subsym
