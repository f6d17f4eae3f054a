#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace subsym {

using Rational = mpq_class;

enum class Kind : std::uint8_t { Number, Symbol, Jet, Add, Mul, Pow, Func, Opaque, Integral };

// Elementary functions. Tan and Cot never survive normalization; Root carries
// its degree in Node::degree (degree 2 prints as sqrt).
enum class Fn : std::uint8_t { Sin, Cos, Tan, Cot, Exp, Ln, Root, Arctan };

const char* fn_name(Fn fn);

struct Node;

/// Immutable symbolic expression. Copies share structure.
///
/// The raw constructors below only flatten nested sums/products and fold
/// numeric children; `normalize` produces the canonical form.
class Expr {
 public:
  Expr();  // the constant 0
  Expr(int v);
  Expr(long v);
  explicit Expr(const Rational& q);

  static Expr number(const Rational& q);
  static Expr symbol(std::string name);
  /// Jet coordinate u_J; `dirs` is the multi-index as direction names (any order).
  static Expr jet(std::string var, std::vector<std::string> dirs = {});
  static Expr add(std::vector<Expr> terms);
  static Expr mul(std::vector<Expr> factors);
  static Expr pow(Expr base, const Rational& exponent);
  static Expr func(Fn fn, std::vector<Expr> args, int degree = 0);
  /// Opaque function application; non-empty `slots` (0-based, any order)
  /// denotes the formal partial derivative with respect to those argument slots.
  static Expr opaque(std::string name, std::vector<int> slots, std::vector<Expr> args);
  /// Formal antiderivative: the integral of `body` in `var` up to `upper`,
  /// with the integration constant absorbed.
  static Expr integral(Expr body, std::string var, Expr upper);

  Kind kind() const;
  const Node& node() const { return *p_; }
  std::size_t hash() const;

  bool is_number() const { return kind() == Kind::Number; }
  bool is_zero_number() const;
  bool is_one_number() const;
  const Rational& value() const;              // Number value or Pow exponent
  const std::string& name() const;            // Symbol, Jet var, Opaque, Integral var
  const std::vector<std::string>& dirs() const;
  const std::vector<int>& slots() const;
  const std::vector<Expr>& args() const;
  Fn fn() const;
  int degree() const;
  bool canonical() const;

  bool same(const Expr& o) const { return p_ == o.p_; }

 private:
  friend Expr make_canonical(Expr);
  explicit Expr(std::shared_ptr<const Node> p) : p_(std::move(p)) {}
  std::shared_ptr<const Node> p_;
};

struct Node {
  Kind kind = Kind::Number;
  Fn fn = Fn::Sin;
  int degree = 0;
  Rational value;
  std::string name;
  std::vector<std::string> dirs;
  std::vector<int> slots;
  std::vector<Expr> args;
  std::size_t hash = 0;
  bool canonical = false;
};

/// Total structural order (kind, payload, children). Zero iff structurally equal.
int compare(const Expr& a, const Expr& b);
bool operator==(const Expr& a, const Expr& b);
inline bool operator!=(const Expr& a, const Expr& b) { return !(a == b); }

struct ExprLess {
  bool operator()(const Expr& a, const Expr& b) const { return compare(a, b) < 0; }
};

/// Cheaper total order used for internal containers: hash first, structure on ties.
struct ExprFastLess {
  bool operator()(const Expr& a, const Expr& b) const;
};

using ExprMap = std::map<Expr, Expr, ExprLess>;
using ExprSet = std::set<Expr, ExprLess>;

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr pow(const Expr& base, const Rational& exponent);

Expr sin(const Expr& a);
Expr cos(const Expr& a);
Expr tan(const Expr& a);
Expr cot(const Expr& a);
Expr exp(const Expr& a);
Expr ln(const Expr& a);
Expr sqrt(const Expr& a);
Expr arctan(const Expr& x, const Expr& y);

/// Parseable text form.
std::string to_string(const Expr& e);
std::ostream& operator<<(std::ostream& os, const Expr& e);

/// Marks a tree produced by the normalizer; used to skip renormalizing kernels.
Expr make_canonical(Expr e);

/// Visit every node (pre-order).
void visit(const Expr& e, const std::function<void(const Expr&)>& fn);

/// True if `needle` occurs structurally anywhere in `e`.
bool contains(const Expr& e, const Expr& needle);
bool contains_symbol(const Expr& e, const std::string& name);

/// All jet nodes (including order-zero u) occurring in `e`.
ExprSet collect_jets(const Expr& e);
/// Every Opaque node with the given function name (any derivative slots).
ExprSet collect_opaque(const Expr& e, const std::string& name);

/// Simultaneous structural substitution (does not normalize).
/// Bound integration variables are not substituted inside integral bodies.
Expr substitute(const Expr& e, const ExprMap& rules);

}  // namespace subsym
