#include "subsym/normalize.hpp"

#include <algorithm>
#include <optional>
#include <unordered_map>

#include "subsym/errors.hpp"

namespace subsym {

namespace {

using Mono = std::vector<std::pair<Expr, int>>;

// Lex order on exponent vectors, the structurally largest kernel deciding first.
int mono_cmp(const Mono& a, const Mono& b) {
  auto i = a.rbegin();
  auto j = b.rbegin();
  while (i != a.rend() || j != b.rend()) {
    if (i == a.rend()) return -1;
    if (j == b.rend()) return 1;
    int c = compare(i->first, j->first);
    if (c != 0) return c;
    if (i->second != j->second) return i->second < j->second ? -1 : 1;
    ++i;
    ++j;
  }
  return 0;
}

struct MonoLess {
  bool operator()(const Mono& a, const Mono& b) const { return mono_cmp(a, b) < 0; }
};

using Poly = std::map<Mono, Rational, MonoLess>;

int poly_cmp(const Poly& a, const Poly& b) {
  if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
  for (auto i = a.begin(), j = b.begin(); i != a.end(); ++i, ++j) {
    if (int c = mono_cmp(i->first, j->first)) return c;
    if (int c = cmp(i->second, j->second)) return c < 0 ? -1 : 1;
  }
  return 0;
}

struct RatFun {
  Poly num;
  Mono dmono;
  std::vector<std::pair<Poly, int>> dpolys;
  bool trivial_den() const { return dmono.empty() && dpolys.empty(); }
};

thread_local std::set<std::string> g_positive;

bool positives_active() { return !g_positive.empty(); }

struct ExprHash {
  std::size_t operator()(const Expr& e) const { return e.hash(); }
};

thread_local std::unordered_map<Expr, RatFun, ExprHash> g_cache;

void cache_put(const Expr& e, const RatFun& r) {
  if (g_cache.size() > 60000) g_cache.clear();
  g_cache.emplace(e, r);
}

// ---------------------------------------------------------------- monomials

Mono mono_mul(const Mono& a, const Mono& b) {
  Mono out;
  out.reserve(a.size() + b.size());
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    int c = compare(i->first, j->first);
    if (c < 0) {
      out.push_back(*i++);
    } else if (c > 0) {
      out.push_back(*j++);
    } else {
      out.emplace_back(i->first, i->second + j->second);
      ++i;
      ++j;
    }
  }
  out.insert(out.end(), i, a.end());
  out.insert(out.end(), j, b.end());
  return out;
}

std::optional<Mono> mono_div(const Mono& a, const Mono& b) {
  Mono out;
  auto i = a.begin();
  for (const auto& [k, e] : b) {
    while (i != a.end() && compare(i->first, k) < 0) out.push_back(*i++);
    if (i == a.end() || compare(i->first, k) != 0 || i->second < e) return std::nullopt;
    if (i->second > e) out.emplace_back(k, i->second - e);
    ++i;
  }
  out.insert(out.end(), i, a.end());
  return out;
}

int mono_exp(const Mono& m, const Expr& k) {
  for (const auto& [x, e] : m)
    if (x == k) return e;
  return 0;
}

bool is_fn(const Expr& k, Fn f) { return k.kind() == Kind::Func && k.fn() == f; }

Expr kern(Fn f, std::vector<Expr> args, int deg = 0) {
  return make_canonical(Expr::func(f, std::move(args), deg));
}

// ---------------------------------------------------------------- forward declarations

RatFun conv(const Expr& e);
int integral_depth(const Expr& e);
Expr to_expr(const RatFun& r);
Expr poly_expr(const Poly& p);
Poly pmul(const Poly& a, const Poly& b);

// ---------------------------------------------------------------- polynomials

void padd_term(Poly& p, const Mono& m, const Rational& c) {
  if (c == 0) return;
  auto [it, fresh] = p.emplace(m, c);
  if (!fresh) {
    it->second += c;
    if (it->second == 0) p.erase(it);
  }
}

void padd(Poly& a, const Poly& b, const Rational& scale = 1) {
  for (const auto& [m, c] : b) padd_term(a, m, c * scale);
}

Poly pconst(const Rational& c) {
  Poly p;
  if (c != 0) p[{}] = c;
  return p;
}

Poly pkernel(const Expr& k, int e = 1) {
  Poly p;
  p[{{k, e}}] = 1;
  return p;
}

Poly one_minus_sin2(const Expr& arg) {
  Poly p = pconst(1);
  p[{{kern(Fn::Sin, {arg}), 2}}] = -1;
  return p;
}

Poly ppow(const Poly& p, int k) {
  Poly out = pconst(1);
  for (int i = 0; i < k; ++i) out = pmul(out, p);
  return out;
}

const Poly& root_arg_poly(const Expr& root) {
  thread_local std::unordered_map<Expr, Poly, ExprHash> memo;
  auto it = memo.find(root);
  if (it != memo.end()) return it->second;
  if (memo.size() > 20000) memo.clear();
  RatFun r = conv(root.args()[0]);
  return memo.emplace(root, r.num).first->second;
}

Expr exp_merge_kernel(const Expr& a, int ea, const Expr& b, int eb);

// Adds c*m into out, applying the closure rules that act on products of kernels.
void add_reduced(Poly& out, const Mono& m, const Rational& c) {
  for (std::size_t i = 0; i < m.size(); ++i) {
    const Expr& k = m[i].first;
    int e = m[i].second;
    if (is_fn(k, Fn::Cos) && e >= 2) {
      Mono rest = m;
      if (e % 2)
        rest[i].second = 1;
      else
        rest.erase(rest.begin() + static_cast<long>(i));
      Poly p;
      p[rest] = c;
      padd(out, pmul(p, ppow(one_minus_sin2(k.args()[0]), e / 2)));
      return;
    }
    if (is_fn(k, Fn::Root) && e >= k.degree()) {
      int n = k.degree();
      Mono rest = m;
      if (e % n)
        rest[i].second = e % n;
      else
        rest.erase(rest.begin() + static_cast<long>(i));
      Poly p;
      p[rest] = c;
      padd(out, pmul(p, ppow(root_arg_poly(k), e / n)));
      return;
    }
    if (is_fn(k, Fn::Exp)) {
      std::size_t j = i + 1;
      while (j < m.size() && !is_fn(m[j].first, Fn::Exp)) ++j;
      if (e < 2 && j == m.size()) continue;
      Expr merged = j < m.size() ? exp_merge_kernel(k, e, m[j].first, m[j].second) : exp_merge_kernel(k, e, k, 0);
      Mono rest;
      for (std::size_t t = 0; t < m.size(); ++t)
        if (t != i && t != j) rest.push_back(m[t]);
      if (!merged.is_one_number()) rest = mono_mul(rest, Mono{{merged, 1}});
      add_reduced(out, rest, c);
      return;
    }
  }
  padd_term(out, m, c);
}

Poly pmul(const Poly& a, const Poly& b) {
  Poly out;
  if (a.empty() || b.empty()) return out;
  for (const auto& [ma, ca] : a)
    for (const auto& [mb, cb] : b) add_reduced(out, mono_mul(ma, mb), ca * cb);
  return out;
}

Poly pmul_raw(const Poly& a, const Poly& b) {
  Poly out;
  for (const auto& [ma, ca] : a)
    for (const auto& [mb, cb] : b) padd_term(out, mono_mul(ma, mb), ca * cb);
  return out;
}

// Exact division in the free polynomial ring over the kernels.
std::optional<Poly> div_exact(const Poly& n, const Poly& f) {
  if (f.empty()) return std::nullopt;
  Poly q;
  Poly r = n;
  const auto& [lf, cf] = *f.rbegin();
  for (int guard = 0; !r.empty(); ++guard) {
    if (guard > 20000) return std::nullopt;
    const auto& [lr, cr] = *r.rbegin();
    auto m = mono_div(lr, lf);
    if (!m) return std::nullopt;
    Rational c = cr / cf;
    padd_term(q, *m, c);
    Poly t;
    t[*m] = c;
    padd(r, pmul_raw(t, f), -1);
  }
  return q;
}

struct Content {
  Rational c;
  Mono mono;
  Poly prim;
};

Content content(const Poly& p) {
  Content out;
  mpz_class g = 0, l = 1;
  for (const auto& [m, c] : p) {
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), c.get_num_mpz_t());
    mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), c.get_den_mpz_t());
  }
  g = abs(g);
  out.c = Rational(g, l);
  out.c.canonicalize();
  if (p.rbegin()->second < 0) out.c = -out.c;
  if (p.size() == 1) {
    out.mono = p.begin()->first;
  } else {
    bool first = true;
    for (const auto& [m, c] : p) {
      Mono nm;
      if (first) {
        for (const auto& ke : m)
          if (!is_fn(ke.first, Fn::Exp)) nm.push_back(ke);
        first = false;
      } else {
        for (const auto& [k, e] : out.mono) {
          int x = mono_exp(m, k);
          if (x > 0) nm.emplace_back(k, std::min(e, x));
        }
      }
      out.mono = std::move(nm);
      if (out.mono.empty()) break;
    }
  }
  for (const auto& [m, c] : p) out.prim[*mono_div(m, out.mono)] = c / out.c;
  return out;
}

// ---------------------------------------------------------------- rational functions

RatFun rconst(const Rational& c) {
  RatFun r;
  r.num = pconst(c);
  return r;
}

RatFun rpoly(Poly p) {
  RatFun r;
  r.num = std::move(p);
  return r;
}

RatFun rkernel(const Expr& k) { return rpoly(pkernel(k)); }

Poly den_poly(const RatFun& r) {
  Poly d;
  d[{}] = 1;
  if (!r.dmono.empty()) d = pmul(d, [&] {
    Poly m;
    m[r.dmono] = 1;
    return m;
  }());
  for (const auto& [p, k] : r.dpolys) d = pmul(d, ppow(p, k));
  return d;
}

void simplify(RatFun& r) {
  if (r.num.empty()) {
    r.dmono.clear();
    r.dpolys.clear();
    return;
  }
  for (int pass = 0; pass < 4; ++pass) {
    bool changed = false;
    for (auto& [p, k] : r.dpolys) {
      while (k > 0) {
        auto q = div_exact(r.num, p);
        if (!q) break;
        r.num = std::move(*q);
        --k;
        changed = true;
      }
    }
    std::erase_if(r.dpolys, [](const auto& pk) { return pk.second == 0; });
    Mono dm;
    for (auto [k, e] : r.dmono) {
      int mn = e;
      for (const auto& [m, c] : r.num) {
        mn = std::min(mn, mono_exp(m, k));
        if (mn == 0) break;
      }
      if (mn > 0) {
        Poly nn;
        Mono km{{k, mn}};
        for (const auto& [m, c] : r.num) nn[*mono_div(m, km)] = c;
        r.num = std::move(nn);
        e -= mn;
        changed = true;
      }
      if (is_fn(k, Fn::Cos)) {
        Poly oms = one_minus_sin2(k.args()[0]);
        while (e > 0) {
          Poly n0, n1;
          Mono km{{k, 1}};
          for (const auto& [m, c] : r.num) {
            if (auto d = mono_div(m, km))
              n1[*d] = c;
            else
              n0[m] = c;
          }
          Poly next = n1;
          if (!n0.empty()) {
            auto q = div_exact(n0, oms);
            if (!q) break;
            padd(next, pmul(pkernel(k), *q));
          }
          r.num = std::move(next);
          --e;
          changed = true;
        }
      }
      if (e > 0) dm.emplace_back(k, e);
    }
    r.dmono = std::move(dm);
    if (r.num.empty()) {
      r.dmono.clear();
      r.dpolys.clear();
      return;
    }
    if (!changed) break;
  }
}

RatFun rmul(const RatFun& a, const RatFun& b) {
  RatFun out;
  out.num = pmul(a.num, b.num);
  if (out.num.empty()) return out;
  if (a.trivial_den() && b.trivial_den()) return out;
  out.dmono = mono_mul(a.dmono, b.dmono);
  out.dpolys = a.dpolys;
  for (const auto& [p, k] : b.dpolys) {
    auto it = std::find_if(out.dpolys.begin(), out.dpolys.end(),
                           [&](const auto& x) { return poly_cmp(x.first, p) == 0; });
    if (it != out.dpolys.end())
      it->second += k;
    else
      out.dpolys.emplace_back(p, k);
  }
  std::sort(out.dpolys.begin(), out.dpolys.end(),
            [](const auto& x, const auto& y) { return poly_cmp(x.first, y.first) < 0; });
  simplify(out);
  return out;
}

RatFun rscale(const RatFun& a, const Rational& s) {
  RatFun out = a;
  if (s == 0) return RatFun{};
  for (auto& [m, c] : out.num) c *= s;
  return out;
}

RatFun radd(const RatFun& a, const RatFun& b) {
  if (a.num.empty()) return b;
  if (b.num.empty()) return a;
  if (a.trivial_den() && b.trivial_den()) {
    RatFun out = a;
    padd(out.num, b.num);
    return out;
  }
  bool same_den = mono_cmp(a.dmono, b.dmono) == 0 && a.dpolys.size() == b.dpolys.size() &&
                  std::equal(a.dpolys.begin(), a.dpolys.end(), b.dpolys.begin(),
                             [](const auto& x, const auto& y) {
                               return x.second == y.second && poly_cmp(x.first, y.first) == 0;
                             });
  RatFun out;
  if (same_den) {
    out = a;
    padd(out.num, b.num);
    simplify(out);
    return out;
  }
  Mono lm;
  {
    auto i = a.dmono.begin();
    auto j = b.dmono.begin();
    while (i != a.dmono.end() || j != b.dmono.end()) {
      if (j == b.dmono.end() || (i != a.dmono.end() && compare(i->first, j->first) < 0)) {
        lm.push_back(*i++);
      } else if (i == a.dmono.end() || compare(i->first, j->first) > 0) {
        lm.push_back(*j++);
      } else {
        lm.emplace_back(i->first, std::max(i->second, j->second));
        ++i;
        ++j;
      }
    }
  }
  std::vector<std::pair<Poly, int>> lp = a.dpolys;
  for (const auto& [p, k] : b.dpolys) {
    auto it = std::find_if(lp.begin(), lp.end(),
                           [&](const auto& x) { return poly_cmp(x.first, p) == 0; });
    if (it != lp.end())
      it->second = std::max(it->second, k);
    else
      lp.emplace_back(p, k);
  }
  std::sort(lp.begin(), lp.end(),
            [](const auto& x, const auto& y) { return poly_cmp(x.first, y.first) < 0; });
  auto scaled = [&](const RatFun& r) {
    Poly f;
    f[*mono_div(lm, r.dmono)] = 1;
    Poly out_num = pmul(r.num, f);
    for (const auto& [p, k] : lp) {
      int have = 0;
      for (const auto& [q, kq] : r.dpolys)
        if (poly_cmp(p, q) == 0) have = kq;
      if (k > have) out_num = pmul(out_num, ppow(p, k - have));
    }
    return out_num;
  };
  out.num = scaled(a);
  padd(out.num, scaled(b));
  out.dmono = std::move(lm);
  out.dpolys = std::move(lp);
  simplify(out);
  return out;
}

RatFun rneg(const RatFun& a) { return rscale(a, -1); }

Expr exp_kernel_of(const Expr& arg);

RatFun rinv(const RatFun& a) {
  if (a.num.empty()) throw Error("division by zero");
  RatFun out;
  out.num = den_poly(a);
  Content ct = content(a.num);
  out.num = pmul(out.num, pconst(1 / ct.c));
  bool unit = ct.prim.size() == 1 && ct.prim.begin()->first.empty();
  if (!unit) {
    // sin(A)^2 - 1 is -cos(A)^2
    bool cos_sq = false;
    if (ct.prim.size() == 2) {
      auto lead = ct.prim.rbegin();
      auto low = ct.prim.begin();
      if (lead->first.size() == 1 && lead->first[0].second == 2 &&
          is_fn(lead->first[0].first, Fn::Sin) && lead->second == 1 && low->first.empty() &&
          low->second == -1) {
        cos_sq = true;
        out.num = pmul(out.num, pconst(-1));
        out.dmono = mono_mul(out.dmono, {{kern(Fn::Cos, {lead->first[0].first.args()[0]}), 2}});
      }
    }
    if (!cos_sq) out.dpolys.emplace_back(ct.prim, 1);
  }
  std::vector<RatFun> extra;
  for (const auto& [k, e] : ct.mono) {
    if (is_fn(k, Fn::Exp)) {
      Expr neg = exp_kernel_of(normalize(-k.args()[0] * Expr(e)));
      if (!neg.is_one_number()) out.num = pmul(out.num, pkernel(neg));
    } else if (is_fn(k, Fn::Root)) {
      out.num = pmul(out.num, pkernel(k, k.degree() - e));
      extra.push_back(rinv(rpoly(root_arg_poly(k))));
    } else {
      out.dmono = mono_mul(out.dmono, {{k, e}});
    }
  }
  simplify(out);
  for (const auto& x : extra) out = rmul(out, x);
  return out;
}

RatFun rpow(const RatFun& a, long k) {
  if (k < 0) return rpow(rinv(a), -k);
  RatFun out = rconst(1);
  RatFun base = a;
  while (k > 0) {
    if (k & 1) out = rmul(out, base);
    k >>= 1;
    if (k) base = rmul(base, base);
  }
  return out;
}

RatFun rdiv(const RatFun& a, const RatFun& b) { return rmul(a, rinv(b)); }

// ---------------------------------------------------------------- closures

Expr exp_kernel_of(const Expr& arg) {
  if (arg.is_zero_number()) return Expr(1);
  return kern(Fn::Exp, {arg});
}

// exp(a)^ea * exp(b)^eb as a single kernel
Expr exp_merge_kernel(const Expr& a, int ea, const Expr& b, int eb) {
  return exp_kernel_of(normalize(a.args()[0] * Expr(ea) + b.args()[0] * Expr(eb)));
}

bool leading_negative(const Poly& p) { return !p.empty() && p.rbegin()->second < 0; }

bool positive_name(const Expr& k) {
  bool plain = k.kind() == Kind::Symbol || (k.kind() == Kind::Jet && k.dirs().empty());
  return plain && g_positive.count(k.name()) > 0;
}

bool is_positive_kernel(const Expr& k) {
  if (positive_name(k)) return true;
  if (is_fn(k, Fn::Exp)) return true;
  if (is_fn(k, Fn::Root)) return true;
  return false;
}

bool is_positive(const RatFun& r) {
  if (!r.trivial_den() || r.num.size() != 1) return false;
  const auto& [m, c] = *r.num.begin();
  if (c <= 0) return false;
  for (const auto& [k, e] : m)
    if (e % 2 && !is_positive_kernel(k)) return false;
  return true;
}

std::pair<RatFun, RatFun> base_trig(const Expr& base);

std::pair<RatFun, RatFun> trig(const Expr& arg) {
  RatFun r = conv(arg);
  if (r.num.empty()) return {RatFun{}, rconst(1)};
  if (!r.trivial_den()) {
    bool neg = leading_negative(r.num);
    Expr base = neg ? to_expr(rneg(r)) : arg;
    RatFun s = rkernel(kern(Fn::Sin, {base}));
    return {neg ? rneg(s) : s, rkernel(kern(Fn::Cos, {base}))};
  }
  RatFun S;
  RatFun C = rconst(1);
  for (const auto& [m, c] : r.num) {
    RatFun s1, c1;
    bool neg = c < 0;
    if (m.empty()) {
      Expr k = Expr::number(abs(c));
      s1 = rkernel(kern(Fn::Sin, {k}));
      c1 = rkernel(kern(Fn::Cos, {k}));
    } else {
      Poly bp;
      bp[m] = Rational(1, c.get_den());
      auto [bs, bc] = base_trig(poly_expr(bp));
      mpz_class n = abs(c.get_num());
      s1 = bs;
      c1 = bc;
      for (mpz_class i = 2; i <= n; ++i) {
        RatFun ns = radd(rmul(s1, bc), rmul(c1, bs));
        RatFun nc = radd(rmul(c1, bc), rneg(rmul(s1, bs)));
        s1 = std::move(ns);
        c1 = std::move(nc);
      }
    }
    if (neg) s1 = rneg(s1);
    RatFun ns = radd(rmul(S, c1), rmul(C, s1));
    RatFun nc = radd(rmul(C, c1), rneg(rmul(S, s1)));
    S = std::move(ns);
    C = std::move(nc);
  }
  return {S, C};
}

RatFun root_closure(const Expr& arg, int n);

std::pair<RatFun, RatFun> base_trig(const Expr& base) {
  if (is_fn(base, Fn::Arctan)) {
    const Expr& a = base.args()[0];
    const Expr& b = base.args()[1];
    RatFun r = root_closure(normalize(a * a + b * b), 2);
    RatFun ir = rinv(r);
    return {rmul(conv(b), ir), rmul(conv(a), ir)};
  }
  return {rkernel(kern(Fn::Sin, {base})), rkernel(kern(Fn::Cos, {base}))};
}

RatFun exp_closure(const Expr& arg) {
  RatFun r = conv(arg);
  if (r.num.empty()) return rconst(1);
  if (!r.trivial_den()) return rkernel(kern(Fn::Exp, {arg}));
  RatFun factor = rconst(1);
  Poly rest;
  for (const auto& [m, c] : r.num) {
    if (m.size() == 1 && m[0].second == 1 && is_fn(m[0].first, Fn::Ln) && c.get_den() == 1 &&
        c.get_num().fits_slong_p()) {
      factor = rmul(factor, rpow(conv(m[0].first.args()[0]), c.get_num().get_si()));
    } else {
      rest[m] = c;
    }
  }
  if (rest.empty()) return factor;
  return rmul(factor, rkernel(kern(Fn::Exp, {poly_expr(rest)})));
}

RatFun ln_closure(const Expr& arg) {
  if (arg.is_one_number()) return RatFun{};
  RatFun r = conv(arg);
  if (r.trivial_den() && r.num.size() == 1) {
    const auto& [m, c] = *r.num.begin();
    if (c == 1 && m.size() == 1 && m[0].second == 1 && is_fn(m[0].first, Fn::Exp))
      return conv(m[0].first.args()[0]);
  }
  return rkernel(kern(Fn::Ln, {arg}));
}

// Largest s with s^n | v (v > 0); v is replaced by v / s^n.
mpz_class extract_power(mpz_class& v, int n) {
  mpz_class s = 1;
  mpz_class r;
  if (mpz_root(r.get_mpz_t(), v.get_mpz_t(), static_cast<unsigned long>(n))) {
    v = 1;
    return r;
  }
  for (unsigned long p = 2; p < 100000; ++p) {
    mpz_class pn;
    mpz_ui_pow_ui(pn.get_mpz_t(), p, static_cast<unsigned long>(n));
    if (pn > v) break;
    while (mpz_divisible_p(v.get_mpz_t(), pn.get_mpz_t())) {
      v /= pn;
      s *= p;
    }
  }
  if (v > 1 && mpz_root(r.get_mpz_t(), v.get_mpz_t(), static_cast<unsigned long>(n))) {
    s *= r;
    v = 1;
  }
  return s;
}

RatFun root_poly(const Poly& p, int n) {
  if (p.empty()) return RatFun{};
  if (p.size() == 1) {
    const auto& [m, c] = *p.begin();
    RatFun outside = rconst(1);
    bool neg = c < 0;
    Rational a = abs(c);
    if (neg && n % 2 == 1) {
      outside = rconst(-1);
      neg = false;
    }
    mpz_class num = a.get_num();
    mpz_class dpow;
    mpz_pow_ui(dpow.get_mpz_t(), a.get_den_mpz_t(), static_cast<unsigned long>(n - 1));
    num *= dpow;
    mpz_class s = extract_power(num, n);
    outside = rscale(outside, Rational(s, a.get_den()));
    Mono inner;
    for (const auto& [k, e] : m) {
      if (is_fn(k, Fn::Exp)) {
        outside = rmul(outside, exp_closure(normalize(k.args()[0] * Expr(e) / Expr(n))));
      } else if (positive_name(k) && e >= n) {
        outside = rmul(outside, rpoly(pkernel(k, e / n)));
        if (e % n) inner.emplace_back(k, e % n);
      } else {
        inner.emplace_back(k, e);
      }
    }
    Rational ic = neg ? Rational(-num) : Rational(num);
    if (ic == 1 && inner.empty()) return outside;
    Poly ip;
    ip[inner] = ic;
    return rmul(outside, rkernel(kern(Fn::Root, {poly_expr(ip)}, n)));
  }
  if (positives_active()) {
    Content ct = content(p);
    Mono take;
    for (const auto& [k, e] : ct.mono)
      if (positive_name(k) && e >= n)
        take.emplace_back(k, (e / n) * n);
    if (!take.empty()) {
      Poly rest;
      for (const auto& [m, c] : p) rest[*mono_div(m, take)] = c;
      Mono out;
      for (const auto& [k, e] : take) out.emplace_back(k, e / n);
      Poly op;
      op[out] = 1;
      return rmul(rpoly(op), root_poly(rest, n));
    }
  }
  return rkernel(kern(Fn::Root, {poly_expr(p)}, n));
}

RatFun root_closure(const Expr& arg, int n) {
  RatFun r = conv(arg);
  if (r.num.empty()) return RatFun{};
  if (!r.trivial_den()) {
    Poly d = den_poly(r);
    Poly inner = pmul(r.num, ppow(d, n - 1));
    return rdiv(root_poly(inner, n), rpoly(d));
  }
  return root_poly(r.num, n);
}

RatFun arctan_closure(const Expr& a, const Expr& b) {
  ExprSet cands;
  visit(a, [&](const Expr& x) {
    if (is_fn(x, Fn::Cos)) cands.insert(x);
  });
  for (const auto& c : cands) {
    const Expr& th = c.args()[0];
    RatFun radius = rdiv(conv(a), rkernel(c));
    if (!is_positive(radius)) continue;
    RatFun diff = radd(conv(b), rneg(rmul(radius, conv(sin(th)))));
    if (diff.num.empty()) return conv(th);
  }
  return rkernel(kern(Fn::Arctan, {a, b}));
}

// ---------------------------------------------------------------- conversion

RatFun conv_uncached(const Expr& e) {
  const Node& n = e.node();
  switch (n.kind) {
    case Kind::Number:
      return rconst(n.value);
    case Kind::Symbol:
    case Kind::Jet:
      return rkernel(e);
    case Kind::Add: {
      RatFun acc;
      for (const auto& a : n.args) acc = radd(acc, conv(a));
      return acc;
    }
    case Kind::Mul: {
      RatFun acc = rconst(1);
      for (const auto& a : n.args) {
        acc = rmul(acc, conv(a));
        if (acc.num.empty()) break;
      }
      return acc;
    }
    case Kind::Pow: {
      const Rational& r = n.value;
      if (r.get_den() == 1) return rpow(conv(n.args[0]), r.get_num().get_si());
      RatFun root = root_closure(normalize(n.args[0]), static_cast<int>(r.get_den().get_si()));
      return rpow(root, r.get_num().get_si());
    }
    case Kind::Func: {
      if (n.fn == Fn::Arctan) return arctan_closure(normalize(n.args[0]), normalize(n.args[1]));
      Expr a = normalize(n.args[0]);
      switch (n.fn) {
        case Fn::Sin: return trig(a).first;
        case Fn::Cos: return trig(a).second;
        case Fn::Tan: {
          auto [s, c] = trig(a);
          return rdiv(s, c);
        }
        case Fn::Cot: {
          auto [s, c] = trig(a);
          return rdiv(c, s);
        }
        case Fn::Exp: return exp_closure(a);
        case Fn::Ln: return ln_closure(a);
        case Fn::Root: return root_closure(a, n.degree);
        default: break;
      }
      return RatFun{};
    }
    case Kind::Opaque: {
      std::vector<Expr> args;
      args.reserve(n.args.size());
      for (const auto& a : n.args) args.push_back(normalize(a));
      return rkernel(make_canonical(Expr::opaque(n.name, n.slots, std::move(args))));
    }
    case Kind::Integral: {
      Expr body = normalize(n.args[0]);
      Expr upper = normalize(n.args[1]);
      if (body.is_zero_number()) return RatFun{};
      if (!contains_symbol(body, n.name)) return rmul(conv(body), conv(upper));
      std::string var = "s" + std::to_string(integral_depth(body) + 1);
      if (var != n.name && !contains_symbol(body, var)) {
        body = normalize(substitute(body, ExprMap{{Expr::symbol(n.name), Expr::symbol(var)}}));
        return rkernel(make_canonical(Expr::integral(body, var, upper)));
      }
      return rkernel(make_canonical(Expr::integral(body, n.name, upper)));
    }
  }
  return RatFun{};
}

int integral_depth(const Expr& e) {
  int d = 0;
  for (const auto& a : e.args()) d = std::max(d, integral_depth(a));
  return e.kind() == Kind::Integral ? d + 1 : d;
}

RatFun conv(const Expr& e) {
  switch (e.kind()) {
    case Kind::Number:
      return rconst(e.value());
    case Kind::Symbol:
    case Kind::Jet:
      return rkernel(e);
    case Kind::Func:
    case Kind::Opaque:
    case Kind::Integral:
      if (e.canonical() && !positives_active()) return rkernel(e);
      break;
    default:
      break;
  }
  auto it = g_cache.find(e);
  if (it != g_cache.end()) return it->second;
  RatFun r = conv_uncached(e);
  cache_put(e, r);
  return r;
}

Expr poly_expr(const Poly& p) {
  if (p.empty()) return Expr();
  std::vector<Expr> terms;
  terms.reserve(p.size());
  for (auto it = p.rbegin(); it != p.rend(); ++it) {
    std::vector<Expr> f;
    f.reserve(it->first.size() + 1);
    if (it->second != 1) f.push_back(Expr::number(it->second));
    for (const auto& [k, e] : it->first) f.push_back(e == 1 ? k : make_canonical(Expr::pow(k, e)));
    terms.push_back(f.size() == 1 ? f[0] : make_canonical(Expr::mul(std::move(f))));
  }
  if (terms.size() == 1) return terms[0];
  return make_canonical(Expr::add(std::move(terms)));
}

Expr to_expr(const RatFun& r) {
  Expr n = poly_expr(r.num);
  if (r.trivial_den() || r.num.empty()) return n;
  std::vector<Expr> f{n};
  for (const auto& [k, e] : r.dmono) f.push_back(make_canonical(Expr::pow(k, -e)));
  for (const auto& [p, k] : r.dpolys) f.push_back(make_canonical(Expr::pow(poly_expr(p), -k)));
  return make_canonical(Expr::mul(std::move(f)));
}

// ---------------------------------------------------------------- derivation

struct Deriver {
  const std::function<Expr(const Expr&)>& leaf;
  std::vector<std::string> masked;
  std::unordered_map<const Node*, Expr> memo;

  Expr d(const Expr& e) {
    if (masked.empty()) {
      auto it = memo.find(&e.node());
      if (it != memo.end()) return it->second;
      Expr r = go(e);
      memo.emplace(&e.node(), r);
      return r;
    }
    return go(e);
  }

  Expr go(const Expr& e) {
    const Node& n = e.node();
    switch (n.kind) {
      case Kind::Number:
        return Expr();
      case Kind::Symbol:
        if (std::find(masked.begin(), masked.end(), n.name) != masked.end()) return Expr();
        return leaf(e);
      case Kind::Jet:
        return leaf(e);
      case Kind::Add: {
        std::vector<Expr> t;
        for (const auto& a : n.args) {
          Expr da = d(a);
          if (!da.is_zero_number()) t.push_back(da);
        }
        return Expr::add(std::move(t));
      }
      case Kind::Mul: {
        std::vector<Expr> t;
        for (std::size_t i = 0; i < n.args.size(); ++i) {
          Expr da = d(n.args[i]);
          if (da.is_zero_number()) continue;
          std::vector<Expr> f = n.args;
          f[i] = da;
          t.push_back(Expr::mul(std::move(f)));
        }
        return Expr::add(std::move(t));
      }
      case Kind::Pow: {
        Expr db = d(n.args[0]);
        if (db.is_zero_number()) return Expr();
        return Expr::mul({Expr::number(n.value), Expr::pow(n.args[0], n.value - 1), db});
      }
      case Kind::Func:
        return func(e);
      case Kind::Opaque: {
        std::vector<Expr> t;
        for (std::size_t k = 0; k < n.args.size(); ++k) {
          Expr da = d(n.args[k]);
          if (da.is_zero_number()) continue;
          std::vector<int> slots = n.slots;
          slots.push_back(static_cast<int>(k));
          t.push_back(Expr::opaque(n.name, slots, n.args) * da);
        }
        return Expr::add(std::move(t));
      }
      case Kind::Integral: {
        const Expr& body = n.args[0];
        const Expr& upper = n.args[1];
        std::vector<Expr> t;
        Expr du = d(upper);
        if (!du.is_zero_number()) {
          ExprMap at{{Expr::symbol(n.name), upper}};
          t.push_back(substitute(body, at) * du);
        }
        masked.push_back(n.name);
        Expr db = go(body);
        masked.pop_back();
        if (!db.is_zero_number()) t.push_back(Expr::integral(db, n.name, upper));
        return Expr::add(std::move(t));
      }
    }
    return Expr();
  }

  Expr func(const Expr& e) {
    const Node& n = e.node();
    if (n.fn == Fn::Arctan) {
      const Expr& a = n.args[0];
      const Expr& b = n.args[1];
      Expr da = d(a);
      Expr db = d(b);
      if (da.is_zero_number() && db.is_zero_number()) return Expr();
      return (a * db - b * da) / (a * a + b * b);
    }
    const Expr& a = n.args[0];
    Expr da = d(a);
    if (da.is_zero_number()) return Expr();
    switch (n.fn) {
      case Fn::Sin: return cos(a) * da;
      case Fn::Cos: return -sin(a) * da;
      case Fn::Tan: return (Expr(1) + tan(a) * tan(a)) * da;
      case Fn::Cot: return -(Expr(1) + cot(a) * cot(a)) * da;
      case Fn::Exp: return e * da;
      case Fn::Ln: return da / a;
      case Fn::Root: return e * da / (Expr(n.degree) * a);
      default: return Expr();
    }
  }
};

}  // namespace

// ---------------------------------------------------------------- public API

Expr normalize(const Expr& e) {
  if (e.canonical() && !positives_active()) return e;
  return to_expr(conv(e));
}

bool is_zero(const Expr& e) { return conv(e).num.empty(); }

Expr numerator(const Expr& e) { return poly_expr(conv(e).num); }

Expr denominator(const Expr& e) {
  RatFun r = conv(e);
  if (r.num.empty()) return Expr(1);
  RatFun d;
  d.num = pconst(1);
  d.dmono = r.dmono;
  for (auto& [p, k] : r.dpolys) d.num = pmul(d.num, ppow(p, k));
  return poly_expr(den_poly(r));
}

std::vector<Expr> side_conditions(const Expr& e) {
  RatFun r = conv(e);
  std::vector<Expr> out;
  for (const auto& [k, x] : r.dmono) out.push_back(k);
  for (const auto& [p, x] : r.dpolys) out.push_back(poly_expr(p));
  return out;
}

PositiveScope::PositiveScope(const std::set<std::string>& names) : saved_(g_positive) {
  g_positive.insert(names.begin(), names.end());
  g_cache.clear();
}

PositiveScope::~PositiveScope() {
  g_positive = saved_;
  g_cache.clear();
}

Expr derive(const Expr& e, const std::function<Expr(const Expr& leaf)>& leaf) {
  Deriver dv{leaf, {}, {}};
  return dv.d(e);
}

Expr diff_partial(const Expr& e, const Expr& wrt) {
  return normalize(derive(e, [&](const Expr& x) { return x == wrt ? Expr(1) : Expr(); }));
}

bool PowerProductLess::operator()(const PowerProduct& a, const PowerProduct& b) const {
  std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (int c = compare(a[i].first, b[i].first)) return c < 0;
    if (a[i].second != b[i].second) return a[i].second < b[i].second;
  }
  return a.size() < b.size();
}

CoefficientMap split_coefficients(const Expr& e, const std::function<bool(const Expr&)>& is_var,
                                  bool numerator_only) {
  RatFun r = conv(e);
  auto nested = [&](const Expr& k) {
    bool found = false;
    for (const auto& a : k.args())
      visit(a, [&](const Expr& x) { found = found || is_var(x); });
    return found;
  };
  if (!numerator_only) {
    for (const auto& [k, x] : r.dmono)
      if (is_var(k) || nested(k))
        throw UnsupportedForm("split variable in denominator: " + to_string(k));
    for (const auto& [p, x] : r.dpolys)
      for (const auto& [m, c] : p)
        for (const auto& [k, y] : m)
          if (is_var(k) || nested(k))
            throw UnsupportedForm("split variable in denominator: " + to_string(k));
  }
  std::map<PowerProduct, Poly, PowerProductLess> groups;
  for (const auto& [m, c] : r.num) {
    PowerProduct pp;
    Mono rest;
    for (const auto& [k, x] : m) {
      if (is_var(k)) {
        pp.emplace_back(k, x);
      } else {
        if (nested(k)) throw UnsupportedForm("split variable nested in " + to_string(k));
        rest.emplace_back(k, x);
      }
    }
    padd_term(groups[pp], rest, c);
  }
  CoefficientMap out;
  for (auto& [pp, p] : groups) {
    if (p.empty()) continue;
    RatFun cf = rpoly(p);
    if (!numerator_only) {
      cf.dmono = r.dmono;
      cf.dpolys = r.dpolys;
      simplify(cf);
    }
    out.emplace(pp, to_expr(cf));
  }
  return out;
}

std::vector<Expr> poly_coefficients(const Expr& e, const Expr& x) {
  CoefficientMap cm = split_coefficients(e, [&](const Expr& k) { return k == x; });
  std::vector<Expr> out;
  for (const auto& [pp, c] : cm) {
    std::size_t deg = pp.empty() ? 0 : static_cast<std::size_t>(pp[0].second);
    if (out.size() <= deg) out.resize(deg + 1);
    out[deg] = c;
  }
  return out;
}

ExprSet kernels(const Expr& e) {
  RatFun r = conv(e);
  ExprSet out;
  for (const auto& [m, c] : r.num)
    for (const auto& [k, x] : m) out.insert(k);
  for (const auto& [k, x] : r.dmono) out.insert(k);
  for (const auto& [p, x] : r.dpolys)
    for (const auto& [m, c] : p)
      for (const auto& [k, y] : m) out.insert(k);
  return out;
}

}  // namespace subsym
