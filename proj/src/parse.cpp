#include "subsym/parse.hpp"

#include <algorithm>
#include <cctype>
#include <functional>

#include "subsym/errors.hpp"
#include "subsym/normalize.hpp"

namespace subsym {

bool SymbolTable::is_symbol(const std::string& n) const {
  return is_indep(n) || std::find(params.begin(), params.end(), n) != params.end() ||
         extra.count(n) > 0;
}

bool SymbolTable::is_dep(const std::string& n) const {
  return std::find(deps.begin(), deps.end(), n) != deps.end();
}

bool SymbolTable::is_indep(const std::string& n) const {
  return std::find(indep.begin(), indep.end(), n) != indep.end();
}

std::vector<std::string> split_dirs(const std::string& suffix,
                                    const std::vector<std::string>& indep) {
  // Longest-match first, backtracking.
  std::vector<std::string> names = indep;
  std::sort(names.begin(), names.end(),
            [](const std::string& a, const std::string& b) { return a.size() > b.size(); });
  std::vector<std::string> out;
  std::function<bool(std::size_t)> go = [&](std::size_t pos) {
    if (pos == suffix.size()) return true;
    for (const auto& n : names) {
      if (suffix.compare(pos, n.size(), n) == 0) {
        out.push_back(n);
        if (go(pos + n.size())) return true;
        out.pop_back();
      }
    }
    return false;
  };
  if (suffix.empty() || !go(0)) return {};
  return out;
}

namespace {

class Parser {
 public:
  Parser(std::string_view s, const SymbolTable& t) : s_(s), table_(t) {}

  Expr run() {
    Expr e = sum();
    skip();
    if (pos_ != s_.size()) throw ParseError(std::string("unexpected '") + s_[pos_] + "'", pos_);
    return e;
  }

 private:
  std::string_view s_;
  SymbolTable table_;
  std::size_t pos_ = 0;

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!eat(c)) {
      if (pos_ >= s_.size()) throw ParseError(std::string("expected '") + c + "', got end of input", pos_);
      throw ParseError(std::string("expected '") + c + "'", pos_);
    }
  }

  Expr sum() {
    Expr acc = term();
    for (;;) {
      if (eat('+'))
        acc = acc + term();
      else if (eat('-'))
        acc = acc - term();
      else
        return acc;
    }
  }

  Expr term() {
    Expr acc = unary();
    for (;;) {
      if (eat('*'))
        acc = acc * unary();
      else if (eat('/'))
        acc = acc / unary();
      else
        return acc;
    }
  }

  Expr unary() {
    if (eat('-')) return -unary();
    if (eat('+')) return unary();
    return power();
  }

  Expr power() {
    Expr base = primary();
    skip();
    if (eat('^')) {
      std::size_t at = pos_;
      Expr ex = normalize(unary());
      if (!ex.is_number()) throw ParseError("exponent must be a rational number", at);
      return Expr::pow(base, ex.value());
    }
    return base;
  }

  std::string ident() {
    skip();
    std::size_t b = pos_;
    if (pos_ >= s_.size() || !std::isalpha(static_cast<unsigned char>(s_[pos_])))
      throw ParseError("expected identifier", pos_);
    while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    return std::string(s_.substr(b, pos_ - b));
  }

  Expr number() {
    std::size_t b = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    std::string digits(s_.substr(b, pos_ - b));
    Rational q(digits);
    if (pos_ < s_.size() && s_[pos_] == '.') {
      ++pos_;
      std::size_t fb = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      std::string frac(s_.substr(fb, pos_ - fb));
      if (!frac.empty()) {
        mpz_class scale;
        mpz_ui_pow_ui(scale.get_mpz_t(), 10, frac.size());
        q += Rational(mpz_class(frac), scale);
      }
    }
    q.canonicalize();
    return Expr::number(q);
  }

  std::vector<Expr> call_args() {
    std::vector<Expr> args;
    expect('(');
    if (eat(')')) return args;
    do {
      args.push_back(sum());
    } while (eat(','));
    expect(')');
    return args;
  }

  Expr primary() {
    skip();
    if (pos_ >= s_.size()) throw ParseError("unexpected end of input", pos_);
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = sum();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (!std::isalpha(static_cast<unsigned char>(c)))
      throw ParseError(std::string("unexpected '") + c + "'", pos_);
    std::size_t at = pos_;
    std::string name = ident();
    // jet suffix
    if (pos_ < s_.size() && s_[pos_] == '_') {
      ++pos_;
      std::string suffix;
      if (pos_ < s_.size() && s_[pos_] == '{') {
        std::size_t close = s_.find('}', pos_);
        if (close == std::string_view::npos) throw ParseError("unterminated '{'", pos_);
        for (char ch : s_.substr(pos_ + 1, close - pos_ - 1))
          if (!std::isspace(static_cast<unsigned char>(ch))) suffix += ch;
        pos_ = close + 1;
      } else {
        std::size_t b = pos_;
        while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        suffix = std::string(s_.substr(b, pos_ - b));
      }
      if (table_.is_symbol(name + "_" + suffix)) return Expr::symbol(name + "_" + suffix);
      if (!table_.is_dep(name)) throw UnknownSymbol(name + "_" + suffix, at);
      auto dirs = split_dirs(suffix, table_.indep);
      if (dirs.empty()) throw ParseError("cannot read '" + suffix + "' as derivative directions", at);
      return Expr::jet(name, dirs);
    }
    skip();
    if (pos_ < s_.size() && s_[pos_] == '\'') {
      ++pos_;
      auto it = table_.opaque.find(name);
      if (it == table_.opaque.end()) throw UnknownSymbol(name, at);
      expect('[');
      std::vector<int> slots;
      do {
        skip();
        std::size_t sb = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (sb == pos_) throw ParseError("expected slot number", pos_);
        int k = std::stoi(std::string(s_.substr(sb, pos_ - sb)));
        if (k < 1 || k > it->second) throw ParseError("slot out of range", sb);
        slots.push_back(k - 1);
      } while (eat(','));
      expect(']');
      auto args = call_args();
      if (static_cast<int>(args.size()) != it->second)
        throw ParseError("wrong number of arguments to " + name, at);
      return Expr::opaque(name, slots, args);
    }
    if (pos_ < s_.size() && s_[pos_] == '(') return call(name, at);
    if (auto d = table_.defs.find(name); d != table_.defs.end()) return d->second;
    if (table_.is_dep(name)) return Expr::jet(name);
    if (table_.is_symbol(name)) return Expr::symbol(name);
    throw UnknownSymbol(name, at);
  }

  Expr call(const std::string& name, std::size_t at) {
    if (name == "Diff") return diff_call(at);
    if (name == "Int") return int_call(at);
    auto opq = table_.opaque.find(name);
    if (opq != table_.opaque.end()) {
      auto args = call_args();
      if (static_cast<int>(args.size()) != opq->second)
        throw ParseError("wrong number of arguments to " + name, at);
      return Expr::opaque(name, {}, args);
    }
    static const std::map<std::string, Fn> unary_fns{
        {"sin", Fn::Sin}, {"cos", Fn::Cos}, {"tan", Fn::Tan}, {"cot", Fn::Cot},
        {"exp", Fn::Exp}, {"ln", Fn::Ln},   {"log", Fn::Ln}};
    auto args = call_args();
    auto uf = unary_fns.find(name);
    if (uf != unary_fns.end()) {
      if (args.size() != 1) throw ParseError(name + " takes one argument", at);
      return Expr::func(uf->second, args);
    }
    if (name == "sqrt") {
      if (args.size() != 1) throw ParseError("sqrt takes one argument", at);
      return sqrt(args[0]);
    }
    if (name == "diff") {
      if (args.size() != 2 || (args[1].kind() != Kind::Symbol && args[1].kind() != Kind::Jet))
        throw ParseError("diff takes an expression and a variable", at);
      return diff_partial(args[0], args[1]);
    }
    if (name == "arctan") {
      if (args.size() == 1) return arctan(Expr(1), args[0]);
      if (args.size() == 2) return arctan(args[0], args[1]);
      throw ParseError("arctan takes one or two arguments", at);
    }
    throw UnknownSymbol(name, at);
  }

  Expr diff_call(std::size_t at) {
    expect('(');
    std::string var = ident();
    if (!table_.is_dep(var)) throw UnknownSymbol(var, at);
    std::vector<std::string> dirs;
    while (eat(',')) {
      std::size_t p = pos_;
      std::string d = ident();
      if (!table_.is_indep(d)) throw UnknownSymbol(d, p);
      dirs.push_back(d);
    }
    expect(')');
    return Expr::jet(var, dirs);
  }

  // Text of the next top-level comma-separated argument starting at pos_.
  std::string_view peek_arg(std::size_t from) const {
    int depth = 0;
    std::size_t i = from;
    for (; i < s_.size(); ++i) {
      char ch = s_[i];
      if (ch == '(' || ch == '[' || ch == '{') ++depth;
      if (ch == ')' || ch == ']' || ch == '}') {
        if (depth == 0) break;
        --depth;
      }
      if (ch == ',' && depth == 0) break;
    }
    return s_.substr(from, i - from);
  }

  static std::string trim(std::string_view v) {
    std::size_t b = 0, e = v.size();
    while (b < e && std::isspace(static_cast<unsigned char>(v[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(v[e - 1]))) --e;
    return std::string(v.substr(b, e - b));
  }

  Expr int_call(std::size_t at) {
    expect('(');
    skip();
    std::string first = trim(peek_arg(pos_));
    std::size_t after_first = pos_ + peek_arg(pos_).size();
    if (after_first >= s_.size() || s_[after_first] != ',') throw ParseError("Int needs two or three arguments", at);
    std::string second = trim(peek_arg(after_first + 1));
    std::size_t after_second = after_first + 1 + peek_arg(after_first + 1).size();
    bool three = after_second < s_.size() && s_[after_second] == ',';
    if (!three) {
      auto it = table_.opaque.find(first);
      if (it == table_.opaque.end() || it->second != 1)
        throw ParseError("Int(F, u) needs a unary function F", at);
      pos_ = after_first + 1;
      Expr upper = sum();
      expect(')');
      Expr s = Expr::symbol("s");
      return Expr::integral(Expr::opaque(first, {}, {s}), "s", upper);
    }
    SymbolTable inner = table_;
    inner.extra.insert(second);
    Parser body_parser(s_, inner);
    body_parser.pos_ = pos_;
    Expr body = body_parser.sum();
    pos_ = body_parser.pos_;
    expect(',');
    std::string var = ident();
    expect(',');
    Expr upper = sum();
    expect(')');
    return Expr::integral(body, var, upper);
  }
};

}  // namespace

Expr parse(std::string_view text, const SymbolTable& table) {
  Parser p(text, table);
  return p.run();
}

}  // namespace subsym
