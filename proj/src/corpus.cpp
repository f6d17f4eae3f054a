#include "subsym/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "subsym/errors.hpp"
#include "subsym/normalize.hpp"

namespace subsym {

const std::map<std::string, std::string>& builtin_corpus();

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::vector<std::string> words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

struct Line {
  int no;
  std::string text;
};

// key = value, with the key split at its first dot.
struct KeyValue {
  std::string name, key, value;
};

KeyValue key_value(const Line& l, const std::string& origin) {
  auto eq = l.text.find('=');
  if (eq == std::string::npos) throw FormatError(origin + ":" + std::to_string(l.no) + ": expected 'name = value'");
  KeyValue kv;
  std::string lhs = trim(l.text.substr(0, eq));
  kv.value = trim(l.text.substr(eq + 1));
  auto dot = lhs.find('.');
  kv.name = trim(lhs.substr(0, dot));
  if (dot != std::string::npos) kv.key = trim(lhs.substr(dot + 1));
  if (kv.name.empty()) throw FormatError(origin + ":" + std::to_string(l.no) + ": empty name");
  return kv;
}

std::vector<Expr> parse_list(const std::string& text, const JetContext& ctx) {
  std::vector<Expr> out;
  for (const auto& part : split_top(text, ',')) out.push_back(normalize(ctx.parse(part)));
  return out;
}

// Reads "name(a, b, c)".
UnknownFunction parse_signature(const std::string& text, const JetContext& ctx) {
  UnknownFunction u;
  auto open = text.find('(');
  if (open == std::string::npos || text.back() != ')') throw FormatError("expected name(args) in '" + text + "'");
  u.name = trim(text.substr(0, open));
  for (const auto& a : split_top(text.substr(open + 1, text.size() - open - 2), ',')) u.args.push_back(ctx.parse(a));
  return u;
}

std::vector<Expr> zeros(std::size_t n) { return std::vector<Expr>(n, Expr(0)); }

void build_maps(CorpusEntry& e, const std::vector<Line>& lines, const std::string& origin) {
  const JetContext& src = e.system->ctx();
  std::map<std::string, std::map<std::string, std::string>> raw;
  std::vector<std::string> order;
  for (const auto& l : lines) {
    KeyValue kv = key_value(l, origin);
    if (!raw.count(kv.name)) order.push_back(kv.name);
    raw[kv.name][kv.key] = kv.value;
  }
  for (const auto& name : order) {
    auto& m = raw[name];
    if (m.count("catalog")) {
      auto w = words(m["catalog"]);
      std::vector<Expr> params;
      for (std::size_t i = 1; i < w.size(); ++i) params.push_back(src.parse(w[i]));
      PointMap T = catalog_map(w.at(0), src, params);
      T.name = name;
      e.maps.emplace(name, std::move(T));
      continue;
    }
    PointMap T;
    T.name = name;
    T.target.indep = words(m["vars"]);
    T.target.deps = words(m["deps"]);
    T.target.params = src.params;
    T.target.opaque = src.opaque;
    for (const auto& p : words(m["positive"])) T.target.positive.insert(p);
    T.forward_x = parse_list(m["forward_x"], src);
    T.forward_u = parse_list(m["forward_u"], src);
    T.inverse_x = parse_list(m["inverse_x"], T.target);
    T.inverse_u = parse_list(m["inverse_u"], T.target);
    if (T.forward_x.size() != T.target.indep.size() || T.forward_u.size() != T.target.deps.size() ||
        T.inverse_x.size() != src.indep.size() || T.inverse_u.size() != src.deps.size())
      throw FormatError(origin + ": map " + name + " has components of the wrong length");
    e.maps.emplace(name, std::move(T));
  }
}

void build_ansatz(CorpusEntry& e, const std::vector<Line>& lines, const std::string& origin) {
  const JetContext& src = e.system->ctx();
  std::map<std::string, std::map<std::string, std::string>> raw;
  for (const auto& l : lines) {
    KeyValue kv = key_value(l, origin);
    raw[kv.name][kv.key] = kv.value;
  }
  for (auto& [name, m] : raw) {
    CorpusAnsatz a;
    a.ctx = src;
    if (m.count("lambda")) a.lambda = m["lambda"];
    a.ctx.opaque[a.lambda] = static_cast<int>(src.indep.size() + src.deps.size());
    for (const auto& c : words(m["constants"])) {
      a.ctx.params.push_back(c);
      a.constants.push_back(Expr::symbol(c));
    }
    for (const auto& sig : split_top(m["unknowns"], ',')) {
      UnknownFunction u = parse_signature(sig, a.ctx);
      a.ctx.opaque[u.name] = static_cast<int>(u.args.size());
      a.unknowns.push_back(std::move(u));
    }
    if (m.count("condition")) {
      if (m["condition"] == "subsymmetry")
        a.condition = Condition::Subsymmetry;
      else if (m["condition"] != "subsystem-symmetry")
        throw FormatError(origin + ": unknown condition " + m["condition"]);
    }
    if (m.count("char")) a.characteristic = EvoField{parse_list(m["char"], a.ctx)};
    if (m.count("xi") || m.count("eta")) {
      PointField p;
      p.xi = m.count("xi") ? parse_list(m["xi"], a.ctx) : zeros(src.indep.size());
      p.eta = m.count("eta") ? parse_list(m["eta"], a.ctx) : zeros(src.deps.size());
      a.point = p;
    }
    if (m.count("beta1")) a.beta1 = normalize(a.ctx.parse(m["beta1"]));
    if (m.count("beta")) a.beta = parse_list(m["beta"], a.ctx);
    e.ansatz.emplace(name, std::move(a));
  }
}

}  // namespace

std::vector<std::string> split_top(const std::string& text, char sep) {
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  for (char c : text) {
    if (c == '(' || c == '[' || c == '{') ++depth;
    if (c == ')' || c == ']' || c == '}') --depth;
    if (c == sep && depth == 0) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!trim(cur).empty() || !out.empty()) out.push_back(trim(cur));
  return out;
}

DecouplingAnsatz CorpusAnsatz::decoupling() const {
  DecouplingAnsatz d;
  d.field = point ? *point : PointField::zero(ctx);
  d.beta1 = beta1 ? *beta1 : Expr(0);
  d.constants = constants;
  for (const auto& u : unknowns) d.unknowns.insert(u.name);
  d.lambda = lambda;
  d.run_branches = !beta;
  if (beta) d.candidates.push_back({*beta, d.field});
  return d;
}

const EvoField& CorpusEntry::field(const std::string& name) const {
  auto it = fields.find(name);
  if (it == fields.end()) throw Error(id + ": no field named " + name);
  return it->second;
}

const SubSystem& CorpusEntry::subsystem(const std::string& name) const {
  auto it = subsystems.find(name);
  if (it == subsystems.end()) throw Error(id + ": no sub-system named " + name);
  return it->second;
}

const std::vector<Expr>& CorpusEntry::law(const std::string& name) const {
  auto it = laws.find(name);
  if (it == laws.end()) throw Error(id + ": no conservation law named " + name);
  return it->second;
}

const PointMap& CorpusEntry::map(const std::string& name) const {
  auto it = maps.find(name);
  if (it == maps.end()) throw Error(id + ": no map named " + name);
  return it->second;
}

SubSystem parse_multipliers(const std::string& text, std::shared_ptr<const DiffSystem> sys) {
  const JetContext& ctx = sys->ctx();
  SymbolTable table = ctx.table();
  std::map<std::string, int> eq_ops, dir_ops;
  for (std::size_t i = 0; i < sys->size(); ++i) {
    std::string n = "D" + std::to_string(i + 1);
    eq_ops[n] = static_cast<int>(i);
    table.extra.insert(n);
  }
  for (std::size_t j = 0; j < ctx.indep.size(); ++j) {
    std::string n = "D" + ctx.indep[j];
    dir_ops[n] = static_cast<int>(j);
    table.extra.insert(n);
  }
  SubSystem ss;
  ss.parent = sys;
  for (const auto& row_text : split_top(text, ';')) {
    if (row_text.empty()) continue;
    Expr row = normalize(parse(row_text, table));
    auto is_op = [&](const Expr& k) {
      return k.kind() == Kind::Symbol && (eq_ops.count(k.name()) || dir_ops.count(k.name()));
    };
    CoefficientMap cm = split_coefficients(row, is_op);
    std::vector<std::map<MultiIndex, Expr>> xi(sys->size());
    for (const auto& [pp, c] : cm) {
      int eq = -1;
      std::vector<int> dirs;
      for (const auto& [k, p] : pp) {
        if (eq_ops.count(k.name())) {
          if (eq >= 0 || p != 1) throw FormatError("each multiplier term must contain exactly one equation operator");
          eq = eq_ops[k.name()];
        } else {
          for (int n = 0; n < p; ++n) dirs.push_back(dir_ops[k.name()]);
        }
      }
      if (eq < 0) throw FormatError("multiplier term without an equation operator in '" + row_text + "'");
      MultiIndex J(dirs);
      auto& slot = xi[static_cast<std::size_t>(eq)][J];
      slot = normalize(slot + c);
    }
    ss.xi.push_back(std::move(xi));
  }
  if (ss.xi.empty()) throw FormatError("empty multiplier list");
  return ss;
}

CorpusEntry parse_entry(std::string_view text, const std::string& origin) {
  std::istringstream in{std::string(text)};
  std::map<std::string, std::vector<Line>> sections;
  std::vector<Line> header;
  std::string section;
  bool saw_version = false;
  CorpusEntry e;
  int no = 0;
  static const std::set<std::string> known{"vars",   "deps",       "params", "opaque", "positive", "defs",   "equations",
                                           "fields", "subsystems", "laws",   "maps",   "ansatz",   "expect"};
  for (std::string raw; std::getline(in, raw);) {
    ++no;
    auto hash = raw.find('#');
    std::string l = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (l.empty()) continue;
    if (!saw_version) {
      auto w = words(l);
      if (w.size() != 2 || w[0] != "subsym") throw FormatError(origin + ":" + std::to_string(no) + ": expected 'subsym <version>'");
      e.version = std::stoi(w[1]);
      if (e.version != 1) throw FormatError(origin + ": unsupported format version " + w[1]);
      saw_version = true;
      continue;
    }
    if (l.front() == '[' && l.back() == ']') {
      section = trim(l.substr(1, l.size() - 2));
      if (!known.count(section)) throw FormatError(origin + ":" + std::to_string(no) + ": unknown section [" + section + "]");
      sections[section];
      continue;
    }
    (section.empty() ? header : sections[section]).push_back({no, l});
  }
  if (!saw_version) throw FormatError(origin + ": empty system definition");
  for (const auto& l : header) {
    KeyValue kv = key_value(l, origin);
    if (kv.name == "id")
      e.id = kv.value;
    else if (kv.name == "title")
      e.title = kv.value;
    else
      throw FormatError(origin + ":" + std::to_string(l.no) + ": unknown header key " + kv.name);
  }
  auto all_words = [&](const std::string& s) {
    std::vector<std::string> out;
    for (const auto& l : sections[s])
      for (auto& w : words(l.text)) out.push_back(w);
    return out;
  };
  auto where = [&](const Line& l) { return origin + ":" + std::to_string(l.no) + ": "; };

  JetContext ctx;
  ctx.indep = all_words("vars");
  ctx.deps = all_words("deps");
  ctx.params = all_words("params");
  for (const auto& w : all_words("opaque")) {
    auto slash = w.find('/');
    if (slash == std::string::npos) throw FormatError(origin + ": opaque function '" + w + "' needs name/arity");
    ctx.opaque[w.substr(0, slash)] = std::stoi(w.substr(slash + 1));
  }
  for (const auto& w : all_words("positive")) ctx.positive.insert(w);
  if (ctx.indep.empty() || ctx.deps.empty()) throw FormatError(origin + ": [vars] and [deps] are required");

  try {
    for (const auto& l : sections["defs"]) {
      KeyValue kv = key_value(l, origin);
      ctx.defs[kv.name] = ctx.parse(kv.value);
    }
    std::vector<Expr> eqs;
    std::vector<std::optional<Expr>> leads;
    for (const auto& l : sections["equations"]) {
      auto parts = split_top(l.text, ';');
      eqs.push_back(normalize(ctx.parse(parts.at(0))));
      leads.push_back(parts.size() > 1 ? std::optional<Expr>(ctx.parse(parts[1])) : std::nullopt);
    }
    if (eqs.empty()) throw FormatError(origin + ": no equations");
    fit_max_order(ctx, eqs);
    e.system = std::make_shared<const DiffSystem>(ctx, eqs, leads);

    std::map<std::string, std::map<std::string, std::string>> fraw;
    std::vector<std::string> forder;
    for (const auto& l : sections["fields"]) {
      KeyValue kv = key_value(l, origin);
      if (!fraw.count(kv.name)) forder.push_back(kv.name);
      fraw[kv.name][kv.key] = kv.value;
    }
    for (const auto& name : forder) {
      auto& m = fraw[name];
      if (m.count("char")) {
        EvoField f{parse_list(m["char"], ctx)};
        if (f.alpha.size() != ctx.deps.size()) throw FormatError(origin + ": field " + name + " needs one characteristic per dependent variable");
        e.fields.emplace(name, f);
        continue;
      }
      PointField p;
      p.xi = m.count("xi") ? parse_list(m["xi"], ctx) : zeros(ctx.indep.size());
      p.eta = m.count("eta") ? parse_list(m["eta"], ctx) : zeros(ctx.deps.size());
      if (p.xi.size() != ctx.indep.size() || p.eta.size() != ctx.deps.size())
        throw FormatError(origin + ": field " + name + " has components of the wrong length");
      e.point_fields.emplace(name, p);
      e.fields.emplace(name, canonicalize(p, ctx));
    }
    for (const auto& l : sections["subsystems"]) {
      KeyValue kv = key_value(l, origin);
      e.subsystems.emplace(kv.name, parse_multipliers(kv.value, e.system));
      e.subsystem_text.emplace(kv.name, kv.value);
    }
    for (const auto& l : sections["laws"]) {
      KeyValue kv = key_value(l, origin);
      auto f = parse_list(kv.value, ctx);
      if (f.size() != ctx.indep.size()) throw FormatError(where(l) + "law " + kv.name + " needs one flux per independent variable");
      e.laws.emplace(kv.name, f);
    }
    build_maps(e, sections["maps"], origin);
    build_ansatz(e, sections["ansatz"], origin);
  } catch (const FormatError&) {
    throw;
  } catch (const ParseError& ex) {
    throw ParseError(origin + ": " + ex.what(), ex.position());
  } catch (const UnknownSymbol& ex) {
    throw FormatError(origin + ": " + ex.what());
  }
  for (const auto& l : sections["expect"]) e.expect.push_back(l.text);
  return e;
}

CorpusEntry load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_entry(ss.str(), path);
}

std::vector<std::string> corpus_ids() {
  std::vector<std::string> out;
  for (const auto& [id, text] : builtin_corpus()) out.push_back(id);
  return out;
}

const std::string& corpus_text(const std::string& id) {
  const auto& c = builtin_corpus();
  auto it = c.find(id);
  if (it == c.end()) throw Error("unknown corpus id " + id);
  return it->second;
}

CorpusEntry load(const std::string& id) { return parse_entry(corpus_text(id), "corpus:" + id); }

CorpusEntry load_system(const std::string& spec) {
  if (spec.rfind("corpus:", 0) == 0) return load(spec.substr(7));
  return load_file(spec);
}

// ---------------------------------------------------------------- expectations

namespace {

struct Verdict {
  bool ok;
  std::string detail;
};

// Entries "i = expr" or "i,dirs = expr" or "r = expr".
struct GammaSpec {
  OperatorCoeffs gamma;
  Expr residual;
};

GammaSpec parse_gamma(const std::string& text, const JetContext& ctx) {
  GammaSpec g;
  for (const auto& item : split_top(text, ';')) {
    auto eq = item.find('=');
    if (eq == std::string::npos) throw FormatError("expected 'i[,dirs] = expr' in '" + item + "'");
    std::string lhs = trim(item.substr(0, eq));
    Expr value = normalize(ctx.parse(item.substr(eq + 1)));
    if (lhs == "r") {
      g.residual = value;
      continue;
    }
    auto parts = split_top(lhs, ',');
    int i = std::stoi(parts.at(0)) - 1;
    std::vector<int> dirs;
    if (parts.size() > 1)
      for (const auto& d : split_dirs(parts[1], ctx.indep)) dirs.push_back(ctx.indep_index(d));
    g.gamma[{i, MultiIndex(dirs)}] = value;
  }
  return g;
}

Verdict compare_gamma(const Decomposition& d, const GammaSpec& want, const JetContext& ctx) {
  std::set<std::pair<int, MultiIndex>> keys;
  for (const auto& [k, v] : d.gamma) keys.insert(k);
  for (const auto& [k, v] : want.gamma) keys.insert(k);
  for (const auto& k : keys) {
    auto a = d.gamma.count(k) ? d.gamma.at(k) : Expr(0);
    auto b = want.gamma.count(k) ? want.gamma.at(k) : Expr(0);
    if (!is_zero(a - b))
      return {false, "Gamma(" + std::to_string(k.first + 1) + "," + ctx.describe(k.second) + ") = " + to_string(a)};
  }
  if (!is_zero(d.residual - want.residual)) return {false, "residual " + to_string(d.residual)};
  return {true, ""};
}

bool equal_up_to_sign(const Expr& a, const Expr& b) { return is_zero(a - b) || is_zero(a + b); }

std::vector<Expr> beta_of(const SubSystem& ss) {
  if (ss.rows() != 1) throw Error("expected a single-row sub-system");
  std::vector<Expr> beta;
  for (const auto& m : ss.xi[0]) {
    Expr b;
    for (const auto& [J, c] : m) {
      if (!J.empty()) throw Error("expected multipliers without derivative operators");
      b = c;
    }
    beta.push_back(b);
  }
  return beta;
}

std::string join(const std::vector<Expr>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + to_string(v[i]);
  return s;
}

Verdict compare_list(const std::vector<Expr>& got, const std::vector<Expr>& want, bool on_shell, const DiffSystem& sys) {
  if (got.size() != want.size()) return {false, "expected " + std::to_string(want.size()) + " entries, got " + join(got)};
  for (std::size_t i = 0; i < got.size(); ++i) {
    Expr d = got[i] - want[i];
    if (on_shell) d = restrict(d, sys);
    if (!is_zero(d)) return {false, "entry " + std::to_string(i + 1) + " is " + to_string(got[i])};
  }
  return {true, join(got)};
}

EvoField ansatz_field(const CorpusAnsatz& a, const JetContext& ctx) {
  if (a.characteristic) return *a.characteristic;
  if (!a.point) throw Error("ansatz has no field");
  return lambda_field(*a.point, ctx, a.lambda);
}

DeterminingOptions ansatz_options(const CorpusAnsatz& a) {
  DeterminingOptions o;
  for (const auto& u : a.unknowns) o.unknowns.insert(u.name);
  if (a.point) o.arbitrary.insert(a.lambda);
  o.condition = a.condition;
  return o;
}

std::vector<Expr> ansatz_beta(const CorpusAnsatz& a) {
  if (a.beta) return *a.beta;
  if (a.beta1) return {*a.beta1, Expr(1)};
  throw Error("ansatz has no multipliers");
}

Verdict check_deform(const CorpusEntry& e, const std::vector<std::string>& w, const std::string& payload) {
  const DiffSystem& sys = *e.system;
  const EvoField& f = e.field(w.at(1));
  ConsLaw cl = verify_cl(e.law(w.at(2)), e.system);
  const std::string& mode = w.at(3);
  ConsLaw out;
  try {
    out = deform(f, cl);
  } catch (const PreconditionViolation& ex) {
    return {mode == "refused", ex.what()};
  } catch (const NotAConservationLaw& ex) {
    return {mode == "refused", std::string(ex.what()) + ": " + ex.residual()};
  }
  std::string fl = "fluxes " + join(out.fluxes);
  if (mode == "trivial") return {is_trivial(out), fl};
  if (mode == "nontrivial") return {!is_trivial(out), fl};
  if (mode == "fluxes") return compare_list(out.fluxes, parse_list(payload, sys.ctx()), false, sys);
  if (mode == "same") return {same_characteristic(out, verify_cl(e.law(w.at(4)), e.system)), fl};
  if (mode == "refused") return {false, fl};
  throw FormatError("unknown deform mode " + mode);
}

Verdict check_pipeline(const CorpusEntry& e, const std::vector<std::string>& w, const std::string& payload) {
  const PointMap& T = e.map(w.at(1));
  std::vector<Expr> beta = beta_of(e.subsystem(w.at(2)));
  std::optional<std::vector<Expr>> comp;
  std::shared_ptr<const DiffSystem> sys = e.system;
  for (std::size_t i = 3; i < w.size(); ++i) {
    if (w[i] == "complement") {
      comp = beta_of(e.subsystem(w.at(++i)));
    } else if (w[i] == "where") {
      const JetContext& ctx = sys->ctx();
      Expr lhs = ctx.parse(w.at(i + 1));
      if (w.at(i + 2) != "=") throw FormatError("expected 'where name = value'");
      Expr rhs = ctx.parse(w.at(i + 3));
      i += 3;
      std::vector<Expr> eqs;
      for (const auto& q : sys->exprs()) eqs.push_back(normalize(substitute(q, ExprMap{{lhs, rhs}})));
      for (auto& b : beta) b = normalize(substitute(b, ExprMap{{lhs, rhs}}));
      sys = std::make_shared<const DiffSystem>(ctx, eqs);
    } else {
      throw FormatError("unexpected '" + w[i] + "' in pipeline expectation");
    }
  }
  PipelineResult r = decouple_pipeline(*sys, beta, T, comp);
  std::vector<Expr> want;
  for (const auto& row : split_top(payload, ';')) want.push_back(normalize(T.target.parse(row)));
  Verdict v = compare_list(r.rows, want, false, *sys);
  if (!r.check.decoupled) return {false, "first row is not decoupled in " + r.free_var};
  return v;
}

Verdict run(const CorpusEntry& e, const std::vector<std::string>& w, const std::string& payload) {
  const DiffSystem& sys = *e.system;
  const JetContext& ctx = sys.ctx();
  const std::string& verb = w.at(0);
  auto need = [&](std::size_t n) {
    if (w.size() < n) throw FormatError("too few arguments for " + verb);
  };
  if (verb == "symmetry") {
    need(2);
    auto r = check_symmetry(e.field(w[1]), sys);
    return {r.holds, "residuals " + join(r.residuals)};
  }
  if (verb == "subsymmetry" || verb == "subsystem-symmetry") {
    need(3);
    auto r = verb == "subsymmetry" ? check_subsymmetry(e.field(w[1]), e.subsystem(w[2]))
                                   : check_subsystem_symmetry(e.field(w[1]), e.subsystem(w[2]));
    if (r.holds && !payload.empty()) {
      if (r.decompositions.empty()) return {false, "no decomposition"};
      return compare_gamma(r.decompositions[0], parse_gamma(payload, ctx), ctx);
    }
    return {r.holds, "residuals " + join(r.residuals)};
  }
  if (verb == "commutator") {
    need(4);
    EvoField c = commutator(e.field(w[1]), e.field(w[2]), ctx);
    auto r = check_subsymmetry(c, e.subsystem(w[3]));
    return {r.holds, "residuals " + join(r.residuals)};
  }
  if (verb == "classify") {
    need(4);
    std::string got = classification_name(classify(e.field(w[1]), e.subsystem(w[2])));
    return {got == w[3], got};
  }
  if (verb == "decompose") {
    need(3);
    Expr applied = apply(e.field(w[1]), sys[static_cast<std::size_t>(std::stoi(w[2]) - 1)], ctx);
    Decomposition d = decompose_on_ideal(applied, sys);
    if (!is_zero(reassemble(d, sys) - applied)) return {false, "reassembly differs"};
    return compare_gamma(d, parse_gamma(payload, ctx), ctx);
  }
  if (verb == "flow") {
    need(4);
    int order = std::stoi(w[2]);
    std::string u0;
    for (std::size_t i = 3; i < w.size(); ++i) u0 += w[i] + " ";
    Flow fl = flow_truncated(e.field(w[1]), parse_list(u0, ctx), order, ctx);
    for (const auto& item : split_top(payload, ';')) {
      auto eq = item.find('=');
      std::size_t i = static_cast<std::size_t>(std::stoi(item.substr(0, eq)) - 1);
      auto got = flow_residual(fl, sys[i], ctx);
      Verdict v = compare_list(got, parse_list(item.substr(eq + 1), ctx), false, sys);
      if (!v.ok) return {false, "equation " + std::to_string(i + 1) + ": " + v.detail};
    }
    return {true, "series " + join(fl.series)};
  }
  if (verb == "same-field") {
    need(3);
    EvoField acc = EvoField::zero(ctx);
    for (std::size_t i = 2; i < w.size(); ++i) {
      std::string n = w[i];
      int sign = 1;
      if (n[0] == '-' || n[0] == '+') {
        sign = n[0] == '-' ? -1 : 1;
        n = n.substr(1);
      }
      const EvoField& g = e.field(n);
      for (std::size_t a = 0; a < acc.alpha.size(); ++a) acc.alpha[a] = acc.alpha[a] + Expr(sign) * g.alpha[a];
    }
    return {same_field(e.field(w[1]), acc), ""};
  }
  if (verb == "determining") {
    need(3);
    const CorpusAnsatz& a = e.ansatz.at(w[1]);
    auto ds = determining_equations(ansatz_field(a, ctx), e.subsystem(w[2]), ansatz_options(a));
    std::vector<Expr> want;
    for (const auto& s : split_top(payload, ';'))
      if (!s.empty()) want.push_back(normalize(a.ctx.parse(s)));
    std::string got = join(ds.equations);
    if (want.size() != ds.equations.size()) return {false, got};
    for (const auto& q : want)
      if (std::none_of(ds.equations.begin(), ds.equations.end(), [&](const Expr& g) { return equal_up_to_sign(g, q); }))
        return {false, got};
    return {true, got};
  }
  if (verb == "admits") {
    need(2);
    const CorpusAnsatz& a = e.ansatz.at(w[1]);
    SubSystem ss = SubSystem::from_beta(e.system, ansatz_beta(a));
    auto ds = determining_equations(ansatz_field(a, ctx), ss, ansatz_options(a));
    std::vector<std::pair<const UnknownFunction*, Expr>> subs;
    for (const auto& item : split_top(payload, ',')) {
      auto eq = item.find('=');
      std::string n = trim(item.substr(0, eq));
      auto it = std::find_if(a.unknowns.begin(), a.unknowns.end(), [&](const UnknownFunction& u) { return u.name == n; });
      if (it == a.unknowns.end()) throw FormatError("unknown function " + n + " in admits");
      subs.push_back({&*it, a.ctx.parse(item.substr(eq + 1))});
    }
    for (const auto& q : ds.equations) {
      Expr r = q;
      for (const auto& [u, body] : subs) r = substitute_function(r, u->name, u->args, body);
      if (!is_zero(r)) return {false, "equation " + to_string(q) + " leaves " + to_string(normalize(r))};
    }
    return {true, std::to_string(ds.equations.size()) + " equations satisfied"};
  }
  if (verb == "detect" || verb == "solve") {
    need(3);
    const CorpusAnsatz& a = e.ansatz.at(w[1]);
    for (const auto& c : detect_decouplable(e.system, a.decoupling())) {
      if (c.branch != w[2]) continue;
      if (verb == "detect") {
        need(4);
        return {c.status == w[3], c.status + (c.certificate.empty() ? "" : ", certificate " + join(c.certificate))};
      }
      for (const auto& item : split_top(payload, ',')) {
        auto eq = item.find('=');
        Expr k = a.ctx.parse(item.substr(0, eq)), v = a.ctx.parse(item.substr(eq + 1));
        auto it = c.values.find(k);
        if (it == c.values.end() || !is_zero(it->second - v)) return {false, "no value " + item + " (" + c.status + ")"};
      }
      return {true, c.status};
    }
    return {false, "no branch " + w[2]};
  }
  if (verb == "lambda-symmetry") {
    need(3);
    auto it = e.point_fields.find(w[1]);
    if (it == e.point_fields.end()) throw Error("lambda-symmetry needs a point field");
    return {arbitrary_lambda_symmetry(it->second, e.subsystem(w[2])), ""};
  }
  if (verb == "decoupled") {
    need(3);
    auto r = is_decoupled(e.subsystem(w[1]), w[2]);
    return {r.decoupled, r.decoupled ? "" : "depends on " + join(r.offending)};
  }
  if (verb == "cl") {
    need(2);
    try {
      auto cl = verify_cl(e.law(w[1]), e.system);
      return {true, "characteristic " + join(cl.characteristic)};
    } catch (const NotAConservationLaw& ex) {
      return {false, "divergence on solutions " + ex.residual()};
    }
  }
  if (verb == "characteristic") {
    need(2);
    auto cl = verify_cl(e.law(w[1]), e.system);
    return compare_list(cl.characteristic, parse_list(payload, ctx), true, sys);
  }
  if (verb == "trivial") {
    need(2);
    auto cl = verify_cl(e.law(w[1]), e.system);
    return {is_trivial(cl), "characteristic " + join(cl.characteristic)};
  }
  if (verb == "deform") {
    need(4);
    return check_deform(e, w, payload);
  }
  if (verb == "compose") {
    need(4);
    std::vector<Expr> fl = e.law(w[3]);
    for (auto& F : fl) F = apply(e.field(w[1]), apply(e.field(w[2]), F, ctx), ctx);
    try {
      verify_cl(fl, e.system);
      return {true, "fluxes " + join(fl)};
    } catch (const NotAConservationLaw& ex) {
      return {false, "divergence on solutions " + ex.residual()};
    }
  }
  if (verb == "inverse-deform") {
    need(4);
    try {
      EvoField X = inverse_deform(e.law(w[1]), e.law(w[2]), ctx);
      if (w[3] != "field") return {false, "found " + join(X.alpha)};
      return compare_list(X.alpha, parse_list(payload, ctx), false, sys);
    } catch (const RankDeficient& ex) {
      return {w[3] == "rank-deficient", ex.what()};
    }
  }
  if (verb == "straightening") {
    need(3);
    auto it = e.point_fields.find(w[2]);
    if (it == e.point_fields.end()) throw Error("straightening needs a point field");
    return {verify_straightening(e.map(w[1]), it->second, ctx), ""};
  }
  if (verb == "inverse-map") {
    need(2);
    return {check_inverse(e.map(w[1]), ctx), ""};
  }
  if (verb == "pipeline") {
    need(3);
    return check_pipeline(e, w, payload);
  }
  throw FormatError("unknown expectation verb " + verb);
}

}  // namespace

ExpectationResult verify_expectation(const CorpusEntry& e, const std::string& line) {
  ExpectationResult r;
  r.line = line;
  std::string head = line, payload;
  auto colon = line.find(" : ");
  if (colon != std::string::npos) {
    head = line.substr(0, colon);
    payload = trim(line.substr(colon + 3));
  }
  auto w = words(head);
  bool negate = !w.empty() && w[0] == "not";
  if (negate) w.erase(w.begin());
  if (w.empty()) throw FormatError("empty expectation");
  Verdict v = run(e, w, payload);
  r.pass = negate ? !v.ok : v.ok;
  r.detail = v.detail;
  return r;
}

std::vector<ExpectationResult> verify_expectations(const CorpusEntry& e) {
  std::vector<ExpectationResult> out;
  for (const auto& line : e.expect) {
    try {
      out.push_back(verify_expectation(e, line));
    } catch (const std::exception& ex) {
      out.push_back({line, false, std::string("error: ") + ex.what()});
    }
  }
  return out;
}

}  // namespace subsym
