// subsym: command-line front end for the jet-calculus kernel.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "subsym/corpus.hpp"
#include "subsym/errors.hpp"
#include "subsym/normalize.hpp"

using json = nlohmann::ordered_json;
using namespace subsym;

namespace {

constexpr const char* kSchema = "subsym-report/1";

enum Exit { kOk = 0, kFailed = 1, kUsage = 2, kParse = 3 };

class UsageError : public Error {
 public:
  using Error::Error;
};

struct Report {
  json doc = json::object();
  std::vector<std::string> text;
  bool ok = true;

  void verdict(const std::string& name, bool holds, json extra = json::object()) {
    extra["name"] = name;
    extra["holds"] = holds;
    doc["verdicts"].push_back(extra);
    text.push_back(std::string(holds ? "holds  " : "fails  ") + name);
    ok = ok && holds;
  }
  void line(const std::string& s) { text.push_back(s); }
};

std::string str(const Expr& e) { return to_string(e); }

json list(const std::vector<Expr>& v) {
  json a = json::array();
  for (const auto& e : v) a.push_back(str(e));
  return a;
}

std::string joined(const std::vector<Expr>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + str(v[i]);
  return s;
}

std::string digest(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct Common {
  std::string system;
  std::string json_path;
};

struct Loaded {
  CorpusEntry entry;
  std::string source_text;
};

Loaded load_entry(const std::string& spec) {
  if (spec.empty()) throw UsageError("--system is required");
  Loaded l;
  if (spec.rfind("corpus:", 0) == 0) {
    l.source_text = corpus_text(spec.substr(7));
  } else {
    std::ifstream in(spec);
    if (!in) throw UsageError("cannot read " + spec);
    std::stringstream ss;
    ss << in.rdbuf();
    l.source_text = ss.str();
  }
  l.entry = parse_entry(l.source_text, spec);
  return l;
}

EvoField resolve_field(const CorpusEntry& e, const std::string& name, const std::string& chr) {
  if (!chr.empty()) {
    std::vector<Expr> a;
    for (const auto& part : split_top(chr, ',')) a.push_back(normalize(e.system->ctx().parse(part)));
    if (a.size() != e.system->ctx().deps.size()) throw UsageError("--char needs one entry per dependent variable");
    return EvoField{a};
  }
  if (name.empty()) throw UsageError("--field or --char is required");
  if (!e.fields.count(name)) throw UsageError("no field named " + name);
  return e.fields.at(name);
}

SubSystem resolve_sub(const CorpusEntry& e, const std::string& text) {
  if (text.empty()) throw UsageError("--sub is required");
  if (e.subsystems.count(text)) return e.subsystems.at(text);
  return parse_multipliers(text, e.system);
}

std::vector<Expr> resolve_law(const CorpusEntry& e, const std::string& name) {
  if (e.laws.count(name)) return e.laws.at(name);
  if (name.find(',') != std::string::npos) {
    std::vector<Expr> f;
    for (const auto& part : split_top(name, ',')) f.push_back(normalize(e.system->ctx().parse(part)));
    if (f.size() != e.system->ctx().indep.size()) throw UsageError("fluxes need one entry per independent variable");
    return f;
  }
  throw UsageError("no conservation law named " + name);
}

json gamma_table(const Decomposition& d, const JetContext& ctx) {
  json t = json::array();
  for (const auto& [k, g] : d.gamma)
    t.push_back({{"equation", k.first + 1}, {"operator", k.second.empty() ? "1" : "D_" + ctx.describe(k.second)}, {"coefficient", str(g)}});
  return t;
}

void report_invariance(Report& r, const std::string& name, const InvarianceReport& inv, const JetContext& ctx) {
  json extra;
  extra["residuals"] = list(inv.residuals);
  json gammas = json::array();
  for (const auto& d : inv.decompositions) gammas.push_back(gamma_table(d, ctx));
  extra["gamma"] = gammas;
  extra["side_conditions"] = list(inv.side_conditions);
  if (!inv.note.empty()) extra["note"] = inv.note;
  r.verdict(name, inv.holds, extra);
  for (std::size_t i = 0; i < inv.residuals.size(); ++i) {
    r.line("  row " + std::to_string(i + 1) + " residual on solutions: " + str(inv.residuals[i]));
    if (i < inv.decompositions.size())
      for (const auto& [k, g] : inv.decompositions[i].gamma)
        r.line("    Gamma(" + std::to_string(k.first + 1) + (k.second.empty() ? "" : ", D_" + ctx.describe(k.second)) +
               ") = " + str(g));
  }
  if (!inv.side_conditions.empty()) r.line("  valid where nonzero: " + joined(inv.side_conditions));
}

json law_json(const ConsLaw& cl) {
  return {{"fluxes", list(cl.fluxes)}, {"characteristic", list(cl.characteristic)}, {"trivial", is_trivial(cl)}};
}

// ---------------------------------------------------------------- commands

struct Args {
  std::string field, chr, sub, cl, source, target, u0, ansatz, map, ansatz_args, id;
  int order = 2;
  int beta_order = 0;
  bool verify = false;
};

void cmd_check_sym(Report& r, const CorpusEntry& e, const Args& a) {
  EvoField f = resolve_field(e, a.field, a.chr);
  report_invariance(r, "symmetry", check_symmetry(f, *e.system), e.system->ctx());
}

void cmd_check_subsym(Report& r, const CorpusEntry& e, const Args& a) {
  EvoField f = resolve_field(e, a.field, a.chr);
  SubSystem ss = resolve_sub(e, a.sub);
  report_invariance(r, "subsymmetry", check_subsymmetry(f, ss), e.system->ctx());
}

void cmd_classify(Report& r, const CorpusEntry& e, const Args& a) {
  EvoField f = resolve_field(e, a.field, a.chr);
  SubSystem ss = resolve_sub(e, a.sub);
  Classification c = classify(f, ss);
  r.doc["classification"] = classification_name(c);
  r.line("classification: " + classification_name(c));
  r.verdict("subsymmetry", c != Classification::NotSubsymmetry, {{"classification", classification_name(c)}});
}

void cmd_determine(Report& r, const CorpusEntry& e, const Args& a) {
  DeterminingSystem ds;
  if (!a.ansatz.empty()) {
    if (!e.ansatz.count(a.ansatz)) throw UsageError("no ansatz named " + a.ansatz);
    const CorpusAnsatz& an = e.ansatz.at(a.ansatz);
    DeterminingOptions o;
    for (const auto& u : an.unknowns) o.unknowns.insert(u.name);
    o.condition = an.condition;
    EvoField f;
    if (an.characteristic) {
      f = *an.characteristic;
    } else if (an.point) {
      f = lambda_field(*an.point, e.system->ctx(), an.lambda);
      o.arbitrary.insert(an.lambda);
    } else {
      throw UsageError("ansatz " + a.ansatz + " has no field");
    }
    SubSystem ss = !a.sub.empty() ? resolve_sub(e, a.sub)
                   : an.beta      ? SubSystem::from_beta(e.system, *an.beta)
                                  : SubSystem::from_beta(e.system, {an.beta1.value_or(Expr(0)), Expr(1)});
    ds = determining_equations(f, ss, o);
  } else {
    EvoField f = resolve_field(e, a.field, a.chr);
    DeterminingOptions o;
    for (const auto& [name, arity] : e.system->ctx().opaque) {
      (void)arity;
      o.unknowns.insert(name);
    }
    ds = determining_equations(f, resolve_sub(e, a.sub), o);
  }
  r.doc["equations"] = list(ds.equations);
  r.doc["split"] = list(ds.split);
  r.line("determining equations (" + std::to_string(ds.equations.size()) + "):");
  for (const auto& q : ds.equations) r.line("  " + str(q) + " = 0");
  r.line("split on: " + (ds.split.empty() ? std::string("(nothing)") : joined(ds.split)));
}

void cmd_decouple(Report& r, const CorpusEntry& e, const Args& a) {
  const JetContext& ctx = e.system->ctx();
  if (a.beta_order != 0) throw UsageError("only --beta-order 0 is supported");
  DecouplingAnsatz d;
  if (!a.ansatz.empty()) {
    if (!e.ansatz.count(a.ansatz)) throw UsageError("no ansatz named " + a.ansatz);
    d = e.ansatz.at(a.ansatz).decoupling();
  } else {
    std::vector<std::string> names;
    if (a.ansatz_args.empty()) {
      for (const auto& v : ctx.indep) names.push_back(v);
      for (const auto& v : ctx.deps) names.push_back(v);
    } else {
      for (const auto& v : split_top(a.ansatz_args, ',')) names.push_back(v);
    }
    std::vector<Expr> args;
    for (const auto& n : names) args.push_back(ctx.parse(n));
    auto fn = [&](const std::string& n) {
      d.unknowns.insert(n);
      return Expr::opaque(n, {}, args);
    };
    for (std::size_t i = 0; i < ctx.indep.size(); ++i) d.field.xi.push_back(fn("xi_" + ctx.indep[i]));
    for (std::size_t b = 0; b < ctx.deps.size(); ++b) d.field.eta.push_back(fn("eta_" + ctx.deps[b]));
    d.beta1 = fn("beta1");
  }
  json certs = json::array();
  bool any = false;
  std::optional<PointMap> T;
  if (!a.map.empty()) {
    if (e.maps.count(a.map)) {
      T = e.maps.at(a.map);
    } else {
      std::vector<Expr> none;
      T = catalog_map(a.map, ctx, none);
    }
  }
  for (const auto& c : detect_decouplable(e.system, d)) {
    json j{{"branch", c.branch}, {"status", c.status}, {"beta", list(c.beta)}, {"xi", list(c.field.xi)},
           {"eta", list(c.field.eta)}};
    if (c.free_var) j["free_variable"] = *c.free_var;
    if (!c.certificate.empty()) j["certificate"] = list(c.certificate);
    if (!c.remaining.empty()) j["remaining"] = list(c.remaining);
    r.line(c.branch + ": " + c.status + "  beta = (" + joined(c.beta) + ")");
    if (!c.certificate.empty()) r.line("  inconsistent: " + joined(c.certificate));
    for (const auto& q : c.remaining) r.line("  open: " + str(q) + " = 0");
    if (c.status == "verified") {
      any = true;
      if (T) {
        bool straight = verify_straightening(*T, c.field, ctx);
        PipelineResult p = decouple_pipeline(*e.system, c.beta, *T);
        j["map"] = T->name;
        j["straightening"] = straight;
        j["rows"] = list(p.rows);
        j["decoupled"] = p.check.decoupled;
        j["free_variable"] = p.free_var;
        r.line("  map " + T->name + (straight ? " straightens the field" : " does not straighten the field"));
        for (const auto& row : p.rows) r.line("    " + str(row) + " = 0");
        r.line(std::string("  first row ") + (p.check.decoupled ? "is" : "is not") + " decoupled in " + p.free_var);
        any = any && straight && p.check.decoupled;
      }
    }
    certs.push_back(j);
  }
  r.doc["certificates"] = certs;
  r.verdict("decouplable", any);
}

void cmd_verify_cl(Report& r, const CorpusEntry& e, const Args& a) {
  try {
    ConsLaw cl = verify_cl(resolve_law(e, a.cl), e.system);
    r.verdict("conservation-law", true, law_json(cl));
    r.line("  characteristic: " + joined(cl.characteristic));
    r.line(std::string("  ") + (is_trivial(cl) ? "trivial" : "nontrivial"));
  } catch (const NotAConservationLaw& ex) {
    r.verdict("conservation-law", false, {{"residual", ex.residual()}});
    r.line("  divergence on solutions: " + ex.residual());
  }
}

void cmd_deform(Report& r, const CorpusEntry& e, const Args& a) {
  EvoField f = resolve_field(e, a.field, a.chr);
  ConsLaw cl = verify_cl(resolve_law(e, a.cl), e.system);
  try {
    ConsLaw out = deform(f, cl);
    r.verdict("deformation", true, law_json(out));
    r.line("  fluxes: " + joined(out.fluxes));
    r.line("  characteristic: " + joined(out.characteristic));
    r.line(std::string("  ") + (is_trivial(out) ? "trivial conservation law" : "nontrivial conservation law"));
  } catch (const PreconditionViolation& ex) {
    r.verdict("deformation", false, {{"error", ex.what()}});
    r.line(std::string("  refused: ") + ex.what());
  }
}

void cmd_inverse_deform(Report& r, const CorpusEntry& e, const Args& a) {
  const JetContext& ctx = e.system->ctx();
  try {
    EvoField X = inverse_deform(resolve_law(e, a.source), resolve_law(e, a.target), ctx);
    r.verdict("inverse-deformation", true, {{"field", list(X.alpha)}});
    for (std::size_t b = 0; b < X.alpha.size(); ++b) r.line("  alpha[" + ctx.deps[b] + "] = " + str(X.alpha[b]));
  } catch (const RankDeficient& ex) {
    r.verdict("inverse-deformation", false, {{"error", "RankDeficient"}, {"message", ex.what()}});
    r.line(std::string("  RankDeficient: ") + ex.what());
  } catch (const NonFunctionFluxes& ex) {
    r.verdict("inverse-deformation", false, {{"error", "NonFunctionFluxes"}, {"message", ex.what()}});
    r.line(std::string("  NonFunctionFluxes: ") + ex.what());
  }
}

void cmd_flow(Report& r, const CorpusEntry& e, const Args& a) {
  const JetContext& ctx = e.system->ctx();
  EvoField f = resolve_field(e, a.field, a.chr);
  if (a.u0.empty()) throw UsageError("--u0 is required");
  std::vector<Expr> u0;
  for (const auto& part : split_top(a.u0, ',')) u0.push_back(ctx.parse(part));
  Flow fl = flow_truncated(f, u0, a.order, ctx);
  r.doc["series"] = list(fl.series);
  json res = json::array();
  for (std::size_t b = 0; b < fl.series.size(); ++b) r.line("exp(" + str(fl.eps) + " X) " + ctx.deps[b] + " = " + str(fl.series[b]) + " + O(" + str(fl.eps) + "^" + std::to_string(a.order + 1) + ")");
  for (std::size_t i = 0; i < e.system->size(); ++i) {
    auto c = flow_residual(fl, (*e.system)[i], ctx);
    res.push_back(list(c));
    std::string s;
    for (std::size_t k = 0; k < c.size(); ++k)
      if (!is_zero(c[k])) s += (s.empty() ? "" : " + ") + std::string("(") + str(c[k]) + ")*" + str(fl.eps) + "^" + std::to_string(k);
    r.line("Delta_" + std::to_string(i + 1) + " = " + (s.empty() ? "0" : s) + " + O(" + str(fl.eps) + "^" + std::to_string(a.order + 1) + ")");
  }
  r.doc["residuals"] = res;
}

void cmd_telegraph(Report& r) {
  for (const auto& c : telegraph_catalog()) {
    json extra{{"F", c.F}, {"G", c.G}, {"fluxes", list(c.fluxes)}, {"field", list(c.field.alpha)},
               {"law_verified", c.law_verified}, {"field_deforms", c.field_deforms}};
    if (!c.note.empty()) extra["note"] = c.note;
    r.verdict(c.name, c.law_verified && c.field_deforms, extra);
    r.line("  F = " + c.F + ", G = " + c.G + (c.law_verified ? "; law verified" : "; law fails") +
           (c.field_deforms ? "; field deforms Delta_1 to it" : ""));
  }
}

void cmd_corpus_list(Report& r) {
  json ids = json::array();
  for (const auto& id : corpus_ids()) {
    CorpusEntry e = load(id);
    ids.push_back({{"id", id}, {"title", e.title}});
    r.line(id + "  " + e.title);
  }
  r.doc["entries"] = ids;
}

void cmd_corpus_show(Report& r, const Args& a) {
  if (a.id.empty()) throw UsageError("corpus show needs an id");
  const std::string& text = corpus_text(a.id);
  r.doc["id"] = a.id;
  r.doc["text"] = text;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) r.line(l);
  if (a.verify) {
    CorpusEntry e = load(a.id);
    for (const auto& x : verify_expectations(e)) r.verdict(x.line, x.pass, {{"detail", x.detail}});
  }
}

void cmd_corpus_verify(Report& r, const Args& a) {
  for (const auto& id : corpus_ids()) {
    if (!a.id.empty() && id != a.id) continue;
    CorpusEntry e = load(id);
    for (const auto& x : verify_expectations(e)) {
      r.verdict(id + ": " + x.line, x.pass, {{"detail", x.detail}});
      if (!x.pass) r.line("  " + x.detail);
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Symbolic jet calculus: symmetries, sub-symmetries, decoupling and conservation laws"};
  app.require_subcommand(1);
  Common common;
  Args a;
  auto add_common = [&](CLI::App* s, bool system) {
    if (system) s->add_option("--system", common.system, "corpus:<id> or a system file")->required();
    s->add_option("--json", common.json_path, "write the JSON report to this path ('-' for stdout)");
  };
  auto add_field = [&](CLI::App* s) {
    s->add_option("--field", a.field, "named field of the system");
    s->add_option("--char", a.chr, "characteristic, comma separated");
  };
  auto* sym = app.add_subcommand("check-sym", "check a symmetry");
  add_common(sym, true);
  add_field(sym);
  auto* sub = app.add_subcommand("check-subsym", "check a sub-symmetry");
  add_common(sub, true);
  add_field(sub);
  sub->add_option("--sub", a.sub, "sub-system name or multipliers such as \"v*D2 - sin(u)*D1\"")->required();
  auto* cls = app.add_subcommand("classify", "classify a field against a sub-system");
  add_common(cls, true);
  add_field(cls);
  cls->add_option("--sub", a.sub, "sub-system")->required();
  auto* det = app.add_subcommand("determine", "emit determining equations");
  add_common(det, true);
  add_field(det);
  det->add_option("--sub", a.sub, "sub-system");
  det->add_option("--ansatz", a.ansatz, "named ansatz of the system");
  auto* dec = app.add_subcommand("decouple", "search for decouplable sub-systems");
  add_common(dec, true);
  dec->add_option("--ansatz", a.ansatz, "named ansatz of the system");
  dec->add_option("--ansatz-args", a.ansatz_args, "arguments of the unknown coefficient functions");
  dec->add_option("--beta-order", a.beta_order, "derivative order of the multipliers");
  dec->add_option("--map", a.map, "straightening map: a map of the system or a catalog name");
  auto* vcl = app.add_subcommand("verify-cl", "verify a conservation law");
  add_common(vcl, true);
  vcl->add_option("--cl", a.cl, "law name or comma-separated fluxes")->required();
  auto* dfm = app.add_subcommand("deform", "deform a conservation law by a sub-symmetry");
  add_common(dfm, true);
  add_field(dfm);
  dfm->add_option("--cl", a.cl, "law name or fluxes")->required();
  auto* inv = app.add_subcommand("inverse-deform", "sub-symmetry deforming one law into another");
  add_common(inv, true);
  inv->add_option("--source", a.source, "source law")->required();
  inv->add_option("--target", a.target, "target law")->required();
  auto* tel = app.add_subcommand("telegraph-demo", "check the telegraph laws and fields");
  add_common(tel, false);
  auto* flw = app.add_subcommand("flow", "truncated flow of a field on a solution");
  add_common(flw, true);
  add_field(flw);
  flw->add_option("--u0", a.u0, "solution, one expression per dependent variable")->required();
  flw->add_option("--order", a.order, "truncation order in eps");
  auto* cor = app.add_subcommand("corpus", "built-in systems");
  cor->require_subcommand(1);
  auto* cl_list = cor->add_subcommand("list", "list entries");
  add_common(cl_list, false);
  auto* cl_show = cor->add_subcommand("show", "print an entry");
  add_common(cl_show, false);
  cl_show->add_option("id", a.id)->required();
  cl_show->add_flag("--verify", a.verify, "re-check the stored verdicts");
  auto* cl_verify = cor->add_subcommand("verify", "re-check stored verdicts");
  add_common(cl_verify, false);
  cl_verify->add_option("id", a.id);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  Report r;
  std::string command;
  for (int i = 1; i < argc; ++i) command += (i > 1 ? " " : "") + std::string(argv[i]);
  r.doc["schema"] = kSchema;
  r.doc["command"] = command;
  r.doc["verdicts"] = json::array();
  auto t0 = std::chrono::steady_clock::now();
  int code = kOk;
  std::string inputs = command;
  try {
    if (tel->parsed()) {
      cmd_telegraph(r);
    } else if (cl_list->parsed()) {
      cmd_corpus_list(r);
    } else if (cl_show->parsed()) {
      cmd_corpus_show(r, a);
    } else if (cl_verify->parsed()) {
      cmd_corpus_verify(r, a);
    } else {
      Loaded l = load_entry(common.system);
      inputs += "\n" + l.source_text;
      const CorpusEntry& e = l.entry;
      if (sym->parsed()) cmd_check_sym(r, e, a);
      if (sub->parsed()) cmd_check_subsym(r, e, a);
      if (cls->parsed()) cmd_classify(r, e, a);
      if (det->parsed()) cmd_determine(r, e, a);
      if (dec->parsed()) cmd_decouple(r, e, a);
      if (vcl->parsed()) cmd_verify_cl(r, e, a);
      if (dfm->parsed()) cmd_deform(r, e, a);
      if (inv->parsed()) cmd_inverse_deform(r, e, a);
      if (flw->parsed()) cmd_flow(r, e, a);
    }
    code = r.ok ? kOk : kFailed;
  } catch (const UsageError& ex) {
    r.doc["error"] = ex.what();
    std::cerr << "usage error: " << ex.what() << "\n";
    code = kUsage;
  } catch (const ParseError& ex) {
    r.doc["error"] = ex.what();
    std::cerr << "parse error: " << ex.what() << "\n";
    code = kParse;
  } catch (const UnknownSymbol& ex) {
    r.doc["error"] = ex.what();
    std::cerr << "parse error: " << ex.what() << "\n";
    code = kParse;
  } catch (const FormatError& ex) {
    r.doc["error"] = ex.what();
    std::cerr << "parse error: " << ex.what() << "\n";
    code = kParse;
  } catch (const Error& ex) {
    r.doc["error"] = ex.what();
    std::cerr << "error: " << ex.what() << "\n";
    code = kUsage;
  }
  auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  r.doc["inputs_digest"] = digest(inputs);
  r.doc["timing_ms"] = ms;
  r.doc["exit_code"] = code;
  if (common.json_path.empty()) {
    for (const auto& l : r.text) std::cout << l << "\n";
  } else if (common.json_path == "-") {
    std::cout << r.doc.dump(2) << "\n";
  } else {
    std::ofstream out(common.json_path);
    out << r.doc.dump(2) << "\n";
    for (const auto& l : r.text) std::cout << l << "\n";
  }
  return code;
}
