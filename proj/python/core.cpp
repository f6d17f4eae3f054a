#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "subsym/conservation.hpp"
#include "subsym/corpus.hpp"
#include "subsym/decoupling.hpp"
#include "subsym/errors.hpp"
#include "subsym/normalize.hpp"

namespace py = pybind11;
using namespace subsym;

namespace {

std::vector<std::string> strs(const std::vector<Expr>& v) {
  std::vector<std::string> out;
  for (const auto& e : v) out.push_back(to_string(e));
  return out;
}

JetContext make_context(std::vector<std::string> indep, std::vector<std::string> deps, std::vector<std::string> params,
                        std::map<std::string, int> opaque) {
  JetContext c;
  c.indep = std::move(indep);
  c.deps = std::move(deps);
  c.params = std::move(params);
  c.opaque = std::move(opaque);
  return c;
}

std::vector<Expr> parse_all(const JetContext& c, const std::vector<std::string>& v) {
  std::vector<Expr> out;
  for (const auto& s : v) out.push_back(normalize(c.parse(s)));
  return out;
}

// Field given by name or as a characteristic list.
EvoField field_of(const CorpusEntry& e, const py::object& f) {
  if (py::isinstance<py::str>(f)) return e.field(f.cast<std::string>());
  return EvoField{parse_all(e.system->ctx(), f.cast<std::vector<std::string>>())};
}

SubSystem sub_of(const CorpusEntry& e, const std::string& s) {
  auto it = e.subsystems.find(s);
  return it != e.subsystems.end() ? it->second : parse_multipliers(s, e.system);
}

std::vector<Expr> law_of(const CorpusEntry& e, const py::object& l) {
  if (py::isinstance<py::str>(l)) return e.law(l.cast<std::string>());
  return parse_all(e.system->ctx(), l.cast<std::vector<std::string>>());
}

py::dict report(const InvarianceReport& r) {
  py::dict d;
  d["holds"] = r.holds;
  d["residuals"] = strs(r.residuals);
  if (r.tag) d["tag"] = classification_name(*r.tag);
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", error.ptr());
  py::register_exception<UnknownSymbol>(m, "UnknownSymbol", error.ptr());
  py::register_exception<FormatError>(m, "FormatError", error.ptr());
  py::register_exception<RankDeficient>(m, "RankDeficient", error.ptr());
  py::register_exception<NotAConservationLaw>(m, "NotAConservationLaw", error.ptr());
  py::register_exception<PreconditionViolation>(m, "PreconditionViolation", error.ptr());

  py::class_<JetContext>(m, "Context")
      .def(py::init(&make_context), py::arg("indep"), py::arg("deps"), py::arg("params") = std::vector<std::string>{},
           py::arg("opaque") = std::map<std::string, int>{})
      .def("normalize", [](const JetContext& c, const std::string& s) { return to_string(normalize(c.parse(s))); })
      .def("is_zero", [](const JetContext& c, const std::string& s) { return is_zero(c.parse(s)); })
      .def("diff", [](const JetContext& c, const std::string& s, const std::string& wrt) {
        return to_string(diff_partial(c.parse(s), c.parse(wrt)));
      })
      .def("total_derivative", [](const JetContext& c, const std::string& s, const std::string& var) {
        int j = c.indep_index(var);
        if (j < 0) throw Error("not an independent variable: " + var);
        return to_string(total_derivative(c.parse(s), j, c));
      })
      .def("apply", [](const JetContext& c, const std::vector<std::string>& alpha, const std::string& s) {
        return to_string(apply(EvoField{parse_all(c, alpha)}, c.parse(s), c));
      })
      .def("commutator", [](const JetContext& c, const std::vector<std::string>& f, const std::vector<std::string>& g) {
        return strs(commutator(EvoField{parse_all(c, f)}, EvoField{parse_all(c, g)}, c).alpha);
      });

  py::class_<CorpusEntry>(m, "System")
      .def_readonly("id", &CorpusEntry::id)
      .def_readonly("title", &CorpusEntry::title)
      .def_property_readonly("equations", [](const CorpusEntry& e) { return strs(e.system->exprs()); })
      .def_property_readonly("fields", [](const CorpusEntry& e) {
        std::vector<std::string> n;
        for (const auto& [k, v] : e.fields) n.push_back(k);
        return n;
      })
      .def_property_readonly("subsystems", [](const CorpusEntry& e) {
        std::vector<std::string> n;
        for (const auto& [k, v] : e.subsystems) n.push_back(k);
        return n;
      })
      .def_property_readonly("laws", [](const CorpusEntry& e) {
        std::vector<std::string> n;
        for (const auto& [k, v] : e.laws) n.push_back(k);
        return n;
      })
      .def("check_symmetry", [](const CorpusEntry& e, const py::object& f) { return report(check_symmetry(field_of(e, f), *e.system)); })
      .def("check_subsymmetry", [](const CorpusEntry& e, const py::object& f, const std::string& s) {
        return report(check_subsymmetry(field_of(e, f), sub_of(e, s)));
      })
      .def("check_subsystem_symmetry", [](const CorpusEntry& e, const py::object& f, const std::string& s) {
        return report(check_subsystem_symmetry(field_of(e, f), sub_of(e, s)));
      })
      .def("classify", [](const CorpusEntry& e, const py::object& f, const std::string& s) {
        return classification_name(classify(field_of(e, f), sub_of(e, s)));
      })
      .def("is_decoupled", [](const CorpusEntry& e, const std::string& s, const std::string& var) {
        return is_decoupled(sub_of(e, s), var).decoupled;
      })
      .def("verify_cl", [](const CorpusEntry& e, const py::object& l) {
        ConsLaw cl = verify_cl(law_of(e, l), e.system);
        py::dict d;
        d["fluxes"] = strs(cl.fluxes);
        d["characteristic"] = strs(cl.characteristic);
        d["trivial"] = is_trivial(cl);
        return d;
      })
      .def("deform", [](const CorpusEntry& e, const py::object& f, const py::object& l) {
        ConsLaw moved = deform(field_of(e, f), verify_cl(law_of(e, l), e.system));
        py::dict d;
        d["fluxes"] = strs(moved.fluxes);
        d["trivial"] = is_trivial(moved);
        return d;
      })
      .def("inverse_deform", [](const CorpusEntry& e, const py::object& a, const py::object& b) {
        return strs(inverse_deform(law_of(e, a), law_of(e, b), e.system->ctx()).alpha);
      })
      .def("verify", [](const CorpusEntry& e) {
        std::vector<std::tuple<std::string, bool, std::string>> out;
        for (const auto& r : verify_expectations(e)) out.emplace_back(r.line, r.pass, r.detail);
        return out;
      });

  m.def("corpus_ids", &corpus_ids);
  m.def("corpus_text", &corpus_text);
  m.def("load", &load_system, py::arg("spec"), "corpus:<id> or a file path");
  m.def("parse_system", [](const std::string& text) { return parse_entry(text); });
  m.def("telegraph_catalog", [] {
    py::list out;
    for (const auto& c : telegraph_catalog()) {
      py::dict d;
      d["name"] = c.name;
      d["F"] = c.F;
      d["G"] = c.G;
      d["fluxes"] = strs(c.fluxes);
      d["law_verified"] = c.law_verified;
      d["field_deforms"] = c.field_deforms;
      d["note"] = c.note;
      out.append(d);
    }
    return out;
  });
}
