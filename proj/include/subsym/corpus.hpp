#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "subsym/conservation.hpp"
#include "subsym/decoupling.hpp"

namespace subsym {

/// Unknown function of an ansatz together with its argument list.
struct UnknownFunction {
  std::string name;
  std::vector<Expr> args;
};

struct CorpusAnsatz {
  std::optional<PointField> point;         // lambda is applied on top
  std::optional<EvoField> characteristic;  // used as given
  std::optional<Expr> beta1;               // beta^1 template for the beta^2 = 1 branch
  std::optional<std::vector<Expr>> beta;   // fixed multipliers: a candidate
  std::vector<Expr> constants;
  std::vector<UnknownFunction> unknowns;
  std::string lambda = "lambda";
  Condition condition = Condition::SubsystemSymmetry;
  JetContext ctx;  // system context extended by the ansatz names

  DecouplingAnsatz decoupling() const;
};

struct CorpusEntry {
  int version = 1;
  std::string id;
  std::string title;
  std::shared_ptr<const DiffSystem> system;
  std::map<std::string, EvoField> fields;
  std::map<std::string, PointField> point_fields;  // fields given in point form
  std::map<std::string, SubSystem> subsystems;
  std::map<std::string, std::string> subsystem_text;
  std::map<std::string, std::vector<Expr>> laws;
  std::map<std::string, PointMap> maps;
  std::map<std::string, CorpusAnsatz> ansatz;
  std::vector<std::string> expect;

  const EvoField& field(const std::string& name) const;
  const SubSystem& subsystem(const std::string& name) const;
  const std::vector<Expr>& law(const std::string& name) const;
  const PointMap& map(const std::string& name) const;
};

/// Parses the text format. `origin` names the source in error messages.
CorpusEntry parse_entry(std::string_view text, const std::string& origin = "<text>");
CorpusEntry load_file(const std::string& path);

std::vector<std::string> corpus_ids();
/// Raw text of a built-in entry; throws Error for an unknown id.
const std::string& corpus_text(const std::string& id);
CorpusEntry load(const std::string& id);
/// "corpus:<id>" or a file path.
CorpusEntry load_system(const std::string& spec);

/// Inline multipliers "c1*D1 + c2*Dx*D2", rows separated by ';'. D1..Dn name the
/// equations, D<var> a total derivative.
SubSystem parse_multipliers(const std::string& text, std::shared_ptr<const DiffSystem> sys);

/// Comma-separated list at the top level of parentheses.
std::vector<std::string> split_top(const std::string& text, char sep);

struct ExpectationResult {
  std::string line;
  bool pass = false;
  std::string detail;
};

ExpectationResult verify_expectation(const CorpusEntry& e, const std::string& line);
std::vector<ExpectationResult> verify_expectations(const CorpusEntry& e);

}  // namespace subsym
