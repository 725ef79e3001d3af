#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "formderiv/formula.hpp"
#include "formderiv/pattern.hpp"

namespace formderiv {

/// How a rule earned its place: declared as an axiom, or derived by replaying
/// a sequence of earlier rules from lhs to rhs.
struct Provenance {
  std::vector<std::string> script;  // empty for axioms

  bool is_axiom() const noexcept { return script.empty(); }
  static Provenance axiom() { return {}; }
  static Provenance derived(std::vector<std::string> steps) { return {std::move(steps)}; }
};

/// A directed template mapping lhs => rhs.
struct Rule {
  std::string id;
  Formula lhs;
  Formula rhs;
  PatternVarSet vars;
  Provenance provenance;
};

/// Throws InvalidRule when rhs uses a variable absent from lhs, or lhs == rhs.
void validate_rule(const Rule& rule);

/// Ordered rules; position is the action index used by the learners.
class RuleSet {
 public:
  RuleSet() = default;

  /// Validates and appends. Throws DuplicateId, InvalidRule.
  void add(Rule rule);

  std::size_t size() const noexcept { return rules_.size(); }
  bool empty() const noexcept { return rules_.empty(); }
  const Rule& operator[](std::size_t i) const { return rules_.at(i); }
  const Rule& by_id(std::string_view id) const;
  std::optional<std::size_t> index_of(std::string_view id) const;

  auto begin() const noexcept { return rules_.begin(); }
  auto end() const noexcept { return rules_.end(); }

 private:
  std::vector<Rule> rules_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

/// Rewrites the subtree at `site`: bind lhs there, substitute the binding into
/// a copy of rhs, mount the copy back. Throws RuleNotApplicable.
Formula apply_rule_at(const Formula& f, const Rule& rule, const Path& site);

struct Application {
  Formula result;
  Path site;
};

/// Applies `rule` at the first pre-order match, if any.
std::optional<Application> apply_rule_first(const Formula& f, const Rule& rule);

/// Returns `rules` with a new rule (before => after) appended. Non-axiom rules
/// are accepted only if replaying `provenance.script` with apply_rule_first
/// turns `before` into `after`. Throws DuplicateId, ValidationFailed.
RuleSet register_derived_rule(const RuleSet& rules, const Formula& before, const Formula& after,
                              const PatternVarSet& vars, const std::string& id, const Provenance& provenance);

/// `id | lhs | rhs | var,var | axiom` or `... | script:r1,r2`, `#` comments.
RuleSet parse_rule_file(std::string_view text);
std::string format_rule_file(const RuleSet& rules);
RuleSet load_rule_file(const std::filesystem::path& path);

/// 64-bit FNV-1a over the canonical rule file text.
std::uint64_t rule_set_hash(const RuleSet& rules);

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL) noexcept;

}  // namespace formderiv
