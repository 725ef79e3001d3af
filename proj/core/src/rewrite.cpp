#include "formderiv/rewrite.hpp"

#include <fstream>
#include <sstream>

#include "formderiv/error.hpp"
#include "text_util.hpp"

namespace formderiv {

void validate_rule(const Rule& rule) {
  if (!is_identifier(rule.id)) throw InvalidRule("rule id '" + rule.id + "' is not an identifier");
  const auto lhs_syms = symbols_of(rule.lhs);
  for (const auto& name : symbols_of(rule.rhs)) {
    if (rule.vars.count(name) && !lhs_syms.count(name)) {
      throw InvalidRule("rule '" + rule.id + "': variable '" + name + "' appears on the right but not the left");
    }
  }
  if (rule.lhs == rule.rhs) throw InvalidRule("rule '" + rule.id + "' maps a template to itself");
}

void RuleSet::add(Rule rule) {
  if (index_.count(rule.id)) throw DuplicateId("duplicate rule id '" + rule.id + "'");
  validate_rule(rule);
  index_.emplace(rule.id, rules_.size());
  rules_.push_back(std::move(rule));
}

const Rule& RuleSet::by_id(std::string_view id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw UnknownRule("unknown rule '" + std::string(id) + "'");
  return rules_[it->second];
}

std::optional<std::size_t> RuleSet::index_of(std::string_view id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Formula apply_rule_at(const Formula& f, const Rule& rule, const Path& site) {
  auto binding = match_at(f, site, rule.lhs, rule.vars);
  if (!binding) throw RuleNotApplicable("rule '" + rule.id + "' does not match at " + to_string(site));
  return replace_at(f, site, substitute(rule.rhs, *binding));
}

std::optional<Application> apply_rule_first(const Formula& f, const Rule& rule) {
  auto m = find_first(f, rule.lhs, rule.vars);
  if (!m) return std::nullopt;
  return Application{replace_at(f, m->site, substitute(rule.rhs, m->binding)), std::move(m->site)};
}

RuleSet register_derived_rule(const RuleSet& rules, const Formula& before, const Formula& after,
                              const PatternVarSet& vars, const std::string& id, const Provenance& provenance) {
  if (rules.index_of(id)) throw DuplicateId("duplicate rule id '" + id + "'");
  if (!provenance.is_axiom()) {
    Formula cur = before;
    for (const auto& step : provenance.script) {
      auto idx = rules.index_of(step);
      if (!idx) throw ValidationFailed("rule '" + id + "': script names unknown rule '" + step + "'");
      auto applied = apply_rule_first(cur, rules[*idx]);
      if (!applied) {
        throw ValidationFailed("rule '" + id + "': script step '" + step + "' does not apply to " + print(cur));
      }
      cur = std::move(applied->result);
    }
    if (!(cur == after)) {
      throw ValidationFailed("rule '" + id + "': script yields " + print(cur) + ", expected " + print(after));
    }
  }
  RuleSet out = rules;
  out.add(Rule{id, before, after, vars, provenance});
  return out;
}

// ---------------------------------------------------------------------------
// Rule files

RuleSet parse_rule_file(std::string_view text) {
  RuleSet rules;
  std::size_t line_no = 0;
  for (std::string_view raw : detail::split_lines(text)) {
    ++line_no;
    std::string_view line = detail::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto fields = detail::split(line, '|');
    if (fields.size() != 5) {
      throw FormatError("rule file line " + std::to_string(line_no) + ": expected 5 '|'-separated fields, got " +
                        std::to_string(fields.size()));
    }
    for (auto& field : fields) field = detail::trim(field);
    try {
      std::string id(fields[0]);
      Formula lhs = parse(fields[1]);
      Formula rhs = parse(fields[2]);
      PatternVarSet vars;
      if (!fields[3].empty()) {
        for (auto v : detail::split(fields[3], ',')) vars.emplace(detail::trim(v));
      }
      Provenance prov;
      if (fields[4] == "axiom") {
        prov = Provenance::axiom();
      } else if (fields[4].substr(0, 7) == "script:") {
        for (auto step : detail::split(fields[4].substr(7), ',')) prov.script.emplace_back(detail::trim(step));
        if (prov.script.empty() || prov.script.front().empty()) throw FormatError("empty derivation script");
      } else {
        throw FormatError("last field must be 'axiom' or 'script:<ids>'");
      }
      rules = register_derived_rule(rules, lhs, rhs, vars, id, prov);
    } catch (const DomainError& e) {
      throw FormatError("rule file line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return rules;
}

std::string format_rule_file(const RuleSet& rules) {
  std::string out;
  for (const auto& r : rules) {
    out += r.id;
    out += " | ";
    out += print(r.lhs);
    out += " | ";
    out += print(r.rhs);
    out += " | ";
    bool first = true;
    for (const auto& v : r.vars) {
      if (!first) out += ',';
      out += v;
      first = false;
    }
    out += " | ";
    if (r.provenance.is_axiom()) {
      out += "axiom";
    } else {
      out += "script:";
      for (std::size_t i = 0; i < r.provenance.script.size(); ++i) {
        if (i) out += ',';
        out += r.provenance.script[i];
      }
    }
    out += '\n';
  }
  return out;
}

RuleSet load_rule_file(const std::filesystem::path& path) { return parse_rule_file(detail::read_file(path)); }

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed) noexcept {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t rule_set_hash(const RuleSet& rules) { return fnv1a(format_rule_file(rules)); }

}  // namespace formderiv
