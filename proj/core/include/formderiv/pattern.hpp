#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "formderiv/formula.hpp"

namespace formderiv {

/// Symbol names that act as wildcards inside a template.
using PatternVarSet = std::set<std::string>;

/// Pattern variable name -> the concrete subtree it stands for.
using Binding = std::map<std::string, Formula>;

struct Match {
  Path site;
  Binding binding;
};

/// Anchors `pattern` at `site` and matches it structurally. A Sym leaf whose
/// name is in `vars` binds the whole corresponding subtree; a repeated
/// variable must bind equal subtrees. Everything else must agree in kind,
/// label and arity, children positionally.
std::optional<Binding> match_at(const Formula& f, const Path& site, const Formula& pattern, const PatternVarSet& vars);

/// Same as match_at on an already-resolved subtree.
std::optional<Binding> match_tree(const Formula& subject, const Formula& pattern, const PatternVarSet& vars);

/// First match in pre-order (root, then children left to right).
std::optional<Match> find_first(const Formula& f, const Formula& pattern, const PatternVarSet& vars);

/// Every match, in pre-order.
std::vector<Match> find_all(const Formula& f, const Formula& pattern, const PatternVarSet& vars);

/// Copies `pattern`, replacing each bound variable leaf with its subtree.
/// Unbound leaves are left as literals.
Formula substitute(const Formula& pattern, const Binding& binding);

}  // namespace formderiv
