#include "formderiv/pattern.hpp"

namespace formderiv {

namespace {

bool match_rec(const Formula& subject, const Formula& pattern, const PatternVarSet& vars, Binding& binding) {
  if (pattern.is_sym() && vars.count(pattern.label())) {
    auto [it, inserted] = binding.try_emplace(pattern.label(), subject);
    return inserted || it->second == subject;
  }
  if (!subject.same_head(pattern)) return false;
  for (std::size_t i = 0; i < pattern.arity(); ++i) {
    if (!match_rec(subject.child(i), pattern.child(i), vars, binding)) return false;
  }
  return true;
}

// Pre-order walk. Unlike the textbook recursion that returns after the first
// child, every child is tried before giving up.
template <class Visit>
bool walk(const Formula& f, Path& cur, const Formula& pattern, const PatternVarSet& vars, Visit& visit) {
  if (auto b = match_tree(f, pattern, vars)) {
    if (visit(Match{cur, std::move(*b)})) return true;
  }
  for (std::size_t i = 0; i < f.arity(); ++i) {
    cur.steps.push_back(i);
    bool stop = walk(f.child(i), cur, pattern, vars, visit);
    cur.steps.pop_back();
    if (stop) return true;
  }
  return false;
}

}  // namespace

std::optional<Binding> match_tree(const Formula& subject, const Formula& pattern, const PatternVarSet& vars) {
  Binding binding;
  if (!match_rec(subject, pattern, vars, binding)) return std::nullopt;
  return binding;
}

std::optional<Binding> match_at(const Formula& f, const Path& site, const Formula& pattern, const PatternVarSet& vars) {
  return match_tree(subtree_at(f, site), pattern, vars);
}

std::optional<Match> find_first(const Formula& f, const Formula& pattern, const PatternVarSet& vars) {
  std::optional<Match> found;
  Path cur;
  auto visit = [&](Match m) {
    found = std::move(m);
    return true;
  };
  walk(f, cur, pattern, vars, visit);
  return found;
}

std::vector<Match> find_all(const Formula& f, const Formula& pattern, const PatternVarSet& vars) {
  std::vector<Match> out;
  Path cur;
  auto visit = [&](Match m) {
    out.push_back(std::move(m));
    return false;
  };
  walk(f, cur, pattern, vars, visit);
  return out;
}

Formula substitute(const Formula& pattern, const Binding& binding) {
  if (pattern.is_sym()) {
    auto it = binding.find(pattern.label());
    return it == binding.end() ? pattern : it->second;
  }
  if (pattern.is_leaf()) return pattern;
  std::vector<Formula> kids;
  kids.reserve(pattern.arity());
  for (const auto& c : pattern.children()) kids.push_back(substitute(c, binding));
  if (pattern.kind() == NodeKind::FuncApply) return Formula::func(pattern.label(), std::move(kids));
  return Formula::make(pattern.kind(), std::move(kids));
}

}  // namespace formderiv
