#include "formderiv/derivation.hpp"

#include <algorithm>
#include <deque>
#include <unordered_map>

#include "formderiv/error.hpp"
#include "text_util.hpp"

namespace formderiv {

// ---------------------------------------------------------------------------
// Goals

namespace {

bool contains_kind(const Formula& f, NodeKind kind) {
  if (f.kind() == kind) return true;
  return std::any_of(f.children().begin(), f.children().end(),
                     [kind](const Formula& c) { return contains_kind(c, kind); });
}

}  // namespace

GoalSpec GoalSpec::exact(Formula target) { return GoalSpec(true, std::move(target), {}, {}, {}); }

GoalSpec GoalSpec::pattern(Formula pattern, PatternVarSet vars, std::set<std::string> free_of,
                           std::set<NodeKind> without) {
  if (vars.empty()) throw DomainError("a pattern goal needs at least one variable");
  return GoalSpec(false, std::move(pattern), std::move(vars), std::move(free_of), std::move(without));
}

bool GoalSpec::satisfied_by(const Formula& f) const {
  if (exact_) return f == target_;
  auto binding = match_tree(f, target_, vars_);
  if (!binding) return false;
  for (const auto& [var, sub] : *binding) {
    for (const auto& name : free_of_) {
      if (contains_symbol(sub, name)) return false;
    }
    for (NodeKind k : without_) {
      if (contains_kind(sub, k)) return false;
    }
  }
  return true;
}

std::string format_goal(const GoalSpec& goal) {
  if (goal.is_exact()) return "exact " + print(goal.target());
  std::string out = "pattern " + print_pattern(goal.target(), goal.vars());
  if (!goal.free_of().empty()) {
    out += " free-of ";
    bool first = true;
    for (const auto& n : goal.free_of()) {
      if (!first) out += ',';
      out += n;
      first = false;
    }
  }
  if (!goal.without().empty()) {
    out += " without ";
    bool first = true;
    for (NodeKind k : goal.without()) {
      if (!first) out += ',';
      out += kind_name(k);
      first = false;
    }
  }
  return out;
}

GoalSpec parse_goal(std::string_view text) {
  text = detail::trim(text);
  if (text.substr(0, 6) == "exact ") return GoalSpec::exact(parse(text.substr(6)));
  if (text.substr(0, 8) != "pattern ") throw FormatError("goal must start with 'exact ' or 'pattern '");
  std::string_view body = text.substr(8);
  std::set<std::string> free_of;
  std::set<NodeKind> without;
  if (auto pos = body.rfind(" without "); pos != std::string_view::npos) {
    for (auto n : detail::split(body.substr(pos + 9), ',')) {
      auto kind = kind_from_name(detail::trim(n));
      if (!kind) throw FormatError("bad operator name '" + std::string(detail::trim(n)) + "'");
      without.insert(*kind);
    }
    body = body.substr(0, pos);
  }
  if (auto pos = body.rfind(" free-of "); pos != std::string_view::npos) {
    for (auto n : detail::split(body.substr(pos + 9), ',')) {
      auto name = detail::trim(n);
      if (!is_identifier(name)) throw FormatError("bad free-of symbol '" + std::string(name) + "'");
      free_of.emplace(name);
    }
    body = body.substr(0, pos);
  }
  auto parsed = parse_pattern(body);
  return GoalSpec::pattern(std::move(parsed.tree), std::move(parsed.vars), std::move(free_of),
                           std::move(without));
}

std::string_view outcome_name(Outcome o) noexcept {
  switch (o) {
    case Outcome::Running:
      return "running";
    case Outcome::Reached:
      return "reached";
    case Outcome::CapExceeded:
      return "cap_exceeded";
    case Outcome::DeadEnd:
      return "dead_end";
  }
  return "unknown";
}

Outcome parse_outcome(std::string_view name) {
  for (Outcome o : {Outcome::Running, Outcome::Reached, Outcome::CapExceeded, Outcome::DeadEnd}) {
    if (outcome_name(o) == name) return o;
  }
  throw FormatError("unknown outcome '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Traces

std::string format_trace(const DerivationTrace& trace) {
  std::string out = "#\tgoal\t" + format_goal(trace.goal) + "\toutcome\t" + std::string(outcome_name(trace.outcome)) +
                    "\tstart\t" + print(trace.start) + "\n";
  for (const auto& s : trace.steps) {
    out += print(s.before);
    out += '\t';
    out += s.rule_id;
    out += '\t';
    out += to_string(s.site);
    out += '\t';
    out += print(s.after);
    out += '\n';
  }
  return out;
}

DerivationTrace parse_trace(std::string_view text) {
  auto lines = detail::split_lines(text);
  if (lines.empty()) throw FormatError("empty trace file");
  auto head = detail::split(lines.front(), '\t');
  if (head.size() != 7 || head[0] != "#" || head[1] != "goal" || head[3] != "outcome" || head[5] != "start") {
    throw FormatError("malformed trace header");
  }
  DerivationTrace trace{parse(head[6]), parse_goal(head[2]), {}, parse_outcome(head[4])};
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (detail::trim(lines[i]).empty()) continue;
    auto f = detail::split(lines[i], '\t');
    if (f.size() != 4) throw FormatError("trace line " + std::to_string(i + 1) + " needs 4 tab-separated fields");
    trace.steps.push_back(TraceStep{parse(f[0]), std::string(f[1]), parse_path(f[2]), parse(f[3])});
  }
  return trace;
}

void replay_trace(const DerivationTrace& trace, const RuleSet& rules) {
  Formula cur = trace.start;
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const auto& s = trace.steps[i];
    if (print(s.before) != print(cur)) {
      throw ValidationFailed("step " + std::to_string(i) + " does not start where the previous step ended");
    }
    Formula next = [&] {
      try {
        return apply_rule_at(cur, rules.by_id(s.rule_id), s.site);
      } catch (const DomainError& e) {
        throw ValidationFailed("step " + std::to_string(i) + ": " + e.what());
      }
    }();
    if (print(next) != print(s.after)) {
      throw ValidationFailed("step " + std::to_string(i) + " replays to " + print(next));
    }
    cur = std::move(next);
  }
  if (trace.outcome == Outcome::Reached && !trace.goal.satisfied_by(cur)) {
    throw ValidationFailed("trace claims the goal but its last tree does not satisfy it");
  }
}

// ---------------------------------------------------------------------------
// Environment

DerivationEnv::DerivationEnv(Formula start, GoalSpec goal, const RuleSet& rules, const SymbolTable& table,
                             EnvConfig config)
    : current_(start), rules_(&rules), table_(&table), config_(config), trace_{start, std::move(goal), {}, Outcome::Running} {
  if (rules.empty()) throw DomainError("derivation needs a non-empty rule set");
  seen_.insert(print(current_));
  if (trace_.goal.satisfied_by(current_)) {
    trace_.outcome = Outcome::Reached;
  } else if (std::none_of(rules.begin(), rules.end(),
                          [&](const Rule& r) { return find_first(current_, r.lhs, r.vars).has_value(); })) {
    trace_.outcome = Outcome::DeadEnd;
  }
}

std::vector<bool> DerivationEnv::applicable() const {
  std::vector<bool> mask(rules_->size());
  for (std::size_t i = 0; i < rules_->size(); ++i) {
    const Rule& r = (*rules_)[i];
    mask[i] = find_first(current_, r.lhs, r.vars).has_value();
  }
  return mask;
}

StepResult DerivationEnv::step(std::size_t action) {
  if (done()) throw EpisodeFinished("episode already finished (" + std::string(outcome_name(outcome())) + ")");
  if (action >= rules_->size()) throw DomainError("action " + std::to_string(action) + " out of range");
  ++step_count_;
  const auto& reward = config_.reward;
  StepResult out;

  const Rule& rule = (*rules_)[action];
  auto applied = apply_rule_first(current_, rule);
  if (!applied) {
    out.reward = reward.invalid;
    if (step_count_ >= config_.step_cap) trace_.outcome = Outcome::CapExceeded;
    out.state = state();
    out.done = done();
    return out;
  }

  trace_.steps.push_back(TraceStep{current_, rule.id, applied->site, applied->result});
  current_ = std::move(applied->result);
  const bool revisit = !seen_.insert(print(current_)).second;
  const bool overflow = unpadded_length(current_) > table_->max_length();

  if (trace_.goal.satisfied_by(current_)) {
    trace_.outcome = Outcome::Reached;
    out.reward = reward.goal;
  } else if ((config_.loop_guard && revisit) || overflow || std::ranges::none_of(applicable(), [](bool b) { return b; })) {
    trace_.outcome = Outcome::DeadEnd;
    out.reward = reward.dead_end;
  } else {
    out.reward = reward.step;
    if (step_count_ >= config_.step_cap) trace_.outcome = Outcome::CapExceeded;
  }
  out.done = done();
  out.terminal = trace_.outcome == Outcome::Reached || trace_.outcome == Outcome::DeadEnd;
  // An overflowing tree has no encoding; it is terminal, so its vector is never read.
  out.state = overflow ? FeatureVector{std::vector<int>(table_->max_length(), 0), table_->fingerprint()} : state();
  return out;
}

DerivationTrace rollout(DerivationEnv env, const ActionChooser& choose) {
  while (!env.done()) env.step(choose(env));
  return env.trace();
}

ActionChooser policy_chooser(const PolicyModel& model, SelectMode mode, std::uint64_t seed) {
  return [&model, mode, rng = make_rng(seed)](const DerivationEnv& env) mutable {
    auto probs = model.forward(env.state());
    return select_action(probs, env.applicable(), mode, rng);
  };
}

ActionChooser qtable_chooser(const QTable& table, SelectMode mode, std::uint64_t seed) {
  return [&table, mode, rng = make_rng(seed)](const DerivationEnv& env) mutable {
    auto values = table.values(env.state());
    return select_action(values, env.applicable(), mode, rng);
  };
}

// ---------------------------------------------------------------------------
// Breadth-first oracle

std::optional<DerivationTrace> bfs_oracle(const Formula& start, const GoalSpec& goal, const RuleSet& rules,
                                          std::size_t depth_cap) {
  if (goal.satisfied_by(start)) return DerivationTrace{start, goal, {}, Outcome::Reached};

  struct NodeInfo {
    Formula formula;
    std::size_t parent;
    std::size_t rule;
    Path site;
    std::size_t depth;
  };
  std::vector<NodeInfo> nodes;
  nodes.push_back({start, 0, 0, {}, 0});
  std::unordered_map<std::string, std::size_t> seen;
  seen.emplace(print(start), 0);
  std::deque<std::size_t> frontier{0};

  auto build_trace = [&](std::size_t leaf) {
    std::vector<std::size_t> chain;
    for (std::size_t i = leaf; i != 0; i = nodes[i].parent) chain.push_back(i);
    std::reverse(chain.begin(), chain.end());
    DerivationTrace trace{start, goal, {}, Outcome::Reached};
    for (std::size_t i : chain) {
      const auto& n = nodes[i];
      trace.steps.push_back(TraceStep{nodes[n.parent].formula, rules[n.rule].id, n.site, n.formula});
    }
    return trace;
  };

  while (!frontier.empty()) {
    const std::size_t cur = frontier.front();
    frontier.pop_front();
    if (nodes[cur].depth >= depth_cap) continue;
    for (std::size_t r = 0; r < rules.size(); ++r) {
      auto applied = apply_rule_first(nodes[cur].formula, rules[r]);
      if (!applied) continue;
      auto [it, inserted] = seen.emplace(print(applied->result), nodes.size());
      if (!inserted) continue;
      nodes.push_back({std::move(applied->result), cur, r, std::move(applied->site), nodes[cur].depth + 1});
      if (goal.satisfied_by(nodes.back().formula)) return build_trace(nodes.size() - 1);
      frontier.push_back(nodes.size() - 1);
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Q-learning driver

QLearningReport q_learning(QTable& table, std::span<const Problem> problems, const RuleSet& rules,
                           const SymbolTable& symbols, const QLearningConfig& config) {
  if (problems.empty()) throw EmptyDataset("Q-learning needs at least one start problem");
  if (table.action_count() != rules.size()) throw DomainError("Q-table width differs from the rule count");
  Rng rng = make_rng(config.seed);
  QLearningReport report;
  std::vector<bool> all(rules.size(), true);
  for (std::size_t ep = 0; ep < config.episodes; ++ep) {
    const Problem& p = problems[uniform_index(rng, problems.size())];
    DerivationEnv env(p.start, p.goal, rules, symbols, config.env);
    double ret = 0.0;
    while (!env.done()) {
      FeatureVector s = env.state();
      const auto values = table.values(s);
      const auto mask = config.mask_inapplicable ? env.applicable() : all;
      const std::size_t a = select_action(values, mask, SelectMode::epsilon_greedy(config.explore), rng);
      StepResult r = env.step(a);
      q_update(table, s, a, r.reward, r.state, r.terminal);
      ret += r.reward;
    }
    ++report.episodes;
    report.reached += env.outcome() == Outcome::Reached;
    report.episode_returns.push_back(ret);
  }
  return report;
}

void q_warm_start(QTable& table, std::span<const Problem> problems, const PolicyModel& model, const RuleSet& rules,
                  const SymbolTable& symbols, const EnvConfig& env_config, std::size_t sweeps) {
  struct Transition {
    FeatureVector s;
    std::size_t a;
    double r;
    FeatureVector next;
    bool terminal;
  };
  std::vector<std::vector<Transition>> episodes;
  Rng unused = make_rng(0);
  for (const auto& p : problems) {
    DerivationEnv env(p.start, p.goal, rules, symbols, env_config);
    std::vector<Transition> ts;
    while (!env.done()) {
      FeatureVector s = env.state();
      const std::size_t a = select_action(model.forward(s), env.applicable(), SelectMode::greedy(), unused);
      StepResult r = env.step(a);
      ts.push_back({std::move(s), a, r.reward, std::move(r.state), r.terminal});
    }
    episodes.push_back(std::move(ts));
  }
  for (std::size_t sweep = 0; sweep < sweeps; ++sweep) {
    for (const auto& ts : episodes) {
      for (auto it = ts.rbegin(); it != ts.rend(); ++it) q_update(table, it->s, it->a, it->r, it->next, it->terminal);
    }
  }
}

}  // namespace formderiv
