#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "formderiv/encoding.hpp"
#include "formderiv/formula.hpp"
#include "formderiv/pattern.hpp"
#include "formderiv/rewrite.hpp"
#include "formderiv/rl.hpp"

namespace formderiv {

/// When a derivation is finished: either an exact target tree, or a pattern
/// that must match at the root. A pattern goal may also require that none of
/// the bound subtrees mention certain symbols (e.g. `N = ?` with N free on
/// the right) or contain certain operators (e.g. no unevaluated Integral).
class GoalSpec {
 public:
  static GoalSpec exact(Formula target);
  /// Throws DomainError if `vars` is empty.
  static GoalSpec pattern(Formula pattern, PatternVarSet vars, std::set<std::string> free_of = {},
                          std::set<NodeKind> without = {});

  bool is_exact() const noexcept { return exact_; }
  const Formula& target() const noexcept { return target_; }
  const PatternVarSet& vars() const noexcept { return vars_; }
  const std::set<std::string>& free_of() const noexcept { return free_of_; }
  const std::set<NodeKind>& without() const noexcept { return without_; }

  bool satisfied_by(const Formula& f) const;

 private:
  GoalSpec(bool exact, Formula target, PatternVarSet vars, std::set<std::string> free_of, std::set<NodeKind> without)
      : exact_(exact),
        target_(std::move(target)),
        vars_(std::move(vars)),
        free_of_(std::move(free_of)),
        without_(std::move(without)) {}

  bool exact_;
  Formula target_;
  PatternVarSet vars_;
  std::set<std::string> free_of_;
  std::set<NodeKind> without_;
};

/// `exact <formula>` or `pattern <pattern> [free-of a,b] [without Kind,Kind]`.
std::string format_goal(const GoalSpec& goal);
GoalSpec parse_goal(std::string_view text);

enum class Outcome { Running, Reached, CapExceeded, DeadEnd };

std::string_view outcome_name(Outcome o) noexcept;
Outcome parse_outcome(std::string_view name);

struct TraceStep {
  Formula before;
  std::string rule_id;
  Path site;
  Formula after;
};

struct DerivationTrace {
  Formula start;
  GoalSpec goal;
  std::vector<TraceStep> steps;
  Outcome outcome = Outcome::Running;

  const Formula& final_formula() const noexcept { return steps.empty() ? start : steps.back().after; }
};

/// Header `#<TAB>goal<TAB>..<TAB>outcome<TAB>..<TAB>start<TAB>..`, then one
/// `before<TAB>rule-id<TAB>site<TAB>after` line per step.
std::string format_trace(const DerivationTrace& trace);
DerivationTrace parse_trace(std::string_view text);

/// Re-applies every step and checks the printed trees match. Throws ValidationFailed.
void replay_trace(const DerivationTrace& trace, const RuleSet& rules);

struct EnvConfig {
  std::size_t step_cap = 50;
  /// End the episode as a dead end when a rewrite revisits an earlier tree.
  bool loop_guard = true;
  RewardPolicy reward;
};

struct StepResult {
  FeatureVector state;
  double reward = 0.0;
  bool done = false;
  /// done because of the goal, a dead end or a revisit; a hit step cap is a
  /// truncation, not a terminal state.
  bool terminal = false;
};

/// One derivation episode. Actions are rule indices; each rewrites at the
/// rule's first pre-order match. Holds references to `rules` and `table`,
/// which must outlive it.
class DerivationEnv {
 public:
  DerivationEnv(Formula start, GoalSpec goal, const RuleSet& rules, const SymbolTable& table, EnvConfig config = {});

  const Formula& current() const noexcept { return current_; }
  FeatureVector state() const { return encode(current_, *table_); }
  const GoalSpec& goal() const noexcept { return trace_.goal; }
  const RuleSet& rules() const noexcept { return *rules_; }
  const SymbolTable& table() const noexcept { return *table_; }
  const EnvConfig& config() const noexcept { return config_; }

  /// mask[i] is true iff rule i matches somewhere in the current tree.
  std::vector<bool> applicable() const;

  /// Throws EpisodeFinished once done, DomainError for an out-of-range action.
  StepResult step(std::size_t action);

  bool done() const noexcept { return trace_.outcome != Outcome::Running; }
  Outcome outcome() const noexcept { return trace_.outcome; }
  std::size_t step_count() const noexcept { return step_count_; }
  const DerivationTrace& trace() const noexcept { return trace_; }

 private:
  Formula current_;
  const RuleSet* rules_;
  const SymbolTable* table_;
  EnvConfig config_;
  std::size_t step_count_ = 0;
  std::set<std::string> seen_;
  DerivationTrace trace_;
};

using ActionChooser = std::function<std::size_t(const DerivationEnv&)>;

/// Steps `env` with `choose` until done.
DerivationTrace rollout(DerivationEnv env, const ActionChooser& choose);

/// Policy-driven choice over applicable rules.
ActionChooser policy_chooser(const PolicyModel& model, SelectMode mode, std::uint64_t seed = 0);
/// Q-table-driven choice over applicable rules.
ActionChooser qtable_chooser(const QTable& table, SelectMode mode, std::uint64_t seed = 0);

/// Breadth-first search over every rule application (first-match site) for a
/// shortest derivation. Ties go to lower rule indices. std::nullopt when no
/// derivation of at most `depth_cap` steps exists.
std::optional<DerivationTrace> bfs_oracle(const Formula& start, const GoalSpec& goal, const RuleSet& rules,
                                          std::size_t depth_cap);

struct Problem {
  Formula start;
  GoalSpec goal;
};

struct QLearningConfig {
  std::size_t episodes = 5000;
  double explore = 0.1;  // epsilon-greedy probability
  std::uint64_t seed = 0;
  /// Restrict exploration to applicable rules. Off by default so the
  /// invalid-action penalty is learned too.
  bool mask_inapplicable = false;
  EnvConfig env;
};

struct QLearningReport {
  std::size_t episodes = 0;
  std::size_t reached = 0;
  std::vector<double> episode_returns;
};

/// Epsilon-greedy tabular Q-learning; each episode starts from a problem
/// drawn uniformly at random.
QLearningReport q_learning(QTable& table, std::span<const Problem> problems, const RuleSet& rules,
                           const SymbolTable& symbols, const QLearningConfig& config);

/// Backs up the transitions of greedy policy rollouts into `table`, last step
/// first, `sweeps` times. Used to start Q-learning from a supervised policy.
void q_warm_start(QTable& table, std::span<const Problem> problems, const PolicyModel& model, const RuleSet& rules,
                  const SymbolTable& symbols, const EnvConfig& env, std::size_t sweeps);

}  // namespace formderiv
