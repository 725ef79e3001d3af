// formderiv: batch command-line front end for the derivation engine.
//
// Exit codes: 0 success, 1 usage error, 2 domain error, 3 internal error.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "formderiv/dataset.hpp"
#include "formderiv/derivation.hpp"
#include "formderiv/encoding.hpp"
#include "formderiv/error.hpp"
#include "formderiv/formula.hpp"
#include "formderiv/pattern.hpp"
#include "formderiv/rewrite.hpp"
#include "formderiv/rl.hpp"

namespace fs = std::filesystem;
using namespace formderiv;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text)) throw DomainError("cannot write '" + path.string() + "'");
}

std::string strip(std::string s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  std::size_t b = 0;
  while (b < s.size() && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  return s.substr(b);
}

// Formula arguments are either a path to a file holding constructor text, or the text itself.
std::string formula_text(const std::string& arg) {
  std::error_code ec;
  if (fs::is_regular_file(arg, ec)) return strip(slurp(arg));
  return arg;
}

Formula load_formula(const std::string& arg) { return parse(formula_text(arg)); }

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = strip(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

struct Common {
  std::string rule_file;
  std::string symbols;
  std::size_t l_max = kDefaultMaxLength;

  RuleSet rules() const { return rule_file.empty() ? base_rule_set() : load_rule_file(rule_file); }
  SymbolTable table() const { return symbols.empty() ? SymbolTable::canonical(l_max) : load_symbol_table(symbols); }
};

void add_rule_file(CLI::App* cmd, Common& c) {
  cmd->add_option("--rule-file", c.rule_file, "Rule file (default: packaged ODE base rules)");
}

void add_table(CLI::App* cmd, Common& c) {
  cmd->add_option("--symbols", c.symbols, "Symbol table file (default: canonical codes)");
  cmd->add_option("--l-max", c.l_max, "Encoding length when no symbol table file is given")->check(CLI::PositiveNumber);
}

void echo_config(const std::string& command, const std::vector<std::pair<std::string, std::string>>& kv) {
  std::cerr << "# " << command;
  for (const auto& [k, v] : kv) std::cerr << ' ' << k << '=' << v;
  std::cerr << '\n';
}

SelectMode parse_mode(const std::string& mode, double explore) {
  if (mode == "greedy") return SelectMode::greedy();
  if (mode == "epsilon") return SelectMode::epsilon_greedy(explore);
  if (mode == "sample") return SelectMode::sample();
  throw UsageError("--mode must be greedy, epsilon or sample");
}

std::string fmt_double(double v) {
  std::ostringstream ss;
  ss.precision(6);
  ss << v;
  return ss.str();
}

// ---------------------------------------------------------------------------

struct ParseArgs {
  std::string formula;
};

int run_parse(const ParseArgs& a) {
  std::cout << print(load_formula(a.formula)) << '\n';
  return 0;
}

struct EncodeArgs {
  Common common;
  std::string formula;
};

int run_encode(const EncodeArgs& a) {
  std::cout << format_vector(encode(load_formula(a.formula), a.common.table())) << '\n';
  return 0;
}

struct DistArgs {
  Common common;
  std::string a;
  std::string b;
};

int run_dist(const DistArgs& a) {
  const auto table = a.common.table();
  std::cout << distance(encode(load_formula(a.a), table), encode(load_formula(a.b), table)) << '\n';
  return 0;
}

struct MatchArgs {
  std::string formula;
  std::string pattern;
  std::string vars;
  bool all = false;
};

int run_match(const MatchArgs& a) {
  const Formula f = load_formula(a.formula);
  auto pat = parse_pattern(formula_text(a.pattern));
  for (const auto& v : split_csv(a.vars)) pat.vars.insert(v);
  std::vector<Match> matches;
  if (a.all) {
    matches = find_all(f, pat.tree, pat.vars);
  } else if (auto m = find_first(f, pat.tree, pat.vars)) {
    matches.push_back(std::move(*m));
  }
  if (matches.empty()) throw NotFound("template does not occur in the formula");
  for (const auto& m : matches) {
    std::cout << to_string(m.site);
    char sep = '\t';
    for (const auto& [var, sub] : m.binding) {
      std::cout << sep << var << '=' << print(sub);
      sep = ';';
    }
    std::cout << '\n';
  }
  return 0;
}

struct ApplyArgs {
  Common common;
  std::string rule;
  std::string formula;
  std::string site;
};

int run_apply(const ApplyArgs& a) {
  const RuleSet rules = a.common.rules();
  const Rule& rule = rules.by_id(a.rule);
  const Formula f = load_formula(a.formula);
  if (!a.site.empty()) {
    std::cout << print(apply_rule_at(f, rule, parse_path(a.site))) << '\n';
    return 0;
  }
  auto applied = apply_rule_first(f, rule);
  if (!applied) throw RuleNotApplicable("rule '" + rule.id + "' does not apply to the formula");
  std::cout << print(applied->result) << '\n';
  return 0;
}

struct DeriveArgs {
  Common common;
  std::string start;
  std::string goal;
  std::string goal_pattern;
  std::optional<std::string> free_of;
  std::string without;
  std::string policy;
  std::string qtable;
  bool bfs = false;
  std::string mode = "greedy";
  double explore = 0.1;
  std::uint64_t seed = 0;
  std::size_t step_cap = 50;
  std::size_t depth_cap = 12;
  bool no_loop_guard = false;
  std::string out;
};

GoalSpec goal_from_args(const std::string& goal, const std::string& goal_pattern,
                        const std::optional<std::string>& free_of, const std::string& without) {
  if (!goal.empty() == !goal_pattern.empty()) throw UsageError("give exactly one of --goal and --goal-pattern");
  if (!goal.empty()) return GoalSpec::exact(load_formula(goal));
  auto pat = parse_pattern(formula_text(goal_pattern));
  std::set<std::string> free;
  if (free_of) {
    for (auto& n : split_csv(*free_of)) free.insert(n);
  } else {
    // Default: the literal symbols of the pattern must not reappear in the holes.
    for (const auto& n : symbols_of(pat.tree)) {
      if (!pat.vars.count(n)) free.insert(n);
    }
  }
  std::set<NodeKind> kinds;
  for (const auto& n : split_csv(without)) {
    auto k = kind_from_name(n);
    if (!k) throw UsageError("unknown operator '" + n + "' in --without");
    kinds.insert(*k);
  }
  return GoalSpec::pattern(std::move(pat.tree), std::move(pat.vars), std::move(free), std::move(kinds));
}

int run_derive(const DeriveArgs& a) {
  const int engines = (!a.policy.empty()) + (!a.qtable.empty()) + (a.bfs ? 1 : 0);
  if (engines != 1) throw UsageError("choose exactly one of --policy, --qtable, --bfs");
  const Formula start = load_formula(a.start);
  const GoalSpec goal = goal_from_args(a.goal, a.goal_pattern, a.free_of, a.without);
  const RuleSet rules = a.common.rules();
  echo_config("derive", {{"goal", format_goal(goal)},
                         {"engine", a.bfs ? "bfs" : (!a.policy.empty() ? "policy" : "qtable")},
                         {"mode", a.mode},
                         {"seed", std::to_string(a.seed)},
                         {"step_cap", std::to_string(a.step_cap)},
                         {"rules_hash", std::to_string(rule_set_hash(rules))}});

  DerivationTrace trace{start, goal, {}, Outcome::Running};
  if (a.bfs) {
    auto found = bfs_oracle(start, goal, rules, a.depth_cap);
    if (found) {
      trace = std::move(*found);
    } else {
      trace.outcome = Outcome::CapExceeded;
    }
  } else {
    EnvConfig env;
    env.step_cap = a.step_cap;
    env.loop_guard = !a.no_loop_guard;
    const SelectMode mode = parse_mode(a.mode, a.explore);
    if (!a.policy.empty()) {
      Checkpoint ckpt = load_checkpoint(a.policy);
      if (ckpt.meta.rules_hash != rule_set_hash(rules) || ckpt.model.actions() != rules.size()) {
        throw DomainError("policy checkpoint was trained on a different rule set");
      }
      trace = rollout(DerivationEnv(start, goal, rules, ckpt.table, env), policy_chooser(ckpt.model, mode, a.seed));
    } else {
      QTable q = parse_qtable(slurp(a.qtable));
      if (q.action_count() != rules.size()) throw DomainError("Q-table width differs from the rule count");
      const SymbolTable table = a.common.table();
      trace = rollout(DerivationEnv(start, goal, rules, table, env), qtable_chooser(q, mode, a.seed));
    }
  }
  const std::string text = format_trace(trace);
  if (a.out.empty()) {
    std::cout << text;
  } else {
    spit(a.out, text);
    std::cout << "outcome " << outcome_name(trace.outcome) << " steps " << trace.steps.size() << '\n';
  }
  if (trace.outcome != Outcome::Reached) {
    std::cerr << "derivation did not reach the goal (" << outcome_name(trace.outcome) << ")\n";
    return 2;
  }
  return 0;
}

struct GenArgs {
  Common common;
  std::string out;
  GenOptions options;
  std::size_t depth_cap = 12;
  bool allow_partial = false;
};

int run_gen(const GenArgs& a) {
  const RuleSet rules = a.common.rules();
  echo_config("gen", {{"count", std::to_string(a.options.count)},
                      {"seed", std::to_string(a.options.seed)},
                      {"max_degree", std::to_string(a.options.max_degree)},
                      {"coeff", std::to_string(a.options.coeff_min) + ".." + std::to_string(a.options.coeff_max)},
                      {"constants_only", a.options.constants_only ? "1" : "0"},
                      {"depth_cap", std::to_string(a.depth_cap)}});
  TraceOptions topt;
  topt.depth_cap = a.depth_cap;
  Corpus corpus = build_corpus(a.options, rules, topt);
  for (const auto& d : corpus.dropped) {
    std::cerr << "dropped instance " << d.index << ": " << d.reason << ": " << d.formula << '\n';
  }
  write_corpus(a.out, corpus);
  std::size_t tests = 0;
  std::size_t steps = 0;
  for (std::size_t i = 0; i < corpus.traces.size(); ++i) {
    tests += corpus.is_test[i];
    steps += corpus.traces[i].steps.size();
  }
  std::cout << "instances " << corpus.instances.size() << " dropped " << corpus.dropped.size() << " train "
            << corpus.instances.size() - tests << " test " << tests << " samples " << steps << '\n';
  if (!corpus.unused_rules.empty()) {
    std::cerr << "rules without a trace:";
    for (const auto& r : corpus.unused_rules) std::cerr << ' ' << r;
    std::cerr << '\n';
    if (!a.allow_partial) return 2;
  }
  return 0;
}

std::vector<Problem> problems_of(const Corpus& corpus, bool test) {
  std::vector<Problem> out;
  for (std::size_t i = 0; i < corpus.instances.size(); ++i) {
    if (corpus.is_test[i] == test) out.push_back({corpus.instances[i], corpus.traces[i].goal});
  }
  return out;
}

struct TrainArgs {
  Common common;
  std::string corpus;
  std::string out;
  std::string learner = "policy";
  std::string init_policy;
  std::string qtable_out;
  std::size_t epochs = 400;
  double step_size = 0.5;
  std::size_t hidden = 64;
  std::uint64_t seed = 0;
  double gamma = 0.9;
  double alpha = 0.5;
  double explore = 0.1;
  std::size_t episodes = 5000;
  std::size_t step_cap = 50;
  std::size_t warm_sweeps = 20;
};

PolicyModel train_policy(const TrainArgs& a, const Corpus& corpus, const RuleSet& rules, const SymbolTable& table) {
  const auto train = corpus_samples(corpus, false, rules, table);
  const auto test = corpus_samples(corpus, true, rules, table);
  PolicyModel model = PolicyModel::random(table.max_length(), a.hidden, rules.size(), a.seed,
                                          1.0 / static_cast<double>(table.max_code()));
  const auto t0 = std::chrono::steady_clock::now();
  TrainReport report = policy_train(model, train, TrainConfig{a.epochs, a.step_size});
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << "train_samples " << train.size() << " test_samples " << test.size() << '\n';
  std::cout << "loss_initial " << fmt_double(report.initial_loss) << '\n';
  for (std::size_t e = 0; e < report.loss_per_epoch.size(); ++e) {
    if (e % 50 == 49 || e + 1 == report.loss_per_epoch.size()) {
      std::cout << "epoch " << e + 1 << " loss " << fmt_double(report.loss_per_epoch[e]) << '\n';
    }
  }
  std::cout << "train_accuracy " << fmt_double(top1_accuracy(model, train)) << '\n';
  if (!test.empty()) std::cout << "test_accuracy " << fmt_double(top1_accuracy(model, test)) << '\n';
  std::cout << "train_seconds " << fmt_double(secs) << '\n';
  return model;
}

int run_train(const TrainArgs& a) {
  if (a.learner != "policy" && a.learner != "q" && a.learner != "policy+q") {
    throw UsageError("--learner must be policy, q or policy+q");
  }
  const RuleSet rules = a.common.rules();
  const SymbolTable table = a.common.table();
  const Corpus corpus = read_corpus(a.corpus);
  echo_config("train", {{"learner", a.learner},
                        {"epochs", std::to_string(a.epochs)},
                        {"step_size", fmt_double(a.step_size)},
                        {"hidden", std::to_string(a.hidden)},
                        {"seed", std::to_string(a.seed)},
                        {"gamma", fmt_double(a.gamma)},
                        {"alpha", fmt_double(a.alpha)},
                        {"explore", fmt_double(a.explore)},
                        {"episodes", std::to_string(a.episodes)},
                        {"step_cap", std::to_string(a.step_cap)},
                        {"l_max", std::to_string(table.max_length())}});

  std::optional<PolicyModel> model;
  if (a.learner != "q") {
    if (!a.init_policy.empty()) {
      Checkpoint ckpt = load_checkpoint(a.init_policy);
      if (ckpt.meta.rules_hash != rule_set_hash(rules)) throw DomainError("initial policy uses another rule set");
      model = std::move(ckpt.model);
    } else {
      model = train_policy(a, corpus, rules, table);
    }
    if (!a.out.empty()) save_checkpoint(a.out, Checkpoint{*model, table, {a.seed, rule_set_hash(rules)}});
  }
  if (a.learner != "policy") {
    const std::string qpath = !a.qtable_out.empty() ? a.qtable_out : (a.learner == "q" ? a.out : "");
    if (qpath.empty()) throw UsageError("--qtable-out is required for Q-learning");
    QTable q(rules.size(), a.gamma, a.alpha);
    const auto problems = problems_of(corpus, false);
    QLearningConfig cfg;
    cfg.episodes = a.episodes;
    cfg.explore = a.explore;
    cfg.seed = a.seed;
    cfg.env.step_cap = a.step_cap;
    if (model) q_warm_start(q, problems, *model, rules, table, cfg.env, a.warm_sweeps);
    QLearningReport rep = q_learning(q, problems, rules, table, cfg);
    std::cout << "q_episodes " << rep.episodes << " reached " << rep.reached << " states " << q.state_count() << '\n';
    spit(qpath, format_qtable(q));
  }
  return 0;
}

struct EvalArgs {
  Common common;
  std::string corpus;
  std::string policy;
  std::string qtable;
  std::size_t step_cap = 50;
};

int run_eval(const EvalArgs& a) {
  if (a.policy.empty() == a.qtable.empty()) throw UsageError("choose exactly one of --policy and --qtable");
  const RuleSet rules = a.common.rules();
  const Corpus corpus = read_corpus(a.corpus);
  echo_config("eval", {{"engine", a.policy.empty() ? "qtable" : "policy"}, {"step_cap", std::to_string(a.step_cap)}});

  std::optional<Checkpoint> ckpt;
  std::optional<QTable> q;
  SymbolTable table = a.common.table();
  if (!a.policy.empty()) {
    ckpt = load_checkpoint(a.policy);
    if (ckpt->meta.rules_hash != rule_set_hash(rules)) throw DomainError("policy was trained on another rule set");
    table = ckpt->table;
    const auto test = corpus_samples(corpus, true, rules, table);
    if (!test.empty()) std::cout << "test_accuracy " << fmt_double(top1_accuracy(ckpt->model, test)) << '\n';
  } else {
    q = parse_qtable(slurp(a.qtable));
  }

  EnvConfig env;
  env.step_cap = a.step_cap;
  std::size_t n = 0, reached = 0, optimal = 0, longer = 0;
  for (std::size_t i = 0; i < corpus.instances.size(); ++i) {
    if (!corpus.is_test[i]) continue;
    ++n;
    DerivationEnv e(corpus.instances[i], corpus.traces[i].goal, rules, table, env);
    DerivationTrace t = ckpt ? rollout(e, policy_chooser(ckpt->model, SelectMode::greedy()))
                             : rollout(e, qtable_chooser(*q, SelectMode::greedy()));
    replay_trace(t, rules);
    if (t.outcome != Outcome::Reached) continue;
    ++reached;
    const std::size_t best = corpus.traces[i].steps.size();
    if (t.steps.size() < best) throw InvariantViolation("rollout beat the breadth-first oracle");
    if (t.steps.size() == best) ++optimal;
    else ++longer;
  }
  std::cout << "test_instances " << n << " reached " << reached << " optimal_length " << optimal << " longer "
            << longer << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"formderiv: formula derivation by template rewriting and learned rule selection"};
  app.require_subcommand(1);

  ParseArgs parse_args;
  auto* parse_cmd = app.add_subcommand("parse", "Parse constructor syntax and print it canonically");
  parse_cmd->add_option("--formula", parse_args.formula, "Formula text or file")->required();

  EncodeArgs encode_args;
  auto* encode_cmd = app.add_subcommand("encode", "Print the feature vector of a formula");
  encode_cmd->add_option("--formula", encode_args.formula, "Formula text or file")->required();
  add_table(encode_cmd, encode_args.common);

  DistArgs dist_args;
  auto* dist_cmd = app.add_subcommand("dist", "Positional difference between two encoded formulas");
  dist_cmd->add_option("--a", dist_args.a, "First formula (text or file)")->required();
  dist_cmd->add_option("--b", dist_args.b, "Second formula (text or file)")->required();
  add_table(dist_cmd, dist_args.common);

  MatchArgs match_args;
  auto* match_cmd = app.add_subcommand("match", "Find a template inside a formula");
  match_cmd->add_option("--formula", match_args.formula, "Formula text or file")->required();
  match_cmd->add_option("--template", match_args.pattern, "Template; ?name marks a pattern variable")->required();
  match_cmd->add_option("--vars", match_args.vars, "Comma-separated symbols treated as pattern variables");
  match_cmd->add_flag("--all", match_args.all, "List every match in pre-order");

  ApplyArgs apply_args;
  auto* apply_cmd = app.add_subcommand("apply", "Apply one rule to a formula");
  apply_cmd->add_option("--rule", apply_args.rule, "Rule id")->required();
  apply_cmd->add_option("--formula", apply_args.formula, "Formula text or file")->required();
  apply_cmd->add_option("--site", apply_args.site, "Rewrite at this path, e.g. [0,1] (default: first match)");
  add_rule_file(apply_cmd, apply_args.common);

  DeriveArgs derive_args;
  auto* derive_cmd = app.add_subcommand("derive", "Derive from a start formula towards a goal");
  derive_cmd->add_option("--start", derive_args.start, "Start formula (text or file)")->required();
  derive_cmd->add_option("--goal", derive_args.goal, "Exact goal formula");
  derive_cmd->add_option("--goal-pattern", derive_args.goal_pattern, "Goal template; ? is a wildcard");
  derive_cmd->add_option("--free-of", derive_args.free_of,
                         "Symbols the wildcards may not contain (default: the pattern's literal symbols)");
  derive_cmd->add_option("--without", derive_args.without,
                         "Comma-separated operators the wildcards may not contain, e.g. Integral");
  derive_cmd->add_option("--policy", derive_args.policy, "Policy checkpoint");
  derive_cmd->add_option("--qtable", derive_args.qtable, "Q-table file");
  derive_cmd->add_flag("--bfs", derive_args.bfs, "Use the breadth-first oracle");
  derive_cmd->add_option("--mode", derive_args.mode, "greedy, epsilon or sample");
  derive_cmd->add_option("--explore", derive_args.explore, "Exploration probability for --mode epsilon");
  derive_cmd->add_option("--seed", derive_args.seed, "Seed for stochastic modes");
  derive_cmd->add_option("--step-cap", derive_args.step_cap, "Episode step cap");
  derive_cmd->add_option("--depth-cap", derive_args.depth_cap, "Depth cap for --bfs");
  derive_cmd->add_flag("--no-loop-guard", derive_args.no_loop_guard, "Allow revisiting earlier formulas");
  derive_cmd->add_option("--out", derive_args.out, "Write the trace here instead of stdout");
  add_rule_file(derive_cmd, derive_args.common);
  add_table(derive_cmd, derive_args.common);

  GenArgs gen_args;
  auto* gen_cmd = app.add_subcommand("gen", "Generate the ODE derivation corpus");
  gen_cmd->add_option("--out", gen_args.out, "Corpus directory")->required();
  gen_cmd->add_option("--count", gen_args.options.count, "Number of instances")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--seed", gen_args.options.seed, "Generator seed");
  gen_cmd->add_option("--max-degree", gen_args.options.max_degree, "Largest monomial degree")->check(CLI::Range(1, 4));
  gen_cmd->add_option("--coeff-min", gen_args.options.coeff_min, "Smallest integer coefficient");
  gen_cmd->add_option("--coeff-max", gen_args.options.coeff_max, "Largest integer coefficient");
  gen_cmd->add_flag("--constants-only", gen_args.options.constants_only, "Only dy/dx + a y = b instances");
  gen_cmd->add_option("--depth-cap", gen_args.depth_cap, "Breadth-first search depth cap");
  gen_cmd->add_flag("--allow-partial-coverage", gen_args.allow_partial, "Do not fail when a rule is never used");
  add_rule_file(gen_cmd, gen_args.common);

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Train a policy and/or Q-table on a corpus");
  train_cmd->add_option("--corpus", train_args.corpus, "Corpus directory")->required();
  train_cmd->add_option("--out", train_args.out, "Policy checkpoint (or Q-table for --learner q)");
  train_cmd->add_option("--learner", train_args.learner, "policy, q or policy+q");
  train_cmd->add_option("--init-policy", train_args.init_policy, "Start policy+q from this checkpoint");
  train_cmd->add_option("--qtable-out", train_args.qtable_out, "Q-table output file");
  train_cmd->add_option("--epochs", train_args.epochs, "Gradient descent epochs");
  train_cmd->add_option("--step-size", train_args.step_size, "Initial gradient step size");
  train_cmd->add_option("--hidden", train_args.hidden, "Hidden layer width")->check(CLI::PositiveNumber);
  train_cmd->add_option("--seed", train_args.seed, "Seed for weights and exploration");
  train_cmd->add_option("--gamma", train_args.gamma, "Q-learning discount")->check(CLI::Range(0.0, 0.999999));
  train_cmd->add_option("--alpha", train_args.alpha, "Q-learning rate")->check(CLI::Range(1e-9, 1.0));
  train_cmd->add_option("--explore", train_args.explore, "Epsilon-greedy exploration probability");
  train_cmd->add_option("--episodes", train_args.episodes, "Q-learning episodes");
  train_cmd->add_option("--step-cap", train_args.step_cap, "Episode step cap");
  train_cmd->add_option("--warm-sweeps", train_args.warm_sweeps, "Policy warm-start sweeps for policy+q");
  add_rule_file(train_cmd, train_args.common);
  add_table(train_cmd, train_args.common);

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "Score a policy or Q-table on the corpus test split");
  eval_cmd->add_option("--corpus", eval_args.corpus, "Corpus directory")->required();
  eval_cmd->add_option("--policy", eval_args.policy, "Policy checkpoint");
  eval_cmd->add_option("--qtable", eval_args.qtable, "Q-table file");
  eval_cmd->add_option("--step-cap", eval_args.step_cap, "Episode step cap");
  add_rule_file(eval_cmd, eval_args.common);
  add_table(eval_cmd, eval_args.common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*parse_cmd) return run_parse(parse_args);
    if (*encode_cmd) return run_encode(encode_args);
    if (*dist_cmd) return run_dist(dist_args);
    if (*match_cmd) return run_match(match_args);
    if (*apply_cmd) return run_apply(apply_args);
    if (*derive_cmd) return run_derive(derive_args);
    if (*gen_cmd) return run_gen(gen_args);
    if (*train_cmd) return run_train(train_args);
    if (*eval_cmd) return run_eval(eval_args);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 3;
  }
  return 1;
}
