#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "formderiv/derivation.hpp"
#include "formderiv/encoding.hpp"
#include "formderiv/formula.hpp"
#include "formderiv/rewrite.hpp"
#include "formderiv/rl.hpp"

namespace formderiv {

/// Text of the packaged base rule file (data/rules/ode_base.rules).
std::string_view base_rules_text() noexcept;
RuleSet base_rule_set();

/// Function family for P(x) and Q(x): a, a x, a x^k, e^x, sin x (plus the
/// zero function for absent terms).
enum class FamilyShape { Zero, Constant, Linear, Monomial, ExpX, SinX };

std::string_view shape_name(FamilyShape s) noexcept;

struct FamilyMember {
  FamilyShape shape = FamilyShape::Zero;
  int degree = 0;  // Monomial only
  Formula term = Formula::num("0");  // the concrete tree
};

struct OdeInstance {
  std::size_t index = 0;
  std::string dependent;    // y
  std::string independent;  // x
  FamilyMember p;
  FamilyMember q;
  /// true: dy/dx + P y = Q; false: already rearranged as dy/dx = Q - P y
  /// (or dy/dx = Q when P is zero).
  bool standard_form = true;
  Formula form = Formula::num("0");
};

struct GenOptions {
  std::size_t count = 500;
  int max_degree = 3;
  int coeff_min = 1;
  int coeff_max = 5;
  std::uint64_t seed = 0;
  /// Separable constant-coefficient instances dy/dx + a y = b only.
  bool constants_only = false;
};

/// Deterministic in (options, instance index). Throws DomainError on bad options.
std::vector<OdeInstance> gen_instances(const GenOptions& options);

/// Goal for an instance: `y = ?` with y absent from the right-hand side.
/// `closed_form` also rules out unevaluated integrals on the right.
GoalSpec isolation_goal(const std::string& dependent, bool closed_form = false);
/// Separable instances must be solved in closed form; direct-integration
/// instances (P = 0) stop at y = Integral(Q, x).
GoalSpec instance_goal(const OdeInstance& instance);

/// dN/dt = gamma Sigma phi - lambda N, with the macroscopic cross-section
/// times flux written Times(Sigma, phi).
Formula pm149_equation();
/// The same equation as a family member: dN/dt + lambda N = gamma Sigma phi.
Formula pm149_standard_form();
/// Integral(1/(gamma Sigma phi - lambda N), N) = t.
Formula pm149_separated_milestone();
GoalSpec pm149_goal();

struct DroppedInstance {
  std::size_t index;
  std::string formula;
  std::string reason;
};

struct Corpus {
  GenOptions options;
  std::vector<Formula> instances;      // kept instances, renumbered from 0
  std::vector<DerivationTrace> traces;  // traces[i] solves instances[i]
  std::vector<bool> is_test;           // split assignment per kept instance
  std::vector<DroppedInstance> dropped;
  std::vector<std::string> unused_rules;  // base rules no trace exercises
};

struct TraceOptions {
  std::size_t depth_cap = 12;
  double test_fraction = 0.2;
};

/// Labels every instance with a shortest derivation from bfs_oracle. Instances
/// with no derivation within the cap are dropped and listed.
Corpus gen_traces(const std::vector<OdeInstance>& instances, const RuleSet& rules, const GenOptions& options,
                  const TraceOptions& trace_options = {});

Corpus build_corpus(const GenOptions& options, const RuleSet& rules, const TraceOptions& trace_options = {});

/// One sample per step: (encoded tree before the step, rule index).
std::vector<TraceSample> samples_from_trace(const DerivationTrace& trace, const RuleSet& rules,
                                            const SymbolTable& table);

/// Samples of the train (test == false) or test split.
std::vector<TraceSample> corpus_samples(const Corpus& corpus, bool test, const RuleSet& rules,
                                        const SymbolTable& table);

/// Writes instances.txt, traces/NNNNNN.trace, split.txt, seed.txt.
void write_corpus(const std::filesystem::path& dir, const Corpus& corpus);
Corpus read_corpus(const std::filesystem::path& dir);

}  // namespace formderiv
