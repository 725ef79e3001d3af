#include "formderiv/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <numeric>
#include <set>

#include "base_rules_data.hpp"
#include "formderiv/error.hpp"
#include "formderiv/random.hpp"
#include "text_util.hpp"

namespace formderiv {

using namespace build;

std::string_view base_rules_text() noexcept { return kBaseRulesText; }

RuleSet base_rule_set() { return parse_rule_file(kBaseRulesText); }

std::string_view shape_name(FamilyShape s) noexcept {
  switch (s) {
    case FamilyShape::Zero:
      return "zero";
    case FamilyShape::Constant:
      return "constant";
    case FamilyShape::Linear:
      return "linear";
    case FamilyShape::Monomial:
      return "monomial";
    case FamilyShape::ExpX:
      return "exp";
    case FamilyShape::SinX:
      return "sin";
  }
  return "unknown";
}

namespace {

struct VariablePair {
  const char* dependent;
  const char* independent;
};

constexpr VariablePair kVariables[] = {{"y", "x"}, {"N", "t"}, {"u", "x"}, {"z", "t"}, {"f", "x"}, {"C", "t"}};

// Named constants; disjoint from the variable names above.
constexpr const char* kConstants[] = {"a",     "b",     "c",    "k",     "m",     "p",   "q",
                                      "gamma", "lambda", "mu",   "alpha", "beta",  "rho", "omega",
                                      "Sigma", "phi",    "kappa"};

class InstanceBuilder {
 public:
  InstanceBuilder(const GenOptions& opt, Rng& rng) : opt_(opt), rng_(rng) {}

  // A single leaf: Num in the coefficient range or a named constant.
  Formula leaf_constant() {
    if (uniform01(rng_) < 0.5) {
      const auto span = static_cast<std::size_t>(opt_.coeff_max - opt_.coeff_min + 1);
      return Num(static_cast<long long>(opt_.coeff_min) + static_cast<long long>(uniform_index(rng_, span)));
    }
    return Sym(kConstants[uniform_index(rng_, std::size(kConstants))]);
  }

  // A constant possibly built as a product of named constants, like the
  // gamma*Sigma*phi source term.
  Formula compound_constant() {
    const double u = uniform01(rng_);
    if (u < 0.5) return leaf_constant();
    if (u < 0.75) return Times(leaf_constant(), leaf_constant());
    return Times(leaf_constant(), Times(leaf_constant(), leaf_constant()));
  }

  FamilyMember constant_member(bool compound) {
    return {FamilyShape::Constant, 0, compound ? compound_constant() : leaf_constant()};
  }

  FamilyMember any_member(const std::string& x) {
    const std::size_t pick = uniform_index(rng_, opt_.max_degree >= 2 ? 5 : 4);
    switch (pick) {
      case 0:
        return constant_member(false);
      case 1:
        return {FamilyShape::Linear, 1, Times(leaf_constant(), Sym(x))};
      case 2:
        return {FamilyShape::ExpX, 0, Exp(Sym(x))};
      case 3:
        return {FamilyShape::SinX, 0, Sin(Sym(x))};
      default: {
        const int k = 2 + static_cast<int>(uniform_index(rng_, static_cast<std::size_t>(opt_.max_degree - 1)));
        return {FamilyShape::Monomial, k, Times(leaf_constant(), Power(Sym(x), Num(k)))};
      }
    }
  }

 private:
  const GenOptions& opt_;
  Rng& rng_;
};

OdeInstance make_instance(const GenOptions& opt, std::size_t index) {
  Rng rng = make_rng(opt.seed, index);
  InstanceBuilder b(opt, rng);
  OdeInstance inst;
  inst.index = index;
  const auto& vars = kVariables[uniform_index(rng, std::size(kVariables))];
  inst.dependent = vars.dependent;
  inst.independent = vars.independent;
  const Formula y = Sym(inst.dependent);
  const Formula dydx = DerivRatio(y, Sym(inst.independent));

  const bool separable = opt.constants_only || uniform01(rng) < 0.6;
  if (separable) {
    inst.p = b.constant_member(uniform01(rng) < 0.3);
    if (!opt.constants_only && uniform01(rng) < 0.2) {
      inst.q = {FamilyShape::Zero, 0, Num(0)};
    } else {
      inst.q = b.constant_member(!opt.constants_only);
    }
    inst.standard_form = opt.constants_only || uniform01(rng) < 0.6;
    const Formula py = Times(inst.p.term, y);
    inst.form = inst.standard_form ? Equal(Plus(dydx, py), inst.q.term) : Equal(dydx, Minus(inst.q.term, py));
  } else {
    inst.p = {FamilyShape::Zero, 0, Num(0)};
    inst.q = b.any_member(inst.independent);
    inst.standard_form = false;
    inst.form = Equal(dydx, inst.q.term);
  }
  return inst;
}

std::uint64_t parse_u64(std::string_view s) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw FormatError("bad integer '" + std::string(s) + "'");
  return v;
}

long long parse_i64(std::string_view s) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw FormatError("bad integer '" + std::string(s) + "'");
  return v;
}

std::string trace_file_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%06zu.trace", i);
  return buf;
}

}  // namespace

std::vector<OdeInstance> gen_instances(const GenOptions& options) {
  if (options.count == 0) throw DomainError("instance count must be at least 1");
  if (options.max_degree < 1 || options.max_degree > 4) throw DomainError("max degree must lie in 1..4");
  if (options.coeff_min > options.coeff_max || options.coeff_min < 0) throw DomainError("bad coefficient range");
  std::vector<OdeInstance> out;
  out.reserve(options.count);
  for (std::size_t i = 0; i < options.count; ++i) out.push_back(make_instance(options, i));
  return out;
}

GoalSpec isolation_goal(const std::string& dependent, bool closed_form) {
  std::set<NodeKind> without;
  if (closed_form) without.insert(NodeKind::Integral);
  return GoalSpec::pattern(Equal(Sym(dependent), Sym("_rhs")), {"_rhs"}, {dependent}, std::move(without));
}

GoalSpec instance_goal(const OdeInstance& instance) {
  return isolation_goal(instance.dependent, instance.p.shape != FamilyShape::Zero);
}

Formula pm149_equation() {
  return Equal(DerivRatio(Sym("N"), Sym("t")),
               Minus(Times(Sym("gamma"), Times(Sym("Sigma"), Sym("phi"))), Times(Sym("lambda"), Sym("N"))));
}

Formula pm149_standard_form() {
  return Equal(Plus(DerivRatio(Sym("N"), Sym("t")), Times(Sym("lambda"), Sym("N"))),
               Times(Sym("gamma"), Times(Sym("Sigma"), Sym("phi"))));
}

Formula pm149_separated_milestone() {
  return Equal(Integral(Divide(Num(1), Minus(Times(Sym("gamma"), Times(Sym("Sigma"), Sym("phi"))),
                                             Times(Sym("lambda"), Sym("N")))),
                        Sym("N")),
               Sym("t"));
}

GoalSpec pm149_goal() { return isolation_goal("N", true); }

// ---------------------------------------------------------------------------

Corpus gen_traces(const std::vector<OdeInstance>& instances, const RuleSet& rules, const GenOptions& options,
                  const TraceOptions& trace_options) {
  Corpus corpus;
  corpus.options = options;
  std::set<std::string> used;
  for (const auto& inst : instances) {
    auto trace = bfs_oracle(inst.form, instance_goal(inst), rules, trace_options.depth_cap);
    if (!trace) {
      corpus.dropped.push_back({inst.index, print(inst.form),
                                "no derivation within " + std::to_string(trace_options.depth_cap) + " steps"});
      continue;
    }
    replay_trace(*trace, rules);
    for (const auto& s : trace->steps) used.insert(s.rule_id);
    corpus.instances.push_back(inst.form);
    corpus.traces.push_back(std::move(*trace));
  }
  for (const auto& r : rules) {
    if (!used.count(r.id)) corpus.unused_rules.push_back(r.id);
  }

  const std::size_t n = corpus.instances.size();
  corpus.is_test.assign(n, false);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng = make_rng(options.seed, 0x5eed5eedULL << 20);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[uniform_index(rng, i)]);
  const auto n_test = static_cast<std::size_t>(static_cast<double>(n) * trace_options.test_fraction + 0.5);
  for (std::size_t i = 0; i < n_test && i < n; ++i) corpus.is_test[order[i]] = true;
  return corpus;
}

Corpus build_corpus(const GenOptions& options, const RuleSet& rules, const TraceOptions& trace_options) {
  return gen_traces(gen_instances(options), rules, options, trace_options);
}

std::vector<TraceSample> samples_from_trace(const DerivationTrace& trace, const RuleSet& rules,
                                            const SymbolTable& table) {
  std::vector<TraceSample> out;
  out.reserve(trace.steps.size());
  for (const auto& s : trace.steps) {
    auto idx = rules.index_of(s.rule_id);
    if (!idx) throw UnknownRule("trace uses rule '" + s.rule_id + "' which is not in the rule set");
    out.push_back({encode(s.before, table), *idx});
  }
  return out;
}

std::vector<TraceSample> corpus_samples(const Corpus& corpus, bool test, const RuleSet& rules,
                                        const SymbolTable& table) {
  std::vector<TraceSample> out;
  for (std::size_t i = 0; i < corpus.traces.size(); ++i) {
    if (corpus.is_test[i] != test) continue;
    auto s = samples_from_trace(corpus.traces[i], rules, table);
    out.insert(out.end(), std::make_move_iterator(s.begin()), std::make_move_iterator(s.end()));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Corpus files

void write_corpus(const std::filesystem::path& dir, const Corpus& corpus) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "traces");
  for (const auto& entry : fs::directory_iterator(dir / "traces")) {
    if (entry.path().extension() == ".trace") fs::remove(entry.path());
  }

  std::string instances;
  std::string split;
  for (std::size_t i = 0; i < corpus.instances.size(); ++i) {
    instances += print(corpus.instances[i]);
    instances += '\n';
    split += std::to_string(i);
    split += corpus.is_test[i] ? "\ttest\n" : "\ttrain\n";
    detail::write_file(dir / "traces" / trace_file_name(i), format_trace(corpus.traces[i]));
  }
  detail::write_file(dir / "instances.txt", instances);
  detail::write_file(dir / "split.txt", split);

  const auto& o = corpus.options;
  std::string seed = "seed=" + std::to_string(o.seed) + "\ncount=" + std::to_string(o.count) +
                     "\nmax_degree=" + std::to_string(o.max_degree) + "\ncoeff_min=" + std::to_string(o.coeff_min) +
                     "\ncoeff_max=" + std::to_string(o.coeff_max) +
                     "\nconstants_only=" + (o.constants_only ? "1" : "0") + "\n";
  detail::write_file(dir / "seed.txt", seed);
}

Corpus read_corpus(const std::filesystem::path& dir) {
  Corpus corpus;
  const std::string seed_text = detail::read_file(dir / "seed.txt");
  for (auto raw : detail::split_lines(seed_text)) {
    auto line = detail::trim(raw);
    auto eq = line.find('=');
    if (eq == std::string_view::npos) continue;
    auto key = line.substr(0, eq);
    auto val = line.substr(eq + 1);
    auto& o = corpus.options;
    if (key == "seed") o.seed = parse_u64(val);
    else if (key == "count") o.count = parse_u64(val);
    else if (key == "max_degree") o.max_degree = static_cast<int>(parse_i64(val));
    else if (key == "coeff_min") o.coeff_min = static_cast<int>(parse_i64(val));
    else if (key == "coeff_max") o.coeff_max = static_cast<int>(parse_i64(val));
    else if (key == "constants_only") o.constants_only = val == "1";
  }
  const std::string instances_text = detail::read_file(dir / "instances.txt");
  for (auto line : detail::split_lines(instances_text)) {
    if (!detail::trim(line).empty()) corpus.instances.push_back(parse(line));
  }
  corpus.is_test.assign(corpus.instances.size(), false);
  const std::string split_text = detail::read_file(dir / "split.txt");
  for (auto line : detail::split_lines(split_text)) {
    auto f = detail::split(detail::trim(line), '\t');
    if (f.size() != 2) throw FormatError("split.txt lines need '<index>\\t<train|test>'");
    const auto i = parse_u64(f[0]);
    if (i >= corpus.instances.size()) throw FormatError("split.txt index out of range");
    if (f[1] != "train" && f[1] != "test") throw FormatError("split must be 'train' or 'test'");
    corpus.is_test[i] = f[1] == "test";
  }
  for (std::size_t i = 0; i < corpus.instances.size(); ++i) {
    auto trace = parse_trace(detail::read_file(dir / "traces" / trace_file_name(i)));
    if (!(trace.start == corpus.instances[i])) {
      throw FormatError("trace " + std::to_string(i) + " does not start at its instance");
    }
    corpus.traces.push_back(std::move(trace));
  }
  return corpus;
}

}  // namespace formderiv
