#pragma once

// Seeded random formula and template generators shared by unit and acceptance tests.

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "formderiv/formula.hpp"
#include "formderiv/pattern.hpp"
#include "formderiv/random.hpp"

namespace formderiv::testkit {

inline constexpr std::array<NodeKind, 15> kOperatorKinds = {
    NodeKind::Equal, NodeKind::Plus, NodeKind::Minus,        NodeKind::Times, NodeKind::Divide,
    NodeKind::Power, NodeKind::Sqrt, NodeKind::Integral,     NodeKind::Differential, NodeKind::DerivRatio,
    NodeKind::Sum,   NodeKind::Ln,   NodeKind::Exp,          NodeKind::Sin,   NodeKind::Cos,
};

struct TreeGen {
  Rng rng;
  std::vector<std::string> symbols{"a", "b", "x", "y"};
  std::vector<std::string> numerals{"1", "2", "-1", "0.5"};
  double leaf_bias = 0.3;

  explicit TreeGen(std::uint64_t seed, std::uint64_t stream = 0) : rng(make_rng(seed, stream)) {}

  Formula leaf() {
    if (uniform01(rng) < 0.75) return Formula::sym(symbols[uniform_index(rng, symbols.size())]);
    return Formula::num(numerals[uniform_index(rng, numerals.size())]);
  }

  // Depth counts edges: depth 0 is a single leaf.
  Formula tree(std::size_t max_depth) {
    if (max_depth == 0 || uniform01(rng) < leaf_bias) return leaf();
    const double pick = uniform01(rng);
    if (pick < 0.05) {
      std::vector<Formula> args;
      const std::size_t n = uniform_index(rng, 3);
      for (std::size_t i = 0; i < n; ++i) args.push_back(tree(max_depth - 1));
      return Formula::func(uniform01(rng) < 0.5 ? "f" : "g", std::move(args));
    }
    const NodeKind kind = kOperatorKinds[uniform_index(rng, kOperatorKinds.size())];
    const Arity ar = arity_of(kind);
    std::size_t n = ar.min;
    if (ar.max > ar.min) n += uniform_index(rng, 2);  // Plus/Times: 2 or 3 children
    std::vector<Formula> kids;
    for (std::size_t i = 0; i < n; ++i) kids.push_back(tree(max_depth - 1));
    return Formula::make(kind, std::move(kids));
  }
};

// A template: a random shallow tree whose symbol leaves are mostly pattern variables.
struct Template {
  Formula tree;
  PatternVarSet vars;
};

inline Template random_template(TreeGen& gen, std::size_t max_depth) {
  Template t{gen.tree(max_depth), {}};
  for (const auto& s : symbols_of(t.tree)) {
    if (uniform01(gen.rng) < 0.8) t.vars.insert(s);
  }
  return t;
}

// Instantiates `t` by replacing each variable with a random subtree.
inline Formula instantiate(TreeGen& gen, const Template& t, std::size_t sub_depth) {
  Binding b;
  for (const auto& v : t.vars) b.emplace(v, gen.tree(sub_depth));
  return substitute(t.tree, b);
}

}  // namespace formderiv::testkit
