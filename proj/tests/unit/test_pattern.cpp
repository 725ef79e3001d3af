#include <gtest/gtest.h>

#include "formderiv/formula.hpp"
#include "formderiv/pattern.hpp"
#include "oracles.hpp"
#include "random_trees.hpp"

using namespace formderiv;
using namespace formderiv::build;

namespace {

const Formula x = Sym("x");
const Formula y = Sym("y");

}  // namespace

TEST(MatchAt, DifferentialTemplate) {
  // df(x) = sin(x) dx against dy = a dx
  const Formula f = Equal(Der(Func("f", x)), Times(Sin(x), Der(x)));
  const Formula tpl = Equal(Der(Sym("y")), Times(Sym("a"), Der(Sym("x"))));
  auto b = match_at(f, Path{}, tpl, {"y", "a", "x"});
  ASSERT_TRUE(b);
  EXPECT_EQ(b->at("y"), Func("f", x));
  EXPECT_EQ(b->at("a"), Sin(x));
  EXPECT_EQ(b->at("x"), x);
  // without x as a variable the literal leaf still agrees
  EXPECT_TRUE(match_at(f, Path{}, tpl, {"y", "a"}));
}

TEST(MatchAt, KindMismatch) {
  EXPECT_FALSE(match_at(Plus(x, y), Path{}, Minus(Sym("a"), Sym("b")), {"a", "b"}));
}

TEST(MatchAt, NonLinear) {
  const Formula tpl = Plus(Sym("a"), Sym("a"));
  auto b = match_at(Plus(x, x), Path{}, tpl, {"a"});
  ASSERT_TRUE(b);
  EXPECT_EQ(b->at("a"), x);
  EXPECT_FALSE(match_at(Plus(x, y), Path{}, tpl, {"a"}));
  // repeated compound subtrees
  EXPECT_TRUE(match_at(Plus(Sin(x), Sin(x)), Path{}, tpl, {"a"}));
  EXPECT_FALSE(match_at(Plus(Sin(x), Sin(y)), Path{}, tpl, {"a"}));
}

TEST(MatchAt, LiteralsMustAgree) {
  EXPECT_FALSE(match_at(Power(x, Num(3)), Path{}, Power(Sym("a"), Num(2)), {"a"}));
  EXPECT_TRUE(match_at(Power(x, Num(2)), Path{}, Power(Sym("a"), Num(2)), {"a"}));
  EXPECT_FALSE(match_at(Func("f", x), Path{}, Func("g", Sym("a")), {"a"}));
  // variadic nodes match only at equal arity
  EXPECT_FALSE(match_at(Plus(x, y, x), Path{}, Plus(Sym("a"), Sym("b")), {"a", "b"}));
}

TEST(FindFirst, ProductEquation) {
  // e^x sin(x) = m(x) t against a = b c
  const Formula f = Equal(Times(Exp(x), Sin(x)), Times(Func("m", x), Sym("t")));
  auto m = find_first(f, Equal(Sym("a"), Times(Sym("b"), Sym("c"))), {"a", "b", "c"});
  ASSERT_TRUE(m);
  EXPECT_TRUE(m->site.is_root());
  EXPECT_EQ(m->binding.at("a"), Times(Exp(x), Sin(x)));
  EXPECT_EQ(m->binding.at("b"), Func("m", x));
  EXPECT_EQ(m->binding.at("c"), Sym("t"));
}

TEST(FindFirst, SelfMatch) {
  const Formula f = Equal(Plus(x, y), Sin(x));
  auto m = find_first(f, f, {});
  ASSERT_TRUE(m);
  EXPECT_TRUE(m->site.is_root());
  EXPECT_TRUE(m->binding.empty());
}

TEST(FindFirst, SearchesEveryChild) {
  // the only match lives in the second child of the second child
  const Formula f = Equal(Sin(x), Plus(y, Times(x, Ln(y))));
  auto m = find_first(f, Ln(Sym("u")), {"u"});
  ASSERT_TRUE(m);
  EXPECT_EQ(m->site, (Path{{1, 1, 1}}));
}

TEST(FindAll, ThreeSums) {
  const Formula f = Plus(Plus(Sym("a"), Sym("b")), Plus(Sym("c"), Sym("d")));
  auto ms = find_all(f, Plus(Sym("x"), Sym("y")), {"x", "y"});
  ASSERT_EQ(ms.size(), 3u);
  EXPECT_EQ(ms[0].site, Path{});
  EXPECT_EQ(ms[1].site, (Path{{0}}));
  EXPECT_EQ(ms[2].site, (Path{{1}}));
}

TEST(FindAll, EmptyAndSelf) {
  const Formula f = Plus(x, y);
  EXPECT_TRUE(find_all(f, Minus(Sym("a"), Sym("b")), {"a", "b"}).empty());
  auto self = find_all(f, f, {});
  ASSERT_EQ(self.size(), 1u);
  EXPECT_TRUE(self[0].site.is_root());
}

TEST(Substitute, ReplacesOnlyBoundLeaves) {
  const Formula tpl = Equal(Sym("a"), Minus(Sym("c"), Sym("b")));
  Binding b{{"a", Sin(x)}, {"c", Num(2)}};
  EXPECT_EQ(substitute(tpl, b), Equal(Sin(x), Minus(Num(2), Sym("b"))));
}

TEST(PatternSyntax, Holes) {
  auto p = parse_pattern("Equal(?lhs, Plus(?, ?))");
  EXPECT_EQ(p.vars, (PatternVarSet{"lhs", "_h0", "_h1"}));
  EXPECT_EQ(p.tree, Equal(Sym("lhs"), Plus(Sym("_h0"), Sym("_h1"))));
  EXPECT_EQ(print_pattern(p.tree, p.vars), "Equal(?lhs,Plus(?_h0,?_h1))");
  EXPECT_EQ(parse_pattern(print_pattern(p.tree, p.vars)).tree, p.tree);
}

// Property: find_first / find_all agree with the naive per-path scan, every
// reported match is sound, and the calls are deterministic.
TEST(Properties, OracleAgreement) {
  testkit::TreeGen gen(21);
  std::size_t nonempty = 0;
  for (int i = 0; i < 200; ++i) {
    const auto tpl = testkit::random_template(gen, 2);
    Formula f = gen.tree(5);
    // plant an instance half of the time so matches are common
    if (i % 2 == 0) {
      const auto paths = all_paths(f);
      const Path& p = paths[uniform_index(gen.rng, paths.size())];
      f = replace_at(f, p, testkit::instantiate(gen, tpl, 1));
    }
    const auto oracle = testkit::oracle_find_all(f, tpl.tree, tpl.vars);
    const auto got = find_all(f, tpl.tree, tpl.vars);
    ASSERT_EQ(got.size(), oracle.size()) << print(f) << " / " << print(tpl.tree);
    for (std::size_t k = 0; k < got.size(); ++k) {
      ASSERT_EQ(got[k].site.steps, oracle[k].site);
      ASSERT_EQ(testkit::as_text(got[k].binding), oracle[k].binding);
      ASSERT_EQ(substitute(tpl.tree, got[k].binding), subtree_at(f, got[k].site));
    }
    const auto first = find_first(f, tpl.tree, tpl.vars);
    ASSERT_EQ(first.has_value(), !oracle.empty());
    if (first) {
      ASSERT_EQ(first->site.steps, oracle.front().site);
    }
    nonempty += !oracle.empty();
    const auto again = find_all(f, tpl.tree, tpl.vars);
    ASSERT_EQ(again.size(), got.size());
    for (std::size_t k = 0; k < got.size(); ++k) ASSERT_EQ(again[k].site, got[k].site);
  }
  EXPECT_GE(nonempty, 100u);
}
