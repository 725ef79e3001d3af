#include <gtest/gtest.h>

#include <map>

#include "formderiv/encoding.hpp"
#include "formderiv/error.hpp"
#include "oracles.hpp"
#include "random_trees.hpp"

using namespace formderiv;
using namespace formderiv::build;

namespace {

std::vector<int> prefix(const FeatureVector& v, std::size_t n) { return {v.values.begin(), v.values.begin() + n}; }

std::map<NodeKind, int> canonical_codes() {
  const SymbolTable t = SymbolTable::canonical();
  std::map<NodeKind, int> m;
  for (std::size_t k = 0; k < kNodeKindCount; ++k) m[static_cast<NodeKind>(k)] = t.code(static_cast<NodeKind>(k));
  return m;
}

// t e^x + m cos x   and   t e^{-x} - a sin x
Formula first_pair() { return Plus(Times(Sym("t"), Exp(Sym("x"))), Times(Sym("m"), Cos(Sym("x")))); }
Formula second_pair() {
  return Minus(Times(Sym("t"), Exp(Times(Num(-1), Sym("x")))), Times(Sym("a"), Sin(Sym("x"))));
}

}  // namespace

TEST(SymbolTable, CanonicalCodes) {
  const SymbolTable t = SymbolTable::canonical();
  EXPECT_EQ(t.code(NodeKind::Sym), 0);
  EXPECT_EQ(t.code(NodeKind::Num), 0);
  EXPECT_EQ(t.code(NodeKind::Plus), 1);
  EXPECT_EQ(t.code(NodeKind::Minus), 2);
  EXPECT_EQ(t.code(NodeKind::Times), 3);
  EXPECT_EQ(t.code(NodeKind::Equal), 4);
  EXPECT_EQ(t.code(NodeKind::Integral), 5);
  EXPECT_EQ(t.code(NodeKind::Sum), 6);
  EXPECT_EQ(t.code(NodeKind::Divide), 8);
  EXPECT_EQ(t.code(NodeKind::Sqrt), 9);
  EXPECT_EQ(t.code(NodeKind::Differential), 10);
  EXPECT_EQ(t.code(NodeKind::Ln), 11);
  EXPECT_EQ(t.code(NodeKind::Exp), 12);
  EXPECT_EQ(t.code(NodeKind::DerivRatio), 13);
  EXPECT_EQ(t.code(NodeKind::Sin), 14);
  EXPECT_EQ(t.code(NodeKind::Cos), 15);
  EXPECT_EQ(t.code(NodeKind::Power), 16);
  EXPECT_EQ(t.code(NodeKind::FuncApply), 17);
  EXPECT_EQ(t.max_length(), 64u);
  EXPECT_EQ(t.max_code(), 17);
}

TEST(SymbolTable, TextRoundTripAndValidation) {
  const SymbolTable t = SymbolTable::canonical(40);
  const std::string text = format_symbol_table(t);
  EXPECT_NE(text.find("L_max=40"), std::string::npos);
  const SymbolTable back = parse_symbol_table(text);
  EXPECT_EQ(back, t);
  EXPECT_EQ(back.fingerprint(), t.fingerprint());
  EXPECT_NE(SymbolTable::canonical(41).fingerprint(), t.fingerprint());

  std::array<int, kNodeKindCount> codes{};
  for (std::size_t k = 0; k < kNodeKindCount; ++k) codes[k] = t.code(static_cast<NodeKind>(k));
  auto dup = codes;
  dup[static_cast<std::size_t>(NodeKind::Plus)] = dup[static_cast<std::size_t>(NodeKind::Minus)];
  EXPECT_THROW(SymbolTable(dup, 64), FormatError);
  auto leaf = codes;
  leaf[static_cast<std::size_t>(NodeKind::Sym)] = 3;
  EXPECT_THROW(SymbolTable(leaf, 64), FormatError);
  auto zero = codes;
  zero[static_cast<std::size_t>(NodeKind::Sin)] = 0;
  EXPECT_THROW(SymbolTable(zero, 64), FormatError);
  EXPECT_THROW(SymbolTable(codes, 0), FormatError);
  EXPECT_THROW(parse_symbol_table("L_max=64\nPlus=1\n"), FormatError);
}

TEST(Encode, Leaf) {
  const auto v = encode(Sym("x"), SymbolTable::canonical());
  EXPECT_EQ(v.values, std::vector<int>(64, 0));
}

TEST(Encode, SingleSum) {
  const auto v = encode(Plus(Sym("a"), Sym("b")), SymbolTable::canonical());
  ASSERT_EQ(v.values.size(), 64u);
  EXPECT_EQ(prefix(v, 4), (std::vector<int>{1, 0, 0, 0}));
  EXPECT_EQ(unpadded_length(Plus(Sym("a"), Sym("b"))), 3u);
}

TEST(Encode, WorkedPairUnderCanonicalTable) {
  const SymbolTable t = SymbolTable::canonical();
  // hand-computed: root, its children, then each internal child in order
  const std::vector<int> first{1, 3, 3, 3, 0, 12, 12, 0, 3, 0, 15, 15, 0};
  const std::vector<int> second{2, 3, 3, 3, 0, 12, 12, 3, 3, 0, 0, 3, 0, 14, 14, 0};
  EXPECT_EQ(unpadded_length(first_pair()), first.size());
  EXPECT_EQ(unpadded_length(second_pair()), second.size());
  EXPECT_EQ(prefix(encode(first_pair(), t), first.size()), first);
  EXPECT_EQ(prefix(encode(second_pair(), t), second.size()), second);
  EXPECT_EQ(testkit::oracle_encode(first_pair(), canonical_codes()), first);
  EXPECT_EQ(testkit::oracle_encode(second_pair(), canonical_codes()), second);
}

TEST(Distance, WorkedPairIsSix) {
  const SymbolTable t = SymbolTable::canonical();
  const auto ea = testkit::oracle_encode(first_pair(), canonical_codes());
  const auto eb = testkit::oracle_encode(second_pair(), canonical_codes());
  const std::size_t oracle = testkit::oracle_hamming(ea, eb, t.max_length());
  EXPECT_EQ(oracle, 6u);
  EXPECT_EQ(distance(encode(first_pair(), t), encode(second_pair(), t)), oracle);
}

TEST(Distance, Examples) {
  FeatureVector a{{1, 2, 0, 0}, 0};
  FeatureVector b{{1, 3, 0, 0}, 0};
  EXPECT_EQ(distance(a, b), 1u);
  EXPECT_EQ(distance(a, a), 0u);
  FeatureVector shorter{{1, 2, 0}, 0};
  EXPECT_THROW(distance(a, shorter), TableMismatch);
  const auto x = encode(Plus(Sym("a"), Sym("b")), SymbolTable::canonical());
  const auto y = encode(Plus(Sym("a"), Sym("b")), SymbolTable::canonical(64));
  EXPECT_EQ(distance(x, y), 0u);
  // same length, different code assignment
  std::array<int, kNodeKindCount> codes{};
  const SymbolTable c = SymbolTable::canonical();
  for (std::size_t k = 0; k < kNodeKindCount; ++k) codes[k] = c.code(static_cast<NodeKind>(k));
  std::swap(codes[static_cast<std::size_t>(NodeKind::Plus)], codes[static_cast<std::size_t>(NodeKind::Minus)]);
  const auto z = encode(Plus(Sym("a"), Sym("b")), SymbolTable(codes, 64));
  EXPECT_THROW(distance(x, z), TableMismatch);
}

TEST(Encode, OverflowBoundary) {
  // a chain of n Sin nodes has unpadded length 2n
  Formula f = Sym("x");
  for (int i = 0; i < 32; ++i) f = Sin(f);
  EXPECT_EQ(unpadded_length(f), 64u);
  EXPECT_NO_THROW(encode(f, SymbolTable::canonical(64)));
  EXPECT_THROW(encode(f, SymbolTable::canonical(63)), EncodingOverflow);
  EXPECT_THROW(encode(Sin(f), SymbolTable::canonical(64)), EncodingOverflow);
}

TEST(Encode, VectorText) {
  const auto v = encode(Plus(Sym("a"), Sym("b")), SymbolTable::canonical(5));
  EXPECT_EQ(format_vector(v), "1 0 0 0 0");
  EXPECT_EQ(parse_vector("1 0 0 0 0"), v);
  EXPECT_THROW(parse_vector("1 x 0"), FormatError);
}

TEST(Properties, DeterministicAndLeafBlind) {
  const SymbolTable t = SymbolTable::canonical();
  EXPECT_EQ(encode(Plus(Sym("x"), Sym("y")), t), encode(Plus(Sym("a"), Sym("b")), t));
  EXPECT_EQ(encode(Func("f", Sym("x")), t), encode(Func("g", Num(3)), t));
  testkit::TreeGen gen(41);
  const auto codes = canonical_codes();
  for (int i = 0; i < 200; ++i) {
    const Formula f = gen.tree(4);
    if (unpadded_length(f) > t.max_length()) continue;
    const auto v = encode(f, t);
    ASSERT_EQ(v, encode(f, t));
    auto expected = testkit::oracle_encode(f, codes);
    ASSERT_EQ(expected.size(), unpadded_length(f));
    expected.resize(t.max_length(), 0);
    ASSERT_EQ(v.values, expected) << print(f);
  }
}

TEST(Properties, OverflowExactlyAboveLimit) {
  testkit::TreeGen gen(42);
  for (int i = 0; i < 300; ++i) {
    const Formula f = gen.tree(5);
    const std::size_t len = testkit::oracle_encode(f, canonical_codes()).size();
    const std::size_t lmax = 1 + uniform_index(gen.rng, 40);
    if (len > lmax) {
      ASSERT_THROW(encode(f, SymbolTable::canonical(lmax)), EncodingOverflow);
    } else {
      ASSERT_NO_THROW(encode(f, SymbolTable::canonical(lmax)));
    }
  }
}

TEST(Properties, HammingMetric) {
  Rng rng = make_rng(43);
  const std::size_t n = 64;
  auto random_vec = [&] {
    FeatureVector v{std::vector<int>(n), 0};
    for (auto& x : v.values) x = static_cast<int>(uniform_index(rng, 4));
    return v;
  };
  for (int i = 0; i < 1000; ++i) {
    const auto a = random_vec(), b = random_vec(), c = random_vec();
    const auto ab = distance(a, b);
    ASSERT_EQ(ab, distance(b, a));
    ASSERT_EQ(distance(a, a), 0u);
    ASSERT_EQ(ab == 0, a == b);
    ASSERT_LE(distance(a, c), ab + distance(b, c));
    ASSERT_LE(ab, n);
  }
}
