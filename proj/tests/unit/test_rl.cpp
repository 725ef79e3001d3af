#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <cmath>

#include "formderiv/error.hpp"
#include "formderiv/random.hpp"
#include "formderiv/rl.hpp"

using namespace formderiv;

namespace {

FeatureVector vec(std::vector<int> v) { return {std::move(v), 0}; }

FeatureVector random_state(Rng& rng, std::size_t n) {
  FeatureVector v{std::vector<int>(n), 0};
  for (auto& x : v.values) x = static_cast<int>(uniform_index(rng, 18));
  return v;
}

}  // namespace

TEST(QUpdate, TerminalThenOneStepEarlier) {
  QTable q(2, 0.9, 1.0);
  const auto s = vec({1}), s_prev = vec({2}), goal = vec({3});
  q_update(q, s, 0, 1.0, goal, true);
  EXPECT_DOUBLE_EQ(q.value(s, 0), 1.0);
  q_update(q, s_prev, 1, 0.0, s, false);
  EXPECT_DOUBLE_EQ(q.value(s_prev, 1), 0.9);
  EXPECT_EQ(q.values(vec({9})), (std::vector<double>{0.0, 0.0}));
}

TEST(QUpdate, LearningRateBlends) {
  QTable q(1, 0.5, 0.25);
  const auto s = vec({1}), t = vec({2});
  q.set(t, 0, 2.0);
  q.set(s, 0, 4.0);
  q_update(q, s, 0, 1.0, t, false);
  // 0.75 * 4 + 0.25 * (1 + 0.5 * 2)
  EXPECT_DOUBLE_EQ(q.value(s, 0), 3.5);
  // a terminal successor contributes nothing, whatever the table holds for it
  q_update(q, s, 0, 1.0, t, true);
  EXPECT_DOUBLE_EQ(q.value(s, 0), 0.75 * 3.5 + 0.25 * 1.0);
}

TEST(QTable, Validation) {
  EXPECT_THROW(QTable(0), DomainError);
  EXPECT_THROW(QTable(2, 1.0, 0.5), DomainError);
  EXPECT_THROW(QTable(2, 0.9, 0.0), DomainError);
  QTable q(2);
  EXPECT_THROW(q.set(vec({1}), 2, 0.0), DomainError);
}

TEST(QTable, TextRoundTrip) {
  QTable q(3, 0.9, 0.5);
  q.set(vec({4, 1, 0}), 2, -0.123456789012345);
  q.set(vec({4, 3, 0}), 0, 1e-300);
  q.set(vec({4, 3, 0}), 1, 0.1 + 0.2);
  const QTable back = parse_qtable(format_qtable(q));
  EXPECT_EQ(back.entries(), q.entries());
  EXPECT_EQ(back.gamma(), q.gamma());
  EXPECT_EQ(back.alpha(), q.alpha());
  EXPECT_THROW(parse_qtable("4 1 0 : 1 2\n"), FormatError);
}

// Chain s0 -> s1 -> goal. Action 0 moves forward; action 1 is inapplicable
// in s0 (penalty, no move) and steps back in s1.
TEST(QLearning, ThreeStateChainMatchesValueIteration) {
  const double gamma = 0.9, step = -0.01, invalid = -1.0, goal = 1.0;
  struct Next {
    int state;  // 2 = goal (terminal)
    double reward;
  };
  auto transition = [&](int s, std::size_t a) -> Next {
    if (s == 0) return a == 0 ? Next{1, step} : Next{0, invalid};
    return a == 0 ? Next{2, goal} : Next{0, step};
  };

  // value iteration oracle
  std::array<std::array<double, 2>, 2> vi{};
  for (int it = 0; it < 2000; ++it) {
    auto nv = vi;
    for (int s = 0; s < 2; ++s) {
      for (std::size_t a = 0; a < 2; ++a) {
        const Next n = transition(s, a);
        const double future = n.state == 2 ? 0.0 : std::max(vi[n.state][0], vi[n.state][1]);
        nv[s][a] = n.reward + gamma * future;
      }
    }
    vi = nv;
  }
  EXPECT_NEAR(vi[1][0], 1.0, 1e-12);
  EXPECT_NEAR(vi[0][0], -0.01 + 0.9, 1e-12);

  const std::array<FeatureVector, 3> key{vec({4, 0}), vec({4, 1}), vec({4, 2})};
  QTable q(2, gamma, 0.5);
  Rng rng = make_rng(51);
  const std::vector<bool> all{true, true};
  for (int ep = 0; ep < 10000; ++ep) {
    int s = static_cast<int>(uniform_index(rng, 2));
    for (int t = 0; t < 50 && s != 2; ++t) {
      const auto values = q.values(key[s]);
      const std::size_t a = select_action(values, all, SelectMode::epsilon_greedy(0.1), rng);
      const Next n = transition(s, a);
      q_update(q, key[s], a, n.reward, key[n.state], n.state == 2);
      s = n.state;
    }
  }
  for (int s = 0; s < 2; ++s) {
    for (std::size_t a = 0; a < 2; ++a) EXPECT_NEAR(q.value(key[s], a), vi[s][a], 1e-6) << s << "," << a;
    const auto values = q.values(key[s]);
    EXPECT_EQ(select_action(values, all, SelectMode::greedy(), rng), 0u);
  }
}

TEST(SelectAction, Examples) {
  Rng rng = make_rng(1);
  const std::vector<double> v{0.1, 0.9, 0.3};
  EXPECT_EQ(select_action(v, {true, true, true}, SelectMode::greedy(), rng), 1u);
  EXPECT_EQ(select_action(v, {true, false, true}, SelectMode::greedy(), rng), 2u);
  EXPECT_EQ(select_action(std::vector<double>{0.5, 0.5, 0.5}, {false, true, true}, SelectMode::greedy(), rng), 1u);
  EXPECT_THROW(select_action(v, {false, false, false}, SelectMode::greedy(), rng), NoApplicableAction);
  EXPECT_THROW(select_action(v, {true, true}, SelectMode::greedy(), rng), DomainError);
}

TEST(SelectAction, EpsilonAndSampleStayInMask) {
  Rng rng = make_rng(2);
  const std::vector<double> probs{0.7, 0.2, 0.1};
  const std::vector<bool> mask{false, true, true};
  std::array<int, 3> eps{}, smp{};
  for (int i = 0; i < 20000; ++i) {
    ++eps[select_action(probs, mask, SelectMode::epsilon_greedy(0.5), rng)];
    ++smp[select_action(probs, mask, SelectMode::sample(), rng)];
  }
  EXPECT_EQ(eps[0], 0);
  EXPECT_EQ(smp[0], 0);
  // epsilon 0.5 over two allowed actions: greedy pick (1) 75%, other 25%
  EXPECT_NEAR(eps[1] / 20000.0, 0.75, 0.02);
  // renormalised 0.2 : 0.1
  EXPECT_NEAR(smp[1] / 20000.0, 2.0 / 3.0, 0.02);
}

TEST(Properties, MaskedArgmaxMatchesBruteForce) {
  Rng rng = make_rng(3);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = 1 + uniform_index(rng, 12);
    std::vector<double> v(n);
    std::vector<bool> mask(n);
    for (std::size_t k = 0; k < n; ++k) {
      v[k] = static_cast<double>(uniform_index(rng, 5)) - 2.0;  // frequent ties
      mask[k] = uniform01(rng) < 0.6;
    }
    std::optional<std::size_t> best;
    for (std::size_t k = 0; k < n; ++k) {
      if (mask[k] && (!best || v[k] > v[*best])) best = k;
    }
    if (!best) {
      ASSERT_THROW(select_action(v, mask, SelectMode::greedy(), rng), NoApplicableAction);
    } else {
      ASSERT_EQ(select_action(v, mask, SelectMode::greedy(), rng), *best);
    }
  }
}

TEST(Policy, OutputIsADistribution) {
  Rng rng = make_rng(4);
  const PolicyModel m = PolicyModel::random(16, 8, 5, 7, 1.0 / 17);
  for (int i = 0; i < 50; ++i) {
    const auto p = m.forward(random_state(rng, 16));
    ASSERT_EQ(p.size(), 5u);
    double sum = 0;
    for (double x : p) {
      ASSERT_GT(x, 0.0);
      sum += x;
    }
    ASSERT_NEAR(sum, 1.0, 1e-9);
  }
  EXPECT_THROW(m.forward(random_state(rng, 15)), DomainError);
  EXPECT_THROW(m.loss(random_state(rng, 16), 5), DomainError);
}

TEST(Properties, GradientMatchesCentralDifferences) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    PolicyModel m = PolicyModel::random(12, 6, 4, seed, 1.0 / 17);
    // larger weights than the default initialisation, so the check is not near-linear
    Rng rng = make_rng(seed, 99);
    for (double& w : m.parameters()) w = uniform_real(rng, -1.0, 1.0);
    std::vector<TraceSample> data;
    for (int i = 0; i < 5; ++i) data.push_back({random_state(rng, 12), uniform_index(rng, 4)});

    std::vector<double> grad(m.parameters().size(), 0.0);
    for (const auto& d : data) m.accumulate_gradient(d.state, d.action, 1.0 / data.size(), grad);
    const double h = 1e-5;
    for (std::size_t k = 0; k < grad.size(); ++k) {
      const double w = m.parameters()[k];
      m.parameters()[k] = w + h;
      const double up = mean_loss(m, data);
      m.parameters()[k] = w - h;
      const double down = mean_loss(m, data);
      m.parameters()[k] = w;
      const double numeric = (up - down) / (2 * h);
      const double scale = std::max({std::abs(numeric), std::abs(grad[k]), 1e-6});
      ASSERT_LE(std::abs(numeric - grad[k]) / scale, 1e-4) << "seed " << seed << " weight " << k;
    }
  }
}

TEST(Policy, TrainingLossNeverIncreases) {
  Rng rng = make_rng(5);
  std::vector<TraceSample> data;
  std::vector<FeatureVector> states;
  for (int i = 0; i < 12; ++i) states.push_back(random_state(rng, 10));
  for (int i = 0; i < 60; ++i) {
    const std::size_t s = uniform_index(rng, states.size());
    data.push_back({states[s], s % 3});
  }
  PolicyModel m = PolicyModel::random(10, 16, 3, 5, 1.0 / 17);
  const TrainReport r = policy_train(m, data, TrainConfig{300, 2.0});
  ASSERT_EQ(r.loss_per_epoch.size(), 300u);
  double prev = r.initial_loss;
  for (double l : r.loss_per_epoch) {
    ASSERT_LE(l, prev + 1e-12);
    prev = l;
  }
  EXPECT_LT(r.loss_per_epoch.back(), 0.1 * r.initial_loss);
  EXPECT_DOUBLE_EQ(top1_accuracy(m, data), 1.0);
  EXPECT_THROW(policy_train(m, {}, TrainConfig{}), EmptyDataset);
}

TEST(Checkpoint, TextRoundTripIsExact) {
  const PolicyModel m = PolicyModel::random(8, 4, 3, 9, 0.125);
  const Checkpoint c{m, SymbolTable::canonical(8), {9, 0xdeadbeefcafef00dULL}};
  const std::string text = format_checkpoint(c);
  const Checkpoint back = parse_checkpoint(text);
  EXPECT_EQ(back.meta.seed, 9u);
  EXPECT_EQ(back.meta.rules_hash, 0xdeadbeefcafef00dULL);
  EXPECT_EQ(back.table, c.table);
  EXPECT_EQ(back.model.input_scale(), 0.125);
  ASSERT_EQ(back.model.parameters().size(), m.parameters().size());
  EXPECT_TRUE(std::equal(m.parameters().begin(), m.parameters().end(), back.model.parameters().begin()));
  EXPECT_EQ(format_checkpoint(back), text);
  EXPECT_THROW(parse_checkpoint("not a checkpoint"), FormatError);
}
