#pragma once

// Enumerates the derivation MDP reachable from a set of start formulas and
// solves it by value iteration. Transitions follow the reward policy:
// inapplicable rule -> invalid penalty, state kept; goal -> goal reward,
// terminal; successor with no applicable rule -> dead-end penalty, terminal;
// otherwise the step cost. No loop guard, no step cap.

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "formderiv/derivation.hpp"
#include "formderiv/encoding.hpp"
#include "formderiv/rewrite.hpp"

namespace formderiv::testkit {

struct MdpOracle {
  struct Edge {
    int next = -1;  // -1: terminal
    double reward = 0.0;
  };
  std::vector<Formula> states;             // non-terminal states
  std::vector<std::vector<Edge>> edges;    // [state][action]
  std::vector<std::vector<double>> q;      // value-iteration fixpoint
  std::size_t terminal_count = 0;

  int greedy(std::size_t s) const {
    int best = 0;
    for (std::size_t a = 1; a < q[s].size(); ++a) {
      if (q[s][a] > q[s][static_cast<std::size_t>(best)]) best = static_cast<int>(a);
    }
    return best;
  }
};

inline MdpOracle solve_mdp(const std::vector<Formula>& starts, const GoalSpec& goal, const RuleSet& rules,
                           const RewardPolicy& reward, double gamma, std::size_t max_states = 1000) {
  MdpOracle m;
  std::map<std::string, int> index;
  std::vector<Formula> queue;
  auto intern = [&](const Formula& f) {
    auto [it, fresh] = index.emplace(print(f), static_cast<int>(m.states.size()));
    if (fresh) {
      m.states.push_back(f);
      queue.push_back(f);
    }
    return it->second;
  };
  auto applicable_any = [&](const Formula& f) {
    for (const auto& r : rules) {
      if (find_first(f, r.lhs, r.vars)) return true;
    }
    return false;
  };
  for (const auto& s : starts) intern(s);
  for (std::size_t i = 0; i < m.states.size(); ++i) {
    if (m.states.size() > max_states) throw std::runtime_error("MDP too large to enumerate");
    const Formula f = m.states[i];
    std::vector<MdpOracle::Edge> row;
    for (const auto& r : rules) {
      auto app = apply_rule_first(f, r);
      if (!app) {
        row.push_back({static_cast<int>(i), reward.invalid});
      } else if (goal.satisfied_by(app->result)) {
        row.push_back({-1, reward.goal});
        ++m.terminal_count;
      } else if (!applicable_any(app->result)) {
        row.push_back({-1, reward.dead_end});
        ++m.terminal_count;
      } else {
        row.push_back({intern(app->result), reward.step});
      }
    }
    m.edges.push_back(std::move(row));
  }
  m.q.assign(m.states.size(), std::vector<double>(rules.size(), 0.0));
  for (int it = 0; it < 100000; ++it) {
    double delta = 0.0;
    auto next_q = m.q;
    for (std::size_t s = 0; s < m.states.size(); ++s) {
      for (std::size_t a = 0; a < rules.size(); ++a) {
        const auto& e = m.edges[s][a];
        double future = 0.0;
        if (e.next >= 0) {
          future = m.q[static_cast<std::size_t>(e.next)][0];
          for (double v : m.q[static_cast<std::size_t>(e.next)]) future = std::max(future, v);
        }
        next_q[s][a] = e.reward + gamma * future;
        delta = std::max(delta, std::abs(next_q[s][a] - m.q[s][a]));
      }
    }
    m.q = std::move(next_q);
    if (delta < 1e-14) break;
  }
  return m;
}

}  // namespace formderiv::testkit
