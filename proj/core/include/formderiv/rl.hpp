#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "formderiv/encoding.hpp"
#include "formderiv/random.hpp"

namespace formderiv {

/// Reward shaping for the derivation environment.
struct RewardPolicy {
  double goal = 1.0;
  double invalid = -1.0;   // inapplicable rule, state unchanged
  double step = -0.01;     // applicable, non-terminal
  double dead_end = -1.0;  // no rule applies afterwards, or a state repeats
};

/// Tabular action values keyed by the exact feature vector.
class QTable {
 public:
  QTable(std::size_t action_count, double gamma = 0.9, double alpha = 0.5);

  std::size_t action_count() const noexcept { return action_count_; }
  double gamma() const noexcept { return gamma_; }
  double alpha() const noexcept { return alpha_; }
  std::size_t state_count() const noexcept { return entries_.size(); }

  /// All-zero for states never written.
  std::vector<double> values(const FeatureVector& s) const;
  double value(const FeatureVector& s, std::size_t action) const;
  double max_value(const FeatureVector& s) const;
  void set(const FeatureVector& s, std::size_t action, double q);

  const std::map<std::vector<int>, std::vector<double>>& entries() const noexcept { return entries_; }

 private:
  std::size_t action_count_;
  double gamma_;
  double alpha_;
  std::map<std::vector<int>, std::vector<double>> entries_;
};

/// Q(s,a) <- (1-alpha) Q(s,a) + alpha (r + gamma max_a' Q(s',a')).
/// A terminal successor contributes 0 and is never written.
void q_update(QTable& table, const FeatureVector& s, std::size_t action, double reward, const FeatureVector& next,
              bool next_is_terminal);

/// `state-vector : value-list` per line, sorted by state.
std::string format_qtable(const QTable& table);
QTable parse_qtable(std::string_view text);

struct SelectMode {
  enum class Kind { Greedy, Epsilon, Sample };
  Kind kind = Kind::Greedy;
  double epsilon = 0.0;

  static SelectMode greedy() { return {Kind::Greedy, 0.0}; }
  static SelectMode epsilon_greedy(double p) { return {Kind::Epsilon, p}; }
  static SelectMode sample() { return {Kind::Sample, 0.0}; }
};

/// Greedy: argmax over allowed actions, ties to the lowest index.
/// Epsilon: uniform allowed action with probability p, else greedy.
/// Sample: draw from `values` (probabilities) renormalized over allowed actions.
/// Throws NoApplicableAction when nothing is allowed.
std::size_t select_action(std::span<const double> values, const std::vector<bool>& allowed, SelectMode mode,
                          Rng& rng);

struct TraceSample {
  FeatureVector state;
  std::size_t action;
};

/// Feed-forward policy: tanh hidden layer, softmax over rules.
/// Parameters are stored flat as [W1 | b1 | W2 | b2], W row-major.
class PolicyModel {
 public:
  /// All-zero weights.
  PolicyModel(std::size_t input_dim, std::size_t hidden, std::size_t actions, double input_scale = 1.0);

  /// Weights uniform in [-0.1, 0.1].
  static PolicyModel random(std::size_t input_dim, std::size_t hidden, std::size_t actions, std::uint64_t seed,
                            double input_scale = 1.0);

  std::size_t input_dim() const noexcept { return input_dim_; }
  std::size_t hidden() const noexcept { return hidden_; }
  std::size_t actions() const noexcept { return actions_; }
  double input_scale() const noexcept { return input_scale_; }

  std::span<double> parameters() noexcept { return params_; }
  std::span<const double> parameters() const noexcept { return params_; }

  std::vector<double> forward(const FeatureVector& s) const;

  /// -ln p(action | s).
  double loss(const FeatureVector& s, std::size_t action) const;

  /// Adds `weight` * d loss / d theta into `grad` and returns the loss.
  double accumulate_gradient(const FeatureVector& s, std::size_t action, double weight, std::span<double> grad) const;

 private:
  struct Activations {
    std::vector<double> hidden;
    std::vector<double> probs;
  };
  Activations run(const FeatureVector& s) const;

  std::size_t input_dim_;
  std::size_t hidden_;
  std::size_t actions_;
  double input_scale_;
  std::vector<double> params_;
};

/// Mean cross-entropy against one-hot targets.
double mean_loss(const PolicyModel& model, std::span<const TraceSample> data);

struct TrainConfig {
  std::size_t epochs = 500;
  double step_size = 0.5;
};

struct TrainReport {
  std::vector<double> loss_per_epoch;  // loss after each epoch's update
  double initial_loss = 0.0;
};

/// Full-batch gradient descent on mean cross-entropy. A step that would raise
/// the loss is retried at half the size, so the loss curve never increases.
/// Throws EmptyDataset, DomainError on out-of-range actions or wrong input length.
TrainReport policy_train(PolicyModel& model, std::span<const TraceSample> data, const TrainConfig& config);

/// Fraction of samples whose argmax action equals the label.
double top1_accuracy(const PolicyModel& model, std::span<const TraceSample> data);

struct CheckpointMeta {
  std::uint64_t seed = 0;
  std::uint64_t rules_hash = 0;
};

struct Checkpoint {
  PolicyModel model;
  SymbolTable table;
  CheckpointMeta meta;
};

/// Header (L_max, actions, hidden, seed, rule-set hash), the symbol table,
/// then the flat weights in decimal.
std::string format_checkpoint(const Checkpoint& ckpt);
Checkpoint parse_checkpoint(std::string_view text);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace formderiv
