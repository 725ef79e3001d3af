#include "formderiv/rl.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include "formderiv/error.hpp"
#include "text_util.hpp"

namespace formderiv {

namespace {

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw InvariantViolation("cannot format double");
  return std::string(buf, ptr);
}

double parse_double(std::string_view s) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw FormatError("expected a number, got '" + std::string(s) + "'");
  }
  return v;
}

std::uint64_t parse_u64(std::string_view s, int base = 10) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw FormatError("expected an unsigned integer, got '" + std::string(s) + "'");
  }
  return v;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, 16);
  return std::string(buf, ptr);
}

}  // namespace

// ---------------------------------------------------------------------------
// Q-table

QTable::QTable(std::size_t action_count, double gamma, double alpha)
    : action_count_(action_count), gamma_(gamma), alpha_(alpha) {
  if (action_count_ == 0) throw DomainError("Q-table needs at least one action");
  if (!(gamma_ >= 0.0 && gamma_ < 1.0)) throw DomainError("gamma must lie in [0, 1)");
  if (!(alpha_ > 0.0 && alpha_ <= 1.0)) throw DomainError("alpha must lie in (0, 1]");
}

std::vector<double> QTable::values(const FeatureVector& s) const {
  auto it = entries_.find(s.values);
  if (it == entries_.end()) return std::vector<double>(action_count_, 0.0);
  return it->second;
}

double QTable::value(const FeatureVector& s, std::size_t action) const {
  auto it = entries_.find(s.values);
  return it == entries_.end() ? 0.0 : it->second.at(action);
}

double QTable::max_value(const FeatureVector& s) const {
  auto it = entries_.find(s.values);
  if (it == entries_.end()) return 0.0;
  return *std::max_element(it->second.begin(), it->second.end());
}

void QTable::set(const FeatureVector& s, std::size_t action, double q) {
  if (action >= action_count_) throw DomainError("action index out of range");
  auto [it, inserted] = entries_.try_emplace(s.values, action_count_, 0.0);
  it->second[action] = q;
}

void q_update(QTable& table, const FeatureVector& s, std::size_t action, double reward, const FeatureVector& next,
              bool next_is_terminal) {
  if (action >= table.action_count()) throw DomainError("action index out of range");
  const double future = next_is_terminal ? 0.0 : table.max_value(next);
  const double target = reward + table.gamma() * future;
  const double old = table.value(s, action);
  table.set(s, action, (1.0 - table.alpha()) * old + table.alpha() * target);
}

std::string format_qtable(const QTable& table) {
  std::string out = "# actions=" + std::to_string(table.action_count()) + " gamma=" + format_double(table.gamma()) +
                    " alpha=" + format_double(table.alpha()) + "\n";
  for (const auto& [state, values] : table.entries()) {
    out += format_vector(FeatureVector{state, 0});
    out += " :";
    for (double v : values) {
      out += ' ';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

QTable parse_qtable(std::string_view text) {
  auto lines = detail::split_lines(text);
  if (lines.empty()) throw FormatError("empty Q-table file");
  std::size_t actions = 0;
  double gamma = 0.9;
  double alpha = 0.5;
  auto header = detail::trim(lines.front());
  if (header.empty() || header.front() != '#') throw FormatError("Q-table header missing");
  for (auto tok : detail::split(detail::trim(header.substr(1)), ' ')) {
    auto eq = tok.find('=');
    if (eq == std::string_view::npos) continue;
    auto key = tok.substr(0, eq);
    auto val = tok.substr(eq + 1);
    if (key == "actions") actions = parse_u64(val);
    if (key == "gamma") gamma = parse_double(val);
    if (key == "alpha") alpha = parse_double(val);
  }
  QTable table(actions, gamma, alpha);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto line = detail::trim(lines[i]);
    if (line.empty()) continue;
    auto colon = line.find(':');
    if (colon == std::string_view::npos) throw FormatError("Q-table line lacks ':'");
    FeatureVector s = parse_vector(line.substr(0, colon));
    std::size_t a = 0;
    for (auto tok : detail::split(detail::trim(line.substr(colon + 1)), ' ')) {
      if (tok.empty()) continue;
      table.set(s, a++, parse_double(tok));
    }
    if (a != actions) throw FormatError("Q-table row has " + std::to_string(a) + " values, expected " + std::to_string(actions));
  }
  return table;
}

// ---------------------------------------------------------------------------
// Action selection

std::size_t select_action(std::span<const double> values, const std::vector<bool>& allowed, SelectMode mode,
                          Rng& rng) {
  if (allowed.size() != values.size()) throw DomainError("mask length differs from action count");
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < allowed.size(); ++i) {
    if (allowed[i]) candidates.push_back(i);
  }
  if (candidates.empty()) throw NoApplicableAction("no applicable action");

  auto greedy = [&] {
    std::size_t best = candidates.front();
    for (std::size_t i : candidates) {
      if (values[i] > values[best]) best = i;
    }
    return best;
  };

  switch (mode.kind) {
    case SelectMode::Kind::Greedy:
      return greedy();
    case SelectMode::Kind::Epsilon:
      if (uniform01(rng) < mode.epsilon) return candidates[uniform_index(rng, candidates.size())];
      return greedy();
    case SelectMode::Kind::Sample: {
      double total = 0.0;
      for (std::size_t i : candidates) total += std::max(values[i], 0.0);
      if (!(total > 0.0)) return candidates[uniform_index(rng, candidates.size())];
      double u = uniform01(rng) * total;
      for (std::size_t i : candidates) {
        u -= std::max(values[i], 0.0);
        if (u < 0.0) return i;
      }
      return candidates.back();
    }
  }
  throw InvariantViolation("unknown selection mode");
}

// ---------------------------------------------------------------------------
// Policy network

PolicyModel::PolicyModel(std::size_t input_dim, std::size_t hidden, std::size_t actions, double input_scale)
    : input_dim_(input_dim),
      hidden_(hidden),
      actions_(actions),
      input_scale_(input_scale),
      params_(hidden * input_dim + hidden + actions * hidden + actions, 0.0) {
  if (input_dim == 0 || hidden == 0 || actions == 0) throw DomainError("policy dimensions must be positive");
}

PolicyModel PolicyModel::random(std::size_t input_dim, std::size_t hidden, std::size_t actions, std::uint64_t seed,
                                double input_scale) {
  PolicyModel m(input_dim, hidden, actions, input_scale);
  Rng rng = make_rng(seed);
  for (double& w : m.params_) w = uniform_real(rng, -0.1, 0.1);
  return m;
}

PolicyModel::Activations PolicyModel::run(const FeatureVector& s) const {
  if (s.values.size() != input_dim_) {
    throw DomainError("policy expects " + std::to_string(input_dim_) + " inputs, got " +
                      std::to_string(s.values.size()));
  }
  const double* w1 = params_.data();
  const double* b1 = w1 + hidden_ * input_dim_;
  const double* w2 = b1 + hidden_;
  const double* b2 = w2 + actions_ * hidden_;

  Activations act{std::vector<double>(hidden_), std::vector<double>(actions_)};
  for (std::size_t h = 0; h < hidden_; ++h) {
    double z = b1[h];
    const double* row = w1 + h * input_dim_;
    for (std::size_t i = 0; i < input_dim_; ++i) {
      if (s.values[i] != 0) z += row[i] * (s.values[i] * input_scale_);
    }
    act.hidden[h] = std::tanh(z);
  }
  double zmax = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < actions_; ++a) {
    double z = b2[a];
    const double* row = w2 + a * hidden_;
    for (std::size_t h = 0; h < hidden_; ++h) z += row[h] * act.hidden[h];
    act.probs[a] = z;
    zmax = std::max(zmax, z);
  }
  double total = 0.0;
  for (double& p : act.probs) {
    p = std::exp(p - zmax);
    total += p;
  }
  for (double& p : act.probs) p /= total;
  return act;
}

std::vector<double> PolicyModel::forward(const FeatureVector& s) const { return run(s).probs; }

double PolicyModel::loss(const FeatureVector& s, std::size_t action) const {
  if (action >= actions_) throw DomainError("action index out of range");
  return -std::log(run(s).probs[action]);
}

double PolicyModel::accumulate_gradient(const FeatureVector& s, std::size_t action, double weight,
                                        std::span<double> grad) const {
  if (action >= actions_) throw DomainError("action index out of range");
  if (grad.size() != params_.size()) throw DomainError("gradient buffer has the wrong size");
  const Activations act = run(s);

  const double* w2 = params_.data() + hidden_ * input_dim_ + hidden_;
  double* g_w1 = grad.data();
  double* g_b1 = g_w1 + hidden_ * input_dim_;
  double* g_w2 = g_b1 + hidden_;
  double* g_b2 = g_w2 + actions_ * hidden_;

  std::vector<double> dz(actions_);
  for (std::size_t a = 0; a < actions_; ++a) dz[a] = act.probs[a] - (a == action ? 1.0 : 0.0);

  std::vector<double> dh(hidden_, 0.0);
  for (std::size_t a = 0; a < actions_; ++a) {
    const double d = weight * dz[a];
    g_b2[a] += d;
    const double* row = w2 + a * hidden_;
    double* grow = g_w2 + a * hidden_;
    for (std::size_t h = 0; h < hidden_; ++h) {
      grow[h] += d * act.hidden[h];
      dh[h] += dz[a] * row[h];
    }
  }
  for (std::size_t h = 0; h < hidden_; ++h) {
    const double dpre = weight * dh[h] * (1.0 - act.hidden[h] * act.hidden[h]);
    g_b1[h] += dpre;
    double* grow = g_w1 + h * input_dim_;
    for (std::size_t i = 0; i < input_dim_; ++i) {
      if (s.values[i] != 0) grow[i] += dpre * (s.values[i] * input_scale_);
    }
  }
  return -std::log(act.probs[action]);
}

double mean_loss(const PolicyModel& model, std::span<const TraceSample> data) {
  if (data.empty()) throw EmptyDataset("no training samples");
  double total = 0.0;
  for (const auto& s : data) total += model.loss(s.state, s.action);
  return total / static_cast<double>(data.size());
}

namespace {

struct WeightedSample {
  FeatureVector state;
  std::size_t action;
  double weight;
};

// Identical (state, action) pairs collapse into one weighted sample; the mean
// loss is unchanged.
std::vector<WeightedSample> aggregate(std::span<const TraceSample> data) {
  std::map<std::pair<std::vector<int>, std::size_t>, std::size_t> counts;
  for (const auto& s : data) ++counts[{s.state.values, s.action}];
  std::vector<WeightedSample> out;
  out.reserve(counts.size());
  const double n = static_cast<double>(data.size());
  for (const auto& [key, count] : counts) {
    out.push_back({FeatureVector{key.first, 0}, key.second, static_cast<double>(count) / n});
  }
  return out;
}

double weighted_loss(const PolicyModel& model, const std::vector<WeightedSample>& data) {
  double total = 0.0;
  for (const auto& s : data) total += s.weight * model.loss(s.state, s.action);
  return total;
}

}  // namespace

TrainReport policy_train(PolicyModel& model, std::span<const TraceSample> data, const TrainConfig& config) {
  if (data.empty()) throw EmptyDataset("no training samples");
  for (const auto& s : data) {
    if (s.action >= model.actions()) throw DomainError("sample action index out of range");
    if (s.state.values.size() != model.input_dim()) throw DomainError("sample state has the wrong length");
  }
  const auto batch = aggregate(data);

  TrainReport report;
  double current = weighted_loss(model, batch);
  report.initial_loss = current;
  double step = config.step_size;
  std::vector<double> grad(model.parameters().size());
  std::vector<double> saved(model.parameters().begin(), model.parameters().end());

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::fill(grad.begin(), grad.end(), 0.0);
    for (const auto& s : batch) model.accumulate_gradient(s.state, s.action, s.weight, grad);
    std::copy(model.parameters().begin(), model.parameters().end(), saved.begin());

    bool accepted = false;
    while (step > 1e-12) {
      auto params = model.parameters();
      for (std::size_t i = 0; i < params.size(); ++i) params[i] = saved[i] - step * grad[i];
      const double trial = weighted_loss(model, batch);
      if (trial <= current) {
        current = trial;
        accepted = true;
        step *= 1.25;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      std::copy(saved.begin(), saved.end(), model.parameters().begin());
      step = config.step_size;
    }
    report.loss_per_epoch.push_back(current);
  }
  return report;
}

double top1_accuracy(const PolicyModel& model, std::span<const TraceSample> data) {
  if (data.empty()) throw EmptyDataset("no samples to score");
  std::size_t hits = 0;
  for (const auto& s : data) {
    auto p = model.forward(s.state);
    auto best = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
    hits += best == s.action;
  }
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

// ---------------------------------------------------------------------------
// Checkpoints

std::string format_checkpoint(const Checkpoint& ckpt) {
  const auto& m = ckpt.model;
  std::string out = "formderiv-policy 1\n";
  out += "l_max=" + std::to_string(ckpt.table.max_length()) + "\n";
  out += "actions=" + std::to_string(m.actions()) + "\n";
  out += "hidden=" + std::to_string(m.hidden()) + "\n";
  out += "seed=" + std::to_string(ckpt.meta.seed) + "\n";
  out += "rules_hash=" + hex64(ckpt.meta.rules_hash) + "\n";
  out += "input_scale=" + format_double(m.input_scale()) + "\n";
  out += "[symbols]\n";
  out += format_symbol_table(ckpt.table);
  out += "[weights]\n";
  out += std::to_string(m.parameters().size()) + "\n";
  for (double w : m.parameters()) {
    out += format_double(w);
    out += '\n';
  }
  return out;
}

Checkpoint parse_checkpoint(std::string_view text) {
  auto lines = detail::split_lines(text);
  if (lines.empty() || detail::trim(lines[0]) != "formderiv-policy 1") throw FormatError("not a policy checkpoint");
  std::map<std::string, std::string, std::less<>> header;
  std::size_t i = 1;
  for (; i < lines.size() && detail::trim(lines[i]) != "[symbols]"; ++i) {
    auto line = detail::trim(lines[i]);
    auto eq = line.find('=');
    if (eq == std::string_view::npos) throw FormatError("bad checkpoint header line");
    header.emplace(std::string(line.substr(0, eq)), std::string(line.substr(eq + 1)));
  }
  auto need = [&](std::string_view key) -> const std::string& {
    auto it = header.find(key);
    if (it == header.end()) throw FormatError("checkpoint header lacks " + std::string(key));
    return it->second;
  };
  if (i >= lines.size()) throw FormatError("checkpoint lacks [symbols]");
  std::string symbols;
  for (++i; i < lines.size() && detail::trim(lines[i]) != "[weights]"; ++i) {
    symbols += lines[i];
    symbols += '\n';
  }
  if (i >= lines.size()) throw FormatError("checkpoint lacks [weights]");
  SymbolTable table = parse_symbol_table(symbols);
  const std::size_t l_max = parse_u64(need("l_max"));
  if (l_max != table.max_length()) throw FormatError("checkpoint L_max disagrees with its symbol table");

  PolicyModel model(l_max, parse_u64(need("hidden")), parse_u64(need("actions")), parse_double(need("input_scale")));
  ++i;
  if (i >= lines.size()) throw FormatError("checkpoint lacks weight count");
  const std::size_t count = parse_u64(detail::trim(lines[i++]));
  if (count != model.parameters().size()) throw FormatError("checkpoint weight count does not fit its shape");
  auto params = model.parameters();
  for (std::size_t k = 0; k < count; ++k, ++i) {
    if (i >= lines.size()) throw FormatError("checkpoint is truncated");
    params[k] = parse_double(detail::trim(lines[i]));
  }
  CheckpointMeta meta{parse_u64(need("seed")), parse_u64(need("rules_hash"), 16)};
  return Checkpoint{std::move(model), std::move(table), meta};
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  detail::write_file(path, format_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return parse_checkpoint(detail::read_file(path)); }

}  // namespace formderiv
