#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace formderiv {

/// Operator kinds of a formula multiway tree. Sym and Num are the only leaf kinds.
enum class NodeKind : std::uint8_t {
  Equal,
  Plus,
  Minus,
  Times,
  Divide,
  Power,
  Sqrt,
  Integral,      // (integrand, variable of integration)
  Differential,  // d(.)
  DerivRatio,    // d(.)/d(.)
  Sum,
  Ln,
  Exp,
  Sin,
  Cos,
  FuncApply,  // named function applied to zero or more arguments
  Sym,
  Num,
};

inline constexpr std::size_t kNodeKindCount = 18;

/// Inclusive child-count bounds for a kind. `max` is SIZE_MAX for variadic kinds.
struct Arity {
  std::size_t min;
  std::size_t max;
};

Arity arity_of(NodeKind kind) noexcept;

/// Name used in constructor syntax (`Der` for Differential).
std::string_view kind_name(NodeKind kind) noexcept;

/// Inverse of kind_name; also accepts `Differential` for `Der`.
std::optional<NodeKind> kind_from_name(std::string_view name) noexcept;

bool is_leaf_kind(NodeKind kind) noexcept;

/// True for [A-Za-z_][A-Za-z0-9_]*.
bool is_identifier(std::string_view text) noexcept;

/// True for -?[0-9]+(\.[0-9]+)?
bool is_numeral(std::string_view text) noexcept;

/// An immutable multiway tree. Copies share structure; every transformation
/// produces a new tree.
class Formula {
 public:
  static Formula sym(std::string name);
  static Formula num(std::string literal);
  static Formula func(std::string name, std::vector<Formula> args);
  /// Builds an operator node (not Sym, Num or FuncApply). Throws ArityError.
  static Formula make(NodeKind kind, std::vector<Formula> children);

  NodeKind kind() const noexcept { return node_->kind; }
  /// Symbol name, function name, or numeral text. Empty for operators.
  const std::string& label() const noexcept { return node_->label; }
  std::span<const Formula> children() const noexcept { return node_->children; }
  const Formula& child(std::size_t i) const { return node_->children.at(i); }
  std::size_t arity() const noexcept { return node_->children.size(); }
  bool is_leaf() const noexcept { return is_leaf_kind(node_->kind); }
  bool is_sym() const noexcept { return node_->kind == NodeKind::Sym; }

  std::size_t size() const noexcept { return node_->size; }
  std::size_t depth() const noexcept { return node_->depth; }

  /// Node-by-node identity: kind, label, child order.
  friend bool operator==(const Formula& a, const Formula& b);

  /// Same kind and label, ignoring children.
  bool same_head(const Formula& other) const noexcept {
    return kind() == other.kind() && label() == other.label() && arity() == other.arity();
  }

 private:
  struct Node {
    NodeKind kind;
    std::string label;
    std::vector<Formula> children;
    std::size_t size;
    std::size_t depth;
  };

  explicit Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  static Formula create(NodeKind kind, std::string label, std::vector<Formula> children);

  std::shared_ptr<const Node> node_;
};

/// Child-index route from the root. Empty means the root itself.
struct Path {
  std::vector<std::size_t> steps;

  bool is_root() const noexcept { return steps.empty(); }
  Path child(std::size_t index) const;

  friend bool operator==(const Path&, const Path&) = default;
  friend auto operator<=>(const Path&, const Path&) = default;
};

/// `[]` for the root, `[0,1,2]` otherwise.
std::string to_string(const Path& path);
Path parse_path(std::string_view text);

bool is_valid_path(const Formula& f, const Path& path) noexcept;
/// Throws InvalidPath.
const Formula& subtree_at(const Formula& f, const Path& path);
/// Returns a copy of `f` with the node at `path` replaced by `g`. Throws InvalidPath.
Formula replace_at(const Formula& f, const Path& path, Formula g);

/// All paths in pre-order (root, then children left to right).
std::vector<Path> all_paths(const Formula& f);

/// Names of every Sym leaf.
std::set<std::string> symbols_of(const Formula& f);
bool contains_symbol(const Formula& f, std::string_view name);

/// Canonical constructor syntax, no whitespace.
std::string print(const Formula& f);

/// Parses constructor syntax. Throws SyntaxError, ArityError, UnknownKind.
Formula parse(std::string_view text);

/// A template with its wildcard names. `?` and `?name` in the text become
/// pattern variables; anonymous holes are named `_h0`, `_h1`, ...
struct ParsedPattern {
  Formula tree;
  std::set<std::string> vars;
};

ParsedPattern parse_pattern(std::string_view text);

/// Like print, but leaves named in `vars` are written as `?name`.
std::string print_pattern(const Formula& f, const std::set<std::string>& vars);

/// Constructor helpers mirroring the textual syntax, for building trees in code.
namespace build {

Formula Sym(std::string name);
Formula Num(std::string literal);
Formula Num(long long value);

inline Formula op(NodeKind kind, std::vector<Formula> children) {
  return Formula::make(kind, std::move(children));
}

inline Formula Equal(Formula a, Formula b) { return op(NodeKind::Equal, {std::move(a), std::move(b)}); }
inline Formula Minus(Formula a, Formula b) { return op(NodeKind::Minus, {std::move(a), std::move(b)}); }
inline Formula Divide(Formula a, Formula b) { return op(NodeKind::Divide, {std::move(a), std::move(b)}); }
inline Formula Power(Formula a, Formula b) { return op(NodeKind::Power, {std::move(a), std::move(b)}); }
inline Formula Integral(Formula integrand, Formula var) {
  return op(NodeKind::Integral, {std::move(integrand), std::move(var)});
}
inline Formula DerivRatio(Formula y, Formula x) { return op(NodeKind::DerivRatio, {std::move(y), std::move(x)}); }
inline Formula Der(Formula a) { return op(NodeKind::Differential, {std::move(a)}); }
inline Formula Sqrt(Formula a) { return op(NodeKind::Sqrt, {std::move(a)}); }
inline Formula Sum(Formula a) { return op(NodeKind::Sum, {std::move(a)}); }
inline Formula Ln(Formula a) { return op(NodeKind::Ln, {std::move(a)}); }
inline Formula Exp(Formula a) { return op(NodeKind::Exp, {std::move(a)}); }
inline Formula Sin(Formula a) { return op(NodeKind::Sin, {std::move(a)}); }
inline Formula Cos(Formula a) { return op(NodeKind::Cos, {std::move(a)}); }

template <class... Fs>
Formula Plus(Fs... xs) {
  return op(NodeKind::Plus, {std::move(xs)...});
}

template <class... Fs>
Formula Times(Fs... xs) {
  return op(NodeKind::Times, {std::move(xs)...});
}

template <class... Fs>
Formula Func(std::string name, Fs... args) {
  return Formula::func(std::move(name), {std::move(args)...});
}

}  // namespace build

}  // namespace formderiv
